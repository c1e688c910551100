//! The four built-in interdependency models.
//!
//! Variables shared by the accidental-failure models:
//!
//! | variable | domain |
//! |----------|--------|
//! | `info`   | `i_working`, `passive_latent`, `active_latent`, `partial_i_outage`, `i_weakened` |
//! | `elec`   | `e_working`, `e_weakened`, `partial_e_outage`, `e_lost` |
//! | `n_cfg`  | `[0..K]`, accumulated untimely configuration changes |
//!
//! The attack model separates the real status of each infrastructure from
//! the status reported to the operator (`real_*` / `app_*`).
//!
//! Every rate is a model parameter; the defaults are desk-scale values
//! chosen for exploration, not measurements.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::{Assignment, CmpOp, Guard, Label, Model, Parameter, RateExpr, Tag, Transition, VariableDecl};

const INFO: [&str; 5] = ["i_working", "passive_latent", "active_latent", "partial_i_outage", "i_weakened"];
const ELEC: [&str; 4] = ["e_working", "e_weakened", "partial_e_outage", "e_lost"];
const ATTACK: [&str; 5] = ["none", "passive_dec", "active_dec", "perceptible", "detected"];
const REAL_INFO: [&str; 2] = ["i_working", "partial_i_outage"];

#[derive(Debug, Clone, PartialEq, Error)]
#[error("INVALID_PARAM: {0}")]
pub struct ParamError(pub String);

/// Rates (per unit time) and structural parameters of the built-in models.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelParams {
    /// masked i-failure leading to a passive latent error
    pub lambda_mp: f64,
    /// masked i-failure leading to an active latent error
    pub lambda_ma: f64,
    /// signalled i-failure
    pub lambda_s: f64,
    /// e-failure
    pub lambda_e: f64,
    /// accumulation of a second e-failure (partial outage to blackout)
    pub lambda_e2: f64,
    /// undue configuration change by an active latent error
    pub lambda_c: f64,
    /// constraint of a partial i-outage on a working grid
    pub lambda_k: f64,
    pub mu_i: f64,
    pub mu_e: f64,
    pub mu_c: f64,
    /// slow-down of e-restoration while the information side is degraded, in (0, 1]
    pub rho: f64,
    /// number of configuration changes the grid absorbs before blackout
    pub k: i64,
    pub lambda_cc: f64,
    /// share of common-cause failures ending in blackout, in [0, 1]
    pub p8: f64,
    pub lambda_ap: f64,
    pub lambda_aa: f64,
    pub lambda_pa: f64,
    pub lambda_oc: f64,
    pub lambda_ic: f64,
    pub lambda_d: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            lambda_mp: 0.01,
            lambda_ma: 0.01,
            lambda_s: 0.01,
            lambda_e: 0.02,
            lambda_e2: 0.05,
            lambda_c: 0.1,
            lambda_k: 0.1,
            mu_i: 1.0,
            mu_e: 2.0,
            mu_c: 2.0,
            rho: 0.25,
            k: 2,
            lambda_cc: 0.001,
            p8: 0.5,
            lambda_ap: 0.005,
            lambda_aa: 0.005,
            lambda_pa: 0.005,
            lambda_oc: 0.1,
            lambda_ic: 0.1,
            lambda_d: 0.5,
        }
    }
}

impl ModelParams {
    pub const NAMES: [&'static str; 20] = [
        "lambda_mp", "lambda_ma", "lambda_s", "lambda_e", "lambda_e2", "lambda_c", "lambda_k", "mu_i", "mu_e", "mu_c", "rho", "K", "lambda_cc",
        "p8", "lambda_ap", "lambda_aa", "lambda_pa", "lambda_oc", "lambda_ic", "lambda_d",
    ];

    fn rates(&self) -> [(&'static str, f64); 17] {
        [
            ("lambda_mp", self.lambda_mp),
            ("lambda_ma", self.lambda_ma),
            ("lambda_s", self.lambda_s),
            ("lambda_e", self.lambda_e),
            ("lambda_e2", self.lambda_e2),
            ("lambda_c", self.lambda_c),
            ("lambda_k", self.lambda_k),
            ("mu_i", self.mu_i),
            ("mu_e", self.mu_e),
            ("mu_c", self.mu_c),
            ("lambda_cc", self.lambda_cc),
            ("lambda_ap", self.lambda_ap),
            ("lambda_aa", self.lambda_aa),
            ("lambda_pa", self.lambda_pa),
            ("lambda_oc", self.lambda_oc),
            ("lambda_ic", self.lambda_ic),
            ("lambda_d", self.lambda_d),
        ]
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        for (name, v) in self.rates() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ParamError(format!("rate {name} = {v} must be positive")));
            }
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(ParamError(format!("rho = {} must lie in (0, 1]", self.rho)));
        }
        if !(0.0..=1.0).contains(&self.p8) {
            return Err(ParamError(format!("p8 = {} must lie in [0, 1]", self.p8)));
        }
        if self.k < 1 {
            return Err(ParamError(format!("K = {} must be at least 1", self.k)));
        }
        Ok(())
    }

    /// Overrides one parameter by name (`K` for the threshold).
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), ParamError> {
        let slot = match name {
            "lambda_mp" => &mut self.lambda_mp,
            "lambda_ma" => &mut self.lambda_ma,
            "lambda_s" => &mut self.lambda_s,
            "lambda_e" => &mut self.lambda_e,
            "lambda_e2" => &mut self.lambda_e2,
            "lambda_c" => &mut self.lambda_c,
            "lambda_k" => &mut self.lambda_k,
            "mu_i" => &mut self.mu_i,
            "mu_e" => &mut self.mu_e,
            "mu_c" => &mut self.mu_c,
            "rho" => &mut self.rho,
            "lambda_cc" => &mut self.lambda_cc,
            "p8" => &mut self.p8,
            "lambda_ap" => &mut self.lambda_ap,
            "lambda_aa" => &mut self.lambda_aa,
            "lambda_pa" => &mut self.lambda_pa,
            "lambda_oc" => &mut self.lambda_oc,
            "lambda_ic" => &mut self.lambda_ic,
            "lambda_d" => &mut self.lambda_d,
            "K" | "k" => {
                if value.fract() != 0.0 || !value.is_finite() {
                    return Err(ParamError(format!("K = {value} must be an integer")));
                }
                self.k = value as i64;
                return Ok(());
            }
            other => return Err(ParamError(format!("unknown parameter `{other}`"))),
        };
        *slot = value;
        Ok(())
    }
}

/// The built-in models by CLI name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Builtin {
    Accidental,
    CascadingOnly,
    CommonCause,
    Attack,
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [Builtin::Accidental, Builtin::CascadingOnly, Builtin::CommonCause, Builtin::Attack];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Accidental => "accidental",
            Builtin::CascadingOnly => "cascading-only",
            Builtin::CommonCause => "common-cause",
            Builtin::Attack => "attack",
        }
    }

    /// Model identifier used in DSL text and file names.
    pub fn model_name(self) -> &'static str {
        match self {
            Builtin::Accidental => "accidental",
            Builtin::CascadingOnly => "cascading_only",
            Builtin::CommonCause => "common_cause",
            Builtin::Attack => "attack",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Builtin::Accidental => "accidental i-failures with cascading and escalating failures in both directions",
            Builtin::CascadingOnly => "constraints of the information infrastructure on the electricity infrastructure only",
            Builtin::CommonCause => "accidental model plus common-cause failures hitting both infrastructures at once",
            Builtin::Attack => "deceptive and perceptible attacks with real versus apparent infrastructure status",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Builtin::ALL.into_iter().find(|b| b.name() == name || b.model_name() == name)
    }

    pub fn build(self, params: &ModelParams) -> Result<Model, ParamError> {
        match self {
            Builtin::Accidental => accidental_model(params),
            Builtin::CascadingOnly => cascading_only_model(params),
            Builtin::CommonCause => common_cause_model(params),
            Builtin::Attack => attack_model(params),
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn param(name: &str, value: f64) -> Parameter {
    Parameter {
        name: name.to_string(),
        value,
    }
}

fn rate(name: &str) -> RateExpr {
    RateExpr::param(name)
}

fn all(parts: Vec<Guard>) -> Guard {
    Guard::and(parts)
}

fn n_below_k(k: i64) -> Guard {
    Guard::int("n_cfg", CmpOp::Lt, k)
}

fn n_at_k(k: i64) -> Guard {
    Guard::int("n_cfg", CmpOp::Eq, k)
}

fn set(var: &str, value: &str) -> Assignment {
    Assignment::set(var, value)
}

/// Shared body of the accidental-failure models. `two_way` adds the
/// constraints of the electricity infrastructure on the information one.
fn accidental_family(name: &str, p: &ModelParams, two_way: bool) -> Result<Model, ParamError> {
    p.validate()?;
    let k = p.k;
    let mut m = Model::new(name);
    m.parameters = vec![
        param("lambda_mp", p.lambda_mp),
        param("lambda_ma", p.lambda_ma),
        param("lambda_s", p.lambda_s),
        param("lambda_e", p.lambda_e),
        param("lambda_e2", p.lambda_e2),
        param("lambda_c", p.lambda_c),
        param("lambda_k", p.lambda_k),
        param("mu_i", p.mu_i),
        param("mu_e", p.mu_e),
        param("mu_c", p.mu_c),
    ];
    m.variables = vec![
        VariableDecl::enumeration("info", &INFO, "i_working"),
        VariableDecl::enumeration("elec", &ELEC, "e_working"),
        VariableDecl::counter("n_cfg", 0, k, 0),
    ];

    let signalled_from: &[&str] = if two_way {
        &["i_working", "passive_latent", "active_latent", "i_weakened"]
    } else {
        &["i_working", "passive_latent", "active_latent"]
    };
    let normal_failure_from: &[&str] = if two_way { &["i_working", "i_weakened"] } else { &["i_working"] };
    let outage = ["partial_e_outage", "e_lost"];

    let mut ts = vec![
        Transition::timed("masked_passive", rate("lambda_mp"), Guard::eq("info", "i_working"), vec![set("info", "passive_latent")]).tagged(&[Tag::Internal]),
        Transition::timed("masked_active", rate("lambda_ma"), Guard::is_in("info", &["i_working", "passive_latent"]), vec![set("info", "active_latent")])
            .tagged(&[Tag::Internal]),
        Transition::timed("signalled", rate("lambda_s"), Guard::is_in("info", signalled_from), vec![set("info", "partial_i_outage")]).tagged(&[Tag::Internal]),
        Transition::timed("i_restoration", rate("mu_i"), Guard::eq("info", "partial_i_outage"), vec![set("info", "i_working")]).tagged(&[Tag::Restoration]),
        Transition::timed(
            "e_failure_normal",
            rate("lambda_e"),
            all(vec![Guard::is_in("info", normal_failure_from), Guard::eq("elec", "e_working")]),
            vec![set("elec", "partial_e_outage")],
        )
        .tagged(&[Tag::Internal]),
        Transition::timed(
            "e_failure_escal_sev",
            rate("lambda_e"),
            all(vec![Guard::is_in("info", &["passive_latent", "active_latent"]), Guard::eq("elec", "e_working")]),
            vec![set("elec", "e_lost")],
        )
        .tagged(&[Tag::Escalating]),
        Transition::timed(
            "e_failure_escal_rest",
            rate("lambda_e"),
            all(vec![Guard::eq("info", "partial_i_outage"), Guard::eq("elec", "e_working")]),
            vec![set("elec", "partial_e_outage")],
        )
        .tagged(&[Tag::Escalating]),
        Transition::timed("e_fail_accumulate", rate("lambda_e2"), Guard::eq("elec", "partial_e_outage"), vec![set("elec", "e_lost")]).tagged(&[Tag::Internal]),
        Transition::timed(
            "cfg_change_first",
            rate("lambda_c"),
            all(vec![Guard::eq("info", "active_latent"), Guard::eq("elec", "e_working"), n_below_k(k)]),
            vec![set("elec", "e_weakened"), Assignment::inc("n_cfg")],
        )
        .tagged(&[Tag::Cascading]),
        Transition::timed(
            "cfg_change_more",
            rate("lambda_c"),
            all(vec![Guard::eq("info", "active_latent"), Guard::eq("elec", "e_weakened"), n_below_k(k)]),
            vec![Assignment::inc("n_cfg")],
        )
        .tagged(&[Tag::Cascading]),
        Transition::timed(
            "cfg_overflow",
            rate("lambda_c"),
            all(vec![Guard::eq("info", "active_latent"), Guard::eq("elec", "e_weakened"), n_at_k(k)]),
            vec![set("elec", "e_lost")],
        )
        .tagged(&[Tag::Cascading]),
        Transition::timed(
            "outage_constraint",
            rate("lambda_k"),
            all(vec![Guard::eq("info", "partial_i_outage"), Guard::eq("elec", "e_working")]),
            vec![set("elec", "e_weakened")],
        )
        .tagged(&[Tag::Cascading]),
        Transition::timed(
            "cfg_restoration",
            rate("mu_c"),
            all(vec![Guard::eq("info", "i_working"), Guard::eq("elec", "e_weakened")]),
            vec![set("elec", "e_working"), Assignment::set_int("n_cfg", 0)],
        )
        .tagged(&[Tag::Restoration]),
        Transition::timed(
            "e_restoration_fast",
            rate("mu_e"),
            all(vec![Guard::eq("info", "i_working"), Guard::is_in("elec", &outage)]),
            vec![set("elec", "e_working")],
        )
        .tagged(&[Tag::Restoration]),
        Transition::timed(
            "e_restoration_slow",
            RateExpr::scaled(p.rho, "mu_e"),
            all(vec![Guard::is_in("info", &["passive_latent", "active_latent", "partial_i_outage"]), Guard::is_in("elec", &outage)]),
            vec![set("elec", "e_working")],
        )
        .tagged(&[Tag::Restoration, Tag::Escalating]),
    ];
    if two_way {
        ts.push(
            Transition::immediate(
                "i_weaken",
                1,
                1.0,
                all(vec![Guard::eq("info", "i_working"), Guard::is_in("elec", &outage)]),
                vec![set("info", "i_weakened")],
            )
            .tagged(&[Tag::Cascading]),
        );
        ts.push(
            Transition::immediate(
                "i_unweaken",
                1,
                1.0,
                all(vec![Guard::eq("info", "i_weakened"), Guard::is_in("elec", &["e_working", "e_weakened"])]),
                vec![set("info", "i_working")],
            )
            .tagged(&[Tag::Restoration]),
        );
    }
    m.transitions = ts;

    let both = |info: &str, elec: &str| all(vec![Guard::eq("info", info), Guard::eq("elec", elec)]);
    m.labels = vec![
        Label::new("state1", both("i_working", "e_working")),
        Label::new("state2", all(vec![Guard::is_in("info", &["passive_latent", "active_latent"]), Guard::eq("elec", "e_working")])),
        Label::new("state3", both("active_latent", "e_weakened")),
        Label::new("state4", both("partial_i_outage", "e_weakened")),
        if two_way {
            Label::new("state5", both("i_weakened", "partial_e_outage"))
        } else {
            Label::new("state5", both("i_working", "partial_e_outage"))
        },
        Label::new("state6", both("partial_i_outage", "partial_e_outage")),
        if two_way {
            Label::new("state7", both("i_weakened", "e_lost"))
        } else {
            Label::new(
                "state7",
                all(vec![Guard::is_in("info", &["i_working", "passive_latent", "active_latent"]), Guard::eq("elec", "e_lost")]),
            )
        },
        Label::new("state8", both("partial_i_outage", "e_lost")),
    ];
    Ok(m)
}

/// Accidental failures with constraints in both directions: cascading and
/// escalating failures, the weakening of the information side by e-failures,
/// and accumulation of e-failures.
pub fn accidental_model(params: &ModelParams) -> Result<Model, ParamError> {
    accidental_family("accidental", params, true)
}

/// Only the constraints of the information infrastructure on the
/// electricity infrastructure: no `i_weakened` dynamics.
pub fn cascading_only_model(params: &ModelParams) -> Result<Model, ParamError> {
    accidental_family("cascading_only", params, false)
}

/// The accidental model plus common-cause failures that move any state not
/// already in `state6`/`state8` directly into one of them. A `p8` of exactly
/// 0 or 1 drops the corresponding zero-rate transition.
pub fn common_cause_model(params: &ModelParams) -> Result<Model, ParamError> {
    let mut m = accidental_family("common_cause", params, true)?;
    m.parameters.push(param("lambda_cc", params.lambda_cc));
    let escalated = Guard::or(vec![
        m.label("state6").unwrap().predicate.clone(),
        m.label("state8").unwrap().predicate.clone(),
    ]);
    let guard = Guard::not(escalated);
    if params.p8 < 1.0 {
        m.transitions.push(
            Transition::timed(
                "cc_to_6",
                RateExpr::scaled(1.0 - params.p8, "lambda_cc"),
                guard.clone(),
                vec![set("info", "partial_i_outage"), set("elec", "partial_e_outage")],
            )
            .tagged(&[Tag::CommonCause]),
        );
    }
    if params.p8 > 0.0 {
        m.transitions.push(
            Transition::timed(
                "cc_to_8",
                RateExpr::scaled(params.p8, "lambda_cc"),
                guard,
                vec![set("info", "partial_i_outage"), set("elec", "e_lost")],
            )
            .tagged(&[Tag::CommonCause]),
        );
    }
    Ok(m)
}

/// Malicious attacks on the information infrastructure. Deceptive attacks
/// freeze the propagation of real electricity status to the apparent one;
/// detection re-synchronizes them.
pub fn attack_model(params: &ModelParams) -> Result<Model, ParamError> {
    let p = params;
    p.validate()?;
    let k = p.k;
    let mut m = Model::new("attack");
    m.parameters = vec![
        param("lambda_ap", p.lambda_ap),
        param("lambda_aa", p.lambda_aa),
        param("lambda_pa", p.lambda_pa),
        param("lambda_oc", p.lambda_oc),
        param("lambda_ic", p.lambda_ic),
        param("lambda_d", p.lambda_d),
        param("lambda_e", p.lambda_e),
        param("lambda_e2", p.lambda_e2),
        param("mu_i", p.mu_i),
        param("mu_e", p.mu_e),
        param("mu_c", p.mu_c),
    ];
    m.variables = vec![
        VariableDecl::enumeration("attack", &ATTACK, "none"),
        VariableDecl::enumeration("real_info", &REAL_INFO, "i_working"),
        VariableDecl::enumeration("real_elec", &ELEC, "e_working"),
        VariableDecl::enumeration("app_info", &REAL_INFO, "i_working"),
        VariableDecl::enumeration("app_elec", &ELEC, "e_working"),
        VariableDecl::counter("n_cfg", 0, k, 0),
    ];
    let deceptive = || Guard::is_in("attack", &["passive_dec", "active_dec"]);
    let open = || Guard::is_in("attack", &["none", "perceptible", "detected"]);
    let outage = ["partial_e_outage", "e_lost"];

    let mut ts = vec![
        Transition::timed(
            "passive_attack",
            rate("lambda_ap"),
            Guard::eq("attack", "none"),
            vec![set("attack", "passive_dec"), set("real_info", "partial_i_outage"), set("app_elec", "partial_e_outage")],
        )
        .tagged(&[Tag::Attack]),
        Transition::timed(
            "operator_cfg",
            rate("lambda_oc"),
            all(vec![Guard::eq("attack", "passive_dec"), Guard::is_in("real_elec", &["e_working", "e_weakened"]), n_below_k(k)]),
            vec![set("real_elec", "e_weakened"), set("app_elec", "e_weakened"), Assignment::inc("n_cfg")],
        )
        .tagged(&[Tag::Attack, Tag::Cascading]),
        Transition::timed(
            "operator_overflow",
            rate("lambda_oc"),
            all(vec![Guard::eq("attack", "passive_dec"), Guard::eq("real_elec", "e_weakened"), n_at_k(k)]),
            vec![set("real_elec", "e_lost"), set("app_elec", "partial_e_outage")],
        )
        .tagged(&[Tag::Attack, Tag::Cascading]),
        Transition::timed(
            "active_attack",
            rate("lambda_aa"),
            Guard::eq("attack", "none"),
            vec![set("attack", "active_dec"), set("real_info", "partial_i_outage")],
        )
        .tagged(&[Tag::Attack]),
        Transition::timed(
            "ii_cfg",
            rate("lambda_ic"),
            all(vec![Guard::eq("attack", "active_dec"), Guard::is_in("real_elec", &["e_working", "e_weakened"]), n_below_k(k)]),
            vec![set("real_elec", "e_weakened"), Assignment::inc("n_cfg")],
        )
        .tagged(&[Tag::Attack, Tag::Cascading]),
        Transition::timed(
            "ii_overflow",
            rate("lambda_ic"),
            all(vec![Guard::eq("attack", "active_dec"), Guard::eq("real_elec", "e_weakened"), n_at_k(k)]),
            vec![set("real_elec", "e_lost"), set("app_elec", "partial_e_outage")],
        )
        .tagged(&[Tag::Attack, Tag::Cascading]),
    ];
    for value in ELEC {
        ts.push(
            Transition::timed(
                &format!("detect_{value}"),
                rate("lambda_d"),
                all(vec![deceptive(), Guard::eq("real_elec", value)]),
                vec![set("attack", "detected"), set("app_info", "partial_i_outage"), set("app_elec", value)],
            )
            .tagged(&[Tag::Attack]),
        );
    }
    ts.extend([
        Transition::timed(
            "perceptible_attack",
            rate("lambda_pa"),
            Guard::eq("attack", "none"),
            vec![set("attack", "perceptible"), set("real_info", "partial_i_outage"), set("app_info", "partial_i_outage")],
        )
        .tagged(&[Tag::Attack]),
        Transition::timed(
            "e_failure",
            rate("lambda_e"),
            all(vec![Guard::eq("real_elec", "e_working"), open()]),
            vec![set("real_elec", "partial_e_outage"), set("app_elec", "partial_e_outage")],
        )
        .tagged(&[Tag::Internal]),
        Transition::timed(
            "e_failure_deceived",
            rate("lambda_e"),
            all(vec![Guard::eq("real_elec", "e_working"), deceptive()]),
            vec![set("real_elec", "partial_e_outage")],
        )
        .tagged(&[Tag::Internal, Tag::Attack]),
        Transition::timed(
            "e_fail_accumulate",
            rate("lambda_e2"),
            all(vec![Guard::eq("real_elec", "partial_e_outage"), open()]),
            vec![set("real_elec", "e_lost"), set("app_elec", "e_lost")],
        )
        .tagged(&[Tag::Internal]),
        Transition::timed(
            "e_fail_accumulate_deceived",
            rate("lambda_e2"),
            all(vec![Guard::eq("real_elec", "partial_e_outage"), deceptive()]),
            vec![set("real_elec", "e_lost")],
        )
        .tagged(&[Tag::Internal, Tag::Attack]),
        Transition::timed(
            "i_restoration",
            rate("mu_i"),
            all(vec![Guard::is_in("attack", &["detected", "perceptible"]), Guard::eq("real_info", "partial_i_outage")]),
            vec![set("attack", "none"), set("real_info", "i_working"), set("app_info", "i_working")],
        )
        .tagged(&[Tag::Restoration]),
        Transition::timed(
            "cfg_restoration",
            rate("mu_c"),
            all(vec![Guard::eq("attack", "none"), Guard::eq("real_info", "i_working"), Guard::eq("real_elec", "e_weakened")]),
            vec![set("real_elec", "e_working"), set("app_elec", "e_working"), Assignment::set_int("n_cfg", 0)],
        )
        .tagged(&[Tag::Restoration]),
        Transition::timed(
            "e_restoration_fast",
            rate("mu_e"),
            all(vec![Guard::is_in("real_elec", &outage), open(), Guard::eq("real_info", "i_working")]),
            vec![set("real_elec", "e_working"), set("app_elec", "e_working")],
        )
        .tagged(&[Tag::Restoration]),
        Transition::timed(
            "e_restoration_slow",
            RateExpr::scaled(p.rho, "mu_e"),
            all(vec![Guard::is_in("real_elec", &outage), open(), Guard::eq("real_info", "partial_i_outage")]),
            vec![set("real_elec", "e_working"), set("app_elec", "e_working")],
        )
        .tagged(&[Tag::Restoration, Tag::Escalating]),
    ]);
    m.transitions = ts;

    let mismatch = |real: &str, app: &str, values: &[&str]| {
        Guard::or(values.iter().map(|v| all(vec![Guard::eq(real, v), Guard::ne(app, v)])).collect())
    };
    m.labels = vec![
        Label::new(
            "state1",
            all(vec![
                Guard::eq("attack", "none"),
                Guard::eq("real_info", "i_working"),
                Guard::eq("real_elec", "e_working"),
                Guard::eq("app_info", "i_working"),
                Guard::eq("app_elec", "e_working"),
            ]),
        ),
        Label::new("state2", Guard::eq("attack", "passive_dec")),
        Label::new("state3", Guard::eq("attack", "active_dec")),
        Label::new("state4", Guard::eq("attack", "detected")),
        Label::new(
            "state8",
            all(vec![Guard::eq("real_elec", "e_lost"), Guard::eq("app_elec", "partial_e_outage"), deceptive()]),
        ),
        Label::new(
            "deceived",
            Guard::or(vec![mismatch("real_info", "app_info", &REAL_INFO), mismatch("real_elec", "app_elec", &ELEC)]),
        ),
    ];
    Ok(m)
}
