//! Command-line front end. [`run`] parses arguments, executes one command
//! and returns the process exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0    | success |
//! | 1    | model validation failed, or a claim suite failed |
//! | 2    | model text did not parse |
//! | 3    | numerical failure (not ergodic, no convergence, unreachable target) |
//! | 4    | a limit was hit (state cap, event cap) |
//! | 64   | usage error |
//!
//! Numbers are printed as the shortest decimal that reads back to the same
//! `f64`, so CLI output equals library output exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use crate::builtin::{Builtin, ModelParams};
use crate::checks::{claims_for, resolve_selector, run_claims, CheckError, ClaimReport};
use crate::io::{export_dot, export_results_json, parse_model_with_warnings, serialize_model, DotOptions, ModelError, SpannedIssue};
use crate::model::{validate_model, Model, Predicate, Severity, System, ValidationIssue};
use crate::montecarlo::{
    estimate_occupancy_of, estimate_time_to_of, simulate_replication, OccupancyOptions, SimError, TimeToOptions, DEFAULT_EVENT_CAP,
};
use crate::solvers::{label_probability, mean_time_to_absorption, steady_state, transient, Distribution, MeasureResult, SolverError, SolverOptions};
use crate::statespace::{
    build_reachability_graph_with, eliminate_vanishing, label_sets, BuildOptions, Ctmc, ReachabilityGraph, StateSpaceError, DEFAULT_STATE_LIMIT,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_LIMIT: i32 = 4;
pub const EXIT_USAGE: i32 = 64;

/// Overrides the reachability state cap.
pub const STATE_LIMIT_ENV: &str = "INFRADEP_STATE_LIMIT";

#[derive(Debug, Parser)]
#[command(name = "infradep", version, about = "Interdependency failure models: state graphs, exact measures, simulation")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the main output to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Built-in model name or path to a `.gsts` file.
    #[arg(long, value_name = "NAME|PATH")]
    pub model: String,
    /// Parameter override `name=value`; repeatable.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Measure {
    Steady,
    Transient,
    Mtta,
    LabelProb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the built-in models.
    ListModels,
    /// Export the state graph as DOT, or summarize it.
    Graph {
        #[command(flatten)]
        model: ModelArgs,
        /// Show the reduced chain over tangible states only.
        #[arg(long)]
        hide_vanishing: bool,
        /// Print state, edge and per-label counts instead of DOT.
        #[arg(long)]
        summary: bool,
    },
    /// Compute exact measures on the reduced chain.
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        /// Measure to compute; repeatable.
        #[arg(long, value_enum, required = true)]
        measure: Vec<Measure>,
        /// Time point for transient measures.
        #[arg(long)]
        time: Option<f64>,
        /// Target label or guard for `mtta`.
        #[arg(long)]
        target: Option<String>,
        /// Label or guard whose probability is reported; repeatable.
        /// Without it, `steady` and `transient` report every label.
        #[arg(long = "label-prob", value_name = "LABEL")]
        label_prob: Vec<String>,
        /// Accept an MTTA target that is hit with probability below one.
        #[arg(long)]
        allow_defective: bool,
    },
    /// Estimate measures by replicated simulation.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Label or guard whose time-average occupancy is estimated; repeatable.
        #[arg(long, value_name = "LABEL")]
        occupancy: Vec<String>,
        /// Label or guard whose first hitting time is estimated; repeatable.
        #[arg(long = "time-to", value_name = "LABEL")]
        time_to: Vec<String>,
        /// Simulated time per replication; also the censoring time for `--time-to`.
        #[arg(long, default_value_t = 1000.0)]
        horizon: f64,
        /// Start of the occupancy window; defaults to a tenth of the horizon.
        #[arg(long)]
        burn_in: Option<f64>,
        /// Number of replications (at least 2).
        #[arg(long, default_value_t = 100)]
        reps: usize,
        /// Master seed; replication streams are derived from it.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Maximum events per replication.
        #[arg(long, default_value_t = DEFAULT_EVENT_CAP)]
        event_cap: usize,
        /// Write one trace file per replication into this directory.
        #[arg(long, value_name = "DIR")]
        trace_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = TraceFormat::Csv)]
        trace_format: TraceFormat,
    },
    /// Validate a model and optionally run its claim suite.
    Validate {
        #[command(flatten)]
        model: ModelArgs,
        /// Run the qualitative claim suite of the model.
        #[arg(long)]
        claims: bool,
    },
    /// Print a model in canonical form.
    Fmt {
        /// Built-in model name or path to a `.gsts` file.
        source: String,
        /// Rewrite the file instead of printing.
        #[arg(long)]
        in_place: bool,
    },
}

/// A failed command: exit code plus the message for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
    /// Model diagnostics behind a parse or validation failure.
    pub issues: Vec<Json>,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
            issues: Vec::new(),
        }
    }

    fn new(code: i32, message: impl std::fmt::Display) -> Failure {
        Failure {
            code,
            message: message.to_string(),
            issues: Vec::new(),
        }
    }
}

impl From<StateSpaceError> for Failure {
    fn from(e: StateSpaceError) -> Self {
        let code = match e {
            StateSpaceError::StateLimit { .. } => EXIT_LIMIT,
            StateSpaceError::ImmediateCycle { .. } | StateSpaceError::Fire(_) => EXIT_VALIDATION,
        };
        Failure::new(code, e)
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        let code = match e {
            SolverError::InvalidArg(_) => EXIT_USAGE,
            _ => EXIT_NUMERIC,
        };
        Failure::new(code, e)
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let code = match e {
            SimError::EventCapExceeded { .. } => EXIT_LIMIT,
            SimError::UnknownLabel(_) | SimError::InvalidArg(_) => EXIT_USAGE,
            SimError::ImmediateCycle { .. } | SimError::Fire(_) => EXIT_VALIDATION,
        };
        Failure::new(code, e)
    }
}

impl From<CheckError> for Failure {
    fn from(e: CheckError) -> Self {
        Failure::usage(e.to_string())
    }
}

type Outcome = Result<(String, i32), Failure>;

/// Runs the CLI on `args` (program name first). Main output goes to
/// `stdout` unless `--out` is given; diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, stderr) {
        Ok((text, code)) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => code,
                Err(msg) => {
                    let _ = writeln!(stderr, "error: {msg}");
                    EXIT_USAGE
                }
            }
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn load_reporting(args: &ModelArgs, stderr: &mut dyn Write) -> Result<Loaded, Failure> {
    let loaded = load(args)?;
    for w in &loaded.warnings {
        let _ = writeln!(stderr, "{}: warning {}: {}", args.model, w["code"].as_str().unwrap_or(""), w["message"].as_str().unwrap_or(""));
    }
    Ok(loaded)
}

fn execute(cli: &Cli, stderr: &mut dyn Write) -> Outcome {
    match &cli.command {
        Command::ListModels => Ok((list_models(cli.format), EXIT_OK)),
        Command::Graph { model, hide_vanishing, summary } => {
            let loaded = load_reporting(model, stderr)?;
            graph(cli.format, &loaded, *hide_vanishing, *summary)
        }
        Command::Solve {
            model,
            measure,
            time,
            target,
            label_prob,
            allow_defective,
        } => {
            let loaded = load_reporting(model, stderr)?;
            let req = SolveRequest {
                measures: measure,
                time: *time,
                target: target.as_deref(),
                labels: label_prob,
                allow_defective: *allow_defective,
            };
            let results = solve(&loaded.model, &req)?;
            Ok((results_output(cli.format, &results), EXIT_OK))
        }
        Command::Simulate {
            model,
            occupancy,
            time_to,
            horizon,
            burn_in,
            reps,
            seed,
            event_cap,
            trace_dir,
            trace_format,
        } => {
            let loaded = load_reporting(model, stderr)?;
            let req = SimulateRequest {
                occupancy,
                time_to,
                horizon: *horizon,
                burn_in: *burn_in,
                reps: *reps,
                seed: *seed,
                event_cap: *event_cap,
                trace_dir: trace_dir.as_deref(),
                trace_format: *trace_format,
            };
            let results = simulate(&loaded.model, &req)?;
            Ok((results_output(cli.format, &results), EXIT_OK))
        }
        Command::Validate { model, claims } => validate(cli.format, model, *claims),
        Command::Fmt { source, in_place } => fmt_model(source, *in_place),
    }
}

fn list_models(format: Format) -> String {
    match format {
        Format::Json => {
            let items: Vec<Json> = Builtin::ALL
                .iter()
                .map(|b| json!({"name": b.name(), "model": b.model_name(), "description": b.description()}))
                .collect();
            pretty(&Json::Array(items))
        }
        Format::Text => {
            let mut out = String::new();
            for b in Builtin::ALL {
                let _ = writeln!(out, "{:<16}{}", b.name(), b.description());
            }
            out
        }
    }
}

fn pretty(v: &Json) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

/// A model ready to analyse, with where it came from.
pub struct Loaded {
    pub model: Model,
    pub builtin: Option<Builtin>,
    /// Validation warnings as JSON issue objects.
    pub warnings: Vec<Json>,
}

fn parse_override(text: &str) -> Result<(String, f64), Failure> {
    let (name, value) = text.split_once('=').ok_or_else(|| Failure::usage(format!("--set expects NAME=VALUE, got `{text}`")))?;
    let value: f64 = value.trim().parse().map_err(|_| Failure::usage(format!("--set {name}: `{value}` is not a number")))?;
    Ok((name.trim().to_string(), value))
}

fn model_error(path: &Path, e: ModelError) -> Failure {
    let (code, lines, issues): (i32, Vec<String>, Vec<Json>) = match e {
        ModelError::Parse(es) => (
            EXIT_PARSE,
            es.iter().map(|e| format!("{}:{e}", path.display())).collect(),
            es.iter()
                .map(|e| json!({"code": e.code.as_str(), "severity": "error", "message": e.message, "line": e.span.line, "column": e.span.column}))
                .collect(),
        ),
        ModelError::Invalid(es) => (
            EXIT_VALIDATION,
            es.iter().map(|e| format!("{}:{e}", path.display())).collect(),
            es.iter().map(|e| issue_json(&e.issue, Some(e))).collect(),
        ),
    };
    Failure {
        issues,
        ..Failure::new(code, lines.join("\n"))
    }
}

fn issue_failure(issues: &[ValidationIssue]) -> Failure {
    let errors: Vec<&ValidationIssue> = issues.iter().filter(|i| i.severity == Severity::Error).collect();
    let lines: Vec<String> = errors.iter().map(|i| format!("{}: {}", i.code, i.message)).collect();
    Failure {
        issues: errors.iter().map(|i| issue_json(i, None)).collect(),
        ..Failure::new(EXIT_VALIDATION, lines.join("\n"))
    }
}

/// Resolves `--model` and applies `--set`. Built-in models are rebuilt
/// from their constructors so structural parameters (`K`, `rho`, `p8`)
/// take effect; file models have their `param` values replaced.
pub fn load(args: &ModelArgs) -> Result<Loaded, Failure> {
    let overrides = args.set.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>, _>>()?;
    if let Some(b) = Builtin::from_name(&args.model) {
        let mut params = ModelParams::default();
        for (name, value) in &overrides {
            params.set(name, *value).map_err(|e| Failure::usage(e.to_string()))?;
        }
        let model = b.build(&params).map_err(|e| Failure::usage(e.to_string()))?;
        let warnings = validate_model(&model).issues.iter().map(|i| issue_json(i, None)).collect();
        return Ok(Loaded {
            model,
            builtin: Some(b),
            warnings,
        });
    }
    let path = Path::new(&args.model);
    if !path.is_file() {
        let names: Vec<&str> = Builtin::ALL.iter().map(|b| b.name()).collect();
        return Err(Failure::usage(format!("`{}` is neither a built-in model ({}) nor a file", args.model, names.join(", "))));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let (mut model, warnings) = parse_model_with_warnings(&text).map_err(|e| model_error(path, e))?;
    let warnings = warnings.iter().map(|w| issue_json(&w.issue, Some(w))).collect();
    if !overrides.is_empty() {
        for (name, value) in &overrides {
            let slot = model
                .parameters
                .iter_mut()
                .find(|p| &p.name == name)
                .ok_or_else(|| Failure::usage(format!("model `{}` has no parameter `{name}`", model.name)))?;
            slot.value = *value;
        }
        let report = validate_model(&model);
        if report.errors().next().is_some() {
            return Err(issue_failure(&report.issues));
        }
    }
    let builtin = Builtin::from_name(&model.name);
    Ok(Loaded { model, builtin, warnings })
}

/// Reachability options, honouring [`STATE_LIMIT_ENV`].
pub fn build_options() -> Result<BuildOptions, Failure> {
    match std::env::var(STATE_LIMIT_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(BuildOptions { state_limit: n }),
            _ => Err(Failure::usage(format!("{STATE_LIMIT_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(BuildOptions {
            state_limit: DEFAULT_STATE_LIMIT,
        }),
    }
}

fn system_of(model: &Model) -> Result<System, Failure> {
    System::new(model).map_err(|r| issue_failure(&r.issues))
}

fn build(model: &Model) -> Result<(System, ReachabilityGraph), Failure> {
    let system = system_of(model)?;
    let graph = build_reachability_graph_with(&system, build_options()?)?;
    Ok((system, graph))
}

fn graph(format: Format, loaded: &Loaded, hide_vanishing: bool, summary: bool) -> Outcome {
    let (system, g) = build(&loaded.model)?;
    let mut fields = serde_json::Map::new();
    fields.insert("model".into(), json!(loaded.model.name));
    fields.insert("hide_vanishing".into(), json!(hide_vanishing));
    if hide_vanishing {
        let ctmc = eliminate_vanishing(&g, &system)?;
        let labels: serde_json::Map<String, Json> = ctmc.labels.iter().map(|(k, v)| (k.clone(), json!(v.len()))).collect();
        fields.insert("states".into(), json!(ctmc.len()));
        fields.insert("tangible".into(), json!(ctmc.len()));
        fields.insert("vanishing".into(), json!(0));
        fields.insert("edges".into(), json!(ctmc.rows.iter().map(Vec::len).sum::<usize>()));
        fields.insert("labels".into(), Json::Object(labels));
    } else {
        let labels: serde_json::Map<String, Json> = label_sets(&g, &system).into_iter().map(|(k, v)| (k, json!(v.len()))).collect();
        fields.insert("states".into(), json!(g.len()));
        fields.insert("tangible".into(), json!(g.tangible_count()));
        fields.insert("vanishing".into(), json!(g.len() - g.tangible_count()));
        fields.insert("edges".into(), json!(g.edges.len()));
        fields.insert("labels".into(), Json::Object(labels));
    }
    let dot = if summary { None } else { Some(export_dot(&g, &system, DotOptions { hide_vanishing })?) };
    let text = match format {
        Format::Json => {
            if let Some(d) = dot {
                fields.insert("dot".into(), json!(d));
            }
            pretty(&Json::Object(fields))
        }
        Format::Text => match dot {
            Some(d) => d,
            None => {
                let mut out = String::new();
                for key in ["model", "states", "tangible", "vanishing", "edges"] {
                    let v = &fields[key];
                    let _ = writeln!(out, "{key:<10}{}", v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string()));
                }
                for (k, v) in fields["labels"].as_object().expect("labels object") {
                    let _ = writeln!(out, "label     {k} {v}");
                }
                out
            }
        },
    };
    Ok((text, EXIT_OK))
}

/// Arguments of the `solve` command.
pub struct SolveRequest<'a> {
    pub measures: &'a [Measure],
    pub time: Option<f64>,
    pub target: Option<&'a str>,
    pub labels: &'a [String],
    pub allow_defective: bool,
}

fn selected(ctmc: &Ctmc, pred: &Predicate) -> Vec<usize> {
    (0..ctmc.len()).filter(|&i| pred.holds(&ctmc.states[i])).collect()
}

/// Runs the requested exact measures. Results come in request order.
pub fn solve(model: &Model, req: &SolveRequest) -> Result<Vec<MeasureResult>, Failure> {
    let (system, g) = build(model)?;
    let ctmc = eliminate_vanishing(&g, &system)?;
    let opts = SolverOptions {
        allow_defective: req.allow_defective,
        ..SolverOptions::default()
    };
    let all_labels: Vec<String> = ctmc.labels.keys().cloned().collect();
    let mut results = Vec::new();
    let mut steady: Option<Distribution> = None;
    for &m in req.measures {
        let dist = match m {
            Measure::Mtta => {
                let target = req.target.ok_or_else(|| Failure::usage("--measure mtta needs --target"))?;
                let pred = resolve_selector(&system, target)?;
                results.push(mean_time_to_absorption(&ctmc, &format!("mtta {target}"), &selected(&ctmc, &pred), &opts)?);
                continue;
            }
            Measure::Transient => {
                let t = req.time.ok_or_else(|| Failure::usage("--measure transient needs --time"))?;
                transient(&ctmc, t, &opts)?
            }
            Measure::LabelProb if req.time.is_some() => transient(&ctmc, req.time.unwrap_or_default(), &opts)?,
            Measure::Steady | Measure::LabelProb => match &steady {
                Some(d) => d.clone(),
                None => {
                    let d = steady_state(&ctmc, &opts)?;
                    steady = Some(d.clone());
                    d
                }
            },
        };
        let labels = if !req.labels.is_empty() {
            req.labels
        } else if m == Measure::LabelProb {
            return Err(Failure::usage("--measure label-prob needs --label-prob LABEL"));
        } else {
            &all_labels
        };
        for name in labels {
            let pred = resolve_selector(&system, name)?;
            results.push(label_probability(&dist, name, &selected(&ctmc, &pred)));
        }
    }
    Ok(results)
}

/// Arguments of the `simulate` command.
pub struct SimulateRequest<'a> {
    pub occupancy: &'a [String],
    pub time_to: &'a [String],
    pub horizon: f64,
    pub burn_in: Option<f64>,
    pub reps: usize,
    pub seed: u64,
    pub event_cap: usize,
    pub trace_dir: Option<&'a Path>,
    pub trace_format: TraceFormat,
}

/// Runs the requested estimators, occupancy first, and writes traces.
pub fn simulate(model: &Model, req: &SimulateRequest) -> Result<Vec<MeasureResult>, Failure> {
    if req.reps < 2 {
        return Err(Failure::usage(format!("--reps must be at least 2, got {}", req.reps)));
    }
    if req.occupancy.is_empty() && req.time_to.is_empty() && req.trace_dir.is_none() {
        return Err(Failure::usage("nothing to do: give --occupancy, --time-to or --trace-dir"));
    }
    let system = system_of(model)?;
    let resolve = |s: &String| resolve_selector(&system, s).map(|p| (s.clone(), p));
    let occupancy = req.occupancy.iter().map(resolve).collect::<Result<Vec<_>, CheckError>>()?;
    let time_to = req.time_to.iter().map(resolve).collect::<Result<Vec<_>, CheckError>>()?;
    let mut results = Vec::new();
    let occ_opts = OccupancyOptions {
        horizon: req.horizon,
        burn_in: req.burn_in,
        replications: req.reps,
        seed: req.seed,
        event_cap: req.event_cap,
    };
    for (name, pred) in &occupancy {
        results.push(estimate_occupancy_of(&system, name, pred, &occ_opts)?.to_measure());
    }
    let tt_opts = TimeToOptions {
        replications: req.reps,
        seed: req.seed,
        cap_time: req.horizon,
        event_cap: req.event_cap,
    };
    for (name, pred) in &time_to {
        results.push(estimate_time_to_of(&system, name, pred, &tt_opts)?.to_measure());
    }
    if let Some(dir) = req.trace_dir {
        std::fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("cannot create {}: {e}", dir.display())))?;
        let width = (req.reps - 1).to_string().len();
        for r in 0..req.reps {
            let trace = simulate_replication(&system, req.horizon, req.seed, r as u64, req.event_cap)?;
            let (body, ext) = match req.trace_format {
                TraceFormat::Csv => (trace.to_csv(&system), "csv"),
                TraceFormat::Jsonl => (trace.to_jsonl(&system), "jsonl"),
            };
            let path = dir.join(format!("rep-{r:0width$}.{ext}"));
            std::fs::write(&path, body).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
        }
    }
    Ok(results)
}

fn results_output(format: Format, results: &[MeasureResult]) -> String {
    match format {
        Format::Json => {
            let mut s = export_results_json(results);
            s.push('\n');
            s
        }
        Format::Text => {
            let mut out = String::new();
            for r in results {
                let ci = r.ci_halfwidth.map_or_else(|| "-".to_string(), |h| format!("±{h:?}"));
                let _ = writeln!(out, "{:<24} {:<24?} {:<10} {ci}", r.name, r.value, r.method.as_str());
            }
            out
        }
    }
}

fn issue_json(issue: &ValidationIssue, span: Option<&SpannedIssue>) -> Json {
    let severity = match issue.severity {
        Severity::Error => "error",
        Severity::Warning => "warning",
    };
    json!({
        "code": issue.code.as_str(),
        "severity": severity,
        "message": issue.message,
        "line": span.map(|s| s.span.line),
        "column": span.map(|s| s.span.column),
    })
}

fn validate(format: Format, args: &ModelArgs, claims: bool) -> Outcome {
    let loaded = match load(args) {
        Ok(l) => l,
        Err(f) if f.code == EXIT_VALIDATION => {
            let text = match format {
                Format::Json => pretty(&json!({"model": args.model, "valid": false, "issues": f.issues, "claims": null})),
                Format::Text => format!("{}: invalid\n{}\n", args.model, f.message),
            };
            return Ok((text, EXIT_VALIDATION));
        }
        Err(f) => return Err(f),
    };
    let report = if claims {
        let b = loaded.builtin.ok_or_else(|| Failure::usage(format!("no claim suite for model `{}`", loaded.model.name)))?;
        let (system, g) = build(&loaded.model)?;
        Some(run_claims(b.name(), &g, &system, &claims_for(b)))
    } else {
        None
    };
    let code = if report.as_ref().is_some_and(|r| !r.passed) { EXIT_VALIDATION } else { EXIT_OK };
    let text = match format {
        Format::Json => pretty(&json!({
            "model": loaded.model.name,
            "valid": true,
            "issues": loaded.warnings,
            "claims": report,
        })),
        Format::Text => {
            let mut out = format!("{}: valid\n", loaded.model.name);
            for w in &loaded.warnings {
                let _ = writeln!(out, "warning {}: {}", w["code"].as_str().unwrap_or(""), w["message"].as_str().unwrap_or(""));
            }
            if let Some(r) = &report {
                out.push_str(&claims_text(r));
            }
            out
        }
    };
    Ok((text, code))
}

fn claims_text(r: &ClaimReport) -> String {
    let mut out = String::new();
    for c in &r.claims {
        let status = if c.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{status} {}: {}", c.id, c.description);
        if let Some(e) = &c.error {
            let _ = writeln!(out, "     {e}");
        }
        if !c.passed {
            if let Some(w) = &c.witness {
                for step in w {
                    let _ = writeln!(out, "     {} {}", step.via.as_deref().unwrap_or("start"), step.state);
                }
            }
            for o in &c.offenders {
                let _ = writeln!(out, "     offender {o}");
            }
        }
    }
    let passed = r.claims.iter().filter(|c| c.passed).count();
    let _ = writeln!(out, "{passed}/{} claims passed", r.claims.len());
    out
}

fn fmt_model(source: &str, in_place: bool) -> Outcome {
    if let Some(b) = Builtin::from_name(source) {
        if in_place {
            return Err(Failure::usage("--in-place needs a file"));
        }
        let m = b.build(&ModelParams::default()).map_err(|e| Failure::usage(e.to_string()))?;
        return Ok((serialize_model(&m), EXIT_OK));
    }
    let path = Path::new(source);
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {source}: {e}")))?;
    let (model, _) = parse_model_with_warnings(&text).map_err(|e| model_error(path, e))?;
    let canonical = serialize_model(&model);
    if in_place {
        std::fs::write(path, &canonical).map_err(|e| Failure::usage(format!("cannot write {source}: {e}")))?;
        return Ok((String::new(), EXIT_OK));
    }
    Ok((canonical, EXIT_OK))
}

/// Exit code for each failure class, for documentation and tests.
pub fn exit_codes() -> BTreeMap<i32, &'static str> {
    BTreeMap::from([
        (EXIT_OK, "success"),
        (EXIT_VALIDATION, "validation failed or a claim failed"),
        (EXIT_PARSE, "model text did not parse"),
        (EXIT_NUMERIC, "numerical failure"),
        (EXIT_LIMIT, "state or event limit reached"),
        (EXIT_USAGE, "usage error"),
    ])
}
