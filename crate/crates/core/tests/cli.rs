//! CLI contract: exit codes, JSON schemas, and equality with library calls.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use infradep::builtin::{Builtin, ModelParams};
use infradep::checks::resolve_selector;
use infradep::cli::{EXIT_LIMIT, EXIT_NUMERIC, EXIT_OK, EXIT_PARSE, EXIT_USAGE, EXIT_VALIDATION};
use infradep::io::export_results_json;
use infradep::model::System;
use infradep::solvers::{label_probability, mean_time_to_absorption, steady_state, SolverOptions};
use infradep::statespace::{build_reachability_graph, eliminate_vanishing};
use serde_json::Value as Json;

fn manifest() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn fixture(name: &str) -> String {
    manifest().join("tests/fixtures").join(name).display().to_string()
}

fn infradep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infradep")).args(args).env_remove("INFRADEP_STATE_LIMIT").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_of(o: &Output) -> Json {
    assert_eq!(code(o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn schema(name: &str) -> jsonschema::Validator {
    let path: PathBuf = manifest().join("../../schemas").join(name);
    let s: Json = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    jsonschema::validator_for(&s).unwrap()
}

fn assert_valid(schema_name: &str, doc: &Json) {
    let v = schema(schema_name);
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{e} at {}", e.instance_path())).collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:?}");
}

#[test]
fn list_models_text_and_json() {
    let o = infradep(&["list-models"]);
    assert_eq!(code(&o), EXIT_OK);
    assert_eq!(stdout(&o).lines().count(), 4);
    let j = json_of(&infradep(&["list-models", "--format", "json"]));
    assert_eq!(j.as_array().unwrap().len(), 4);
    assert_valid("list-models.schema.json", &j);
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        vec!["list-models", "--bogus"],
        vec!["graph", "--model", "nosuch"],
        vec!["simulate", "--model", "accidental", "--occupancy", "state1", "--reps", "1"],
        vec!["solve", "--model", "accidental", "--measure", "transient"],
        vec!["solve", "--model", "accidental", "--measure", "steady", "--label-prob", "state99"],
        vec!["solve", "--model", "accidental", "--set", "lambda_zz=1", "--measure", "steady"],
        vec!["solve", "--model", "accidental", "--set", "mu_e=-1", "--measure", "steady"],
        vec![],
    ] {
        let o = infradep(&args);
        assert_eq!(code(&o), EXIT_USAGE, "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn help_exits_zero() {
    let o = infradep(&["--help"]);
    assert_eq!(code(&o), EXIT_OK);
    assert!(stdout(&o).contains("simulate"));
}

#[test]
fn parse_and_validation_errors() {
    let o = infradep(&["graph", "--model", &fixture("bad_syntax.gsts")]);
    assert_eq!(code(&o), EXIT_PARSE);
    assert!(String::from_utf8_lossy(&o.stderr).contains("UNEXPECTED_TOKEN"));
    let o = infradep(&["graph", "--model", &fixture("out_of_domain.gsts")]);
    assert_eq!(code(&o), EXIT_VALIDATION);
    assert!(String::from_utf8_lossy(&o.stderr).contains("OUT_OF_DOMAIN_UPDATE"));
    let o = infradep(&["validate", "--model", &fixture("out_of_domain.gsts"), "--format", "json"]);
    assert_eq!(code(&o), EXIT_VALIDATION);
    let j: Json = serde_json::from_slice(&o.stdout).unwrap();
    assert_valid("validate.schema.json", &j);
    assert_eq!(j["valid"], false);
    assert_eq!(j["issues"][0]["line"], 3);
}

#[test]
fn not_ergodic_exits_3() {
    let o = infradep(&["solve", "--model", &fixture("two_blackouts.gsts"), "--measure", "steady"]);
    assert_eq!(code(&o), EXIT_NUMERIC);
    assert!(String::from_utf8_lossy(&o.stderr).contains("NOT_ERGODIC"));
    let o = infradep(&["solve", "--model", "cascading-only", "--measure", "mtta", "--target", "info == i_weakened"]);
    assert_eq!(code(&o), EXIT_NUMERIC);
    assert!(String::from_utf8_lossy(&o.stderr).contains("UNREACHABLE_TARGET"));
}

#[test]
fn limits_exit_4() {
    let o = Command::new(env!("CARGO_BIN_EXE_infradep"))
        .args(["graph", "--model", "accidental", "--summary"])
        .env("INFRADEP_STATE_LIMIT", "10")
        .output()
        .unwrap();
    assert_eq!(code(&o), EXIT_LIMIT);
    assert!(String::from_utf8_lossy(&o.stderr).contains("STATE_LIMIT"));
    let o = infradep(&["simulate", "--model", "accidental", "--occupancy", "state1", "--reps", "2", "--event-cap", "3"]);
    assert_eq!(code(&o), EXIT_LIMIT);
    assert!(String::from_utf8_lossy(&o.stderr).contains("EVENT_CAP_EXCEEDED"));
}

#[test]
fn failed_claim_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("attack.gsts");
    let text = std::fs::read_to_string(manifest().join("../../models/attack.gsts")).unwrap();
    // Detection no longer copies the real electricity status.
    let mutant: String = text
        .lines()
        .map(|l| if l.contains("timed detect_") { l.replace(" app_elec := e_working;", "").replace(" app_elec := e_weakened;", "").replace(" app_elec := partial_e_outage;", "").replace(" app_elec := e_lost;", "") } else { l.to_string() })
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(&path, mutant).unwrap();
    let o = infradep(&["validate", "--model", path.to_str().unwrap(), "--claims"]);
    assert_eq!(code(&o), EXIT_VALIDATION, "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL resync-on-detection"));
}

#[test]
fn claims_pass_for_every_builtin() {
    for b in Builtin::ALL {
        let j = json_of(&infradep(&["validate", "--model", b.name(), "--claims", "--format", "json"]));
        assert_valid("validate.schema.json", &j);
        assert_eq!(j["claims"]["passed"], true, "{b}");
    }
}

#[test]
fn graph_output() {
    let o = infradep(&["graph", "--model", "cascading-only"]);
    assert_eq!(code(&o), EXIT_OK);
    let g = common::dot::check_dot(&stdout(&o)).unwrap();
    let x = common::build(Builtin::CascadingOnly);
    let state1 = x.system.label("state1").unwrap();
    let ids: Vec<String> = (0..x.graph.len()).filter(|&i| state1.holds(&x.graph.states[i])).map(|i| format!("s{i}")).collect();
    assert!(ids.iter().any(|id| g.edges.iter().any(|(_, d, _)| d == id)), "no edge into a state1 node");

    let j = json_of(&infradep(&["graph", "--model", "accidental", "--hide-vanishing", "--summary", "--format", "json"]));
    assert_valid("graph.schema.json", &j);
    let x = common::build(Builtin::Accidental);
    assert_eq!(j["states"], x.ctmc.len());
    assert!(j.get("dot").is_none());
    let j = json_of(&infradep(&["graph", "--model", "common-cause", "--format", "json"]));
    assert_valid("graph.schema.json", &j);
    assert!(common::dot::check_dot(j["dot"].as_str().unwrap()).is_ok());
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.dot");
    let o = infradep(&["graph", "--model", "attack", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), EXIT_OK);
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("digraph"));
}

#[test]
fn solve_equals_library() {
    let model = Builtin::Accidental.build(&ModelParams::default()).unwrap();
    let system = System::new(&model).unwrap();
    let ctmc = eliminate_vanishing(&build_reachability_graph(&system).unwrap(), &system).unwrap();
    let pred = resolve_selector(&system, "elec==e_lost").unwrap();
    let target: Vec<usize> = (0..ctmc.len()).filter(|&i| pred.holds(&ctmc.states[i])).collect();
    let lib = mean_time_to_absorption(&ctmc, "mtta elec==e_lost", &target, &SolverOptions::default()).unwrap();

    let o = infradep(&["solve", "--model", "accidental", "--measure", "mtta", "--target", "elec==e_lost", "--format", "json"]);
    let j = json_of(&o);
    assert_valid("results.schema.json", &j);
    assert_eq!(j[0]["value"].as_f64().unwrap().to_bits(), lib.value.to_bits());
    assert_eq!(stdout(&o), format!("{}\n", export_results_json(&[lib.clone()])));

    let text = stdout(&infradep(&["solve", "--model", "accidental", "--measure", "mtta", "--target", "elec==e_lost"]));
    let printed: f64 = text.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert_eq!(printed.to_bits(), lib.value.to_bits());
}

#[test]
fn steady_label_probability_and_overrides() {
    let j = json_of(&infradep(&["solve", "--model", "common-cause", "--measure", "steady", "--label-prob", "state8", "--format", "json"]));
    assert_valid("results.schema.json", &j);
    let v = j[0]["value"].as_f64().unwrap();
    assert!(v > 0.0 && v < 1.0);

    let mut params = ModelParams::default();
    params.set("lambda_cc", 0.01).unwrap();
    let x = common::build_with(Builtin::CommonCause, &params);
    let dist = steady_state(&x.ctmc, &SolverOptions::default()).unwrap();
    let lib = label_probability(&dist, "state8", x.ctmc.label("state8").unwrap());
    let j = json_of(&infradep(&[
        "solve", "--model", "common-cause", "--set", "lambda_cc=0.01", "--measure", "steady", "--label-prob", "state8", "--format", "json",
    ]));
    assert_eq!(j[0]["value"].as_f64().unwrap().to_bits(), lib.value.to_bits());
    assert_ne!(lib.value.to_bits(), v.to_bits());

    let j = json_of(&infradep(&["solve", "--model", "attack", "--measure", "transient", "--time", "5", "--format", "json"]));
    assert_valid("results.schema.json", &j);
    assert_eq!(j.as_array().unwrap().len(), 6);
}

#[test]
fn file_models_accept_parameter_overrides() {
    let path = manifest().join("../../models/accidental.gsts");
    let a = json_of(&infradep(&["solve", "--model", path.to_str().unwrap(), "--measure", "steady", "--label-prob", "state1", "--format", "json"]));
    let b = json_of(&infradep(&["solve", "--model", "accidental", "--measure", "steady", "--label-prob", "state1", "--format", "json"]));
    assert_eq!(a, b);
    let o = infradep(&["solve", "--model", path.to_str().unwrap(), "--set", "rho=0.5", "--measure", "steady"]);
    assert_eq!(code(&o), EXIT_USAGE, "rho is folded into the rate expression of a file model");
}

#[test]
fn simulate_is_deterministic_and_covers_exact_value() {
    let args = [
        "simulate", "--model", "accidental", "--occupancy", "state1", "--horizon", "2000", "--burn-in", "200", "--reps", "200", "--seed", "7", "--format",
        "json",
    ];
    let a = infradep(&args);
    let b = infradep(&args);
    assert_eq!(a.stdout, b.stdout);
    let est = json_of(&a);
    assert_valid("results.schema.json", &est);
    let exact = json_of(&infradep(&["solve", "--model", "accidental", "--measure", "steady", "--label-prob", "state1", "--format", "json"]));
    let (x, v) = (est[0]["value"].as_f64().unwrap(), exact[0]["value"].as_f64().unwrap());
    let se = est[0]["metadata"]["std_dev"].as_f64().unwrap() / 200f64.sqrt();
    assert!((x - v).abs() <= 3.0 * se, "{x} vs {v} (se {se})");
}

#[test]
fn trace_dir_gets_one_file_per_replication() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let d = dir.path().join(sub);
        let o = infradep(&[
            "simulate", "--model", "attack", "--time-to", "state8", "--horizon", "100", "--reps", "3", "--trace-dir", d.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), EXIT_OK);
        let mut names: Vec<_> = std::fs::read_dir(&d).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        names.sort();
        let bodies: Vec<String> = names.iter().map(|n| std::fs::read_to_string(d.join(n)).unwrap()).collect();
        (names, bodies, o.stdout)
    };
    let (names, bodies, out) = run("a");
    assert_eq!(names, vec!["rep-0.csv", "rep-1.csv", "rep-2.csv"]);
    assert!(bodies.iter().all(|b| b.starts_with("0,,attack=none")));
    assert_eq!(run("b"), (names, bodies, out));
}

#[test]
fn fmt_prints_canonical_text() {
    let shipped = std::fs::read_to_string(manifest().join("../../models/common_cause.gsts")).unwrap();
    assert_eq!(stdout(&infradep(&["fmt", "common-cause"])), shipped);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.gsts");
    std::fs::write(&path, "model m{var x:{a,b} init a; timed t rate 1 when x==a->{x:=b;};}").unwrap();
    assert_eq!(code(&infradep(&["fmt", path.to_str().unwrap(), "--in-place"])), EXIT_OK);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("  timed t rate 1.0 when x == a -> { x := b; };"), "{text}");
    assert_eq!(code(&infradep(&["fmt", &fixture("bad_syntax.gsts")])), EXIT_PARSE);
}

#[test]
fn every_exit_code_is_exercised() {
    // Each code in the table has a dedicated test above; this keeps the
    // table and the constants in step.
    let table = infradep::cli::exit_codes();
    assert_eq!(table.keys().copied().collect::<Vec<_>>(), vec![EXIT_OK, EXIT_VALIDATION, EXIT_PARSE, EXIT_NUMERIC, EXIT_LIMIT, EXIT_USAGE]);
}
