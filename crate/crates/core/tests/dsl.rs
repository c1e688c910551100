mod common;

use std::collections::BTreeSet;

use common::dot::check_dot;
use common::*;
use infradep::builtin::{Builtin, ModelParams};
use infradep::io::{export_dot, parse_guard, parse_model, serialize_model, DotOptions, ModelError};
use infradep::model::{CmpOp, Guard, Value};
use infradep::montecarlo::rng::SplitMix64;
use proptest::prelude::*;

fn shipped(b: Builtin) -> String {
    let path = format!("{}/../../models/{}.gsts", env!("CARGO_MANIFEST_DIR"), b.model_name());
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

#[test]
fn builtins_round_trip() {
    for b in Builtin::ALL {
        let m = b.build(&ModelParams::default()).unwrap();
        let text = serialize_model(&m);
        assert_eq!(parse_model(&text).unwrap(), m, "{b}");
        assert_eq!(serialize_model(&m), text, "{b}: serialization is not deterministic");
    }
}

#[test]
fn shipped_files_match_constructors() {
    for b in Builtin::ALL {
        let text = shipped(b);
        let m = b.build(&ModelParams::default()).unwrap();
        assert_eq!(parse_model(&text).unwrap(), m, "{b}");
        assert_eq!(serialize_model(&m), text, "{b}: shipped file is not canonical");
    }
}

#[test]
fn user_text_reserializes_idempotently() {
    let text = "# a user file\nmodel  m{param p=2.50; var x:{a,b} init a;\n var n : [ 0 .. 3 ] init 0;\n\
                timed t rate 3*p when n<3&&(x==a||!(n==1)) -> {x:=b; n := n+1;} tags(internal,attack);\n\
                immediate back prio 2 weight 1e-1 when x==b -> { x := a; };\n label done := n >= 3;}";
    let once = serialize_model(&parse_model(text).unwrap());
    let twice = serialize_model(&parse_model(&once).unwrap());
    assert_eq!(once, twice);
    assert!(once.contains("timed t rate 3.0 * p when n < 3 && (x == a || !(n == 1))"), "{once}");
}

#[test]
fn random_parameters_round_trip() {
    let mut rng = SplitMix64::new(11);
    for _ in 0..50 {
        let mut p = ModelParams::default();
        for name in ["lambda_e", "lambda_c", "mu_i", "mu_e"] {
            p.set(name, 10f64.powf(6.0 * rng.uniform() - 3.0)).unwrap();
        }
        for b in Builtin::ALL {
            let m = b.build(&p).unwrap();
            assert_eq!(parse_model(&serialize_model(&m)).unwrap(), m);
        }
    }
}

fn mutate(rng: &mut SplitMix64, text: &str) -> String {
    const PIECES: [&str; 16] = ["{", "}", ";", ":=", "->", "..", "(", ")", "&&", "||", "!", "1e", "0x1", "init", "timed", "\u{e9}"];
    let mut bytes = text.as_bytes().to_vec();
    let edits = 1 + (rng.next_u64() % 4) as usize;
    for _ in 0..edits {
        if bytes.is_empty() {
            break;
        }
        let at = (rng.next_u64() % bytes.len() as u64) as usize;
        match rng.next_u64() % 4 {
            0 => {
                bytes.remove(at);
            }
            1 => bytes[at] = (rng.next_u64() % 256) as u8,
            2 => {
                let piece = PIECES[(rng.next_u64() % PIECES.len() as u64) as usize];
                bytes.splice(at..at, piece.bytes());
            }
            _ => {
                let end = (at + 1 + (rng.next_u64() % 40) as usize).min(bytes.len());
                bytes.drain(at..end);
            }
        }
    }
    String::from_utf8_lossy(&bytes).into_owned()
}

/// Parsing is total: arbitrary input yields a model or spans inside the
/// input, and anything accepted obeys the round-trip law.
#[test]
fn byte_fuzz_never_panics() {
    let seeds: Vec<String> = Builtin::ALL.iter().map(|&b| shipped(b)).collect();
    let mut rng = SplitMix64::new(2024);
    let mut accepted = 0;
    for case in 0..10_000 {
        let text = if case % 3 == 0 {
            let len = (rng.next_u64() % 200) as usize;
            let bytes: Vec<u8> = (0..len).map(|_| (rng.next_u64() % 256) as u8).collect();
            String::from_utf8_lossy(&bytes).into_owned()
        } else {
            let base = &seeds[case % seeds.len()];
            mutate(&mut rng, base)
        };
        match parse_model(&text) {
            Ok(m) => {
                accepted += 1;
                let again = serialize_model(&m);
                assert_eq!(parse_model(&again).unwrap(), m, "case {case}");
            }
            Err(ModelError::Parse(errs)) => {
                assert!(!errs.is_empty());
                for e in errs {
                    assert!(e.span.line >= 1 && e.span.column >= 1, "case {case}: {e}");
                    assert!(e.span.offset + e.span.length <= text.len(), "case {case}: {e}");
                    assert!(text.is_char_boundary(e.span.offset), "case {case}: {e}");
                }
            }
            Err(ModelError::Invalid(issues)) => {
                for i in issues {
                    assert!(i.span.offset + i.span.length <= text.len(), "case {case}: {i}");
                }
            }
        }
    }
    assert!(accepted > 0, "mutations never produced a valid model");
}

#[test]
fn deep_nesting_is_an_error_not_a_crash() {
    let text = format!("model m {{ var x : {{a}} init a; label l := {}x == a{}; }}", "(".repeat(100_000), ")".repeat(100_000));
    assert!(matches!(parse_model(&text), Err(ModelError::Parse(_))));
}

fn guard_strategy() -> impl Strategy<Value = Guard> {
    let leaf = prop_oneof![
        Just(Guard::True),
        (prop::sample::select(vec!["x", "y"]), prop::sample::select(vec!["a", "b"])).prop_map(|(v, s)| Guard::eq(v, s)),
        (0..6usize, -3i64..4).prop_map(|(op, k)| {
            let op = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge][op];
            Guard::cmp("n", op, Value::Int(k))
        }),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|g| Guard::Not(Box::new(g))),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Guard::And),
            prop::collection::vec(inner, 2..4).prop_map(Guard::Or),
        ]
    })
}

proptest! {
    #[test]
    fn guards_print_and_parse_back(g in guard_strategy()) {
        let text = g.to_string();
        prop_assert_eq!(parse_guard(&text).unwrap(), g);
    }
}

fn label_names(attrs: &std::collections::BTreeMap<String, String>) -> BTreeSet<String> {
    let label = attrs.get("label").map(String::as_str).unwrap_or("");
    match label.split("\\n").last() {
        Some(l) if l.starts_with('[') => l.trim_matches(['[', ']']).split(", ").map(str::to_string).collect(),
        _ => BTreeSet::new(),
    }
}

#[test]
fn two_state_chain_dot() {
    let m = parse_model("model m { var x : {a,b} init a; timed t rate 1.0 when x==a -> {x:=b;}; timed u rate 2.0 when x==b -> {x:=a;}; }").unwrap();
    let b = build_model(&m);
    let g = check_dot(&export_dot(&b.graph, &b.system, DotOptions::default()).unwrap()).unwrap();
    assert!(g.directed);
    assert_eq!(g.nodes.len(), 2);
    assert_eq!(g.edges.len(), 2);
    assert_eq!(g.edges[0].2["label"], "t rate=1.0");
}

#[test]
fn builtin_dot_is_well_formed() {
    for b in Builtin::ALL {
        let x = build(b);
        for hide in [false, true] {
            let text = export_dot(&x.graph, &x.system, DotOptions { hide_vanishing: hide }).unwrap();
            let g = check_dot(&text).unwrap_or_else(|e| panic!("{b}: {e}"));
            let expected_nodes = if hide { x.ctmc.len() } else { x.graph.len() };
            assert_eq!(g.nodes.len(), expected_nodes, "{b}");
            for (src, dst, _) in &g.edges {
                assert!(g.nodes.contains_key(src) && g.nodes.contains_key(dst));
            }
            if !hide {
                assert_eq!(g.edges.len(), x.graph.edges.len(), "{b}");
                let dashed = g.nodes.values().filter(|a| a["style"] == "dashed").count();
                assert_eq!(dashed, x.graph.vanishing.iter().filter(|v| **v).count(), "{b}");
            }
        }
    }
}

#[test]
fn cascading_only_has_state2_to_state7_edge_at_lambda_e() {
    let x = build(Builtin::CascadingOnly);
    let g = check_dot(&export_dot(&x.graph, &x.system, DotOptions::default()).unwrap()).unwrap();
    let want = format!("rate={:?}", ModelParams::default().lambda_e);
    let hit = g.edges.iter().any(|(s, d, a)| {
        label_names(&g.nodes[s]).contains("state2") && label_names(&g.nodes[d]).contains("state7") && a["label"].ends_with(&want)
    });
    assert!(hit, "no state2 -> state7 edge with {want}");
}

#[test]
fn hide_vanishing_shows_exactly_the_tangible_states() {
    let x = build(Builtin::Accidental);
    assert!(x.graph.vanishing.iter().any(|v| *v));
    let text = export_dot(&x.graph, &x.system, DotOptions { hide_vanishing: true }).unwrap();
    assert!(!text.contains("dashed"));
    let g = check_dot(&text).unwrap();
    let ids: BTreeSet<String> = g.nodes.keys().cloned().collect();
    let want: BTreeSet<String> = x.ctmc.graph_index.iter().map(|i| format!("s{i}")).collect();
    assert_eq!(ids, want);
    assert_eq!(g.edges.len(), x.ctmc.rows.iter().map(Vec::len).sum::<usize>());
}

#[test]
fn dot_checker_rejects_malformed_input() {
    assert!(check_dot("digraph { a -> }").is_err());
    assert!(check_dot("digraph { a [label=\"x] }").is_err());
    assert!(check_dot("digraph g { a -> b [w=1]; } extra").is_err());
    assert!(check_dot("strict graph { a -- b; subgraph s { c } x = y }").is_ok());
}
