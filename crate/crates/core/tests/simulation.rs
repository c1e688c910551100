mod common;

use common::*;
use infradep::builtin::Builtin;
use infradep::model::{Assignment, Guard, Label, Model, RateExpr, System, Transition, VariableDecl};
use infradep::montecarlo::rng::SplitMix64;
use infradep::montecarlo::{
    estimate_occupancy, estimate_time_to, estimate_time_to_of, replay, simulate, simulate_replication, OccupancyOptions, SimOptions, TimeToOptions,
    DEFAULT_EVENT_CAP,
};
use infradep::solvers::{mean_time_to_absorption, steady_state, SolverOptions};

fn occupancy_opts(reps: usize, seed: u64) -> OccupancyOptions {
    OccupancyOptions {
        horizon: 2000.0,
        burn_in: Some(200.0),
        replications: reps,
        seed,
        event_cap: DEFAULT_EVENT_CAP,
    }
}

fn time_to_opts(reps: usize, seed: u64) -> TimeToOptions {
    TimeToOptions {
        replications: reps,
        seed,
        cap_time: 1e7,
        event_cap: DEFAULT_EVENT_CAP,
    }
}

fn with_lost_label(b: Builtin) -> Model {
    let mut m = b.build(&Default::default()).unwrap();
    m.labels.push(Label::new("lost", Guard::eq("elec", "e_lost")));
    m
}

#[test]
fn occupancy_of_state1_covers_steady_value() {
    let x = build(Builtin::Accidental);
    let exact = steady_state(&x.ctmc, &SolverOptions::default()).unwrap().mass(&x.ctmc.labels["state1"]);
    let est = estimate_occupancy(&x.system, "state1", &occupancy_opts(200, 1)).unwrap();
    assert!(est.covers_3sigma(exact), "{est:?} vs {exact}");
}

#[test]
fn time_to_blackout_covers_mtta() {
    let x = build_model(&with_lost_label(Builtin::Accidental));
    let target = x.ctmc.labels["lost"].clone();
    let exact = mean_time_to_absorption(&x.ctmc, "lost", &target, &SolverOptions::default()).unwrap().value;
    let est = estimate_time_to(&x.system, "lost", &time_to_opts(1000, 2)).unwrap();
    assert_eq!(est.censored, 0);
    assert!(est.covers_3sigma(exact), "{est:?} vs {exact}");
}

fn birth_chain() -> Model {
    let mut m = Model::new("birth");
    m.variables.push(VariableDecl::counter("n", 0, 2, 0));
    m.transitions.push(Transition::timed("b0", RateExpr::Literal(2.0), Guard::int("n", infradep::model::CmpOp::Eq, 0), vec![Assignment::inc("n")]));
    m.transitions.push(Transition::timed("b1", RateExpr::Literal(4.0), Guard::int("n", infradep::model::CmpOp::Eq, 1), vec![Assignment::inc("n")]));
    m.labels.push(Label::new("end", Guard::int("n", infradep::model::CmpOp::Eq, 2)));
    m
}

#[test]
fn birth_chain_time_to_end() {
    let sys = System::new(&birth_chain()).unwrap();
    let small = estimate_time_to(&sys, "end", &time_to_opts(100, 5)).unwrap();
    let large = estimate_time_to(&sys, "end", &time_to_opts(10_000, 5)).unwrap();
    assert!(large.covers_3sigma(0.75));
    assert!((large.value - 0.75).abs() < 0.02);
    assert!(large.ci_halfwidth < small.ci_halfwidth);
}

#[test]
fn unreachable_label_is_fully_censored() {
    let x = build(Builtin::CascadingOnly);
    let pred = x.system.predicate(&Guard::eq("info", "i_weakened")).unwrap();
    let opts = TimeToOptions { cap_time: 100.0, ..time_to_opts(50, 3) };
    let est = estimate_time_to_of(&x.system, "i_weakened", &pred, &opts).unwrap();
    assert_eq!(est.censored, 50);
    assert_eq!(est.value, 100.0);
}

#[test]
fn traces_replay_and_are_reproducible() {
    for b in Builtin::ALL {
        let x = build(b);
        let opts = SimOptions { horizon: 5000.0, seed: 11, event_cap: DEFAULT_EVENT_CAP };
        let t1 = simulate(&x.system, &opts).unwrap();
        let t2 = simulate(&x.system, &opts).unwrap();
        assert_eq!(t1.to_csv(&x.system), t2.to_csv(&x.system));
        assert_eq!(t1.to_jsonl(&x.system), t2.to_jsonl(&x.system));
        replay(&x.system, &t1).unwrap();
        assert!(t1.events.windows(2).all(|w| w[0].time <= w[1].time));
        let other = simulate(&x.system, &SimOptions { seed: 12, ..opts }).unwrap();
        assert_ne!(t1.to_csv(&x.system), other.to_csv(&x.system), "{b}");
    }
}

#[test]
fn immediates_share_the_timestamp_of_their_trigger() {
    let x = build(Builtin::Accidental);
    let t = simulate_replication(&x.system, 20_000.0, 4, 0, DEFAULT_EVENT_CAP).unwrap();
    let mut seen = 0;
    for w in t.events.windows(2) {
        if x.system.is_immediate(w[1].transition) {
            assert_eq!(w[0].time, w[1].time);
            assert!(!x.system.is_immediate(w[0].transition));
            seen += 1;
        }
    }
    assert!(seen > 0, "no immediate firing observed");
}

#[test]
fn corrupted_trace_fails_replay() {
    let x = build(Builtin::Accidental);
    let mut t = simulate(&x.system, &SimOptions { horizon: 5000.0, seed: 1, event_cap: DEFAULT_EVENT_CAP }).unwrap();
    assert!(t.events.len() > 2);
    t.events.swap(0, 1);
    assert!(replay(&x.system, &t).is_err());
}

#[test]
fn merge_is_independent_of_thread_count() {
    let x = build(Builtin::Accidental);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| estimate_occupancy(&x.system, "state1", &occupancy_opts(40, 8)).unwrap())
    };
    assert_eq!(run(1), run(4));
}

/// Three timed transitions racing from one state.
fn race_model(rates: [f64; 3]) -> Model {
    let mut m = Model::new("race");
    m.variables.push(VariableDecl::enumeration("s", &["start", "a", "b", "c"], "start"));
    for (r, dst) in rates.iter().zip(["a", "b", "c"]) {
        m.transitions.push(Transition::timed(&format!("to_{dst}"), RateExpr::Literal(*r), Guard::eq("s", "start"), vec![Assignment::set("s", dst)]));
    }
    m
}

#[test]
fn race_matches_total_rate_and_categorical_pick() {
    let rates = [0.5, 1.5, 3.0];
    let sys = System::new(&race_model(rates)).unwrap();
    let n = 20_000;
    let mut race = [0u64; 3];
    let mut race_time = 0.0;
    for r in 0..n {
        let t = simulate_replication(&sys, 1e9, 77, r, 10).unwrap();
        race[t.events[0].transition.0] += 1;
        race_time += t.events[0].time;
    }
    // Oracle: exponential with the total rate, then a categorical pick.
    let total: f64 = rates.iter().sum();
    let mut rng = SplitMix64::new(0xDEC0DE);
    let mut pick = [0u64; 3];
    let mut pick_time = 0.0;
    for _ in 0..n {
        pick_time += rng.exponential(total);
        let mut u = rng.uniform() * total;
        let mut k = 2;
        for (i, r) in rates.iter().enumerate() {
            if u <= *r {
                k = i;
                break;
            }
            u -= r;
        }
        pick[k] += 1;
    }
    // Two-sample chi-square, 2 degrees of freedom; 13.82 is the 0.999 quantile.
    let chi2: f64 = (0..3)
        .map(|i| {
            let (a, b) = (race[i] as f64, pick[i] as f64);
            (a - b).powi(2) / (a + b)
        })
        .sum();
    assert!(chi2 < 13.82, "chi2 = {chi2}, {race:?} vs {pick:?}");
    let (m1, m2) = (race_time / n as f64, pick_time / n as f64);
    // Both means estimate 1/total with standard error (1/total)/sqrt(n).
    let se = (1.0 / total) / (n as f64).sqrt();
    assert!((m1 - m2).abs() < 4.0 * se * 2f64.sqrt(), "{m1} vs {m2}");
}

#[test]
fn coverage_over_meta_seed_grid() {
    let x = build_model(&with_lost_label(Builtin::Accidental));
    let target = x.ctmc.labels["lost"].clone();
    let exact = mean_time_to_absorption(&x.ctmc, "lost", &target, &SolverOptions::default()).unwrap().value;
    let trials = 100;
    let covered = (0..trials)
        .filter(|&meta| estimate_time_to(&x.system, "lost", &time_to_opts(200, 1000 + meta)).unwrap().covers_3sigma(exact))
        .count();
    assert!(covered * 100 >= 99 * trials as usize, "{covered}/{trials}");
}
