use serde_json::Value;

use mpgame_web::{compile, compile_json, constants, constants_json, simulate, simulate_json};

const HALT: &str = include_str!("../../core/fixtures/m_halt.tsm");
const LOOP: &str = include_str!("../../core/fixtures/m_loop.tsm");
const ADD: &str = include_str!("../../core/fixtures/standard/add.mm");

#[test]
fn constants_are_exact() {
    let c = constants_json(11).unwrap();
    assert_eq!(c["eps"]["exact"], "1/144");
    assert_eq!(c["delta"]["exact"], "72/839");
    assert_eq!(c["gamma_side"]["exact"], "1/7287");
    assert_eq!(c["gamma_counter"]["exact"], "1/220");
    let bad: Value = serde_json::from_str(&constants(10)).unwrap();
    assert_eq!(bad["ok"], false);
}

#[test]
fn compile_reports_layout() {
    let c = compile_json(HALT).unwrap();
    assert_eq!(c["dims"], 8);
    assert_eq!(c["steps_to_halt"], 10);
    assert!(c["dot"].as_str().unwrap().starts_with("digraph"));
    // standard machines are converted first
    let c = compile_json(ADD).unwrap();
    assert_eq!(c["dims"], 10);
    assert_eq!(c["halts"], true);
    let err: Value = serde_json::from_str(&compile("counters: 1\nleft q0\n")).unwrap();
    assert_eq!(err["ok"], false);
}

#[test]
fn simulation_series() {
    let s = simulate_json(HALT, "tau", "referee", 11, 1_000).unwrap();
    assert_eq!(s["outcome"]["kind"], "lasso");
    assert_eq!(s["outcome"]["holds"], false);
    assert_eq!(s["reached_final"], true);
    let series = s["series"].as_array().unwrap();
    assert_eq!(series.len(), 8);
    let rounds = s["rounds"].as_array().unwrap();
    assert_eq!(rounds.last().unwrap().as_f64(), Some(1_000.0));
    // Avg(x) drifts toward -1 along the final loop
    let x = series[6].as_array().unwrap();
    assert!(x.last().unwrap().as_f64().unwrap() < -0.9);

    let s = simulate_json(LOOP, "tau", "referee", 11, 10_000).unwrap();
    assert_eq!(s["outcome"]["kind"], "estimate");
    assert_eq!(s["blames"], 0);
    assert!(s["rounds"].as_array().unwrap().len() <= 201);

    let err: Value = serde_json::from_str(&simulate(LOOP, "tau", "nobody", 11, 100)).unwrap();
    assert_eq!(err["ok"], false);
}
