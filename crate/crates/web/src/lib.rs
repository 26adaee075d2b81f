//! Browser bindings. Every exported function returns a JSON string; the
//! `*_json` functions are the same operations for native callers and tests.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use mpgame::engine::{run_play, Horizon};
use mpgame::export::to_dot;
use mpgame::game::{estimate_limits, Owner};
use mpgame::machine::{parse_machine, run, validate, TwoSidedMachine};
use mpgame::minsky::{convert_minsky, parse_standard};
use mpgame::monitor::{summarize_outcome, Outcome};
use mpgame::num::{to_f64, Int, Q};
use mpgame::reduction::build_game;
use mpgame::strategy::{parse_strategy, RefereeParams};

/// Points per series in a simulation result.
const SAMPLES: u64 = 200;
/// Hard cap on rounds, to keep the page responsive.
const MAX_ROUNDS: u64 = 1_000_000;

fn machine(text: &str) -> Result<TwoSidedMachine, String> {
    // a machine without side declarations is read as a standard one
    if !text.lines().any(|l| l.trim_start().starts_with("left")) {
        let m = parse_standard(text).map_err(|e| e.to_string())?;
        return Ok(convert_minsky(&m).machine);
    }
    let m = parse_machine(text).map_err(|e| e.to_string())?;
    let v = validate(&m);
    if !v.is_empty() {
        return Err(v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\n"));
    }
    Ok(m)
}

fn frac(x: &Q) -> Value {
    json!({ "exact": x.to_string(), "approx": to_f64(x) })
}

pub fn compile_json(text: &str) -> Result<Value, String> {
    let m = machine(text)?;
    let out = build_game(&m).map_err(|e| e.to_string())?;
    let r = run(&m, 10_000).map_err(|e| e.to_string())?;
    Ok(json!({
        "dims": out.layout.k(),
        "names": out.layout.names(),
        "vertices": out.graph.vertex_count(),
        "edges": out.graph.edge_count(),
        "halts": r.halted,
        "steps_to_halt": r.steps_to_halt,
        "dot": to_dot(&out.graph, Some(&out.annotations)),
    }))
}

pub fn simulate_json(text: &str, p1: &str, p2: &str, halt_bound: u64, rounds: u64) -> Result<Value, String> {
    let m = machine(text)?;
    let out = build_game(&m).map_err(|e| e.to_string())?;
    let hb = Some(halt_bound);
    let mut a = parse_strategy(p1, Owner::P1, hb).map_err(|e| e.to_string())?;
    let mut b = parse_strategy(p2, Owner::P2, hb).map_err(|e| e.to_string())?;
    let rounds = rounds.clamp(1, MAX_ROUNDS);
    let rec = run_play(&out.graph, Some(&out.annotations), a.as_mut(), b.as_mut(), &Horizon::rounds(rounds)).map_err(|e| e.to_string())?;
    let played: u64 = rec.rounds().try_into().unwrap_or(rounds);
    // a lasso play is extended along its loop up to the requested horizon
    let mut prefix = rec.prefix.clone();
    if let Some(l) = &rec.lasso {
        if played < rounds {
            prefix.push_run(&out.graph, l.edge, Int::from(rounds - played)).map_err(|e| e.to_string())?;
        }
    }
    let total: u64 = prefix.len().try_into().unwrap_or(rounds);
    let step = (total / SAMPLES).max(1);
    let mut cps: Vec<Int> = (1..=total / step).map(|i| Int::from(i * step)).collect();
    if cps.last() != Some(prefix.len()) {
        cps.push(prefix.len().clone());
    }
    let est = estimate_limits(&out.graph, &prefix, &cps).map_err(|e| e.to_string())?;
    let series: Vec<Vec<f64>> = (0..out.layout.k()).map(|d| est.averages.iter().map(|row| to_f64(&row[d])).collect()).collect();
    let outcome = match summarize_outcome(&out, &rec, &out.condition).map_err(|e| e.to_string())? {
        Outcome::Lasso { limits, holds } => json!({ "kind": "lasso", "holds": holds, "limits": limits.inf().iter().map(frac).collect::<Vec<_>>() }),
        Outcome::Estimate { averages, holds } => json!({ "kind": "estimate", "holds": holds, "averages": averages.iter().map(frac).collect::<Vec<_>>() }),
    };
    let events: Vec<Value> = rec.events.iter().take(500).map(|e| json!({ "round": e.round.to_string(), "what": e.kind.to_string() })).collect();
    Ok(json!({
        "names": out.layout.names(),
        "rounds": cps.iter().map(|c| c.to_string().parse::<f64>().unwrap_or(f64::NAN)).collect::<Vec<_>>(),
        "series": series,
        "played": played,
        "blames": rec.blames(),
        "reached_final": rec.reached_final(),
        "outcome": outcome,
        "events": events,
    }))
}

pub fn constants_json(n: u64) -> Result<Value, String> {
    let p = RefereeParams::new(n).map_err(|e| e.to_string())?;
    Ok(json!({
        "n": n,
        "eps": frac(&p.eps),
        "delta": frac(&p.delta),
        "gamma_side": frac(&p.gamma_side),
        "gamma_counter": frac(&p.gamma_counter),
    }))
}

fn wrap(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => json!({ "ok": true, "value": v }).to_string(),
        Err(e) => json!({ "ok": false, "error": e }).to_string(),
    }
}

#[wasm_bindgen]
pub fn compile(text: &str) -> String {
    wrap(compile_json(text))
}

#[wasm_bindgen]
pub fn simulate(text: &str, p1: &str, p2: &str, halt_bound: u32, rounds: u32) -> String {
    wrap(simulate_json(text, p1, p2, u64::from(halt_bound), u64::from(rounds)))
}

#[wasm_bindgen]
pub fn constants(n: u32) -> String {
    wrap(constants_json(u64::from(n)))
}
