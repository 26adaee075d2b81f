//! Play trace files.
//!
//! One line per record, in round order:
//!
//! ```text
//! trace dims=8 p1=tau p2=referee(N=11)
//! seg 0 3              # edge 0 taken 3 times
//! chk 2 0 2 -2 2 2 -2 0 0
//! evt 4 sim-start i=1 | 0 3 -3 3 3 -3 0 0
//! lasso 61 66          # edge 61 repeated forever from round 66
//! end lasso 66
//! ```
//!
//! `seg`, `lasso` and `end` lines carry the play; `chk` (totals at rounds
//! 1, 2, 4, ...) and `evt` (gadget boundaries) lines are derived and are
//! checked against the replayed play when the trace is read back.

use std::fmt::{self, Write as _};

use num_traits::{One, Zero};

use crate::engine::{record_from_prefix, Event, EventKind, Lasso, PlayRecord, StopReason};
use crate::game::{EdgeId, GameError, GameGraph, PlayPrefix};
use crate::num::Int;
use crate::reduction::{Annotations, StepOp};

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = |s: &Option<String>| s.as_ref().map(|s| format!(" at {s}")).unwrap_or_default();
        match self {
            EventKind::ResetVisit { index } => write!(f, "reset i={index}"),
            EventKind::SimStart { reset_index } => write!(f, "sim-start i={reset_index}"),
            EventKind::StepEnter { state, op, entry } => {
                let op = match op {
                    StepOp::Nop => "nop".to_string(),
                    StepOp::Inc(j) => format!("inc c{j}"),
                    StepOp::Dec(j) => format!("dec c{j}"),
                };
                write!(f, "{}{op}{}", if *entry { "entry " } else { "step " }, at(state))
            }
            EventKind::Declared { counter, zero } => write!(f, "declare c{counter}{}", if *zero { "=0" } else { ">0" }),
            EventKind::Blame { kind, state } => write!(f, "{kind}{}", at(state)),
            EventKind::BlameExit { kind, loops } => write!(f, "exit {kind} loops={loops}"),
            EventKind::ReachedFinal => f.write_str("final"),
        }
    }
}

fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::Horizon => "horizon",
        StopReason::MaxResets => "max-resets",
        StopReason::MaxRuns => "max-runs",
        StopReason::Lasso => "lasso",
    }
}

fn join(totals: &[Int]) -> String {
    totals.iter().map(Int::to_string).collect::<Vec<_>>().join(" ")
}

pub fn write_trace(g: &GameGraph, rec: &PlayRecord, p1: &str, p2: &str) -> String {
    let mut s = format!("trace dims={} p1={} p2={}\n", g.dims(), p1.replace(' ', "_"), p2.replace(' ', "_"));
    let mut totals = vec![Int::zero(); g.dims()];
    let mut rounds = Int::zero();
    let mut next_chk = Int::one();
    let mut events = rec.events.iter().peekable();
    let emit_events = |s: &mut String, events: &mut std::iter::Peekable<std::slice::Iter<'_, Event>>, upto: &Int| {
        while let Some(e) = events.next_if(|e| &e.round <= upto) {
            let _ = writeln!(s, "evt {} {} | {}", e.round, e.kind, join(&e.totals));
        }
    };
    emit_events(&mut s, &mut events, &rounds);
    for run in rec.prefix.runs() {
        let e = g.edge(run.edge);
        let _ = writeln!(s, "seg {} {}", run.edge.0, run.count);
        let end = &rounds + &run.count;
        while next_chk <= end {
            let j = &next_chk - &rounds;
            let at: Vec<Int> = totals.iter().zip(&e.weights.0).map(|(t, w)| t + &j * Int::from(*w)).collect();
            let _ = writeln!(s, "chk {} {}", next_chk, join(&at));
            next_chk *= 2;
        }
        for (t, w) in totals.iter_mut().zip(&e.weights.0) {
            *t += &run.count * Int::from(*w);
        }
        rounds = end;
        emit_events(&mut s, &mut events, &rounds);
    }
    if let Some(l) = &rec.lasso {
        let _ = writeln!(s, "lasso {} {}", l.edge.0, l.from_round);
    }
    let _ = writeln!(s, "end {} {}", stop_name(rec.stop), rounds);
    s
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: recorded {what} does not match the replayed play")]
    Mismatch { line: usize, what: &'static str },
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Reads a trace back into a play record on `g`.
pub fn read_trace(g: &GameGraph, ann: Option<&Annotations>, text: &str) -> Result<PlayRecord, TraceError> {
    let syntax = |line: usize, msg: &str| TraceError::Syntax { line, msg: msg.to_string() };
    let int = |line: usize, w: &str| w.parse::<Int>().map_err(|_| syntax(line, "expected an integer"));
    let mut prefix = PlayPrefix::new(g.initial(), g.dims());
    let mut lasso = None;
    let mut stop = None;
    let mut checks: Vec<(usize, Int, Vec<Int>)> = Vec::new();
    let mut evts: Vec<(usize, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        let mut w = body.split_whitespace();
        match w.next() {
            None | Some("trace") => {}
            Some("seg") => {
                let (Some(e), Some(c), None) = (w.next(), w.next(), w.next()) else { return Err(syntax(line, "expected `seg EDGE COUNT`")) };
                let e: usize = e.parse().map_err(|_| syntax(line, "bad edge id"))?;
                prefix.push_run(g, EdgeId(e), int(line, c)?)?;
            }
            Some("chk") => {
                let r = int(line, w.next().ok_or_else(|| syntax(line, "missing round"))?)?;
                let t = w.map(|x| int(line, x)).collect::<Result<Vec<_>, _>>()?;
                if t.len() != g.dims() {
                    return Err(syntax(line, "checkpoint has the wrong number of totals"));
                }
                checks.push((line, r, t));
            }
            Some("evt") => evts.push((line, body.to_string())),
            Some("lasso") => {
                let (Some(e), Some(r)) = (w.next(), w.next()) else { return Err(syntax(line, "expected `lasso EDGE ROUND`")) };
                let e: usize = e.parse().map_err(|_| syntax(line, "bad edge id"))?;
                let edge = g.try_edge(EdgeId(e))?;
                if !edge.is_self_loop() {
                    return Err(GameError::RepeatOfNonLoop(e).into());
                }
                if edge.src != prefix.end() || &int(line, r)? != prefix.len() {
                    return Err(TraceError::Mismatch { line, what: "lasso position" });
                }
                lasso = Some(Lasso { edge: EdgeId(e), vertex: edge.src, from_round: prefix.len().clone() });
            }
            Some("end") => {
                stop = Some(match w.next() {
                    Some("horizon") => StopReason::Horizon,
                    Some("max-resets") => StopReason::MaxResets,
                    Some("max-runs") => StopReason::MaxRuns,
                    Some("lasso") => StopReason::Lasso,
                    _ => return Err(syntax(line, "unknown stop reason")),
                });
                if let Some(r) = w.next() {
                    if &int(line, r)? != prefix.len() {
                        return Err(TraceError::Mismatch { line, what: "round count" });
                    }
                }
            }
            Some(other) => return Err(syntax(line, &format!("unknown record {other:?}"))),
        }
    }
    let stop = stop.unwrap_or(if lasso.is_some() { StopReason::Lasso } else { StopReason::Horizon });
    if !checks.is_empty() {
        let rounds: Vec<Int> = checks.iter().map(|(_, r, _)| r.clone()).collect();
        let est_line = checks[0].0;
        let got = crate::game::estimate_limits(g, &prefix, &rounds).map_err(|_| TraceError::Mismatch { line: est_line, what: "checkpoint" })?;
        for ((line, r, t), avgs) in checks.iter().zip(&got.averages) {
            let expect: Vec<_> = t.iter().map(|x| crate::num::avg(x, r)).collect();
            if &expect != avgs {
                return Err(TraceError::Mismatch { line: *line, what: "checkpoint totals" });
            }
        }
    }
    let rec = record_from_prefix(g, ann, prefix, lasso, stop);
    if ann.is_some() {
        if evts.len() != rec.events.len() {
            let line = evts.first().map(|e| e.0).unwrap_or(0);
            return Err(TraceError::Mismatch { line, what: "event count" });
        }
        for ((line, text), e) in evts.iter().zip(&rec.events) {
            let expect = format!("evt {} {} | {}", e.round, e.kind, join(&e.totals));
            if text.split_whitespace().ne(expect.split_whitespace()) {
                return Err(TraceError::Mismatch { line: *line, what: "event" });
            }
        }
    }
    Ok(rec)
}
