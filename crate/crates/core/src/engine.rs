//! Plays two strategies against each other on a graph.
//!
//! Plays are stored run-length encoded, so a strategy that loops a gadget
//! `10^12` times costs one step. A `Forever` answer on a self-loop closes the
//! play as a lasso whose limit averages are the loop weights.

use num_traits::{One, Signed, Zero};

use crate::game::{EdgeId, GameError, GameGraph, LimitVector, Owner, PlayPrefix, VertexId};
use crate::num::{Int, Q};
use crate::reduction::{Annotations, BlameKind, EdgeKind, Role, StepOp};
use crate::strategy::{Move, PlayView, Repeat, Strategy, StrategyError};

/// Bookkeeping derived from the gadget annotations along a play.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimTracker {
    /// Visits to reset vertex A, including the current one.
    pub reset_visits: u64,
    /// Inside a simulation (between leaving the reset and a blame or the end).
    pub in_sim: bool,
    /// Net increments minus decrements per counter in the current simulation.
    pub shadow: Vec<i64>,
    pub inc_entered: Vec<u64>,
    pub dec_entered: Vec<u64>,
    pub inc_done: Vec<u64>,
    pub dec_done: Vec<u64>,
    /// Step gadgets entered in the current simulation, the entry step included.
    pub steps: u64,
    /// Step gadgets entered in the whole play.
    pub total_steps: u64,
    /// Zero-test declarations in the whole play.
    pub zero_tests: u64,
    pub blames: u64,
}

impl SimTracker {
    pub fn new(counters: u8) -> Self {
        let z = vec![0; counters as usize];
        SimTracker {
            shadow: vec![0; counters as usize],
            inc_entered: z.clone(),
            dec_entered: z.clone(),
            inc_done: z.clone(),
            dec_done: z,
            ..SimTracker::default()
        }
    }

    pub fn start(ann: &Annotations, v: VertexId) -> Self {
        let mut t = SimTracker::new(ann.layout.counters());
        if ann.role(v) == Role::ResetA {
            t.reset_visits = 1;
        }
        t
    }

    fn clear_sim(&mut self) {
        let n = self.shadow.len();
        *self = SimTracker {
            reset_visits: self.reset_visits,
            total_steps: self.total_steps,
            zero_tests: self.zero_tests,
            blames: self.blames,
            in_sim: true,
            ..SimTracker::new(n as u8)
        };
    }

    /// Updates after one traversal of the non-loop edge `e`.
    pub fn on_edge(&mut self, g: &GameGraph, ann: &Annotations, e: EdgeId) {
        let edge = g.edge(e);
        let kind = ann.kind(e);
        if kind == EdgeKind::StartSim {
            self.clear_sim();
        }
        if kind == EdgeKind::Exit {
            match ann.role(edge.src) {
                Role::Step { op: StepOp::Inc(j), .. } => self.inc_done[j as usize - 1] += 1,
                Role::Step { op: StepOp::Dec(j), .. } => self.dec_done[j as usize - 1] += 1,
                _ => {}
            }
        }
        if matches!(kind, EdgeKind::DeclareZero | EdgeKind::DeclarePositive) {
            self.zero_tests += 1;
        }
        match ann.role(edge.dst) {
            Role::ResetA => {
                self.reset_visits += 1;
                self.in_sim = false;
            }
            Role::Step { op, .. } => {
                self.steps += 1;
                self.total_steps += 1;
                match op {
                    StepOp::Inc(j) => {
                        self.shadow[j as usize - 1] += 1;
                        self.inc_entered[j as usize - 1] += 1;
                    }
                    StepOp::Dec(j) => {
                        self.shadow[j as usize - 1] -= 1;
                        self.dec_entered[j as usize - 1] += 1;
                    }
                    StepOp::Nop => {}
                }
            }
            Role::Blame(_) => {
                self.blames += 1;
                self.in_sim = false;
            }
            Role::Final => self.in_sim = false,
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    ResetVisit { index: u64 },
    SimStart { reset_index: u64 },
    StepEnter { state: Option<String>, op: StepOp, entry: bool },
    Declared { counter: u8, zero: bool },
    Blame { kind: BlameKind, state: Option<String> },
    BlameExit { kind: BlameKind, loops: Int },
    ReachedFinal,
}

/// Something that happened when the token arrived at a new gadget vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    /// Rounds played when the event happened (the triggering edge included).
    pub round: Int,
    pub kind: EventKind,
    pub totals: Vec<Int>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Horizon,
    MaxResets,
    MaxRuns,
    Lasso,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Horizon {
    pub rounds: Option<Int>,
    /// Stop before the token would enter reset A for the `max_resets + 1`-th time.
    pub max_resets: Option<u64>,
    /// Safety cap on the number of strategy moves.
    pub max_runs: Option<u64>,
}

impl Horizon {
    pub fn rounds(n: u64) -> Self {
        Horizon { rounds: Some(Int::from(n)), ..Horizon::default() }
    }

    pub fn resets(max_resets: u64, max_runs: u64) -> Self {
        Horizon { rounds: None, max_resets: Some(max_resets), max_runs: Some(max_runs) }
    }
}

/// The play ends by repeating `edge` (a self-loop at `vertex`) forever.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lasso {
    pub edge: EdgeId,
    pub vertex: VertexId,
    /// Rounds in the stem.
    pub from_round: Int,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayRecord {
    pub prefix: PlayPrefix,
    pub events: Vec<Event>,
    pub lasso: Option<Lasso>,
    pub stop: StopReason,
    pub final_sim: SimTracker,
}

impl PlayRecord {
    /// Exact limit averages of a lasso play.
    pub fn lasso_limits(&self, g: &GameGraph) -> Option<LimitVector> {
        self.lasso.as_ref().map(|l| {
            LimitVector::exact(g.edge(l.edge).weights.0.iter().map(|&w| Q::from_integer(Int::from(w))).collect())
        })
    }

    pub fn rounds(&self) -> &Int {
        self.prefix.len()
    }

    pub fn blames(&self) -> usize {
        self.events.iter().filter(|e| matches!(e.kind, EventKind::Blame { .. })).count()
    }

    pub fn reached_final(&self) -> bool {
        self.events.iter().any(|e| e.kind == EventKind::ReachedFinal)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("strategy {name} returned edge {edge}, which does not leave vertex {vertex}")]
    StrategyReturnedNonEdge { name: String, edge: usize, vertex: usize },
    #[error("strategy {name} asked to repeat edge {edge}, which is not a self-loop")]
    RepeatOfNonLoop { name: String, edge: usize },
    #[error("strategy {name} asked for a non-positive repeat")]
    NonPositiveRepeat { name: String },
    #[error("the play has no bound: give a round horizon, a reset cap or a run cap")]
    Unbounded,
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Game(#[from] GameError),
}

fn event_for(g: &GameGraph, ann: &Annotations, e: EdgeId, sim: &SimTracker) -> Option<EventKind> {
    let edge = g.edge(e);
    let kind = ann.kind(e);
    let tag = ann.tag(edge.dst);
    Some(match (kind, tag.role) {
        (EdgeKind::DeclareZero, _) | (EdgeKind::DeclarePositive, _) => {
            let Role::Declare { counter } = ann.role(edge.src) else { return None };
            EventKind::Declared { counter, zero: kind == EdgeKind::DeclareZero }
        }
        (EdgeKind::StartSim, _) => EventKind::SimStart { reset_index: sim.reset_visits },
        (_, Role::ResetA) => EventKind::ResetVisit { index: sim.reset_visits },
        (_, Role::Step { op, entry, .. }) => EventKind::StepEnter { state: tag.state.clone(), op, entry },
        (_, Role::Blame(kind)) => {
            EventKind::Blame { kind, state: ann.tag(edge.src).state.clone() }
        }
        (_, Role::Final) => EventKind::ReachedFinal,
        _ => return None,
    })
}

/// Events caused by traversing the non-loop edge `e`; `loops` is the number
/// of self-loop rounds taken at its source and `sim` the tracker after `e`.
#[allow(clippy::too_many_arguments)]
fn push_events(g: &GameGraph, ann: &Annotations, e: EdgeId, loops: &Int, sim: &SimTracker, round: &Int, totals: &[Int], out: &mut Vec<Event>) {
    if let Role::Blame(kind) = ann.role(g.edge(e).src) {
        out.push(Event { round: round.clone(), kind: EventKind::BlameExit { kind, loops: loops.clone() }, totals: totals.to_vec() });
    }
    if let Some(kind) = event_for(g, ann, e, sim) {
        out.push(Event { round: round.clone(), kind, totals: totals.to_vec() });
    }
}

/// Rebuilds the record of a play from its runs, e.g. after reading a trace file.
pub fn record_from_prefix(g: &GameGraph, ann: Option<&Annotations>, prefix: PlayPrefix, lasso: Option<Lasso>, stop: StopReason) -> PlayRecord {
    let mut events = Vec::new();
    let mut final_sim = SimTracker::default();
    if let Some(a) = ann {
        if a.role(prefix.start()) == Role::ResetA {
            events.push(Event { round: Int::zero(), kind: EventKind::ResetVisit { index: 1 }, totals: vec![Int::zero(); g.dims()] });
        }
        final_sim = SimTracker::start(a, prefix.start());
        replay(g, a, &prefix, |s| {
            if s.src == s.dst {
                return;
            }
            let mut sim = s.sim.clone();
            sim.on_edge(g, a, s.edge);
            let totals: Vec<Int> = s.totals_before.iter().zip(s.weights).map(|(t, w)| t + Int::from(*w)).collect();
            let loops = s.rounds_before - s.arrival_rounds;
            push_events(g, a, s.edge, &loops, &sim, &(s.rounds_before + 1), &totals, &mut events);
            final_sim = sim;
        });
    }
    PlayRecord { prefix, events, lasso, stop, final_sim }
}

/// Plays `p1` against `p2` from the graph's initial vertex until a lasso or a horizon.
pub fn run_play(
    g: &GameGraph,
    ann: Option<&Annotations>,
    p1: &mut dyn Strategy,
    p2: &mut dyn Strategy,
    horizon: &Horizon,
) -> Result<PlayRecord, EngineError> {
    if horizon.rounds.is_none() && horizon.max_resets.is_none() && horizon.max_runs.is_none() {
        return Err(EngineError::Unbounded);
    }
    let start = g.initial();
    let mut prefix = PlayPrefix::new(start, g.dims());
    let mut sim = match ann {
        Some(a) => SimTracker::start(a, start),
        None => SimTracker::default(),
    };
    let mut events = Vec::new();
    if let Some(a) = ann {
        if a.role(start) == Role::ResetA {
            events.push(Event { round: Int::zero(), kind: EventKind::ResetVisit { index: 1 }, totals: prefix.totals().to_vec() });
        }
    }
    let mut arrival_totals = prefix.totals().to_vec();
    let mut arrival_rounds = Int::zero();
    let mut loop_rounds = Int::zero();
    let mut moves = 0u64;
    let mut lasso = None;

    let stop = loop {
        if let Some(h) = &horizon.rounds {
            if prefix.len() >= h {
                break StopReason::Horizon;
            }
        }
        if let Some(m) = horizon.max_runs {
            if moves >= m {
                break StopReason::MaxRuns;
            }
        }
        let v = prefix.end();
        let view = PlayView {
            graph: g,
            ann,
            vertex: v,
            totals: prefix.totals(),
            rounds: prefix.len(),
            arrival_totals: &arrival_totals,
            arrival_rounds: &arrival_rounds,
            loop_rounds: &loop_rounds,
            sim: &sim,
        };
        let player: &mut dyn Strategy = match g.vertex(v).owner {
            Owner::P1 => &mut *p1,
            Owner::P2 => &mut *p2,
        };
        let Move { edge, repeat } = player.next(&view)?;
        moves += 1;
        let e = g.try_edge(edge)?;
        if e.src != v {
            return Err(EngineError::StrategyReturnedNonEdge { name: player.name(), edge: edge.0, vertex: v.0 });
        }
        let mut count = match repeat {
            Repeat::Forever if e.is_self_loop() => {
                lasso = Some(Lasso { edge, vertex: v, from_round: prefix.len().clone() });
                break StopReason::Lasso;
            }
            Repeat::Forever => return Err(EngineError::RepeatOfNonLoop { name: player.name(), edge: edge.0 }),
            Repeat::Times(n) => n,
        };
        if !count.is_positive() {
            return Err(EngineError::NonPositiveRepeat { name: player.name() });
        }
        if count > Int::one() && !e.is_self_loop() {
            return Err(EngineError::RepeatOfNonLoop { name: player.name(), edge: edge.0 });
        }
        if let Some(h) = &horizon.rounds {
            let left = h - prefix.len();
            if count > left {
                count = left;
            }
        }
        if let (Some(a), Some(m)) = (ann, horizon.max_resets) {
            if !e.is_self_loop() && a.role(e.dst) == Role::ResetA && sim.reset_visits >= m {
                break StopReason::MaxResets;
            }
        }
        if e.is_self_loop() {
            prefix.push_run(g, edge, count.clone())?;
            loop_rounds += count;
            continue;
        }
        prefix.push_run(g, edge, count)?;
        if let Some(a) = ann {
            sim.on_edge(g, a, edge);
            push_events(g, a, edge, &loop_rounds, &sim, prefix.len(), prefix.totals(), &mut events);
        }
        arrival_totals = prefix.totals().to_vec();
        arrival_rounds = prefix.len().clone();
        loop_rounds = Int::zero();
    };
    Ok(PlayRecord { prefix, events, lasso, stop, final_sim: sim })
}

/// One run of a recorded play, with the state before it.
pub struct ReplayStep<'a> {
    pub index: usize,
    pub edge: EdgeId,
    pub src: VertexId,
    pub dst: VertexId,
    pub count: &'a Int,
    pub weights: &'a [i64],
    pub totals_before: &'a [Int],
    pub rounds_before: &'a Int,
    /// Tracker state before the run; for loops it is also the state after.
    pub sim: &'a SimTracker,
    /// Totals and rounds when the token arrived at `src`.
    pub arrival_totals: &'a [Int],
    pub arrival_rounds: &'a Int,
}

/// Walks the runs of a play prefix, maintaining totals and the tracker.
pub fn replay<F: FnMut(&ReplayStep<'_>)>(g: &GameGraph, ann: &Annotations, prefix: &PlayPrefix, mut f: F) {
    let mut totals = vec![Int::zero(); g.dims()];
    let mut rounds = Int::zero();
    let mut sim = SimTracker::start(ann, prefix.start());
    let mut arrival_totals = totals.clone();
    let mut arrival_rounds = Int::zero();
    for (index, run) in prefix.runs().iter().enumerate() {
        let e = g.edge(run.edge);
        f(&ReplayStep {
            index,
            edge: run.edge,
            src: e.src,
            dst: e.dst,
            count: &run.count,
            weights: &e.weights.0,
            totals_before: &totals,
            rounds_before: &rounds,
            sim: &sim,
            arrival_totals: &arrival_totals,
            arrival_rounds: &arrival_rounds,
        });
        for (t, w) in totals.iter_mut().zip(&e.weights.0) {
            *t += &run.count * Int::from(*w);
        }
        rounds += &run.count;
        if !e.is_self_loop() {
            sim.on_edge(g, ann, run.edge);
            arrival_totals = totals.clone();
            arrival_rounds = rounds.clone();
        }
    }
}
