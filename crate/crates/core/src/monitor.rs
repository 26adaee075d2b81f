//! Runtime checks of the correctness lemmas on recorded plays.
//!
//! Every check is exact. Inequalities that must hold at every round of a
//! looping run are decided with [`first_failure`], so a run of `10^20`
//! rounds costs the same as a single round, and a failure pinpoints the
//! first violating round.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::condition::{eval_condition, Condition};
use crate::engine::{replay, PlayRecord, ReplayStep, SimTracker};
use crate::game::{GameGraph, LimitVector, VertexId};
use crate::linpred::{first_failure, Lin, Pred};
use crate::machine::Side;
use crate::num::{avg, qi, Int, Q};
use crate::reduction::{BlameKind, DimensionLayout, ReductionOutput, Role};
use crate::strategy::{eps_i, side_violation, RefereeParams};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub round: Int,
    pub instance: String,
    /// Exact averages (or totals, when named so) at the failing round.
    pub values: Vec<(String, Q)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaReport {
    pub id: String,
    /// Number of (round, inequality) instances checked.
    pub checked: Int,
    pub failure_count: u64,
    /// The first few failures, in play order.
    pub failures: Vec<Failure>,
    pub vacuous: bool,
    pub notes: Vec<String>,
}

const KEPT_FAILURES: usize = 20;

impl LemmaReport {
    fn new(id: &str) -> Self {
        LemmaReport {
            id: id.to_string(),
            checked: Int::zero(),
            failure_count: 0,
            failures: Vec::new(),
            vacuous: false,
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    pub fn first_failure(&self) -> Option<&Failure> {
        self.failures.first()
    }

    fn fail(&mut self, f: Failure) {
        self.failure_count += 1;
        if self.failures.len() < KEPT_FAILURES {
            self.failures.push(f);
        }
    }
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.vacuous {
            "vacuous"
        } else if self.passed() {
            "pass"
        } else {
            "FAIL"
        };
        writeln!(f, "{} {} checked={} failures={}", self.id, status, self.checked, self.failure_count)?;
        for fl in &self.failures {
            write!(f, "  round {}: {}", fl.round, fl.instance)?;
            for (name, v) in &fl.values {
                write!(f, " {name}={v}")?;
            }
            writeln!(f)?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

/// State of a play at one round, for failure reports.
struct At<'a> {
    layout: &'a DimensionLayout,
    totals: Vec<Int>,
    rounds: Int,
}

impl At<'_> {
    fn avgs(&self, dims: &[usize]) -> Vec<(String, Q)> {
        dims.iter().map(|&d| (format!("Avg({})", self.layout.name(d)), avg(&self.totals[d], &self.rounds))).collect()
    }
}

fn after<'a>(layout: &'a DimensionLayout, s: &ReplayStep<'_>, j: &Int) -> At<'a> {
    let totals = s.totals_before.iter().zip(s.weights).map(|(t, w)| t + j * Int::from(*w)).collect();
    At { layout, totals, rounds: s.rounds_before + j }
}

/// Checks `pred` on every round of the run; records the first failing round.
fn scan(report: &mut LemmaReport, layout: &DimensionLayout, s: &ReplayStep<'_>, pred: &Pred, instance: &dyn Fn() -> String, dims: &[usize]) -> bool {
    report.checked += s.count;
    match first_failure(pred, s.totals_before, s.rounds_before, s.weights, s.count) {
        None => true,
        Some(j) => {
            let at = after(layout, s, &j);
            report.fail(Failure { round: at.rounds.clone(), instance: instance(), values: at.avgs(dims) });
            false
        }
    }
}

/// Checks `pred` at one point.
fn point(report: &mut LemmaReport, at: &At<'_>, pred: &Pred, instance: &dyn Fn() -> String, values: &dyn Fn() -> Vec<(String, Q)>) -> bool {
    report.checked += 1;
    if pred.eval(&at.totals, &at.rounds) {
        true
    } else {
        report.fail(Failure { round: at.rounds.clone(), instance: instance(), values: values() });
        false
    }
}

fn is_sim_role(r: Role) -> bool {
    matches!(r, Role::Step { .. } | Role::SideCheck { .. } | Role::Declare { .. } | Role::PositiveCheck { .. } | Role::NegativeCheck { .. })
}

/// Side of the machine state the token is in on arrival at a gadget vertex.
fn arrival_side(r: Role) -> Option<Side> {
    match r {
        Role::Step { dir, .. } => Some(dir.entered().other()),
        Role::Declare { .. } | Role::Final => Some(Side::Left),
        _ => None,
    }
}

fn abs_total(totals: &[Int], d: usize) -> Q {
    qi(&totals[d].abs())
}

fn state_name(out: &ReductionOutput, v: VertexId) -> String {
    let tag = out.annotations.tag(v);
    match &tag.state {
        Some(s) => format!("{} at {s}", tag.role.short()),
        None => tag.role.short(),
    }
}

/// L1 bound: `Avg(gs) <= -delta` at every round of the first `N`
/// simulated steps of each invocation whose entry had `Avg(gs) <= -1/2`.
/// An invocation stops being checked at its first left-right violation.
pub fn check_l1(out: &ReductionOutput, rec: &PlayRecord, params: &RefereeParams) -> LemmaReport {
    let mut rep = LemmaReport::new("L1");
    let layout = &out.layout;
    let gs = layout.gs();
    let pred = Pred::avg_le(gs, &-params.delta.clone());
    let half = Pred::avg_le(gs, &Q::new((-1).into(), 2.into()));
    let mut active = false;
    let mut vacuous_invocations = 0u64;
    let mut invocations = 0u64;
    replay(&out.graph, &out.annotations, &rec.prefix, |s| {
        let src = out.annotations.role(s.src);
        let dst = out.annotations.role(s.dst);
        if src == Role::ResetC && matches!(dst, Role::Step { entry: true, .. }) {
            invocations += 1;
            let at = after(layout, s, &Int::one());
            active = half.eval(&at.totals, &at.rounds);
            if !active {
                vacuous_invocations += 1;
            }
        }
        if !active || !is_sim_role(src) || !s.sim.in_sim {
            return;
        }
        if let Role::SideCheck { dir } = src {
            if side_violation(layout, s.totals_before, dir.entered(), &params.eps).is_some() {
                active = false;
                return;
            }
        }
        if s.sim.steps > params.n {
            active = false;
            return;
        }
        let name = state_name(out, s.src);
        scan(&mut rep, layout, s, &pred, &|| format!("Avg(gs) <= -delta in {name}"), &[gs]);
    });
    rep.vacuous = invocations == 0 || vacuous_invocations == invocations;
    rep.notes.push(format!("delta = {}", params.delta));
    if vacuous_invocations > 0 {
        rep.notes.push(format!("{vacuous_invocations} of {invocations} invocations started with Avg(gs) > -1/2"));
    }
    rep
}

/// L2 and L5 conclusions at the exit of blame gadgets entered
/// after a genuine violation. Returns `(L2, L5)`.
pub fn check_l2_l5(out: &ReductionOutput, rec: &PlayRecord, params: &RefereeParams) -> (LemmaReport, LemmaReport) {
    let mut l2 = LemmaReport::new("L2");
    let mut l5 = LemmaReport::new("L5");
    let layout = &out.layout;
    let (l, r, gs, gc) = (layout.l(), layout.r(), layout.gs(), layout.gc());
    // genuine violation recorded on entry to the current blame vertex
    let mut genuine: Option<BlameKind> = None;
    let mut spurious = 0u64;
    replay(&out.graph, &out.annotations, &rec.prefix, |s| {
        let src = out.annotations.role(s.src);
        let dst = out.annotations.role(s.dst);
        if let Role::Blame(kind) = dst {
            if s.src == s.dst {
                return;
            }
            let real = match (src, kind) {
                (Role::SideCheck { dir }, _) => side_violation(layout, s.totals_before, dir.entered(), &params.eps).is_some(),
                (_, BlameKind::Positive(j)) => s.sim.shadow[j as usize - 1] > 0,
                (_, BlameKind::Negative(j)) => s.sim.shadow[j as usize - 1] < 0,
                _ => false,
            };
            if real {
                genuine = Some(kind);
            } else {
                spurious += 1;
                genuine = None;
            }
            return;
        }
        let Role::Blame(kind) = src else { return };
        if s.src == s.dst {
            return;
        }
        if genuine.take() != Some(kind) {
            return;
        }
        // conclusion at the exit vertex: the exit edge has zero weight, so
        // the totals before it are the totals at the end of the loop
        let at = At { layout, totals: s.totals_before.to_vec(), rounds: s.rounds_before.clone() };
        let name = state_name(out, s.src);
        if kind.is_side() {
            let g = &params.gamma_side;
            let ng = -g.clone();
            let pred = Pred::And(vec![
                Pred::Or(vec![Pred::avg_le(r, &ng), Pred::avg_le(l, &ng)]),
                Pred::avg_le(gs, &ng),
                Pred::avg_le(gc, &ng),
            ]);
            point(&mut l2, &at, &pred, &|| format!("{name} exit: (Avg(r) or Avg(l)) <= -{g}, Avg(gs), Avg(gc) <= -{g}"), &|| at.avgs(&[l, r, gs, gc]));
        } else {
            let g = &params.gamma_counter;
            let ng = -g.clone();
            let target = kind.target(layout);
            let pred = Pred::And(vec![Pred::avg_le(target, &ng), Pred::avg_le(gs, &ng), Pred::avg_le(gc, &ng)]);
            point(
                &mut l5,
                &at,
                &pred,
                &|| format!("{name} exit: Avg({}), Avg(gs), Avg(gc) <= -{g}", layout.name(target)),
                &|| at.avgs(&[target, gs, gc]),
            );
        }
    });
    for rep in [&mut l2, &mut l5] {
        rep.vacuous = rep.checked.is_zero();
        if spurious > 0 {
            rep.notes.push(format!("{spurious} blame(s) without a genuine violation skipped"));
        }
    }
    l2.notes.push(format!("gamma_side = {}", params.gamma_side));
    l5.notes.push(format!("gamma_counter = {}", params.gamma_counter));
    (l2, l5)
}

/// L3: every simulation loop phase lasts between `(1-2eps)|gs|` and
/// `(1+2eps)|gs|` rounds, `|gs|` measured at phase entry.
pub fn check_l3(out: &ReductionOutput, rec: &PlayRecord, params: &RefereeParams) -> LemmaReport {
    let mut rep = LemmaReport::new("L3");
    let layout = &out.layout;
    let two_eps = params.eps.clone() * Q::from_integer(2.into());
    let lo = Q::one() - &two_eps;
    let hi = Q::one() + &two_eps;
    let mut loops = Int::zero();
    replay(&out.graph, &out.annotations, &rec.prefix, |s| {
        let src = out.annotations.role(s.src);
        if !matches!(src, Role::Step { .. }) {
            return;
        }
        if s.src == s.dst {
            loops += s.count;
            return;
        }
        let g = abs_total(s.arrival_totals, layout.gs());
        let k = qi(&loops);
        loops = Int::zero();
        let at = At { layout, totals: s.totals_before.to_vec(), rounds: s.rounds_before.clone() };
        let ok = Pred::Ge(Lin::zero().add_const(k.clone() - &lo * &g));
        let ok = Pred::And(vec![ok, Pred::Ge(Lin::zero().add_const(&hi * &g - &k))]);
        let name = state_name(out, s.src);
        point(
            &mut rep,
            &at,
            &ok,
            &|| format!("loop phase of {name} within [(1-2eps)|gs|, (1+2eps)|gs|]"),
            &|| vec![("loops".into(), k.clone()), ("|gs|".into(), g.clone())],
        );
    });
    rep.vacuous = rep.checked.is_zero();
    rep
}

/// L4: at every simulation step among the first `N` of an invocation,
/// `c+ <= |gc|(1+eps) + c|gs| + |gs|/2` and `c- <= |gc|(1+eps) - c|gs| + |gs|/2`
/// with `c` the number of finished increments minus finished decrements.
pub fn check_l4(out: &ReductionOutput, rec: &PlayRecord, params: &RefereeParams) -> LemmaReport {
    let mut rep = LemmaReport::new("L4");
    let layout = &out.layout;
    let one_eps = Q::one() + &params.eps;
    let half = Q::new(1.into(), 2.into());
    replay(&out.graph, &out.annotations, &rec.prefix, |s| {
        if s.src == s.dst {
            return;
        }
        let dst = out.annotations.role(s.dst);
        if arrival_side(dst).is_none() || dst == Role::Final {
            return;
        }
        let mut sim = s.sim.clone();
        sim.on_edge(&out.graph, &out.annotations, s.edge);
        if !sim.in_sim || sim.steps > params.n {
            return;
        }
        let at = after(layout, s, &Int::one());
        let g = abs_total(&at.totals, layout.gs());
        let gcv = abs_total(&at.totals, layout.gc());
        let name = state_name(out, s.dst);
        for j in 1..=layout.counters() {
            let i = j as usize - 1;
            // finished increments minus finished decrements: the gadget just entered has not acted yet
            let c = Q::from_integer(Int::from(sim.inc_done[i]) - Int::from(sim.dec_done[i]));
            let base = &one_eps * &gcv + &half * &g;
            for (d, sign) in [(layout.cp(j), 1), (layout.cm(j), -1)] {
                let bound = base.clone() + Q::from_integer(sign.into()) * &c * &g;
                let pred = Pred::Ge(Lin::dim(d).neg().add_const(bound.clone()));
                point(
                    &mut rep,
                    &at,
                    &pred,
                    &|| format!("{} <= |gc|(1+eps) {} c|gs| + |gs|/2 on arrival at {name}", layout.name(d), if sign > 0 { "+" } else { "-" }),
                    &|| {
                        vec![
                            (format!("{} total", layout.name(d)), qi(&at.totals[d])),
                            ("bound".into(), bound.clone()),
                            ("c".into(), c.clone()),
                        ]
                    },
                );
            }
        }
    });
    rep.vacuous = rep.checked.is_zero();
    rep
}

/// L6 (bounds kept by player 1's strategy while unblamed) and L7
/// (conditionals inside blame gadgets). Returns `(L6, L7)`.
///
/// L6 side bounds are checked on arrival at each step and zero test: in a
/// left state `l >= (1-eps_i)|gs|` and `r >= -eps_i|gs|`, mirrored in a
/// right state. Counter bounds hold at every simulation round:
/// `c+ >= (1-eps_i)|gc| + c_lo|gs|` and `c- >= (1-eps_i)|gc| - c_hi|gs|`,
/// where `c_lo` counts only finished increments and `c_hi` only finished
/// decrements, so the bounds stay valid in the middle of a loop phase.
pub fn check_l6_l7(out: &ReductionOutput, rec: &PlayRecord) -> (LemmaReport, LemmaReport) {
    let mut l6 = LemmaReport::new("L6");
    let mut l7 = LemmaReport::new("L7");
    let layout = &out.layout;
    let (gs, gc) = (layout.gs(), layout.gc());
    replay(&out.graph, &out.annotations, &rec.prefix, |s| {
        let src = out.annotations.role(s.src);
        // everything is scaled by k = i + 10 = 1/eps_i to stay in integers
        let k = Q::from_integer(Int::from(s.sim.reset_visits + 10));
        let k1 = k.clone() - Q::one();
        if let Role::Blame(kind) = src {
            if s.src != s.dst {
                return;
            }
            let t = kind.target(layout);
            let guard = kind.guard(layout);
            // Avg(t) <= -1/k  <=>  k*t + n <= 0
            let low = Pred::le(Lin::dim(t).scaled(&k).plus(Lin { coef: vec![], rounds: Q::one(), constant: Q::zero() }));
            let up = Pred::Ge(Lin::dim(guard).scaled(&k).plus(Lin { coef: vec![], rounds: Q::one(), constant: Q::zero() }));
            let pred = Pred::implies(low, up);
            scan(
                &mut l7,
                layout,
                s,
                &pred,
                &|| format!("in {}: Avg({}) <= -eps_i implies Avg({}) >= -eps_i", state_name(out, s.src), layout.name(t), layout.name(guard)),
                &[t, guard],
            );
            return;
        }
        if !s.sim.in_sim || !is_sim_role(src) {
            return;
        }
        let g = qi(&s.totals_before[gs].abs());
        // counter bounds on every simulation round; gs is constant inside the simulation
        let sim: &SimTracker = s.sim;
        for j in 1..=layout.counters() {
            let i = j as usize - 1;
            let c_lo = Q::from_integer(Int::from(sim.inc_done[i]) - Int::from(sim.dec_entered[i]));
            let c_hi = Q::from_integer(Int::from(sim.inc_entered[i]) - Int::from(sim.dec_done[i]));
            // k c+ + (k-1) gc - k c_lo |gs| >= 0, using |gc| = -gc
            let p = Pred::Ge(Lin::dim(layout.cp(j)).scaled(&k).add_dim(gc, k1.clone()).add_const(-(&k * c_lo * &g)));
            let m = Pred::Ge(Lin::dim(layout.cm(j)).scaled(&k).add_dim(gc, k1.clone()).add_const(&k * c_hi * &g));
            let pred = Pred::And(vec![Pred::Ge(Lin::dim(gc).neg()), p, m]);
            scan(&mut l6, layout, s, &pred, &|| format!("counter bounds of c{j} in {}", state_name(out, s.src)), &[layout.cp(j), layout.cm(j), gc]);
        }
        // side bounds on arrival at the next step or zero test
        let dst = out.annotations.role(s.dst);
        if s.src != s.dst {
            if let Some(side) = arrival_side(dst) {
                let (big, small) = match side {
                    Side::Left => (layout.l(), layout.r()),
                    Side::Right => (layout.r(), layout.l()),
                };
                let at = after(layout, s, &Int::one());
                let pred = Pred::And(vec![
                    Pred::Ge(Lin::dim(big).scaled(&k).add_const(-(&k1 * &g))),
                    Pred::Ge(Lin::dim(small).scaled(&k).add_const(g.clone())),
                ]);
                point(
                    &mut l6,
                    &at,
                    &pred,
                    &|| format!("{} >= (1-eps_i)|gs| and {} >= -eps_i|gs| on arrival at {}", layout.name(big), layout.name(small), state_name(out, s.dst)),
                    &|| {
                        vec![
                            (format!("{} total", layout.name(big)), qi(&at.totals[big])),
                            (format!("{} total", layout.name(small)), qi(&at.totals[small])),
                            ("|gs|".into(), g.clone()),
                            ("eps_i".into(), eps_i(s.sim.reset_visits)),
                        ]
                    },
                );
            }
        }
    });
    l6.vacuous = l6.checked.is_zero();
    l7.vacuous = l7.checked.is_zero();
    (l6, l7)
}

/// P2, round-level form, for tolerance `delta`: from the first
/// reset visit `i` with `eps_i <= delta` onward, every round satisfies
/// `(Avg(l) >= -delta and Avg(r) >= -delta) or G`, where inside a blame
/// gadget `G` is `Avg(gs) >= -delta` at that round, and elsewhere `G` is
/// the value of `Avg(gs) >= -delta` at the most recent blame exit (false if
/// there was none). If no visit reaches that tolerance, checking starts at
/// the last reset visit, provided no blame follows it.
pub fn check_prop2(out: &ReductionOutput, rec: &PlayRecord, delta: &Q) -> LemmaReport {
    let mut rep = LemmaReport::new("P2");
    let layout = &out.layout;
    let (l, r, gs) = (layout.l(), layout.r(), layout.gs());
    let nd = -delta.clone();
    let sides = Pred::And(vec![Pred::avg_ge(l, &nd), Pred::avg_ge(r, &nd)]);
    let guard = Pred::avg_ge(gs, &nd);

    // find the starting reset visit
    let mut start_visit = None;
    let mut last_visit = 0u64;
    let mut blame_after_last = false;
    replay(&out.graph, &out.annotations, &rec.prefix, |s| {
        let v = s.sim.reset_visits;
        if start_visit.is_none() && v > 0 && eps_i(v) <= *delta {
            start_visit = Some(v);
        }
        if v != last_visit {
            last_visit = v;
            blame_after_last = false;
        }
        if matches!(out.annotations.role(s.dst), Role::Blame(_)) && s.src != s.dst {
            blame_after_last = true;
        }
    });
    if start_visit.is_none() && rec.final_sim.reset_visits > 0 && eps_i(rec.final_sim.reset_visits) <= *delta {
        start_visit = Some(rec.final_sim.reset_visits);
    }
    let start = match start_visit {
        Some(v) => v,
        None if !blame_after_last && last_visit > 0 => {
            rep.notes.push(format!("no reset visit with eps_i <= {delta}; checking from the last (blame-free) visit {last_visit}"));
            last_visit
        }
        None => {
            rep.vacuous = true;
            rep.notes.push(format!("no reset visit with eps_i <= {delta} and the last visit is blamed"));
            return rep;
        }
    };
    rep.notes.push(format!("checked from reset visit {start} (eps = {})", eps_i(start)));

    let mut exit_guard = false;
    replay(&out.graph, &out.annotations, &rec.prefix, |s| {
        let src = out.annotations.role(s.src);
        let in_blame = matches!(src, Role::Blame(_));
        if in_blame && s.src != s.dst {
            exit_guard = guard.eval(s.totals_before, s.rounds_before);
        }
        if s.sim.reset_visits < start {
            return;
        }
        let g = if in_blame {
            guard.clone()
        } else if exit_guard {
            Pred::And(vec![])
        } else {
            Pred::Or(vec![])
        };
        let pred = Pred::Or(vec![sides.clone(), g]);
        let name = state_name(out, s.src);
        scan(&mut rep, layout, s, &pred, &|| format!("(Avg(l), Avg(r) >= -delta) or guard, in {name}"), &[l, r, gs]);
    });
    rep
}

/// P1 outcome: the play ends in a lasso at the final vertex,
/// `Sup x = -1` there, and the condition is false.
pub fn check_prop1(out: &ReductionOutput, rec: &PlayRecord) -> LemmaReport {
    let mut rep = LemmaReport::new("P1");
    rep.checked = Int::one();
    let fail = |rep: &mut LemmaReport, why: String| {
        rep.fail(Failure { round: rec.rounds().clone(), instance: why, values: vec![] });
    };
    match (&rec.lasso, rec.lasso_limits(&out.graph)) {
        (Some(lasso), Some(lv)) if out.annotations.role(lasso.vertex) == Role::Final => {
            let x = &lv.sup()[out.layout.x()];
            if *x != -Q::one() {
                fail(&mut rep, format!("Sup x = {x}, expected -1"));
            }
            if eval_condition(&out.condition, &lv) != Ok(false) {
                fail(&mut rep, "condition does not evaluate to false on the lasso".into());
            }
            rep.notes.push(format!("final vertex reached at round {}", lasso.from_round));
        }
        _ => fail(&mut rep, "play did not end in a lasso at the final vertex".into()),
    }
    rep
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// Exact limit averages of a lasso play.
    Lasso { limits: LimitVector, holds: bool },
    /// Averages at the end of a finite play; not conclusive about the limit.
    Estimate { averages: Vec<Q>, holds: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OutcomeError {
    #[error("the play is empty")]
    EmptyPlay,
    #[error("condition mentions dimension {0} but the graph has {1}")]
    Dimension(usize, usize),
}

pub fn summarize_outcome(out: &ReductionOutput, rec: &PlayRecord, condition: &Condition) -> Result<Outcome, OutcomeError> {
    summarize_on(&out.graph, rec, condition)
}

/// As [`summarize_outcome`], for any graph.
pub fn summarize_on(g: &GameGraph, rec: &PlayRecord, condition: &Condition) -> Result<Outcome, OutcomeError> {
    if let Some(d) = condition.max_dim() {
        if d >= g.dims() {
            return Err(OutcomeError::Dimension(d, g.dims()));
        }
    }
    let eval = |lv: &LimitVector| eval_condition(condition, lv).map_err(|_| OutcomeError::Dimension(g.dims(), g.dims()));
    if let Some(limits) = rec.lasso_limits(g) {
        let holds = eval(&limits)?;
        return Ok(Outcome::Lasso { limits, holds });
    }
    if rec.prefix.is_empty() {
        return Err(OutcomeError::EmptyPlay);
    }
    let n = rec.prefix.len();
    let averages: Vec<Q> = rec.prefix.totals().iter().map(|t| avg(t, n)).collect();
    let holds = eval(&LimitVector::exact(averages.clone()))?;
    Ok(Outcome::Estimate { averages, holds })
}
