//! Strategies for both players on compiled graphs.
//!
//! A strategy sees a summary of the play ([`PlayView`]) and answers with a
//! [`Move`]: an out-edge and how many consecutive times to take it. Repeats
//! are only allowed on self-loops; the engine asks again after the repeat.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::SimTracker;
use crate::game::{EdgeId, GameGraph, Owner, VertexId};
use crate::linpred::{min_repetitions, Lin, Pred};
use crate::machine::Side;
use crate::num::{floor_q, parse_q, q, qi, Int, Q};
use crate::reduction::{reset_weights, Annotations, BlameKind, DimensionLayout, EdgeKind, Role};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Repeat {
    Times(Int),
    Forever,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub edge: EdgeId,
    pub repeat: Repeat,
}

impl Move {
    pub fn once(edge: EdgeId) -> Self {
        Move { edge, repeat: Repeat::Times(Int::one()) }
    }

    pub fn times(edge: EdgeId, n: Int) -> Self {
        Move { edge, repeat: Repeat::Times(n) }
    }
}

pub struct PlayView<'a> {
    pub graph: &'a GameGraph,
    pub ann: Option<&'a Annotations>,
    pub vertex: VertexId,
    pub totals: &'a [Int],
    pub rounds: &'a Int,
    /// Totals and rounds when the token arrived at `vertex`.
    pub arrival_totals: &'a [Int],
    pub arrival_rounds: &'a Int,
    /// Self-loop rounds taken at `vertex` since arrival.
    pub loop_rounds: &'a Int,
    pub sim: &'a SimTracker,
}

impl PlayView<'_> {
    fn ann(&self) -> Result<&Annotations, StrategyError> {
        self.ann.ok_or(StrategyError::NeedsAnnotations)
    }

    fn role(&self) -> Result<Role, StrategyError> {
        Ok(self.ann()?.role(self.vertex))
    }

    fn self_loop(&self) -> Result<EdgeId, StrategyError> {
        self.graph.self_loop(self.vertex).ok_or(StrategyError::MissingEdge(self.vertex.0, "loop"))
    }

    fn kind_edge(&self, kind: EdgeKind) -> Result<EdgeId, StrategyError> {
        self.ann()?.edge(self.graph, self.vertex, kind).ok_or(StrategyError::MissingEdge(self.vertex.0, kind.label()))
    }

    fn leave(&self) -> Result<EdgeId, StrategyError> {
        self.ann()?.leave(self.graph, self.vertex).ok_or(StrategyError::MissingEdge(self.vertex.0, "exit"))
    }

    /// Loop until `target` self-loop rounds have been taken at this vertex, then leave.
    fn loop_then_leave(&self, target: &Int) -> Result<Move, StrategyError> {
        if self.loop_rounds < target {
            Ok(Move::times(self.self_loop()?, target - self.loop_rounds))
        } else {
            Ok(Move::once(self.leave()?))
        }
    }

    fn layout(&self) -> Result<&DimensionLayout, StrategyError> {
        Ok(&self.ann()?.layout)
    }

    fn loop_weights(&self) -> Result<Vec<i64>, StrategyError> {
        Ok(self.graph.edge(self.self_loop()?).weights.0.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StrategyError {
    #[error("vertex {0} is not a player-1 vertex")]
    NotAPlayer1Vertex(usize),
    #[error("vertex {0} is not a player-2 vertex")]
    NotAPlayer2Vertex(usize),
    #[error("this strategy needs the gadget annotations of a compiled graph")]
    NeedsAnnotations,
    #[error("vertex {0} has no {1} edge")]
    MissingEdge(usize, &'static str),
    #[error("no loop count reaches the goal at vertex {0}")]
    UnreachableGoal(usize),
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error("malformed strategy spec {0:?}: {1}")]
    BadSpec(String, String),
    #[error("the referee needs --halt-bound N")]
    HaltBoundRequired,
    #[error("halt bound must exceed 10, got {0}")]
    HaltBoundTooSmall(u64),
}

pub trait Strategy {
    fn name(&self) -> String;
    fn next(&mut self, view: &PlayView<'_>) -> Result<Move, StrategyError>;
}

/// Constants of the referee for a halting bound `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefereeParams {
    pub n: u64,
    /// `1/(N+1)^2`
    pub eps: Q,
    /// `1/(1/2 + N(1+2 eps))`
    pub delta: Q,
    /// `min(eps*delta/2, (eps/4)/(1 + 1/delta - eps/4))`
    pub gamma_side: Q,
    /// `min(1/(20N), delta/8)`
    pub gamma_counter: Q,
}

impl RefereeParams {
    pub fn new(n: u64) -> Result<Self, StrategyError> {
        if n <= 10 {
            return Err(StrategyError::HaltBoundTooSmall(n));
        }
        let nq = Q::from_integer(Int::from(n));
        let one = Q::one();
        let k = |v: i64| q(v, 1);
        let eps = one.clone() / ((nq.clone() + k(1)) * (nq.clone() + k(1)));
        let delta = one.clone() / (q(1, 2) + nq.clone() * (one.clone() + eps.clone() * k(2)));
        let quarter = eps.clone() / k(4);
        let g1 = eps.clone() * delta.clone() / k(2);
        let g2 = quarter.clone() / (one.clone() + one.clone() / delta.clone() - quarter);
        let gamma_side = g1.min(g2);
        let gamma_counter = (one / (nq * k(20))).min(delta.clone() / k(8));
        Ok(RefereeParams { n, eps, delta, gamma_side, gamma_counter })
    }
}

/// `eps_i = 1/(i + 10)` for the `i`-th reset visit.
pub fn eps_i(i: u64) -> Q {
    Q::new(Int::one(), Int::from(i + 10))
}

/// Reset invariants with tolerance `e`:
/// `Avg(gs), Avg(gc) <= -1/2`, `r` within `(1 +- e/4)|gs|`, `|l| <= (e/4)|gs|`,
/// and every counter dimension within `(1 +- e/4)|gc|`.
/// `|gs|` is written as `-gs`, which is sound because the first conjunct forces `gs < 0`.
pub fn reset_invariants(layout: &DimensionLayout, e: &Q) -> Pred {
    let quarter = e / Q::from_integer(4.into());
    let one = Q::one();
    let (l, r, gs, gc) = (layout.l(), layout.r(), layout.gs(), layout.gc());
    let mut ps = vec![
        Pred::avg_le(gs, &q(-1, 2)),
        Pred::avg_le(gc, &q(-1, 2)),
        // r >= (1 - e/4)|gs|
        Pred::Ge(Lin::dim(r).add_dim(gs, one.clone() - &quarter)),
        // r <= (1 + e/4)|gs|
        Pred::Ge(Lin::dim(r).neg().add_dim(gs, -(one.clone() + &quarter))),
        // l >= -(e/4)|gs|
        Pred::Ge(Lin::dim(l).add_dim(gs, -quarter.clone())),
        // l <= (e/4)|gs|
        Pred::Ge(Lin::dim(l).neg().add_dim(gs, -quarter.clone())),
    ];
    for c in layout.counter_dims() {
        ps.push(Pred::Ge(Lin::dim(c).add_dim(gc, one.clone() - &quarter)));
        ps.push(Pred::Ge(Lin::dim(c).neg().add_dim(gc, -(one.clone() + &quarter))));
    }
    Pred::And(ps)
}

/// Which of the four left-right invariant inequalities fails first, in the
/// order: entered dimension too low, entered dimension too high, other
/// dimension too low, other dimension too high.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideCase {
    EnteredLow,
    EnteredHigh,
    OtherLow,
    OtherHigh,
}

/// Left-right invariant for the side just entered, with tolerance `e`:
/// entered dimension in `[(1-e)|gs|, (1+e)|gs|]`, other in `[-e|gs|, e|gs|]`.
/// The entered dimension is `l` for a left state and `r` for a right state.
pub fn side_violation(layout: &DimensionLayout, totals: &[Int], entered: Side, e: &Q) -> Option<SideCase> {
    let (big, small) = match entered {
        Side::Left => (layout.l(), layout.r()),
        Side::Right => (layout.r(), layout.l()),
    };
    let g = qi(&totals[layout.gs()].abs());
    let big = qi(&totals[big]);
    let small = qi(&totals[small]);
    let one = Q::one();
    if big < (one.clone() - e) * &g {
        Some(SideCase::EnteredLow)
    } else if big > (one + e) * &g {
        Some(SideCase::EnteredHigh)
    } else if small < -(e * &g) {
        Some(SideCase::OtherLow)
    } else if small > e * &g {
        Some(SideCase::OtherHigh)
    } else {
        None
    }
}

/// Least loop count at the current vertex so that `pred` holds after
/// `extra` further zero-weight rounds, computed from the arrival totals.
fn least_loops(view: &PlayView<'_>, pred: &Pred, extra: u64) -> Result<Int, StrategyError> {
    let w = view.loop_weights()?;
    min_repetitions(pred, view.arrival_totals, view.arrival_rounds, &w, extra)
        .ok_or(StrategyError::UnreachableGoal(view.vertex.0))
}

fn expect_owner(view: &PlayView<'_>, owner: Owner) -> Result<(), StrategyError> {
    if view.graph.vertex(view.vertex).owner == owner {
        Ok(())
    } else if owner == Owner::P1 {
        Err(StrategyError::NotAPlayer1Vertex(view.vertex.0))
    } else {
        Err(StrategyError::NotAPlayer2Vertex(view.vertex.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheatDirection {
    ZeroWhenPositive,
    PositiveWhenZero,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Deviation {
    /// At the `at`-th zero-test declaration of the play (1-based), claim the given answer.
    Cheat { at: u64, direction: CheatDirection },
    /// At the `at`-th sim step of the play (1-based), loop `floor(factor*|gs|)` rounds.
    Stretch { at: u64, factor: Q },
}

/// Player 1's simulation strategy, optionally with one scripted deviation.
#[derive(Debug, Clone, Default)]
pub struct Tau {
    pub deviation: Option<Deviation>,
}

impl Tau {
    pub fn honest() -> Self {
        Tau { deviation: None }
    }
}

/// The honest move of player 1 at a P1 vertex.
pub fn tau_next(view: &PlayView<'_>) -> Result<Move, StrategyError> {
    Tau::honest().next(view)
}

impl Strategy for Tau {
    fn name(&self) -> String {
        match &self.deviation {
            None => "tau".into(),
            Some(Deviation::Cheat { at, direction }) => format!(
                "cheat:{at}:{}",
                match direction {
                    CheatDirection::ZeroWhenPositive => "zero-when-positive",
                    CheatDirection::PositiveWhenZero => "positive-when-zero",
                }
            ),
            Some(Deviation::Stretch { at, factor }) => format!("stretch:{at}:{factor}"),
        }
    }

    fn next(&mut self, view: &PlayView<'_>) -> Result<Move, StrategyError> {
        expect_owner(view, Owner::P1)?;
        let layout = view.layout()?;
        match view.role()? {
            Role::ResetB => {
                // until Avg(y) >= 0; each loop adds 1 to y
                let y = &view.arrival_totals[layout.y()];
                let target = if y.is_negative() { -y } else { Int::zero() };
                view.loop_then_leave(&target)
            }
            Role::ResetC => {
                let e = eps_i(view.sim.reset_visits);
                let pred = Pred::And(vec![reset_invariants(layout, &e), Pred::Ge(Lin::dim(layout.x()))]);
                let target = least_loops(view, &pred, 1)?;
                view.loop_then_leave(&target)
            }
            Role::Step { .. } => {
                let gs = view.arrival_totals[layout.gs()].abs();
                let target = match &self.deviation {
                    Some(Deviation::Stretch { at, factor }) if view.sim.total_steps == *at => floor_q(&(factor * qi(&gs))),
                    _ => gs,
                };
                view.loop_then_leave(&target)
            }
            Role::Declare { counter } => {
                let honest_zero = view.sim.shadow[counter as usize - 1] == 0;
                let zero = match &self.deviation {
                    Some(Deviation::Cheat { at, direction }) if view.sim.zero_tests + 1 == *at => {
                        *direction == CheatDirection::ZeroWhenPositive
                    }
                    _ => honest_zero,
                };
                view.kind_edge(if zero { EdgeKind::DeclareZero } else { EdgeKind::DeclarePositive }).map(Move::once)
            }
            _ => Err(StrategyError::NotAPlayer1Vertex(view.vertex.0)),
        }
    }
}

/// Player 2's strategy for halting machines.
#[derive(Debug, Clone)]
pub struct Referee {
    pub params: RefereeParams,
}

/// Loop count of the referee inside a blame gadget, from the values on arrival.
pub fn referee_blame_loops(layout: &DimensionLayout, params: &RefereeParams, kind: BlameKind, totals: &[Int]) -> Int {
    let eps = &params.eps;
    let one = Q::one();
    if kind.is_side() {
        let entered = match kind {
            BlameKind::RightToLeft => Side::Left,
            _ => Side::Right,
        };
        let x = qi(&totals[layout.gs()].abs());
        match side_violation(layout, totals, entered, eps) {
            Some(SideCase::EnteredLow) => floor_q(&(x * (one - eps / Q::from_integer(2.into())))),
            Some(SideCase::EnteredHigh) | Some(SideCase::OtherLow) => Int::from(2),
            Some(SideCase::OtherHigh) => floor_q(&(x * (one - eps / Q::from_integer(4.into())))),
            None => Int::zero(),
        }
    } else {
        let x = qi(&totals[layout.gc()].abs());
        let y = qi(&totals[layout.gs()].abs());
        let k = floor_q(&(x * (one + eps) - y / Q::from_integer(4.into())));
        if k.is_negative() {
            Int::zero()
        } else {
            k
        }
    }
}

/// The referee's move at a P2 vertex.
pub fn referee_next(view: &PlayView<'_>, params: &RefereeParams) -> Result<Move, StrategyError> {
    expect_owner(view, Owner::P2)?;
    let layout = view.layout()?;
    match view.role()? {
        Role::ResetA => {
            let target = least_loops(view, &reset_invariants(layout, &params.eps), 3)?;
            view.loop_then_leave(&target)
        }
        Role::SideCheck { dir } => {
            let bad = side_violation(layout, view.totals, dir.entered(), &params.eps).is_some();
            view.kind_edge(if bad { EdgeKind::Blame } else { EdgeKind::Ok }).map(Move::once)
        }
        Role::PositiveCheck { counter } => {
            let bad = view.sim.shadow[counter as usize - 1] > 0;
            view.kind_edge(if bad { EdgeKind::Blame } else { EdgeKind::Ok }).map(Move::once)
        }
        Role::NegativeCheck { counter } => {
            let bad = view.sim.shadow[counter as usize - 1] < 0;
            view.kind_edge(if bad { EdgeKind::Blame } else { EdgeKind::Ok }).map(Move::once)
        }
        Role::Blame(kind) => view.loop_then_leave(&referee_blame_loops(layout, params, kind, view.arrival_totals)),
        Role::Final => Ok(Move { edge: view.self_loop()?, repeat: Repeat::Forever }),
        _ => Err(StrategyError::NotAPlayer2Vertex(view.vertex.0)),
    }
}

impl Strategy for Referee {
    fn name(&self) -> String {
        format!("referee(N={})", self.params.n)
    }

    fn next(&mut self, view: &PlayView<'_>) -> Result<Move, StrategyError> {
        referee_next(view, &self.params)
    }
}

/// Uniform choice among out-edges, one round at a time.
#[derive(Debug, Clone)]
pub struct RandomStrategy {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomStrategy {
    pub fn new(seed: u64) -> Self {
        RandomStrategy { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Strategy for RandomStrategy {
    fn name(&self) -> String {
        format!("random:{}", self.seed)
    }

    fn next(&mut self, view: &PlayView<'_>) -> Result<Move, StrategyError> {
        let out = view.graph.out_edges(view.vertex);
        Ok(Move::once(out[self.rng.gen_range(0..out.len())]))
    }
}

/// Adversarial player-2 behaviours used against player 1's strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum P2Fixture {
    /// Leaves the reset at once and never blames.
    NeverBlame,
    /// Leaves the reset at once, blames at the first `side?` of every
    /// simulation and loops until the blamed dimension averages `-eps_i` or less.
    Spurious,
    /// Odd reset visits: leave the reset at once and blame the first `side?`
    /// for two rounds. Even visits: loop the reset as long as the play so
    /// far, then blame at the first `c<0?` until `Avg(c+) <= -eps_i`.
    Mixed,
}

impl Strategy for P2Fixture {
    fn name(&self) -> String {
        match self {
            P2Fixture::NeverBlame => "never-blame",
            P2Fixture::Spurious => "spurious",
            P2Fixture::Mixed => "mixed",
        }
        .into()
    }

    fn next(&mut self, view: &PlayView<'_>) -> Result<Move, StrategyError> {
        expect_owner(view, Owner::P2)?;
        let layout = view.layout()?;
        let odd = view.sim.reset_visits % 2 == 1;
        let first_step = view.sim.steps == 1;
        let (ok, blame) = (EdgeKind::Ok, EdgeKind::Blame);
        let this = *self;
        match (this, view.role()?) {
            (_, Role::Final) => Ok(Move { edge: view.self_loop()?, repeat: Repeat::Forever }),
            (P2Fixture::Mixed, Role::ResetA) if !odd => view.loop_then_leave(view.arrival_rounds),
            (_, Role::ResetA) => view.loop_then_leave(&Int::zero()),
            (P2Fixture::Spurious, Role::SideCheck { .. }) | (P2Fixture::Mixed, Role::SideCheck { .. }) if first_step && (odd || this == P2Fixture::Spurious) => {
                view.kind_edge(blame).map(Move::once)
            }
            (P2Fixture::Mixed, Role::NegativeCheck { .. }) if !odd => view.kind_edge(blame).map(Move::once),
            (_, Role::SideCheck { .. }) | (_, Role::PositiveCheck { .. }) | (_, Role::NegativeCheck { .. }) => {
                view.kind_edge(ok).map(Move::once)
            }
            (P2Fixture::Mixed, Role::Blame(kind)) if kind.is_side() => view.loop_then_leave(&Int::from(2)),
            (_, Role::Blame(kind)) => {
                let e = eps_i(view.sim.reset_visits);
                let target = least_loops(view, &Pred::avg_le(kind.target(layout), &-e), 0)?;
                view.loop_then_leave(&target)
            }
            _ => Err(StrategyError::NotAPlayer2Vertex(view.vertex.0)),
        }
    }
}

/// Parses `tau`, `cheat:K:zero-when-positive|positive-when-zero`,
/// `stretch:K:FACTOR`, `random:SEED` (player 1) or `referee`, `never-blame`,
/// `spurious`, `mixed`, `random:SEED` (player 2).
pub fn parse_strategy(spec: &str, owner: Owner, halt_bound: Option<u64>) -> Result<Box<dyn Strategy>, StrategyError> {
    let bad = |msg: &str| StrategyError::BadSpec(spec.to_string(), msg.to_string());
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| s.parse::<u64>().map_err(|_| bad("expected a nonnegative integer"));
    match (owner, parts.as_slice()) {
        (_, ["random", seed]) => Ok(Box::new(RandomStrategy::new(num(seed)?))),
        (Owner::P1, ["tau"]) => Ok(Box::new(Tau::honest())),
        (Owner::P1, ["cheat", at, dir]) => {
            let direction = match *dir {
                "zero-when-positive" => CheatDirection::ZeroWhenPositive,
                "positive-when-zero" => CheatDirection::PositiveWhenZero,
                _ => return Err(bad("direction must be zero-when-positive or positive-when-zero")),
            };
            let at = num(at)?;
            if at == 0 {
                return Err(bad("cheat index is 1-based"));
            }
            Ok(Box::new(Tau { deviation: Some(Deviation::Cheat { at, direction }) }))
        }
        (Owner::P1, ["stretch", at, factor]) => {
            let factor = parse_q(factor).map_err(|_| bad("factor must be a rational"))?;
            if factor.is_negative() {
                return Err(bad("factor must be nonnegative"));
            }
            Ok(Box::new(Tau { deviation: Some(Deviation::Stretch { at: num(at)?, factor }) }))
        }
        (Owner::P2, ["referee"]) => {
            let n = halt_bound.ok_or(StrategyError::HaltBoundRequired)?;
            Ok(Box::new(Referee { params: RefereeParams::new(n)? }))
        }
        (Owner::P2, ["never-blame"]) => Ok(Box::new(P2Fixture::NeverBlame)),
        (Owner::P2, ["spurious"]) => Ok(Box::new(P2Fixture::Spurious)),
        (Owner::P2, ["mixed"]) => Ok(Box::new(P2Fixture::Mixed)),
        _ => Err(StrategyError::UnknownStrategy(spec.to_string())),
    }
}

/// Loop weights of reset vertex `role` (convenience for tests and monitors).
pub fn reset_loop(layout: &DimensionLayout, role: Role) -> Vec<i64> {
    reset_weights(layout, role).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_for_eleven() {
        let p = RefereeParams::new(11).unwrap();
        assert_eq!(p.eps, q(1, 144));
        assert_eq!(p.delta, q(72, 839));
        assert_eq!(p.gamma_side, q(1, 7287));
        assert_eq!(p.gamma_counter, q(1, 220));
        assert!(RefereeParams::new(10).is_err());
    }

    #[test]
    fn eps_index_starts_at_one_eleventh() {
        assert_eq!(eps_i(1), q(1, 11));
    }

    #[test]
    fn side_cases_in_order() {
        let l = DimensionLayout::one_counter();
        let t = |lv: i64, r: i64| {
            let mut v = vec![Int::zero(); 8];
            v[0] = Int::from(lv);
            v[1] = Int::from(r);
            v[2] = Int::from(-100);
            v
        };
        let e = q(1, 10);
        assert_eq!(side_violation(&l, &t(100, 0), Side::Left, &e), None);
        assert_eq!(side_violation(&l, &t(80, 20), Side::Left, &e), Some(SideCase::EnteredLow));
        assert_eq!(side_violation(&l, &t(120, -20), Side::Left, &e), Some(SideCase::EnteredHigh));
        assert_eq!(side_violation(&l, &t(100, -20), Side::Left, &e), Some(SideCase::OtherLow));
        assert_eq!(side_violation(&l, &t(95, 20), Side::Left, &e), Some(SideCase::OtherHigh));
        assert_eq!(side_violation(&l, &t(0, 100), Side::Right, &e), None);
    }

    #[test]
    fn spec_strings() {
        assert_eq!(parse_strategy("tau", Owner::P1, None).unwrap().name(), "tau");
        assert_eq!(parse_strategy("cheat:12:zero-when-positive", Owner::P1, None).unwrap().name(), "cheat:12:zero-when-positive");
        assert_eq!(parse_strategy("stretch:3:1/2", Owner::P1, None).unwrap().name(), "stretch:3:1/2");
        assert!(matches!(parse_strategy("referee", Owner::P2, None), Err(StrategyError::HaltBoundRequired)));
        assert!(parse_strategy("referee", Owner::P2, Some(11)).is_ok());
        assert!(matches!(parse_strategy("tau", Owner::P2, None), Err(StrategyError::UnknownStrategy(_))));
        assert!(matches!(parse_strategy("cheat:x:zero-when-positive", Owner::P1, None), Err(StrategyError::BadSpec(..))));
    }
}
