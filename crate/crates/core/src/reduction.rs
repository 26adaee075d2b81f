//! Compilation of a two-sided counter machine into a game graph with the
//! reset, sim, blame and final gadgets, plus the winning condition.
//!
//! Layout of the sim part: after the reset gadget a fresh nop r->l "entry"
//! step brings the play into `q0`. Each machine state `q` then owns one
//! gadget instance implementing its instruction:
//!
//! * nop / inc / dec steps: a P1 loop vertex, an exit to a P2 `side?` vertex,
//!   `ok` to the next state's gadget and `blame` to a private blame gadget;
//! * zero tests: a P1 declaration vertex branching into `c>0?` (then a nop
//!   l->r step) or a dec l->r step followed by `c<0?`;
//! * the final state: a sink with the `x <- -1` self-loop.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::condition::{Atom, Condition};
use crate::game::{EdgeId, GameError, GameGraph, GraphBuilder, Owner, VertexId, WeightVector};
use crate::machine::{validate, Instruction, Side, StateId, TwoSidedMachine, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionLayout {
    counters: u8,
    names: Vec<String>,
}

impl DimensionLayout {
    pub fn for_counters(counters: u8) -> Self {
        let mut names: Vec<String> = ["l", "r", "gs"].iter().map(|s| s.to_string()).collect();
        if counters == 1 {
            names.extend(["c+".to_string(), "c-".to_string()]);
        } else {
            for j in 1..=counters {
                names.extend([format!("c{j}+"), format!("c{j}-")]);
            }
        }
        names.extend(["gc", "x", "y"].iter().map(|s| s.to_string()));
        DimensionLayout { counters, names }
    }

    pub fn one_counter() -> Self {
        Self::for_counters(1)
    }

    pub fn two_counters() -> Self {
        Self::for_counters(2)
    }

    pub fn counters(&self) -> u8 {
        self.counters
    }

    pub fn k(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, d: usize) -> &str {
        &self.names[d]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn l(&self) -> usize {
        0
    }

    pub fn r(&self) -> usize {
        1
    }

    pub fn gs(&self) -> usize {
        2
    }

    /// `c+` of counter `j` (1-based).
    pub fn cp(&self, j: u8) -> usize {
        3 + 2 * (j as usize - 1)
    }

    /// `c-` of counter `j` (1-based).
    pub fn cm(&self, j: u8) -> usize {
        4 + 2 * (j as usize - 1)
    }

    pub fn gc(&self) -> usize {
        3 + 2 * self.counters as usize
    }

    pub fn x(&self) -> usize {
        self.gc() + 1
    }

    pub fn y(&self) -> usize {
        self.gc() + 2
    }

    pub fn counter_dims(&self) -> Vec<usize> {
        (1..=self.counters).flat_map(|j| [self.cp(j), self.cm(j)]).collect()
    }

    fn weights(&self, pairs: &[(usize, i64)]) -> WeightVector {
        let mut w = vec![0; self.k()];
        for &(d, v) in pairs {
            w[d] += v;
        }
        WeightVector(w)
    }
}

/// Direction of a sim step. The entered machine side is the arrow head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dir {
    LeftToRight,
    RightToLeft,
}

impl Dir {
    pub fn entered(self) -> Side {
        match self {
            Dir::LeftToRight => Side::Right,
            Dir::RightToLeft => Side::Left,
        }
    }

    pub fn arrow(self) -> &'static str {
        match self {
            Dir::LeftToRight => "l->r",
            Dir::RightToLeft => "r->l",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StepOp {
    Nop,
    Inc(u8),
    Dec(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlameKind {
    /// After an r->l step: decrements `l`, raises `gs`.
    RightToLeft,
    /// After an l->r step: decrements `r`, raises `gs`.
    LeftToRight,
    /// `c>0` blame of counter j: decrements `c-`, raises `gc`.
    Positive(u8),
    /// `c<0` blame of counter j: decrements `c+`, raises `gc`.
    Negative(u8),
}

impl BlameKind {
    pub fn for_dir(dir: Dir) -> Self {
        match dir {
            Dir::LeftToRight => BlameKind::LeftToRight,
            Dir::RightToLeft => BlameKind::RightToLeft,
        }
    }

    pub fn is_side(self) -> bool {
        matches!(self, BlameKind::RightToLeft | BlameKind::LeftToRight)
    }

    /// The dimension the blame loop drives down.
    pub fn target(self, layout: &DimensionLayout) -> usize {
        match self {
            BlameKind::RightToLeft => layout.l(),
            BlameKind::LeftToRight => layout.r(),
            BlameKind::Positive(j) => layout.cm(j),
            BlameKind::Negative(j) => layout.cp(j),
        }
    }

    /// The guard dimension the blame loop raises.
    pub fn guard(self, layout: &DimensionLayout) -> usize {
        if self.is_side() {
            layout.gs()
        } else {
            layout.gc()
        }
    }
}

impl fmt::Display for BlameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlameKind::RightToLeft => f.write_str("blame r->l"),
            BlameKind::LeftToRight => f.write_str("blame l->r"),
            BlameKind::Positive(j) => write!(f, "blame c{j}>0"),
            BlameKind::Negative(j) => write!(f, "blame c{j}<0"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    ResetA,
    ResetB,
    ResetC,
    /// First (looping) vertex of a nop/inc/dec gadget. `entry` marks the
    /// step that brings a fresh simulation into `q0`.
    Step { op: StepOp, dir: Dir, entry: bool },
    SideCheck { dir: Dir },
    Declare { counter: u8 },
    /// `c>0?`
    PositiveCheck { counter: u8 },
    /// `c<0?`
    NegativeCheck { counter: u8 },
    Blame(BlameKind),
    Final,
}

impl Role {
    pub fn owner(self) -> Owner {
        match self {
            Role::ResetB | Role::ResetC | Role::Step { .. } | Role::Declare { .. } => Owner::P1,
            _ => Owner::P2,
        }
    }

    pub fn short(self) -> String {
        match self {
            Role::ResetA => "A".into(),
            Role::ResetB => "B".into(),
            Role::ResetC => "C".into(),
            Role::Step { op, dir, entry } => {
                let name = match op {
                    StepOp::Nop => "nop".to_string(),
                    StepOp::Inc(j) => format!("inc c{j}"),
                    StepOp::Dec(j) => format!("dec c{j}"),
                };
                format!("{}{} {}", if entry { "entry " } else { "" }, name, dir.arrow())
            }
            Role::SideCheck { .. } => "side?".into(),
            Role::Declare { counter } => format!("declare c{counter}"),
            Role::PositiveCheck { counter } => format!("c{counter}>0?"),
            Role::NegativeCheck { counter } => format!("c{counter}<0?"),
            Role::Blame(k) => k.to_string(),
            Role::Final => "qf".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VertexTag {
    pub role: Role,
    /// Machine state whose instruction this gadget implements (the final
    /// state for the sink; none for the reset and entry gadgets).
    pub state: Option<String>,
    pub cluster: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    Loop,
    Exit,
    Ok,
    Blame,
    DeclareZero,
    DeclarePositive,
    ToReset,
    StartSim,
}

impl EdgeKind {
    pub fn label(self) -> &'static str {
        match self {
            EdgeKind::Loop => "loop",
            EdgeKind::Exit => "exit",
            EdgeKind::Ok => "ok",
            EdgeKind::Blame => "blame",
            EdgeKind::DeclareZero => "declare c=0",
            EdgeKind::DeclarePositive => "declare c>0",
            EdgeKind::ToReset => "reset",
            EdgeKind::StartSim => "start",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        [
            EdgeKind::Loop,
            EdgeKind::Exit,
            EdgeKind::Ok,
            EdgeKind::Blame,
            EdgeKind::DeclareZero,
            EdgeKind::DeclarePositive,
            EdgeKind::ToReset,
            EdgeKind::StartSim,
        ]
        .into_iter()
        .find(|k| k.label() == s)
    }
}

/// Per-vertex and per-edge annotations of a compiled graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotations {
    pub layout: DimensionLayout,
    pub tags: Vec<VertexTag>,
    pub edge_kinds: Vec<EdgeKind>,
    pub clusters: Vec<String>,
}

impl Annotations {
    pub fn tag(&self, v: VertexId) -> &VertexTag {
        &self.tags[v.0]
    }

    pub fn role(&self, v: VertexId) -> Role {
        self.tags[v.0].role
    }

    pub fn kind(&self, e: EdgeId) -> EdgeKind {
        self.edge_kinds[e.0]
    }

    /// The unique out-edge of `v` with the given kind.
    pub fn edge(&self, g: &GameGraph, v: VertexId, kind: EdgeKind) -> Option<EdgeId> {
        g.out_edges(v).iter().copied().find(|e| self.edge_kinds[e.0] == kind)
    }

    /// The non-loop out-edge of a loop vertex.
    pub fn leave(&self, g: &GameGraph, v: VertexId) -> Option<EdgeId> {
        g.out_edges(v).iter().copied().find(|e| self.edge_kinds[e.0] != EdgeKind::Loop)
    }

    pub fn find_role(&self, role: Role) -> Vec<VertexId> {
        (0..self.tags.len()).map(VertexId).filter(|v| self.tags[v.0].role == role).collect()
    }

    pub fn reset_a(&self) -> VertexId {
        self.find_role(Role::ResetA)[0]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionOutput {
    pub graph: GameGraph,
    pub condition: Condition,
    pub layout: DimensionLayout,
    pub annotations: Annotations,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReductionError {
    #[error("invalid machine: {}", .0.iter().map(|v| v.0.as_str()).collect::<Vec<_>>().join("; "))]
    InvalidMachine(Vec<Violation>),
    #[error(transparent)]
    Graph(#[from] GameError),
}

/// Self-loop weights of a nop/inc/dec gadget.
pub fn step_weights(layout: &DimensionLayout, op: StepOp, dir: Dir) -> WeightVector {
    let (l, r) = match dir {
        Dir::LeftToRight => (-1, 1),
        Dir::RightToLeft => (1, -1),
    };
    let mut pairs = vec![(layout.l(), l), (layout.r(), r), (layout.gc(), -1)];
    for j in 1..=layout.counters() {
        let (p, m) = match op {
            StepOp::Inc(c) if c == j => (2, 0),
            StepOp::Dec(c) if c == j => (0, 2),
            _ => (1, 1),
        };
        pairs.push((layout.cp(j), p));
        pairs.push((layout.cm(j), m));
    }
    layout.weights(&pairs)
}

pub fn blame_weights(layout: &DimensionLayout, kind: BlameKind) -> WeightVector {
    layout.weights(&[(kind.target(layout), -1), (kind.guard(layout), 1)])
}

/// Self-loop weights of reset vertex A, B or C.
pub fn reset_weights(layout: &DimensionLayout, role: Role) -> WeightVector {
    let mut pairs = vec![(layout.r(), 1), (layout.gs(), -1), (layout.gc(), -1)];
    pairs.extend(layout.counter_dims().into_iter().map(|d| (d, 1)));
    match role {
        Role::ResetA => {}
        Role::ResetB => pairs.extend([(layout.x(), -1), (layout.y(), 1)]),
        Role::ResetC => pairs.extend([(layout.x(), 1), (layout.y(), -1)]),
        other => panic!("{other:?} is not a reset vertex"),
    }
    layout.weights(&pairs)
}

pub fn final_weights(layout: &DimensionLayout) -> WeightVector {
    layout.weights(&[(layout.x(), -1)])
}

/// The condition with thresholds 0:
/// `(inf l & inf r | sup gs) & (inf c+ & inf c- | sup gc) & sup x & sup y`
/// (with all four counter atoms for two counters).
pub fn build_condition(layout: &DimensionLayout) -> Condition {
    let inf = |d| Condition::Atom(Atom::inf_nonneg(d));
    let sup = |d| Condition::Atom(Atom::sup_nonneg(d));
    Condition::And(vec![
        Condition::Or(vec![Condition::And(vec![inf(layout.l()), inf(layout.r())]), sup(layout.gs())]),
        Condition::Or(vec![Condition::And(layout.counter_dims().into_iter().map(inf).collect()), sup(layout.gc())]),
        sup(layout.x()),
        sup(layout.y()),
    ])
}

struct Ctx {
    b: GraphBuilder,
    layout: DimensionLayout,
    tags: Vec<VertexTag>,
    kinds: Vec<EdgeKind>,
    clusters: Vec<String>,
    reset_a: VertexId,
}

impl Ctx {
    fn vertex(&mut self, role: Role, state: Option<&str>, cluster: usize) -> VertexId {
        let label = format!("{}: {}", self.clusters[cluster], role.short());
        let v = self.b.add_vertex(role.owner(), Some(label));
        self.tags.push(VertexTag { role, state: state.map(str::to_string), cluster });
        v
    }

    fn edge(&mut self, src: VertexId, dst: VertexId, w: Option<WeightVector>, kind: EdgeKind) -> EdgeId {
        let w = w.unwrap_or_else(|| WeightVector::zero(self.layout.k()));
        self.kinds.push(kind);
        self.b.add_edge(src, dst, w, kind.label())
    }

    fn cluster(&mut self, name: String) -> usize {
        self.clusters.push(name);
        self.clusters.len() - 1
    }

    /// Blame gadget: a P2 loop vertex whose only other edge goes to reset A.
    fn blame_gadget(&mut self, kind: BlameKind, state: Option<&str>, cluster: usize) -> VertexId {
        let v = self.vertex(Role::Blame(kind), state, cluster);
        let w = blame_weights(&self.layout, kind);
        self.edge(v, v, Some(w), EdgeKind::Loop);
        let a = self.reset_a;
        self.edge(v, a, None, EdgeKind::ToReset);
        v
    }

    /// Nop/inc/dec gadget on a preallocated loop vertex. Returns the `side?`
    /// vertex; its `ok` edge leads to `next`.
    fn step_gadget(&mut self, lp: VertexId, op: StepOp, dir: Dir, next: VertexId, state: Option<&str>, cluster: usize) -> VertexId {
        let w = step_weights(&self.layout, op, dir);
        self.edge(lp, lp, Some(w), EdgeKind::Loop);
        let side = self.vertex(Role::SideCheck { dir }, state, cluster);
        self.edge(lp, side, None, EdgeKind::Exit);
        self.edge(side, next, None, EdgeKind::Ok);
        let blame = self.blame_gadget(BlameKind::for_dir(dir), state, cluster);
        self.edge(side, blame, None, EdgeKind::Blame);
        side
    }

    /// Zero test `q: if cj=0 goto p else dec goto p'` on a preallocated
    /// declaration vertex.
    fn zero_test(&mut self, decl: VertexId, j: u8, on_zero: VertexId, on_pos: VertexId, state: Option<&str>, cluster: usize) {
        let pos_check = self.vertex(Role::PositiveCheck { counter: j }, state, cluster);
        self.edge(decl, pos_check, None, EdgeKind::DeclareZero);
        let nop = self.vertex(Role::Step { op: StepOp::Nop, dir: Dir::LeftToRight, entry: false }, state, cluster);
        self.edge(pos_check, nop, None, EdgeKind::Ok);
        let blame = self.blame_gadget(BlameKind::Positive(j), state, cluster);
        self.edge(pos_check, blame, None, EdgeKind::Blame);
        self.step_gadget(nop, StepOp::Nop, Dir::LeftToRight, on_zero, state, cluster);

        let dec = self.vertex(Role::Step { op: StepOp::Dec(j), dir: Dir::LeftToRight, entry: false }, state, cluster);
        self.edge(decl, dec, None, EdgeKind::DeclarePositive);
        let neg_check = self.vertex(Role::NegativeCheck { counter: j }, state, cluster);
        self.step_gadget(dec, StepOp::Dec(j), Dir::LeftToRight, neg_check, state, cluster);
        self.edge(neg_check, on_pos, None, EdgeKind::Ok);
        let blame = self.blame_gadget(BlameKind::Negative(j), state, cluster);
        self.edge(neg_check, blame, None, EdgeKind::Blame);
    }
}

/// Number of vertices each gadget contributes.
pub mod sizes {
    pub const RESET: usize = 3;
    /// Entry nop step: loop, `side?`, blame.
    pub const ENTRY: usize = 3;
    pub const FINAL: usize = 1;
    /// Nop or inc step: loop, `side?`, blame.
    pub const STEP: usize = 3;
    /// Declaration, `c>0?` and its blame, nop step (3), dec step (3), `c<0?` and its blame.
    pub const ZERO_TEST: usize = 11;
}

/// Closed-form vertex count of `build_game(m)`.
pub fn expected_vertex_count(m: &TwoSidedMachine) -> usize {
    let body: usize = m
        .state_ids()
        .filter_map(|s| m.instruction(s))
        .map(|i| match i {
            Instruction::Branch { .. } => sizes::ZERO_TEST,
            _ => sizes::STEP,
        })
        .sum();
    sizes::RESET + sizes::ENTRY + sizes::FINAL + body
}

pub fn build_game(m: &TwoSidedMachine) -> Result<ReductionOutput, ReductionError> {
    let violations = validate(m);
    if !violations.is_empty() {
        return Err(ReductionError::InvalidMachine(violations));
    }
    let layout = DimensionLayout::for_counters(m.counters());
    let mut cx = Ctx {
        b: GraphBuilder::new(layout.k()),
        layout: layout.clone(),
        tags: Vec::new(),
        kinds: Vec::new(),
        clusters: Vec::new(),
        reset_a: VertexId(0),
    };

    let reset = cx.cluster("reset".into());
    let a = cx.vertex(Role::ResetA, None, reset);
    cx.reset_a = a;
    let b = cx.vertex(Role::ResetB, None, reset);
    let c = cx.vertex(Role::ResetC, None, reset);
    for (v, role) in [(a, Role::ResetA), (b, Role::ResetB), (c, Role::ResetC)] {
        let w = reset_weights(&layout, role);
        cx.edge(v, v, Some(w), EdgeKind::Loop);
    }
    cx.edge(a, b, None, EdgeKind::Exit);
    cx.edge(b, c, None, EdgeKind::Exit);

    let entry_cluster = cx.cluster("entry".into());
    let entry = cx.vertex(Role::Step { op: StepOp::Nop, dir: Dir::RightToLeft, entry: true }, None, entry_cluster);
    cx.edge(c, entry, None, EdgeKind::StartSim);

    // first vertex of every state's gadget, allocated up front so that
    // `ok` edges can point forward
    let mut first: Vec<VertexId> = Vec::with_capacity(m.states().len());
    let mut clusters: Vec<usize> = Vec::with_capacity(m.states().len());
    for s in m.state_ids() {
        let name = m.name(s).to_string();
        let (role, label) = if s == m.fin() {
            (Role::Final, format!("{name} (final)"))
        } else {
            match *m.instruction(s).expect("validated") {
                Instruction::Branch { counter, .. } => (Role::Declare { counter }, format!("{name} (zero test c{counter})")),
                Instruction::LeftNop { .. } => (Role::Step { op: StepOp::Nop, dir: Dir::LeftToRight, entry: false }, format!("{name} (nop)")),
                Instruction::RightNop { .. } => (Role::Step { op: StepOp::Nop, dir: Dir::RightToLeft, entry: false }, format!("{name} (nop)")),
                Instruction::Inc { counter, .. } => (
                    Role::Step { op: StepOp::Inc(counter), dir: Dir::RightToLeft, entry: false },
                    format!("{name} (inc c{counter})"),
                ),
            }
        };
        let cl = cx.cluster(label);
        first.push(cx.vertex(role, Some(&name), cl));
        clusters.push(cl);
    }
    let at = |s: StateId| first[s.0];

    cx.step_gadget(entry, StepOp::Nop, Dir::RightToLeft, at(m.init()), None, entry_cluster);

    for s in m.state_ids() {
        let name = m.name(s).to_string();
        let v = at(s);
        let cl = clusters[s.0];
        if s == m.fin() {
            let w = final_weights(&layout);
            cx.edge(v, v, Some(w), EdgeKind::Loop);
            continue;
        }
        match *m.instruction(s).expect("validated") {
            Instruction::Branch { counter, on_zero, on_pos } => {
                cx.zero_test(v, counter, at(on_zero), at(on_pos), Some(&name), cl);
            }
            Instruction::LeftNop { target } => {
                cx.step_gadget(v, StepOp::Nop, Dir::LeftToRight, at(target), Some(&name), cl);
            }
            Instruction::RightNop { target } => {
                cx.step_gadget(v, StepOp::Nop, Dir::RightToLeft, at(target), Some(&name), cl);
            }
            Instruction::Inc { counter, target } => {
                cx.step_gadget(v, StepOp::Inc(counter), Dir::RightToLeft, at(target), Some(&name), cl);
            }
        }
    }

    let graph = cx.b.build(a)?;
    let annotations = Annotations { layout: layout.clone(), tags: cx.tags, edge_kinds: cx.kinds, clusters: cx.clusters };
    Ok(ReductionOutput { graph, condition: build_condition(&layout), layout, annotations })
}

/// Whether the final sink is reachable from the entry step in the graph.
pub fn final_reachable_in_graph(out: &ReductionOutput) -> bool {
    let g = &out.graph;
    let ann = &out.annotations;
    let Some(&entry) = ann.find_role(Role::Step { op: StepOp::Nop, dir: Dir::RightToLeft, entry: true }).first() else {
        return false;
    };
    let mut seen = vec![false; g.vertex_count()];
    let mut stack = vec![entry];
    while let Some(v) = stack.pop() {
        if std::mem::replace(&mut seen[v.0], true) {
            continue;
        }
        if ann.role(v) == Role::Final {
            return true;
        }
        for &e in g.out_edges(v) {
            // blame and reset edges leave the simulation
            if !matches!(ann.kind(e), EdgeKind::Blame | EdgeKind::ToReset) {
                stack.push(g.edge(e).dst);
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condition::normalize_positive;
    use crate::machine::parse_machine;

    const LOOP: &str = "counters: 1\nleft q0 q1 qf\nright p0 p1\ninit q0\nfinal qf\n\
        q0: goto p0\np0: inc c goto q1\nq1: if c=0 goto p1 else dec goto p0\np1: goto qf\n";

    #[test]
    fn layouts() {
        let one = DimensionLayout::one_counter();
        assert_eq!(one.names(), ["l", "r", "gs", "c+", "c-", "gc", "x", "y"]);
        let two = DimensionLayout::two_counters();
        assert_eq!(two.k(), 10);
        assert_eq!((two.cp(2), two.cm(2), two.gc(), two.y()), (5, 6, 7, 9));
    }

    #[test]
    fn figure_weights_one_counter() {
        let l = DimensionLayout::one_counter();
        assert_eq!(step_weights(&l, StepOp::Nop, Dir::RightToLeft).0, [1, -1, 0, 1, 1, -1, 0, 0]);
        assert_eq!(step_weights(&l, StepOp::Nop, Dir::LeftToRight).0, [-1, 1, 0, 1, 1, -1, 0, 0]);
        assert_eq!(step_weights(&l, StepOp::Dec(1), Dir::LeftToRight).0, [-1, 1, 0, 0, 2, -1, 0, 0]);
        assert_eq!(step_weights(&l, StepOp::Inc(1), Dir::RightToLeft).0, [1, -1, 0, 2, 0, -1, 0, 0]);
        assert_eq!(blame_weights(&l, BlameKind::RightToLeft).0, [-1, 0, 1, 0, 0, 0, 0, 0]);
        assert_eq!(blame_weights(&l, BlameKind::LeftToRight).0, [0, -1, 1, 0, 0, 0, 0, 0]);
        assert_eq!(blame_weights(&l, BlameKind::Positive(1)).0, [0, 0, 0, 0, -1, 1, 0, 0]);
        assert_eq!(blame_weights(&l, BlameKind::Negative(1)).0, [0, 0, 0, -1, 0, 1, 0, 0]);
        assert_eq!(reset_weights(&l, Role::ResetA).0, [0, 1, -1, 1, 1, -1, 0, 0]);
        assert_eq!(reset_weights(&l, Role::ResetB).0, [0, 1, -1, 1, 1, -1, -1, 1]);
        assert_eq!(reset_weights(&l, Role::ResetC).0, [0, 1, -1, 1, 1, -1, 1, -1]);
        assert_eq!(final_weights(&l).0, [0, 0, 0, 0, 0, 0, -1, 0]);
    }

    #[test]
    fn two_counter_inc_gives_other_counter_nop_weights() {
        let l = DimensionLayout::two_counters();
        assert_eq!(step_weights(&l, StepOp::Inc(2), Dir::RightToLeft).0, [1, -1, 0, 1, 1, 2, 0, -1, 0, 0]);
        assert_eq!(step_weights(&l, StepOp::Dec(1), Dir::LeftToRight).0, [-1, 1, 0, 0, 2, 1, 1, -1, 0, 0]);
    }

    #[test]
    fn compiled_graph_is_well_formed() {
        let m = parse_machine(LOOP).unwrap();
        let out = build_game(&m).unwrap();
        let g = &out.graph;
        assert_eq!(g.vertex_count(), expected_vertex_count(&m));
        assert_eq!(out.annotations.role(g.initial()), Role::ResetA);
        for (i, e) in g.edges().iter().enumerate() {
            if out.annotations.kind(EdgeId(i)) != EdgeKind::Loop {
                assert!(e.weights.is_zero(), "{e:?}");
            }
            if e.is_self_loop() {
                let w = &e.weights.0;
                let role = out.annotations.role(e.src);
                if let Role::Step { .. } = role {
                    assert_eq!(w[0] + w[1], 0);
                    assert_eq!(w[3] + w[4], 2);
                    assert_eq!(w[5], -1);
                }
            }
            if out.annotations.kind(EdgeId(i)) == EdgeKind::ToReset {
                assert_eq!(out.annotations.role(e.dst), Role::ResetA);
            }
        }
        assert!(final_reachable_in_graph(&out));
        assert_eq!(normalize_positive(&out.condition), out.condition);
    }

    #[test]
    fn invalid_machine_is_rejected() {
        let m = parse_machine(&LOOP.replace("q0: goto p0", "q0: goto q1")).unwrap();
        assert!(matches!(build_game(&m), Err(ReductionError::InvalidMachine(_))));
    }

    #[test]
    fn condition_shape() {
        let c = build_condition(&DimensionLayout::one_counter());
        assert_eq!(
            c.to_string(),
            "(inf(0) >= 0 & inf(1) >= 0 | sup(2) >= 0) & (inf(3) >= 0 & inf(4) >= 0 | sup(5) >= 0) & sup(6) >= 0 & sup(7) >= 0"
        );
        let c2 = build_condition(&DimensionLayout::two_counters());
        assert_eq!(c2.atoms().len(), 10);
    }
}
