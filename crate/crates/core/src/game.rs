//! Game graphs with integer weight vectors, run-length encoded play prefixes,
//! finite-prefix averages, and exact limit vectors of lasso plays.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::num::{avg, Int, Q};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GameError {
    #[error("average of an empty prefix is undefined")]
    EmptyPrefix,
    #[error("cycle is not a closed path of length at least one")]
    NotAClosedPath,
    #[error("stem ends at vertex {stem_end} but the cycle starts at vertex {cycle_start}")]
    DisconnectedStem { stem_end: usize, cycle_start: usize },
    #[error("dimension {dim} out of range for {dims} dimensions")]
    DimensionOutOfRange { dim: usize, dims: usize },
    #[error("checkpoint {0} is outside the trace")]
    CheckpointOutOfRange(Int),
    #[error("checkpoints must be strictly increasing")]
    UnsortedCheckpoints,
    #[error("edge {edge} does not leave vertex {vertex}")]
    NotAnOutEdge { edge: usize, vertex: usize },
    #[error("edge {0} is not a self-loop and cannot be repeated")]
    RepeatOfNonLoop(usize),
    #[error("no edge with id {0}")]
    UnknownEdge(usize),
    #[error("no vertex with id {0}")]
    UnknownVertex(usize),
    #[error("vertex {0} has no outgoing edge")]
    DeadEnd(usize),
    #[error("edge {edge} has {got} weights, expected {dims}")]
    WeightArity { edge: usize, got: usize, dims: usize },
    #[error("limit vector has inf > sup in dimension {0}")]
    InfExceedsSup(usize),
    #[error("inf and sup vectors differ in length")]
    LengthMismatch,
    #[error("repeat count must be positive")]
    NonPositiveRepeat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DimIndex(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Owner {
    P1,
    P2,
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Owner::P1 => "P1",
            Owner::P2 => "P2",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightVector(pub Vec<i64>);

impl WeightVector {
    pub fn zero(dims: usize) -> Self {
        WeightVector(vec![0; dims])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|w| *w == 0)
    }

    pub fn get(&self, d: usize) -> i64 {
        self.0[d]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub owner: Owner,
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub src: VertexId,
    pub dst: VertexId,
    pub weights: WeightVector,
    pub tag: String,
}

impl Edge {
    pub fn is_self_loop(&self) -> bool {
        self.src == self.dst
    }
}

/// A finite game graph. Immutable once built; every vertex has an out-edge
/// and every weight vector has exactly `dims` components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    out: Vec<Vec<EdgeId>>,
    dims: usize,
    initial: VertexId,
}

impl GameGraph {
    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn initial(&self) -> VertexId {
        self.initial
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v.0]
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out[v.0]
    }

    pub fn self_loop(&self, v: VertexId) -> Option<EdgeId> {
        self.out[v.0].iter().copied().find(|e| self.edges[e.0].is_self_loop())
    }

    pub fn try_edge(&self, e: EdgeId) -> Result<&Edge, GameError> {
        self.edges.get(e.0).ok_or(GameError::UnknownEdge(e.0))
    }
}

#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    dims: usize,
}

impl GraphBuilder {
    pub fn new(dims: usize) -> Self {
        GraphBuilder { vertices: Vec::new(), edges: Vec::new(), dims }
    }

    pub fn add_vertex(&mut self, owner: Owner, label: Option<String>) -> VertexId {
        self.vertices.push(Vertex { owner, label });
        VertexId(self.vertices.len() - 1)
    }

    pub fn add_edge(
        &mut self,
        src: VertexId,
        dst: VertexId,
        weights: WeightVector,
        tag: impl Into<String>,
    ) -> EdgeId {
        self.edges.push(Edge { src, dst, weights, tag: tag.into() });
        EdgeId(self.edges.len() - 1)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn build(self, initial: VertexId) -> Result<GameGraph, GameError> {
        let n = self.vertices.len();
        if initial.0 >= n {
            return Err(GameError::UnknownVertex(initial.0));
        }
        let mut out = vec![Vec::new(); n];
        for (i, e) in self.edges.iter().enumerate() {
            if e.src.0 >= n {
                return Err(GameError::UnknownVertex(e.src.0));
            }
            if e.dst.0 >= n {
                return Err(GameError::UnknownVertex(e.dst.0));
            }
            if e.weights.len() != self.dims {
                return Err(GameError::WeightArity { edge: i, got: e.weights.len(), dims: self.dims });
            }
            out[e.src.0].push(EdgeId(i));
        }
        if let Some(v) = out.iter().position(|o| o.is_empty()) {
            return Err(GameError::DeadEnd(v));
        }
        Ok(GameGraph { vertices: self.vertices, edges: self.edges, out, dims: self.dims, initial })
    }
}

/// `count` consecutive traversals of one edge. Counts above one only occur
/// for self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub edge: EdgeId,
    pub count: Int,
}

/// A finite play prefix v0 ... vn, stored as runs of edges with exact totals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayPrefix {
    start: VertexId,
    end: VertexId,
    runs: Vec<Run>,
    totals: Vec<Int>,
    len: Int,
}

impl PlayPrefix {
    pub fn new(start: VertexId, dims: usize) -> Self {
        PlayPrefix { start, end: start, runs: Vec::new(), totals: vec![Int::zero(); dims], len: Int::zero() }
    }

    /// Builds a prefix from an explicit edge sequence.
    pub fn from_edges(g: &GameGraph, start: VertexId, edges: &[EdgeId]) -> Result<Self, GameError> {
        let mut p = PlayPrefix::new(start, g.dims());
        for &e in edges {
            p.push(g, e)?;
        }
        Ok(p)
    }

    pub fn push(&mut self, g: &GameGraph, e: EdgeId) -> Result<(), GameError> {
        self.push_run(g, e, Int::one())
    }

    pub fn push_run(&mut self, g: &GameGraph, e: EdgeId, count: Int) -> Result<(), GameError> {
        let edge = g.try_edge(e)?;
        if edge.src != self.end {
            return Err(GameError::NotAnOutEdge { edge: e.0, vertex: self.end.0 });
        }
        if !count.is_positive() {
            return Err(GameError::NonPositiveRepeat);
        }
        if count > Int::one() && !edge.is_self_loop() {
            return Err(GameError::RepeatOfNonLoop(e.0));
        }
        for (t, w) in self.totals.iter_mut().zip(&edge.weights.0) {
            *t += &count * Int::from(*w);
        }
        self.len += &count;
        self.end = edge.dst;
        match self.runs.last_mut() {
            Some(last) if last.edge == e && edge.is_self_loop() => last.count += count,
            _ => self.runs.push(Run { edge: e, count }),
        }
        Ok(())
    }

    pub fn start(&self) -> VertexId {
        self.start
    }

    pub fn end(&self) -> VertexId {
        self.end
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn totals(&self) -> &[Int] {
        &self.totals
    }

    pub fn len(&self) -> &Int {
        &self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len.is_zero()
    }

    pub fn dims(&self) -> usize {
        self.totals.len()
    }

    /// Totals recomputed from the runs, independent of the incremental sums.
    pub fn recompute_totals(&self, g: &GameGraph) -> Vec<Int> {
        let mut t = vec![Int::zero(); self.dims()];
        for run in &self.runs {
            for (d, w) in g.edge(run.edge).weights.0.iter().enumerate() {
                t[d] += &run.count * Int::from(*w);
            }
        }
        t
    }

    /// Totals of the prefix of length `rounds` (`0 <= rounds <= len`).
    pub fn totals_at(&self, g: &GameGraph, rounds: &Int) -> Result<Vec<Int>, GameError> {
        if rounds.is_negative() || rounds > &self.len {
            return Err(GameError::CheckpointOutOfRange(rounds.clone()));
        }
        let mut t = vec![Int::zero(); self.dims()];
        let mut left = rounds.clone();
        for run in &self.runs {
            if left.is_zero() {
                break;
            }
            let take = if run.count < left { run.count.clone() } else { left.clone() };
            for (d, w) in g.edge(run.edge).weights.0.iter().enumerate() {
                t[d] += &take * Int::from(*w);
            }
            left -= take;
        }
        Ok(t)
    }

    /// Expands the vertex sequence v0 ... vn. Only sensible for short prefixes.
    pub fn vertices(&self, g: &GameGraph) -> Vec<VertexId> {
        let mut vs = vec![self.start];
        for run in &self.runs {
            let dst = g.edge(run.edge).dst;
            let mut k = run.count.clone();
            while k.is_positive() {
                vs.push(dst);
                k -= 1;
            }
        }
        vs
    }
}

/// Componentwise `totals / length` of a prefix.
pub fn avg_prefix(prefix: &PlayPrefix) -> Result<Vec<Q>, GameError> {
    if prefix.is_empty() {
        return Err(GameError::EmptyPrefix);
    }
    Ok(prefix.totals().iter().map(|t| avg(t, prefix.len())).collect())
}

/// Limit-inferior and limit-superior average vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitVector {
    inf: Vec<Q>,
    sup: Vec<Q>,
}

impl LimitVector {
    pub fn new(inf: Vec<Q>, sup: Vec<Q>) -> Result<Self, GameError> {
        if inf.len() != sup.len() {
            return Err(GameError::LengthMismatch);
        }
        if let Some(d) = inf.iter().zip(&sup).position(|(i, s)| i > s) {
            return Err(GameError::InfExceedsSup(d));
        }
        Ok(LimitVector { inf, sup })
    }

    /// Inf and sup both equal to `v` (the limit exists).
    pub fn exact(v: Vec<Q>) -> Self {
        LimitVector { inf: v.clone(), sup: v }
    }

    pub fn dims(&self) -> usize {
        self.inf.len()
    }

    pub fn inf(&self) -> &[Q] {
        &self.inf
    }

    pub fn sup(&self) -> &[Q] {
        &self.sup
    }
}

impl fmt::Display for LimitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[Q]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        write!(f, "inf[{}] sup[{}]", join(&self.inf), join(&self.sup))
    }
}

/// Exact limits of the play `stem · cycle^ω`. The stem does not contribute.
pub fn lasso_limits(stem: &PlayPrefix, cycle: &PlayPrefix) -> Result<LimitVector, GameError> {
    if cycle.is_empty() || cycle.start() != cycle.end() {
        return Err(GameError::NotAClosedPath);
    }
    if stem.end() != cycle.start() {
        return Err(GameError::DisconnectedStem { stem_end: stem.end().0, cycle_start: cycle.start().0 });
    }
    Ok(LimitVector::exact(avg_prefix(cycle)?))
}

/// A constant `C` with `|Avg_n - lim| <= C / n` in every dimension, for
/// every `n >= 1`, on the play `stem · cycle^ω`: the largest stem deviation
/// `|S_j - a·j|` from the cycle average `a`, plus the cycle length times the
/// largest cycle weight.
pub fn lasso_error_constant(g: &GameGraph, stem: &PlayPrefix, cycle: &PlayPrefix) -> Result<Q, GameError> {
    let a = lasso_limits(stem, cycle)?.inf;
    let mut worst = Q::zero();
    let mut totals = vec![Int::zero(); stem.dims()];
    let mut j = Int::zero();
    // deviation is affine along a run, so run boundaries suffice
    for run in stem.runs() {
        for (t, w) in totals.iter_mut().zip(&g.edge(run.edge).weights.0) {
            *t += &run.count * Int::from(*w);
        }
        j += &run.count;
        for (t, a) in totals.iter().zip(&a) {
            let dev = (Q::from(t.clone()) - a * Q::from(j.clone())).abs();
            worst = worst.max(dev);
        }
    }
    let w_max = cycle.runs().iter().flat_map(|r| g.edge(r.edge).weights.0.iter().map(|w| w.abs())).max().unwrap_or(0);
    Ok(worst + Q::from(cycle.len() * Int::from(w_max)))
}

/// Finite-horizon average estimates at a list of checkpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitEstimate {
    pub checkpoints: Vec<Int>,
    /// `averages[c][d]`: Avg of dimension `d` at checkpoint `c`.
    pub averages: Vec<Vec<Q>>,
    /// `running_min[c][d]`: minimum over checkpoints `0..=c`.
    pub running_min: Vec<Vec<Q>>,
    pub running_max: Vec<Vec<Q>>,
}

impl LimitEstimate {
    pub fn is_empty(&self) -> bool {
        self.checkpoints.is_empty()
    }
}

pub fn estimate_limits(g: &GameGraph, trace: &PlayPrefix, checkpoints: &[Int]) -> Result<LimitEstimate, GameError> {
    let mut est = LimitEstimate {
        checkpoints: checkpoints.to_vec(),
        averages: Vec::with_capacity(checkpoints.len()),
        running_min: Vec::with_capacity(checkpoints.len()),
        running_max: Vec::with_capacity(checkpoints.len()),
    };
    for w in checkpoints.windows(2) {
        if w[0] >= w[1] {
            return Err(GameError::UnsortedCheckpoints);
        }
    }
    if let Some(c) = checkpoints.iter().find(|c| !c.is_positive() || *c > trace.len()) {
        return Err(GameError::CheckpointOutOfRange(c.clone()));
    }
    // single forward sweep over the runs
    let mut totals = vec![Int::zero(); trace.dims()];
    let mut done = Int::zero();
    let mut runs = trace.runs().iter();
    let mut current: Option<(&Run, Int)> = None;
    for c in checkpoints {
        while &done < c {
            let (run, left) = match current.take() {
                Some(x) => x,
                None => {
                    let r = runs.next().expect("checkpoint within trace");
                    (r, r.count.clone())
                }
            };
            let need = c - &done;
            let take = if left < need { left.clone() } else { need };
            for (d, w) in g.edge(run.edge).weights.0.iter().enumerate() {
                totals[d] += &take * Int::from(*w);
            }
            done += &take;
            let rest = left - take;
            if rest.is_positive() {
                current = Some((run, rest));
            }
        }
        let row: Vec<Q> = totals.iter().map(|t| avg(t, c)).collect();
        let (mn, mx) = match (est.running_min.last(), est.running_max.last()) {
            (Some(pmin), Some(pmax)) => (
                row.iter().zip(pmin).map(|(a, b)| a.min(b).clone()).collect(),
                row.iter().zip(pmax).map(|(a, b)| a.max(b).clone()).collect(),
            ),
            _ => (row.clone(), row.clone()),
        };
        est.averages.push(row);
        est.running_min.push(mn);
        est.running_max.push(mx);
    }
    Ok(est)
}

/// Rounds 1, 2, 4, 8, ... up to and including `limit`.
pub fn geometric_checkpoints(limit: &Int) -> Vec<Int> {
    let mut out = Vec::new();
    let mut c = Int::one();
    while &c <= limit {
        out.push(c.clone());
        c *= 2;
    }
    out
}
