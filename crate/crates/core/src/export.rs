//! Graph files and DOT export.
//!
//! A graph file is JSON lines: a header object, then one object per vertex
//! and one per edge, in id order.
//!
//! ```text
//! {"kind":"header","format":"mpgame-graph","dims":8,"initial":0,"dim_names":[..],"condition":"..","clusters":[..]}
//! {"kind":"vertex","id":0,"owner":"P2","label":"reset: A","tag":{"role":"ResetA","state":null,"cluster":0}}
//! {"kind":"edge","src":0,"dst":0,"weights":[0,1,-1,1,1,-1,0,0],"tag":"loop"}
//! ```
//!
//! `dim_names`, `condition`, `clusters` and vertex `tag`s are optional; a
//! file with tags on every vertex reloads with its gadget annotations.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::condition::{parse_condition, Condition};
use crate::game::{GameError, GameGraph, GraphBuilder, Owner, VertexId, WeightVector};
use crate::reduction::{Annotations, DimensionLayout, EdgeKind, ReductionOutput, VertexTag};

const FORMAT: &str = "mpgame-graph";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Line {
    Header {
        format: String,
        dims: usize,
        initial: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim_names: Option<Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        condition: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        clusters: Option<Vec<String>>,
    },
    Vertex {
        id: usize,
        owner: Owner,
        #[serde(default)]
        label: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tag: Option<VertexTag>,
    },
    Edge {
        src: usize,
        dst: usize,
        weights: Vec<i64>,
        #[serde(default)]
        tag: String,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error(transparent)]
    Graph(#[from] GameError),
}

/// A graph read back from a file, with whatever extras it carried.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: GameGraph,
    pub condition: Option<Condition>,
    pub annotations: Option<Annotations>,
}

impl LoadedGraph {
    /// The compiled-game view, available when the file carried annotations and a condition.
    pub fn reduction(&self) -> Option<ReductionOutput> {
        let ann = self.annotations.clone()?;
        Some(ReductionOutput {
            graph: self.graph.clone(),
            condition: self.condition.clone()?,
            layout: ann.layout.clone(),
            annotations: ann,
        })
    }
}

fn to_line(l: &Line) -> String {
    serde_json::to_string(l).expect("graph lines serialize")
}

pub fn write_graph(g: &GameGraph, condition: Option<&Condition>, ann: Option<&Annotations>) -> String {
    let mut out = String::new();
    let header = Line::Header {
        format: FORMAT.into(),
        dims: g.dims(),
        initial: g.initial().0,
        dim_names: ann.map(|a| a.layout.names().to_vec()),
        condition: condition.map(|c| c.to_string()),
        clusters: ann.map(|a| a.clusters.clone()),
    };
    out.push_str(&to_line(&header));
    out.push('\n');
    for (id, v) in g.vertices().iter().enumerate() {
        let tag = ann.map(|a| a.tag(VertexId(id)).clone());
        out.push_str(&to_line(&Line::Vertex { id, owner: v.owner, label: v.label.clone(), tag }));
        out.push('\n');
    }
    for e in g.edges() {
        out.push_str(&to_line(&Line::Edge { src: e.src.0, dst: e.dst.0, weights: e.weights.0.clone(), tag: e.tag.clone() }));
        out.push('\n');
    }
    out
}

pub fn write_reduction(out: &ReductionOutput) -> String {
    write_graph(&out.graph, Some(&out.condition), Some(&out.annotations))
}

pub fn read_graph(text: &str) -> Result<LoadedGraph, ExportError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let bad = |line: usize, msg: String| ExportError::Format { line: line + 1, msg };
    let (hl, first) = lines.next().ok_or_else(|| bad(0, "empty graph file".into()))?;
    let Line::Header { format, dims, initial, dim_names, condition, clusters } =
        serde_json::from_str::<Line>(first).map_err(|e| bad(hl, e.to_string()))?
    else {
        return Err(bad(hl, "first line must be the header".into()));
    };
    if format != FORMAT {
        return Err(bad(hl, format!("unknown format {format:?}")));
    }
    let mut b = GraphBuilder::new(dims);
    let mut tags: Vec<Option<VertexTag>> = Vec::new();
    let mut kinds: Vec<Option<EdgeKind>> = Vec::new();
    for (n, l) in lines {
        match serde_json::from_str::<Line>(l).map_err(|e| bad(n, e.to_string()))? {
            Line::Header { .. } => return Err(bad(n, "duplicate header".into())),
            Line::Vertex { id, owner, label, tag } => {
                if id != b.vertex_count() {
                    return Err(bad(n, format!("vertex ids must be consecutive, expected {}", b.vertex_count())));
                }
                b.add_vertex(owner, label);
                tags.push(tag);
            }
            Line::Edge { src, dst, weights, tag } => {
                if src >= b.vertex_count() || dst >= b.vertex_count() {
                    return Err(bad(n, format!("edge {src} -> {dst} mentions an undeclared vertex")));
                }
                kinds.push(EdgeKind::from_label(&tag));
                b.add_edge(VertexId(src), VertexId(dst), WeightVector(weights), tag);
            }
        }
    }
    if initial >= b.vertex_count() {
        return Err(bad(hl, format!("initial vertex {initial} does not exist")));
    }
    let graph = b.build(VertexId(initial))?;
    let condition = match condition {
        Some(c) => Some(parse_condition(&c).map_err(|e| bad(hl, format!("condition: {e}")))?),
        None => None,
    };
    let annotations = match (dim_names, clusters) {
        (Some(names), Some(clusters)) if tags.iter().all(Option::is_some) && kinds.iter().all(Option::is_some) => {
            let counters = ((names.len() as isize - 6) / 2).clamp(0, 2) as u8;
            let layout = DimensionLayout::for_counters(counters.max(1));
            if layout.names() != names.as_slice() {
                return Err(bad(hl, "dimension names do not match a counter layout".into()));
            }
            Some(Annotations {
                layout,
                tags: tags.into_iter().flatten().collect(),
                edge_kinds: kinds.into_iter().flatten().collect(),
                clusters,
            })
        }
        _ => None,
    };
    Ok(LoadedGraph { graph, condition, annotations })
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn weight_label(w: &[i64], names: Option<&[String]>) -> String {
    match names {
        Some(names) => {
            let parts: Vec<String> = w.iter().zip(names).filter(|(v, _)| **v != 0).map(|(v, n)| format!("{n}{v:+}")).collect();
            if parts.is_empty() {
                "0".into()
            } else {
                parts.join(" ")
            }
        }
        None => format!("({})", w.iter().map(i64::to_string).collect::<Vec<_>>().join(",")),
    }
}

/// DOT rendering. Player-1 vertices are circles and player-2 vertices boxes;
/// edges are labelled with their tag and weights. With annotations, each
/// gadget becomes a cluster.
pub fn to_dot(g: &GameGraph, ann: Option<&Annotations>) -> String {
    let mut s = String::from("digraph game {\n  rankdir=LR;\n  node [fontsize=10];\n  edge [fontsize=9];\n");
    let names = ann.map(|a| a.layout.names());
    let node = |s: &mut String, id: usize, indent: &str| {
        let v = g.vertex(VertexId(id));
        let shape = match v.owner {
            Owner::P1 => "circle",
            Owner::P2 => "box",
        };
        let label = v.label.clone().unwrap_or_else(|| id.to_string());
        let peripheries = if VertexId(id) == g.initial() { 2 } else { 1 };
        let _ = writeln!(s, "{indent}v{id} [shape={shape}, peripheries={peripheries}, label=\"{}\"];", dot_escape(&label));
    };
    match ann {
        Some(a) => {
            for (c, name) in a.clusters.iter().enumerate() {
                let _ = writeln!(s, "  subgraph cluster_{c} {{\n    label=\"{}\";", dot_escape(name));
                for id in (0..g.vertex_count()).filter(|&id| a.tags[id].cluster == c) {
                    node(&mut s, id, "    ");
                }
                s.push_str("  }\n");
            }
        }
        None => (0..g.vertex_count()).for_each(|id| node(&mut s, id, "  ")),
    }
    for e in g.edges() {
        let label = format!("{} {}", e.tag, weight_label(&e.weights.0, names));
        let _ = writeln!(s, "  v{} -> v{} [label=\"{}\"];", e.src.0, e.dst.0, dot_escape(label.trim()));
    }
    s.push_str("}\n");
    s
}
