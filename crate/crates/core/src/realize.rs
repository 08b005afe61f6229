//! The intersection graph `Γ(U, D) = ⟨U⟩ ×_ℝ ⟨D⟩` of a biforest.
//!
//! In `⟨U⟩` leaves sit at `+∞` and roots at `-∞`; in `⟨D⟩` the reverse. A
//! point of `Γ` is a pair of points of the two realizations at equal height.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::forest::{Biforest, Edge, Forest, Node};
use crate::rational::{format_rational, Q};

/// A height on the extended line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Height {
    NegInf,
    At(Q),
    PosInf,
}

impl fmt::Display for Height {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Height::NegInf => write!(f, "-inf"),
            Height::At(q) => write!(f, "{}", format_rational(q)),
            Height::PosInf => write!(f, "+inf"),
        }
    }
}

impl Serialize for Height {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A point of one realized forest at a breakpoint: a vertex, or an interior
/// point of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Point {
    Vertex(usize),
    Edge(usize),
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Vertex(v) => write!(f, "v{v}"),
            Point::Edge(e) => write!(f, "e{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GraphNode {
    #[serde(serialize_with = "ser_q")]
    pub height: Q,
    pub up: Point,
    pub down: Point,
}

fn ser_q<S: serde::Serializer>(q: &Q, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(q))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphEdge {
    /// Edge of `U` and edge of `D` this segment lies over.
    pub up_edge: usize,
    pub down_edge: usize,
    pub low: Height,
    pub high: Height,
    /// Node indices of the endpoints; `None` at infinity.
    pub low_node: Option<usize>,
    pub high_node: Option<usize>,
}

impl GraphEdge {
    /// `None` for a semi-infinite edge.
    pub fn length(&self) -> Option<Q> {
        match (self.low, self.high) {
            (Height::At(a), Height::At(b)) => Some(b - a),
            _ => None,
        }
    }

    pub fn crosses(&self, h: Q) -> bool {
        self.low < Height::At(h) && Height::At(h) < self.high
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntersectionGraph {
    /// Sorted by `(height, up, down)`.
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

/// Height span of each edge of a realized forest: `(low, high, low end, high end)`.
fn spans(forest: &Forest, heights: &[Q], ascending: bool) -> Vec<(Height, Height, Node, Node)> {
    let h = |n: Node, end_is_src: bool| match n {
        Node::Vertex(v) => Height::At(heights[v]),
        // Leaves sit at the source end, roots at the target end.
        _ if ascending == end_is_src => Height::PosInf,
        _ => Height::NegInf,
    };
    forest
        .edges()
        .iter()
        .map(|&Edge { src, dst }| {
            let (hs, hd) = (h(src, true), h(dst, false));
            if ascending {
                (hd, hs, dst, src)
            } else {
                (hs, hd, src, dst)
            }
        })
        .collect()
}

/// The point of a realized forest on edge `e` at the boundary height `at`.
fn point_on(span: &(Height, Height, Node, Node), e: usize, at: Height) -> Point {
    let (lo, hi, lo_node, hi_node) = *span;
    match (at == lo, at == hi, lo_node, hi_node) {
        (true, _, Node::Vertex(v), _) | (_, true, _, Node::Vertex(v)) => Point::Vertex(v),
        _ => Point::Edge(e),
    }
}

/// Edges of a realized forest whose open span contains `h`.
pub fn edges_at(forest: &Forest, heights: &[Q], ascending: bool, h: Q) -> usize {
    spans(forest, heights, ascending)
        .iter()
        .filter(|(lo, hi, _, _)| *lo < Height::At(h) && Height::At(h) < *hi)
        .count()
}

pub fn henriques_graph(b: &Biforest) -> IntersectionGraph {
    let (uf, uh) = (b.up.forest(), b.up.heights());
    let (df, dh) = (b.down.forest(), b.down.heights());
    let us = spans(uf, uh, true);
    let ds = spans(df, dh, false);
    let breaks: BTreeSet<Q> = uh.iter().chain(dh).copied().collect();
    let mut cuts: Vec<Height> = vec![Height::NegInf];
    cuts.extend(breaks.iter().map(|&q| Height::At(q)));
    cuts.push(Height::PosInf);

    let mut nodes: BTreeSet<GraphNode> = BTreeSet::new();
    type Segment = (
        usize,
        usize,
        Height,
        Height,
        Option<GraphNode>,
        Option<GraphNode>,
    );
    let mut raw: Vec<Segment> = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        for (ue, u) in us.iter().enumerate() {
            if !(u.0 <= lo && hi <= u.1) {
                continue;
            }
            for (de, d) in ds.iter().enumerate() {
                if !(d.0 <= lo && hi <= d.1) {
                    continue;
                }
                let node_at = |at: Height| match at {
                    Height::At(q) => Some(GraphNode {
                        height: q,
                        up: point_on(u, ue, at),
                        down: point_on(d, de, at),
                    }),
                    _ => None,
                };
                let (a, z) = (node_at(lo), node_at(hi));
                nodes.extend(a.iter().chain(z.iter()).cloned());
                raw.push((ue, de, lo, hi, a, z));
            }
        }
    }
    let nodes: Vec<GraphNode> = nodes.into_iter().collect();
    let index = |n: &Option<GraphNode>| n.as_ref().map(|n| nodes.binary_search(n).expect("node"));
    let mut edges: Vec<GraphEdge> = raw
        .iter()
        .map(|(ue, de, lo, hi, a, z)| GraphEdge {
            up_edge: *ue,
            down_edge: *de,
            low: *lo,
            high: *hi,
            low_node: index(a),
            high_node: index(z),
        })
        .collect();
    edges.sort_by_key(|e| (e.low, e.high, e.up_edge, e.down_edge));
    IntersectionGraph { nodes, edges }
}

impl IntersectionGraph {
    /// Number of edges over an open height.
    pub fn cross_section(&self, h: Q) -> usize {
        self.edges.iter().filter(|e| e.crosses(h)).count()
    }

    /// Connected components, counting each semi-infinite edge with its endpoint.
    pub fn components(&self) -> usize {
        let n = self.nodes.len();
        let mut parent: Vec<usize> = (0..n + self.edges.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (i, e) in self.edges.iter().enumerate() {
            for end in [e.low_node, e.high_node].into_iter().flatten() {
                let (a, b) = (find(&mut parent, n + i), find(&mut parent, end));
                parent[a] = b;
            }
        }
        let roots: BTreeSet<usize> = (0..parent.len()).map(|x| find(&mut parent, x)).collect();
        roots.len()
    }

    /// The graph with heights measured from the lowest node, used to compare
    /// graphs up to an overall shift.
    pub fn normalized(&self) -> IntersectionGraph {
        let Some(base) = self.nodes.first().map(|n| n.height) else {
            return self.clone();
        };
        let shift = |h: Height| match h {
            Height::At(q) => Height::At(q - base),
            other => other,
        };
        IntersectionGraph {
            nodes: self
                .nodes
                .iter()
                .map(|n| GraphNode {
                    height: n.height - base,
                    ..n.clone()
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| GraphEdge {
                    low: shift(e.low),
                    high: shift(e.high),
                    ..e.clone()
                })
                .collect(),
        }
    }

    pub fn is_shift_of(&self, other: &IntersectionGraph) -> bool {
        self.normalized() == other.normalized()
    }

    /// Deterministic Graphviz text.
    pub fn to_dot(&self) -> String {
        let name = |n: &GraphNode| format!("U{}_D{}_h{}", n.up, n.down, format_rational(&n.height));
        let mut out = String::from("graph henriques {\n  node [shape=point];\n");
        for n in &self.nodes {
            writeln!(out, "  \"{}\";", name(n)).expect("write to string");
        }
        for (i, e) in self.edges.iter().enumerate() {
            let end = |node: Option<usize>, side: &str| match node {
                Some(j) => format!("\"{}\"", name(&self.nodes[j])),
                None => format!("\"{side}_{i}\""),
            };
            let (a, b) = (end(e.low_node, "bottom"), end(e.high_node, "top"));
            let label = format!("U{}×D{}", e.up_edge, e.down_edge);
            match e.length() {
                Some(len) => writeln!(
                    out,
                    "  {a} -- {b} [label=\"{label} len={}\"];",
                    format_rational(&len)
                ),
                None => {
                    for (stub, node) in [(&a, e.low_node), (&b, e.high_node)] {
                        if node.is_none() {
                            writeln!(out, "  {stub} [style=invis];").expect("write to string");
                        }
                    }
                    writeln!(
                        out,
                        "  {a} -- {b} [label=\"{label} len=inf\", style=dashed];"
                    )
                }
            }
            .expect("write to string");
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::mi;

    fn q(n: i64) -> Q {
        Q::from_integer(n)
    }

    #[test]
    fn vertical_biforest_gives_lines() {
        let b = Biforest::from_heights(&mi(&[1, 1]), &mi(&[1, 1, 1]), &[]).unwrap();
        let g = henriques_graph(&b);
        assert!(g.nodes.is_empty());
        assert_eq!(g.edges.len(), 6);
        assert!(g.edges.iter().all(|e| e.length().is_none()));
        assert_eq!(g.components(), 6);
        assert_eq!(g.to_dot().matches(" -- ").count(), 6);
    }

    #[test]
    fn tree_against_a_line() {
        let b = Biforest::from_heights(&mi(&[2]), &mi(&[1]), &[q(0)]).unwrap();
        let g = henriques_graph(&b);
        assert_eq!(g.nodes.len(), 1);
        assert_eq!(g.nodes[0].up, Point::Vertex(0));
        assert_eq!(g.edges.len(), 3);
        assert_eq!(g.components(), 1);
        assert_eq!(g.cross_section(q(1)), 2);
        assert_eq!(g.cross_section(q(-1)), 1);
    }

    #[test]
    fn hexagon_chamber_is_connected() {
        // k = (3), l = (2): two ascending vertices around one descending vertex.
        let b = Biforest::from_heights(&mi(&[3]), &mi(&[2]), &[q(0), q(2), q(1)]).unwrap();
        let g = henriques_graph(&b);
        assert_eq!(g.components(), 1);
        assert!(g.edges.iter().any(|e| e.length() == Some(q(1))));
        assert_eq!(g.to_dot(), henriques_graph(&b).to_dot());
        for h in [q(-1), Q::new(1, 2), Q::new(3, 2), q(3)] {
            let expected = edges_at(b.up.forest(), b.up.heights(), true, h)
                * edges_at(b.down.forest(), b.down.heights(), false, h);
            assert_eq!(g.cross_section(h), expected);
        }
    }

    #[test]
    fn shifts_give_isomorphic_graphs() {
        let h = [q(0), q(2), q(1)];
        let b = Biforest::from_heights(&mi(&[3]), &mi(&[2]), &h).unwrap();
        let s: Vec<Q> = h.iter().map(|x| x + Q::new(7, 3)).collect();
        let c = Biforest::from_heights(&mi(&[3]), &mi(&[2]), &s).unwrap();
        assert!(henriques_graph(&b).is_shift_of(&henriques_graph(&c)));
        let d = Biforest::from_heights(&mi(&[3]), &mi(&[2]), &[q(0), q(2), q(3)]).unwrap();
        assert!(!henriques_graph(&b).is_shift_of(&henriques_graph(&d)));
    }
}
