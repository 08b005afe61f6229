//! Rooted ribbon forests, metric forests and forests with vertex heights.
//!
//! Edges point from leaves towards roots. The ribbon structure is carried by
//! the order of the leaves and roots; [`Forest::validate`] checks that the
//! leaves above the incoming edges of every vertex (and above consecutive
//! roots) never interleave.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multiindex::MultiIndex;
use crate::rational::{format_rational, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ForestError {
    #[error("malformed forest data: {0}")]
    Malformed(String),
    #[error("cycle through vertex {0}")]
    Cycle(String),
    #[error("bad valence: {0}")]
    BadValence(String),
    #[error("order violation: {0}")]
    OrderViolation(OrderWitness),
    #[error("height violation: {0}")]
    Heights(String),
}

/// Endpoint of an edge. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Leaf(usize),
    Root(usize),
    Vertex(usize),
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Leaf(i) => write!(f, "L{}", i + 1),
            Node::Root(i) => write!(f, "R{}", i + 1),
            Node::Vertex(v) => write!(f, "v{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub src: Node,
    pub dst: Node,
}

/// Three leaves `a < b < c` where `a` and `c` enter `node` through one edge
/// and `b` through another, with the two offending paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderWitness {
    pub node: Node,
    pub leaves: [usize; 3],
    pub paths: (Vec<Node>, Vec<Node>),
}

impl fmt::Display for OrderWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |p: &[Node]| {
            p.iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join("→")
        };
        write!(
            f,
            "leaves {:?} interleave at {}: paths {} and {}",
            self.leaves.map(|l| l + 1),
            self.node,
            show(&self.paths.0),
            show(&self.paths.1)
        )
    }
}

/// A validated ribbon forest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Forest {
    leaves: usize,
    roots: usize,
    vertex_ids: Vec<u32>,
    edges: Vec<Edge>,
}

/// JSON form: `{"leaves":n,"roots":m,"vertices":[ids],"edges":[{"src":…,"dst":…}]}`.
///
/// Endpoints are vertex ids (integers) or the strings `"L<i>"` / `"R<i>"` for
/// the i-th leaf or root (1-based).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawForest {
    pub leaves: usize,
    pub roots: usize,
    pub vertices: Vec<u32>,
    pub edges: Vec<RawEdge>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawEdge {
    pub src: RawEndpoint,
    pub dst: RawEndpoint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawEndpoint {
    Vertex(u32),
    Named(String),
}

impl Forest {
    /// Checks all forest axioms.
    pub fn validate(raw: &RawForest) -> Result<Forest, ForestError> {
        let mut ids = raw.vertices.clone();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(ForestError::Malformed("duplicate vertex id".into()));
        }
        let resolve = |e: &RawEndpoint| -> Result<Node, ForestError> {
            match e {
                RawEndpoint::Vertex(id) => raw
                    .vertices
                    .iter()
                    .position(|v| v == id)
                    .map(Node::Vertex)
                    .ok_or_else(|| ForestError::Malformed(format!("unknown vertex {id}"))),
                RawEndpoint::Named(s) => {
                    let bad = || ForestError::Malformed(format!("bad endpoint {s:?}"));
                    let (kind, num) = s.split_at(1.min(s.len()));
                    let i: usize = num.parse().map_err(|_| bad())?;
                    match kind {
                        "L" if (1..=raw.leaves).contains(&i) => Ok(Node::Leaf(i - 1)),
                        "R" if (1..=raw.roots).contains(&i) => Ok(Node::Root(i - 1)),
                        "V" | "v" => resolve_id(&raw.vertices, i as u32).ok_or_else(bad),
                        _ => Err(bad()),
                    }
                }
            }
        };
        let edges = raw
            .edges
            .iter()
            .map(|e| {
                Ok(Edge {
                    src: resolve(&e.src)?,
                    dst: resolve(&e.dst)?,
                })
            })
            .collect::<Result<Vec<_>, ForestError>>()?;
        Forest::from_parts(raw.leaves, raw.roots, raw.vertices.clone(), edges)
    }

    /// Builds and validates a forest from resolved parts.
    pub fn from_parts(
        leaves: usize,
        roots: usize,
        vertex_ids: Vec<u32>,
        edges: Vec<Edge>,
    ) -> Result<Forest, ForestError> {
        let f = Forest {
            leaves,
            roots,
            vertex_ids,
            edges,
        };
        f.check_incidences()?;
        f.check_acyclic()?;
        f.check_order()?;
        Ok(f)
    }

    fn check_incidences(&self) -> Result<(), ForestError> {
        let nv = self.vertex_ids.len();
        let mut leaf_out = vec![0; self.leaves];
        let mut root_in = vec![0; self.roots];
        let mut v_out = vec![0; nv];
        let mut v_in = vec![0; nv];
        for e in &self.edges {
            match e.src {
                Node::Leaf(i) => leaf_out[i] += 1,
                Node::Vertex(v) => v_out[v] += 1,
                Node::Root(_) => {
                    return Err(ForestError::Malformed(format!(
                        "edge leaves root {}",
                        e.src
                    )))
                }
            }
            match e.dst {
                Node::Root(i) => root_in[i] += 1,
                Node::Vertex(v) => v_in[v] += 1,
                Node::Leaf(_) => {
                    return Err(ForestError::Malformed(format!(
                        "edge enters leaf {}",
                        e.dst
                    )))
                }
            }
        }
        if let Some(i) = leaf_out.iter().position(|&c| c != 1) {
            return Err(ForestError::BadValence(format!(
                "leaf L{} has {} edges",
                i + 1,
                leaf_out[i]
            )));
        }
        if let Some(i) = root_in.iter().position(|&c| c != 1) {
            return Err(ForestError::BadValence(format!(
                "root R{} has {} edges",
                i + 1,
                root_in[i]
            )));
        }
        for v in 0..nv {
            if v_out[v] != 1 || v_in[v] < 2 {
                return Err(ForestError::BadValence(format!(
                    "vertex {} has {} outgoing and {} incoming edges",
                    self.vertex_ids[v], v_out[v], v_in[v]
                )));
            }
        }
        Ok(())
    }

    fn check_acyclic(&self) -> Result<(), ForestError> {
        for v in 0..self.vertex_ids.len() {
            let mut node = Node::Vertex(v);
            for _ in 0..=self.vertex_ids.len() {
                match node {
                    Node::Root(_) => break,
                    _ => node = self.out_edge(node).dst,
                }
            }
            if !matches!(node, Node::Root(_)) {
                return Err(ForestError::Cycle(self.vertex_ids[v].to_string()));
            }
        }
        Ok(())
    }

    fn check_order(&self) -> Result<(), ForestError> {
        let above = self.leaves_above_edges();
        let mut groups: Vec<(Node, Vec<usize>)> = Vec::new();
        for v in 0..self.vertex_ids.len() {
            groups.push((Node::Vertex(v), self.in_edges(Node::Vertex(v))));
        }
        groups.push((
            Node::Root(0),
            (0..self.roots)
                .map(|r| self.in_edges(Node::Root(r))[0])
                .collect(),
        ));
        for (node, incoming) in groups {
            let sets: Vec<&Vec<usize>> = incoming.iter().map(|&e| &above[e]).collect();
            for a in 0..sets.len() {
                for b in 0..sets.len() {
                    if a == b {
                        continue;
                    }
                    // Leaves x < y < z with x, z above edge a and y above edge b.
                    let (lo, hi) = (sets[a][0], *sets[a].last().expect("nonempty"));
                    if let Some(&y) = sets[b].iter().find(|&&y| lo < y && y < hi) {
                        let x = *sets[a].iter().rfind(|&&x| x < y).expect("exists");
                        let z = *sets[a].iter().find(|&&z| z > y).expect("exists");
                        let root_level = matches!(node, Node::Root(_));
                        let node = if root_level {
                            self.edges[incoming[a]].dst
                        } else {
                            node
                        };
                        return Err(ForestError::OrderViolation(OrderWitness {
                            node,
                            leaves: [x, y, z],
                            paths: (self.path_from_leaf(y), self.path_from_leaf(z)),
                        }));
                    }
                }
            }
            // Consecutive roots must carry consecutive blocks of leaves.
            if matches!(node, Node::Root(_)) {
                for w in 0..sets.len().saturating_sub(1) {
                    if sets[w].last() > sets[w + 1].first() {
                        let (y, z) = (sets[w + 1][0], *sets[w].last().expect("nonempty"));
                        return Err(ForestError::OrderViolation(OrderWitness {
                            node: Node::Root(w),
                            leaves: [sets[w][0], y, z],
                            paths: (self.path_from_leaf(y), self.path_from_leaf(z)),
                        }));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves
    }

    pub fn root_count(&self) -> usize {
        self.roots
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn vertex_ids(&self) -> &[u32] {
        &self.vertex_ids
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edges between two vertices.
    pub fn internal_edges(&self) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| {
                matches!(
                    self.edges[e],
                    Edge {
                        src: Node::Vertex(_),
                        dst: Node::Vertex(_)
                    }
                )
            })
            .collect()
    }

    pub fn out_edge(&self, node: Node) -> Edge {
        self.edges[self.out_edge_index(node)]
    }

    pub fn out_edge_index(&self, node: Node) -> usize {
        self.edges
            .iter()
            .position(|e| e.src == node)
            .expect("validated forest")
    }

    pub fn in_edges(&self, node: Node) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&e| self.edges[e].dst == node)
            .collect()
    }

    /// Sorted leaves above every edge.
    pub fn leaves_above_edges(&self) -> Vec<Vec<usize>> {
        let mut above = vec![Vec::new(); self.edges.len()];
        for leaf in 0..self.leaves {
            let mut node = Node::Leaf(leaf);
            let mut guard = 0;
            while !matches!(node, Node::Root(_)) && guard <= self.edges.len() {
                let e = self.out_edge_index(node);
                above[e].push(leaf);
                node = self.edges[e].dst;
                guard += 1;
            }
        }
        above
    }

    fn path_from_leaf(&self, leaf: usize) -> Vec<Node> {
        let mut path = vec![Node::Leaf(leaf)];
        let mut node = Node::Leaf(leaf);
        while !matches!(node, Node::Root(_)) && path.len() <= self.edges.len() + 1 {
            node = self.out_edge(node).dst;
            path.push(node);
        }
        path
    }

    /// Sorted leaves above a vertex.
    pub fn leaves_above(&self, node: Node) -> Vec<usize> {
        match node {
            Node::Leaf(l) => vec![l],
            _ => {
                let above = self.leaves_above_edges();
                let mut out: Vec<usize> = self
                    .in_edges(node)
                    .iter()
                    .flat_map(|&e| above[e].clone())
                    .collect();
                out.sort_unstable();
                out
            }
        }
    }

    /// The type `(#ρ⁻¹(r_1), ..., #ρ⁻¹(r_m))`.
    pub fn type_of(&self) -> MultiIndex {
        let counts: Vec<usize> = (0..self.roots)
            .map(|r| self.leaves_above(Node::Root(r)).len())
            .collect();
        MultiIndex::new(counts).expect("every root carries a leaf")
    }

    /// Leaf intervals `(first, last)` (0-based) below each vertex, in vertex order.
    pub fn clusters(&self) -> Vec<(usize, usize)> {
        (0..self.vertex_ids.len())
            .map(|v| {
                let ls = self.leaves_above(Node::Vertex(v));
                (ls[0], *ls.last().expect("vertex has leaves"))
            })
            .collect()
    }

    pub fn classify(&self) -> Classification {
        let trivalent =
            (0..self.vertex_ids.len()).all(|v| self.in_edges(Node::Vertex(v)).len() == 2);
        if self.vertex_ids.is_empty() {
            Classification::Vertical
        } else if trivalent && self.internal_edges().is_empty() {
            Classification::AlmostVertical
        } else if trivalent {
            Classification::Trivalent
        } else {
            Classification::Generic
        }
    }

    /// Planar nested description, independent of vertex ids and edge order.
    fn shape_with(&self, label: &dyn Fn(usize) -> Option<Q>) -> Vec<Shape> {
        fn build(f: &Forest, node: Node, label: &dyn Fn(usize) -> Option<Q>) -> Shape {
            match node {
                Node::Leaf(l) => Shape::Leaf(l),
                Node::Vertex(v) => {
                    let mut children: Vec<Shape> = f
                        .in_edges(node)
                        .iter()
                        .map(|&e| build(f, f.edges[e].src, label))
                        .collect();
                    children.sort_by_key(|c| c.first_leaf());
                    Shape::Vertex {
                        label: label(v),
                        children,
                    }
                }
                Node::Root(_) => unreachable!("roots have no parent"),
            }
        }
        (0..self.roots)
            .map(|r| build(self, self.edges[self.in_edges(Node::Root(r))[0]].src, label))
            .collect()
    }

    pub fn shape(&self) -> Vec<Shape> {
        self.shape_with(&|_| None)
    }

    /// Removes the internal edge `e`, merging its source vertex into its target.
    fn collapse(&self, e: usize) -> Forest {
        let Edge {
            src: Node::Vertex(gone),
            dst: keep,
        } = self.edges[e]
        else {
            panic!("collapse needs an internal edge");
        };
        let remap = |n: Node| match n {
            Node::Vertex(v) if v == gone => keep,
            Node::Vertex(v) if v > gone => Node::Vertex(v - 1),
            other => other,
        };
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != e)
            .map(|(_, ed)| Edge {
                src: remap(ed.src),
                dst: remap(ed.dst),
            })
            .collect();
        let mut vertex_ids = self.vertex_ids.clone();
        vertex_ids.remove(gone);
        Forest {
            leaves: self.leaves,
            roots: self.roots,
            vertex_ids,
            edges,
        }
    }

    pub fn to_raw(&self) -> RawForest {
        let ep = |n: Node| match n {
            Node::Vertex(v) => RawEndpoint::Vertex(self.vertex_ids[v]),
            other => RawEndpoint::Named(other.to_string()),
        };
        RawForest {
            leaves: self.leaves,
            roots: self.roots,
            vertices: self.vertex_ids.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| RawEdge {
                    src: ep(e.src),
                    dst: ep(e.dst),
                })
                .collect(),
        }
    }
}

fn resolve_id(ids: &[u32], id: u32) -> Option<Node> {
    ids.iter().position(|&v| v == id).map(Node::Vertex)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Vertical,
    AlmostVertical,
    Trivalent,
    Generic,
}

/// Nested planar form of a tree; vertex labels carry lengths or heights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shape {
    Leaf(usize),
    Vertex {
        label: Option<Q>,
        children: Vec<Shape>,
    },
}

impl Shape {
    fn first_leaf(&self) -> usize {
        match self {
            Shape::Leaf(l) => *l,
            Shape::Vertex { children, .. } => children[0].first_leaf(),
        }
    }
}

/// A forest with nonnegative lengths on its internal edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricForest {
    forest: Forest,
    lengths: BTreeMap<usize, Q>,
}

impl MetricForest {
    pub fn new(forest: Forest, lengths: BTreeMap<usize, Q>) -> Result<Self, ForestError> {
        let internal = forest.internal_edges();
        if lengths.keys().copied().collect::<Vec<_>>() != internal {
            return Err(ForestError::Malformed(
                "lengths must cover exactly the internal edges".into(),
            ));
        }
        if lengths.values().any(|l| *l < Q::from_integer(0)) {
            return Err(ForestError::Malformed("negative edge length".into()));
        }
        Ok(MetricForest { forest, lengths })
    }

    pub fn forest(&self) -> &Forest {
        &self.forest
    }

    pub fn lengths(&self) -> &BTreeMap<usize, Q> {
        &self.lengths
    }

    /// Collapses zero-length edges in the given order of their current indices,
    /// then any remaining ones.
    pub fn collapse_in_order(&self, order: &[usize]) -> MetricForest {
        let mut forest = self.forest.clone();
        // Track edges by their endpoints' original identity through vertex ids.
        let mut lengths: Vec<(u32, Q)> = self
            .lengths
            .iter()
            .map(|(&e, &l)| (src_id(&self.forest, e), l))
            .collect();
        let mut pending: Vec<u32> = order.iter().map(|&e| src_id(&self.forest, e)).collect();
        pending.extend(
            lengths
                .iter()
                .filter(|(_, l)| *l == Q::from_integer(0))
                .map(|(id, _)| *id),
        );
        for id in pending {
            let Some(v) = forest.vertex_ids.iter().position(|&x| x == id) else {
                continue;
            };
            let Some(&(_, len)) = lengths.iter().find(|(x, _)| *x == id) else {
                continue;
            };
            if len != Q::from_integer(0) {
                continue;
            }
            let e = forest.out_edge_index(Node::Vertex(v));
            forest = forest.collapse(e);
            lengths.retain(|(x, _)| *x != id);
        }
        let lengths = forest
            .internal_edges()
            .into_iter()
            .map(|e| {
                let id = src_id(&forest, e);
                (
                    e,
                    lengths
                        .iter()
                        .find(|(x, _)| *x == id)
                        .expect("surviving edge")
                        .1,
                )
            })
            .collect();
        MetricForest { forest, lengths }
    }

    /// The unique irreducible form: all zero-length internal edges collapsed.
    pub fn irreducible(&self) -> MetricForest {
        self.collapse_in_order(&[])
    }

    /// Nested form with each vertex labelled by the length of its outgoing edge.
    pub fn shape(&self) -> Vec<Shape> {
        let by_vertex: BTreeMap<usize, Q> = self
            .lengths
            .iter()
            .map(|(&e, &l)| match self.forest.edges[e].src {
                Node::Vertex(v) => (v, l),
                _ => unreachable!("internal edge"),
            })
            .collect();
        self.forest.shape_with(&|v| by_vertex.get(&v).copied())
    }
}

fn src_id(f: &Forest, e: usize) -> u32 {
    match f.edges[e].src {
        Node::Vertex(v) => f.vertex_ids[v],
        _ => panic!("internal edge expected"),
    }
}

/// A forest with real heights at its vertices, decreasing towards the roots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AscendingForest {
    forest: Forest,
    heights: Vec<Q>,
}

impl AscendingForest {
    pub fn new(forest: Forest, heights: Vec<Q>) -> Result<Self, ForestError> {
        if heights.len() != forest.vertex_count() {
            return Err(ForestError::Heights(
                "one height per vertex expected".into(),
            ));
        }
        for e in forest.internal_edges() {
            if let Edge {
                src: Node::Vertex(a),
                dst: Node::Vertex(b),
            } = forest.edges[e]
            {
                if heights[a] < heights[b] {
                    return Err(ForestError::Heights(format!(
                        "edge v{}→v{} points up",
                        forest.vertex_ids[a], forest.vertex_ids[b]
                    )));
                }
            }
        }
        Ok(AscendingForest { forest, heights })
    }

    pub fn forest(&self) -> &Forest {
        &self.forest
    }

    pub fn heights(&self) -> &[Q] {
        &self.heights
    }

    pub fn height(&self, v: usize) -> Q {
        self.heights[v]
    }

    /// Collapses internal edges joining vertices of equal height.
    pub fn normalize(&self) -> AscendingForest {
        let mut forest = self.forest.clone();
        let mut heights = self.heights.clone();
        loop {
            let flat = forest.internal_edges().into_iter().find(|&e| {
                let Edge {
                    src: Node::Vertex(a),
                    dst: Node::Vertex(b),
                } = forest.edges[e]
                else {
                    return false;
                };
                heights[a] == heights[b]
            });
            let Some(e) = flat else { break };
            let Node::Vertex(gone) = forest.edges[e].src else {
                unreachable!()
            };
            forest = forest.collapse(e);
            heights.remove(gone);
        }
        AscendingForest { forest, heights }
    }

    /// Single-linkage dendrogram: leaves `p` and `p+1` of the same tree meet at
    /// height `h_p`, indexed along `Vert(k)`.
    pub fn from_heights(k: &MultiIndex, h: &[Q]) -> Result<AscendingForest, ForestError> {
        let verts = k.vert_set();
        if h.len() != verts.len() {
            return Err(ForestError::Heights(format!(
                "{} heights for v{k} = {}",
                h.len(),
                verts.len()
            )));
        }
        // gap[p] is the merge height of leaves p and p+1 (0-based leaves).
        let mut gap: BTreeMap<usize, Q> = BTreeMap::new();
        for (&p, &x) in verts.iter().zip(h) {
            gap.insert(p - 1, x);
        }
        struct Builder<'a> {
            gap: &'a BTreeMap<usize, Q>,
            edges: Vec<Edge>,
            heights: Vec<Q>,
        }
        impl Builder<'_> {
            fn build(&mut self, lo: usize, hi: usize) -> Node {
                if lo == hi {
                    return Node::Leaf(lo);
                }
                let low = (lo..hi)
                    .map(|p| self.gap[&p])
                    .min()
                    .expect("nonempty range");
                let mut children = Vec::new();
                let mut start = lo;
                for p in lo..hi {
                    if self.gap[&p] == low {
                        children.push((start, p));
                        start = p + 1;
                    }
                }
                children.push((start, hi));
                let v = self.heights.len();
                self.heights.push(low);
                for (a, b) in children {
                    let child = self.build(a, b);
                    self.edges.push(Edge {
                        src: child,
                        dst: Node::Vertex(v),
                    });
                }
                Node::Vertex(v)
            }
        }
        let mut b = Builder {
            gap: &gap,
            edges: Vec::new(),
            heights: Vec::new(),
        };
        let mut start = 0;
        for (r, &e) in k.entries().iter().enumerate() {
            let top = b.build(start, start + e - 1);
            b.edges.push(Edge {
                src: top,
                dst: Node::Root(r),
            });
            start += e;
        }
        let ids = (0..b.heights.len() as u32).collect();
        let forest = Forest::from_parts(k.size(), k.trees(), ids, b.edges)?;
        AscendingForest::new(forest, b.heights)
    }

    /// Heights of the meeting vertices of consecutive leaves, along `Vert(type)`.
    pub fn to_heights(&self) -> Vec<Q> {
        let k = self.forest.type_of();
        k.vert_set()
            .iter()
            .map(|&p| self.heights[self.meet(p - 1, p)])
            .collect()
    }

    /// Lowest common vertex of two leaves of the same tree.
    pub fn meet(&self, a: usize, b: usize) -> usize {
        let chain = |leaf: usize| {
            let mut out = Vec::new();
            let mut node = Node::Leaf(leaf);
            while let Node::Leaf(_) | Node::Vertex(_) = node {
                node = self.forest.out_edge(node).dst;
                if let Node::Vertex(v) = node {
                    out.push(v);
                }
            }
            out
        };
        let ca = chain(a);
        let cb = chain(b);
        *ca.iter()
            .find(|v| cb.contains(v))
            .expect("leaves of one tree")
    }

    pub fn shape(&self) -> Vec<Shape> {
        self.forest.shape_with(&|v| Some(self.heights[v]))
    }

    /// Metric forest with lengths `h(src) - h(dst)` on internal edges.
    pub fn to_metric(&self) -> MetricForest {
        let lengths = self
            .forest
            .internal_edges()
            .into_iter()
            .map(|e| match self.forest.edges[e] {
                Edge {
                    src: Node::Vertex(a),
                    dst: Node::Vertex(b),
                } => (e, self.heights[a] - self.heights[b]),
                _ => unreachable!(),
            })
            .collect();
        MetricForest {
            forest: self.forest.clone(),
            lengths,
        }
    }

    /// The forest with all heights shifted by `t`.
    pub fn shifted(&self, t: Q) -> AscendingForest {
        AscendingForest {
            forest: self.forest.clone(),
            heights: self.heights.iter().map(|h| h + t).collect(),
        }
    }

    pub fn with_height(&self, v: usize, h: Q) -> Result<AscendingForest, ForestError> {
        let mut heights = self.heights.clone();
        heights[v] = h;
        AscendingForest::new(self.forest.clone(), heights)
    }
}

/// A forest whose vertex heights increase towards the roots; stored with its
/// actual heights, so that negating them gives an ascending forest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescendingForest {
    forest: Forest,
    heights: Vec<Q>,
}

impl DescendingForest {
    pub fn from_heights(l: &MultiIndex, h: &[Q]) -> Result<DescendingForest, ForestError> {
        let neg: Vec<Q> = h.iter().map(|x| -x).collect();
        let asc = AscendingForest::from_heights(l, &neg)?;
        Ok(DescendingForest {
            forest: asc.forest,
            heights: h_neg(&asc.heights),
        })
    }

    pub fn forest(&self) -> &Forest {
        &self.forest
    }

    pub fn heights(&self) -> &[Q] {
        &self.heights
    }

    pub fn to_heights(&self) -> Vec<Q> {
        let asc = AscendingForest {
            forest: self.forest.clone(),
            heights: h_neg(&self.heights),
        };
        h_neg(&asc.to_heights())
    }

    pub fn shifted(&self, t: Q) -> DescendingForest {
        DescendingForest {
            forest: self.forest.clone(),
            heights: self.heights.iter().map(|h| h + t).collect(),
        }
    }
}

fn h_neg(h: &[Q]) -> Vec<Q> {
    h.iter().map(|x| -x).collect()
}

/// A pair of an ascending and a descending forest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Biforest {
    pub up: AscendingForest,
    pub down: DescendingForest,
}

impl Biforest {
    pub fn from_heights(k: &MultiIndex, l: &MultiIndex, h: &[Q]) -> Result<Biforest, ForestError> {
        let vk = k.vertices();
        if h.len() != vk + l.vertices() {
            return Err(ForestError::Heights("need v(k) + v(l) heights".into()));
        }
        Ok(Biforest {
            up: AscendingForest::from_heights(k, &h[..vk])?,
            down: DescendingForest::from_heights(l, &h[vk..])?,
        })
    }

    pub fn types(&self) -> (MultiIndex, MultiIndex) {
        (self.up.forest.type_of(), self.down.forest.type_of())
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Leaf(l) => write!(f, "{}", l + 1),
            Shape::Vertex { label, children } => {
                write!(f, "[")?;
                for (n, c) in children.iter().enumerate() {
                    if n > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, "]")?;
                if let Some(x) = label {
                    write!(f, "@{}", format_rational(x))?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::mi;

    fn q(n: i64) -> Q {
        Q::from_integer(n)
    }

    fn raw(json: &str) -> RawForest {
        serde_json::from_str(json).unwrap()
    }

    fn type_312() -> RawForest {
        raw(r#"{"leaves":6,"roots":3,"vertices":[1,2,3],"edges":[
            {"src":"L1","dst":1},{"src":"L2","dst":1},{"src":1,"dst":2},{"src":"L3","dst":2},
            {"src":2,"dst":"R1"},{"src":"L4","dst":"R2"},
            {"src":"L5","dst":3},{"src":"L6","dst":3},{"src":3,"dst":"R3"}]}"#)
    }

    #[test]
    fn accepts_and_types_a_312_forest() {
        let f = Forest::validate(&type_312()).unwrap();
        assert_eq!(f.type_of(), mi(&[3, 1, 2]));
        assert_eq!(f.classify(), Classification::Trivalent);
    }

    #[test]
    fn rejects_crossings() {
        let crossing = raw(r#"{"leaves":3,"roots":1,"vertices":[1,2],"edges":[
            {"src":"L1","dst":1},{"src":"L3","dst":1},{"src":1,"dst":2},{"src":"L2","dst":2},
            {"src":2,"dst":"R1"}]}"#);
        let err = Forest::validate(&crossing).unwrap_err();
        let ForestError::OrderViolation(w) = err else {
            panic!("expected order violation")
        };
        assert_eq!(w.leaves, [0, 1, 2]);
        let roots_crossing = raw(r#"{"leaves":3,"roots":2,"vertices":[1],"edges":[
            {"src":"L1","dst":1},{"src":"L3","dst":1},{"src":1,"dst":"R1"},{"src":"L2","dst":"R2"}]}"#);
        assert!(matches!(
            Forest::validate(&roots_crossing),
            Err(ForestError::OrderViolation(_))
        ));
    }

    #[test]
    fn rejects_bad_valence_and_cycles() {
        let unary = raw(r#"{"leaves":1,"roots":1,"vertices":[1],"edges":[
            {"src":"L1","dst":1},{"src":1,"dst":"R1"}]}"#);
        assert!(matches!(
            Forest::validate(&unary),
            Err(ForestError::BadValence(_))
        ));
        let cyc = raw(r#"{"leaves":2,"roots":1,"vertices":[1,2],"edges":[
            {"src":"L1","dst":1},{"src":"L2","dst":2},{"src":1,"dst":2},{"src":2,"dst":1},
            {"src":"L1","dst":"R1"}]}"#);
        assert!(Forest::validate(&cyc).is_err());
    }

    #[test]
    fn corollas() {
        for k in 2..6 {
            let mut edges: Vec<RawEdge> = (1..=k)
                .map(|i| RawEdge {
                    src: RawEndpoint::Named(format!("L{i}")),
                    dst: RawEndpoint::Vertex(7),
                })
                .collect();
            edges.push(RawEdge {
                src: RawEndpoint::Vertex(7),
                dst: RawEndpoint::Named("R1".into()),
            });
            let f = Forest::validate(&RawForest {
                leaves: k,
                roots: 1,
                vertices: vec![7],
                edges,
            })
            .unwrap();
            assert_eq!(f.type_of(), mi(&[k]));
            assert_eq!(f.classify() == Classification::AlmostVertical, k == 2);
        }
    }

    #[test]
    fn dendrogram_examples() {
        let f = AscendingForest::from_heights(&mi(&[2]), &[q(0)]).unwrap();
        assert_eq!(f.forest().vertex_count(), 1);
        let comb = AscendingForest::from_heights(&mi(&[3]), &[q(1), q(0)]).unwrap();
        assert_eq!(comb.shape()[0].to_string(), "[[1 2]@1 3]@0");
        assert_eq!(comb.forest().classify(), Classification::Trivalent);
        let corolla = AscendingForest::from_heights(&mi(&[3]), &[q(0), q(0)]).unwrap();
        assert_eq!(corolla.shape()[0].to_string(), "[1 2 3]@0");
        assert_eq!(corolla.to_heights(), vec![q(0), q(0)]);
        let v = AscendingForest::from_heights(&mi(&[1, 1]), &[]).unwrap();
        assert_eq!(v.forest().classify(), Classification::Vertical);
        let av = AscendingForest::from_heights(&mi(&[2, 1]), &[q(3)]).unwrap();
        assert_eq!(av.forest().classify(), Classification::AlmostVertical);
    }

    #[test]
    fn collapsing_a_binary_edge() {
        let comb = AscendingForest::from_heights(&mi(&[3]), &[q(1), q(0)]).unwrap();
        let mut m = comb.to_metric();
        let e = m.forest().internal_edges()[0];
        m.lengths.insert(e, q(0));
        let irr = m.irreducible();
        assert_eq!(irr.forest().vertex_count(), 1);
        assert_eq!(irr.forest().type_of(), mi(&[3]));
        assert_eq!(irr.irreducible(), irr);
    }

    #[test]
    fn collapse_order_does_not_matter() {
        // Three internal edges: ((1 2) 3) 4) 5 comb.
        let comb = AscendingForest::from_heights(&mi(&[5]), &[q(4), q(3), q(2), q(1)]).unwrap();
        let mut m = comb.to_metric();
        let internal = m.forest().internal_edges();
        assert_eq!(internal.len(), 3);
        for &e in &internal {
            m.lengths.insert(e, q(0));
        }
        let reference = m.irreducible().shape();
        let perms = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        for p in perms {
            let order: Vec<usize> = p.iter().map(|&i| internal[i]).collect();
            assert_eq!(m.collapse_in_order(&order).shape(), reference);
        }
    }

    #[test]
    fn non_adjacent_ties_stay_separate() {
        let f = AscendingForest::from_heights(&mi(&[4]), &[q(1), q(0), q(1)]).unwrap();
        assert_eq!(f.forest().vertex_count(), 3);
        let g = AscendingForest::from_heights(&mi(&[4]), &[q(0), q(1), q(0)]).unwrap();
        assert_eq!(g.forest().vertex_count(), 2);
    }

    #[test]
    fn descending_round_trip() {
        let h = vec![q(2), q(-1), q(5)];
        let d = DescendingForest::from_heights(&mi(&[2, 3]), &h).unwrap();
        assert_eq!(d.to_heights(), h);
        assert_eq!(d.forest().type_of(), mi(&[2, 3]));
    }

    #[test]
    fn raw_round_trip() {
        let f = Forest::validate(&type_312()).unwrap();
        assert_eq!(Forest::validate(&f.to_raw()).unwrap(), f);
    }
}
