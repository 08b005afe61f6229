//! Multi-indices, gluing, splittings and bimodule indices.
//!
//! A multi-index `k = (k_1, ..., k_a)` records the number of leaves of each
//! tree in an ordered forest. Leaves are numbered globally from 1 to `|k|`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndexError {
    #[error("multi-index must have at least one entry")]
    Empty,
    #[error("multi-index entries must be at least 1 (entry {position} is 0)")]
    ZeroEntry { position: usize },
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("invalid bimodule index: {0}")]
    InvalidBimodule(String),
    #[error("cannot parse {0:?} as an index")]
    Parse(String),
}

/// An ordered list of positive integers.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Result<Self, IndexError> {
        if entries.is_empty() {
            return Err(IndexError::Empty);
        }
        if let Some(position) = entries.iter().position(|&e| e == 0) {
            return Err(IndexError::ZeroEntry {
                position: position + 1,
            });
        }
        Ok(MultiIndex(entries))
    }

    /// The vertical index `1_a`.
    pub fn vertical(a: usize) -> Self {
        assert!(a >= 1, "vertical multi-index needs at least one tree");
        MultiIndex(vec![1; a])
    }

    pub fn single(k: usize) -> Self {
        assert!(k >= 1);
        MultiIndex(vec![k])
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    /// `|k|`, the number of leaves.
    pub fn size(&self) -> usize {
        self.0.iter().sum()
    }

    /// `n(k)`, the number of trees.
    pub fn trees(&self) -> usize {
        self.0.len()
    }

    /// `v(k) = |k| - n(k)`, the number of vertices of a generic forest of this type.
    pub fn vertices(&self) -> usize {
        self.size() - self.trees()
    }

    /// `ñ(k)`, the number of entries at least 2.
    pub fn nonvertical(&self) -> usize {
        self.0.iter().filter(|&&e| e >= 2).count()
    }

    pub fn is_vertical(&self) -> bool {
        self.0.iter().all(|&e| e == 1)
    }

    /// Entries only 1 and 2.
    pub fn has_entries_at_most_two(&self) -> bool {
        self.0.iter().all(|&e| e <= 2)
    }

    /// Vertical apart from trivalent trees, with at least one such tree.
    pub fn is_almost_vertical(&self) -> bool {
        self.has_entries_at_most_two() && !self.is_vertical()
    }

    /// `k` with all entries equal to 1 removed; `None` stands for the empty index.
    pub fn tilde(&self) -> Option<MultiIndex> {
        let kept: Vec<usize> = self.0.iter().copied().filter(|&e| e >= 2).collect();
        if kept.is_empty() {
            None
        } else {
            Some(MultiIndex(kept))
        }
    }

    /// Leaf positions ending a tree: `k_1, k_1 + k_2, ..., |k|`.
    pub fn tree_ends(&self) -> Vec<usize> {
        self.0
            .iter()
            .scan(0, |acc, &e| {
                *acc += e;
                Some(*acc)
            })
            .collect()
    }

    /// `Vert(k)`: the positions `p` such that leaves `p` and `p+1` lie in the same tree.
    pub fn vert_set(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.vertices());
        let mut start = 1;
        for &e in &self.0 {
            out.extend(start..start + e - 1);
            start += e;
        }
        out
    }

    /// `s_k(i, i') = k_1 + ... + k_{i-1} + i'` (1-based).
    pub fn leaf_coord(&self, i: usize, i_prime: usize) -> Result<usize, IndexError> {
        if i == 0 || i > self.trees() || i_prime == 0 || i_prime > self.0[i - 1] {
            return Err(IndexError::OutOfRange(format!(
                "({i},{i_prime}) is not a leaf of {self}"
            )));
        }
        Ok(self.0[..i - 1].iter().sum::<usize>() + i_prime)
    }

    /// Inverse of [`MultiIndex::leaf_coord`].
    pub fn leaf_coord_inv(&self, h: usize) -> Result<(usize, usize), IndexError> {
        if h == 0 || h > self.size() {
            return Err(IndexError::OutOfRange(format!("leaf {h} of {self}")));
        }
        let mut rest = h;
        for (i, &e) in self.0.iter().enumerate() {
            if rest <= e {
                return Ok((i + 1, rest));
            }
            rest -= e;
        }
        unreachable!("h is bounded by |k|")
    }

    /// `v_{≥h}(k) = |Vert(k) ∩ [h, ∞)|`.
    pub fn vertices_right_of(&self, h: usize) -> Result<usize, IndexError> {
        let (i, i_prime) = self.leaf_coord_inv(h)?;
        Ok((self.0[i - 1] - i_prime) + self.0[i..].iter().map(|e| e - 1).sum::<usize>())
    }

    /// Parses `"3,1,2"`.
    pub fn parse(text: &str) -> Result<Self, IndexError> {
        text.parse()
    }
}

impl FromStr for MultiIndex {
    type Err = IndexError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let trimmed = text
            .trim()
            .trim_start_matches(['(', '['])
            .trim_end_matches([')', ']']);
        let entries = trimmed
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| IndexError::Parse(text.to_string()))?;
        MultiIndex::new(entries)
    }
}

impl TryFrom<Vec<usize>> for MultiIndex {
    type Error = IndexError;
    fn try_from(v: Vec<usize>) -> Result<Self, Self::Error> {
        MultiIndex::new(v)
    }
}

impl From<MultiIndex> for Vec<usize> {
    fn from(k: MultiIndex) -> Self {
        k.0
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (n, e) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Shorthand used throughout the tests: `mi(&[3, 1, 2])`.
pub fn mi(entries: &[usize]) -> MultiIndex {
    MultiIndex::new(entries.to_vec()).expect("valid multi-index literal")
}

/// All six statistics of a multi-index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub size: usize,
    pub trees: usize,
    pub vertices: usize,
    pub nonvertical: usize,
    pub tilde: Option<MultiIndex>,
    pub vert_set: Vec<usize>,
}

pub fn stats(k: &MultiIndex) -> Stats {
    Stats {
        size: k.size(),
        trees: k.trees(),
        vertices: k.vertices(),
        nonvertical: k.nonvertical(),
        tilde: k.tilde(),
        vert_set: k.vert_set(),
    }
}

/// `k1 ♯ k0`: the forest of type `k1` grafted on top of `k0`.
pub fn glue(k1: &MultiIndex, k0: &MultiIndex) -> Result<MultiIndex, IndexError> {
    if k0.size() != k1.trees() {
        return Err(IndexError::ArityMismatch(format!(
            "{k1} ♯ {k0} needs |k0| = n(k1), got {} ≠ {}",
            k0.size(),
            k1.trees()
        )));
    }
    let mut out = Vec::with_capacity(k0.trees());
    let mut it = k1.entries().iter();
    for &block in k0.entries() {
        out.push(it.by_ref().take(block).sum());
    }
    Ok(MultiIndex(out))
}

/// A decomposition `k = k1 ♯ k0`, labelled by the subset of `Vert(k)` that
/// becomes the vertex set of the lower factor `k0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Splitting {
    pub k0: MultiIndex,
    pub k1: MultiIndex,
    pub lower: Vec<usize>,
}

/// Splitting determined by the cut positions `lower ⊂ Vert(k)`.
pub fn splitting_from_subset(k: &MultiIndex, lower: &[usize]) -> Result<Splitting, IndexError> {
    let verts = k.vert_set();
    if let Some(p) = lower.iter().find(|p| !verts.contains(p)) {
        return Err(IndexError::OutOfRange(format!("{p} is not in Vert{k}")));
    }
    let mut k1 = Vec::new();
    let mut k0 = Vec::new();
    let mut start = 1;
    for &e in k.entries() {
        let end = start + e - 1;
        let mut pieces = 0;
        let mut piece_start = start;
        for p in start..end {
            if lower.contains(&p) {
                k1.push(p + 1 - piece_start);
                piece_start = p + 1;
                pieces += 1;
            }
        }
        k1.push(end + 1 - piece_start);
        k0.push(pieces + 1);
        start = end + 1;
    }
    let mut lower = lower.to_vec();
    lower.sort_unstable();
    Ok(Splitting {
        k0: MultiIndex(k0),
        k1: MultiIndex(k1),
        lower,
    })
}

/// All `2^{v(k)}` splittings, ordered lexicographically by their subset.
pub fn enumerate_splittings(k: &MultiIndex) -> Vec<Splitting> {
    let verts = k.vert_set();
    let mut subsets: Vec<Vec<usize>> = (0u64..1 << verts.len())
        .map(|mask| {
            verts
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &p)| p)
                .collect()
        })
        .collect();
    subsets.sort();
    subsets
        .iter()
        .map(|s| splitting_from_subset(k, s).expect("subset of Vert(k)"))
        .collect()
}

/// Decompositions `l = l0 ♯ l1` of a descending-side index, as pairs `(l0, l1)`.
pub fn enumerate_cosplittings(l: &MultiIndex) -> Vec<(MultiIndex, MultiIndex)> {
    enumerate_splittings(l)
        .into_iter()
        .map(|s| (s.k1, s.k0))
        .collect()
}

/// The identification `Vert(k0) ⊔ Vert(k1) ≅ Vert(k1 ♯ k0)`.
///
/// Returns the positions in `Vert(k)` (as leaf positions) of the vertices of
/// `k0` and of `k1`, each in their own order.
pub fn vertex_identification(
    k1: &MultiIndex,
    k0: &MultiIndex,
) -> Result<(Vec<usize>, Vec<usize>), IndexError> {
    glue(k1, k0)?;
    let ends = k1.tree_ends();
    let lower = k0.vert_set().iter().map(|&p| ends[p - 1]).collect();
    Ok((lower, k1.vert_set()))
}

/// `c(k, l)`, the dimension of the symmetry group acting on biforests of type `(k, l)`.
pub fn symmetry_dim(k: &MultiIndex, l: &MultiIndex) -> usize {
    match (k.is_vertical(), l.is_vertical()) {
        (true, true) => 0,
        (false, true) => k.nonvertical(),
        (true, false) => l.nonvertical(),
        (false, false) => 1,
    }
}

/// A bimodule index `(k^l | ε | k^r)`.
///
/// For `ε = 1` the last entry of `left` and the first entry of `right` may be
/// zero; they count the leaves of the module tree on either side of the
/// module leaf. For `ε = 0` both sides are ordinary (possibly empty) lists.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawBimoduleIndex", into = "RawBimoduleIndex")]
pub struct BimoduleIndex {
    left: Vec<usize>,
    eps: bool,
    right: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawBimoduleIndex {
    left: Vec<usize>,
    eps: u8,
    right: Vec<usize>,
}

impl TryFrom<RawBimoduleIndex> for BimoduleIndex {
    type Error = IndexError;
    fn try_from(raw: RawBimoduleIndex) -> Result<Self, Self::Error> {
        match raw.eps {
            0 => BimoduleIndex::new(raw.left, false, raw.right),
            1 => BimoduleIndex::new(raw.left, true, raw.right),
            e => Err(IndexError::InvalidBimodule(format!(
                "eps must be 0 or 1, got {e}"
            ))),
        }
    }
}

impl From<BimoduleIndex> for RawBimoduleIndex {
    fn from(b: BimoduleIndex) -> Self {
        RawBimoduleIndex {
            left: b.left,
            eps: b.eps as u8,
            right: b.right,
        }
    }
}

impl BimoduleIndex {
    pub fn new(left: Vec<usize>, eps: bool, right: Vec<usize>) -> Result<Self, IndexError> {
        if eps {
            if left.is_empty() || right.is_empty() {
                return Err(IndexError::InvalidBimodule(
                    "with ε = 1 both sides need at least the module-tree entry".into(),
                ));
            }
            if left[..left.len() - 1].contains(&0) || right[1..].contains(&0) {
                return Err(IndexError::InvalidBimodule(
                    "only the module-tree entries may be zero".into(),
                ));
            }
        } else {
            if left.contains(&0) || right.contains(&0) {
                return Err(IndexError::InvalidBimodule(
                    "with ε = 0 entries must be ≥ 1".into(),
                ));
            }
            if left.is_empty() && right.is_empty() {
                return Err(IndexError::InvalidBimodule("both sides empty".into()));
            }
        }
        Ok(BimoduleIndex { left, eps, right })
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }

    pub fn eps(&self) -> bool {
        self.eps
    }

    /// The underlying multi-index of the whole forest.
    pub fn total(&self) -> MultiIndex {
        if self.eps {
            let mut out = self.left[..self.left.len() - 1].to_vec();
            out.push(self.left[self.left.len() - 1] + 1 + self.right[0]);
            out.extend_from_slice(&self.right[1..]);
            MultiIndex(out)
        } else {
            MultiIndex([self.left.as_slice(), self.right.as_slice()].concat())
        }
    }

    /// Leaf position `|k^l| + 1` of the module leaf, when `ε = 1`.
    pub fn module_leaf(&self) -> Option<usize> {
        self.eps.then(|| self.left.iter().sum::<usize>() + 1)
    }

    /// Cuts a multi-index at the module leaf `i`.
    pub fn from_module_leaf(k: &MultiIndex, i: usize) -> Result<Self, IndexError> {
        let (t, t_prime) = k.leaf_coord_inv(i)?;
        let e = k.entries();
        let mut left = e[..t - 1].to_vec();
        left.push(t_prime - 1);
        let mut right = vec![e[t - 1] - t_prime];
        right.extend_from_slice(&e[t..]);
        BimoduleIndex::new(left, true, right)
    }

    /// Empty-side check used by the E-relation.
    pub fn one_side_empty(&self) -> bool {
        !self.eps && (self.left.is_empty() || self.right.is_empty())
    }
}

impl fmt::Display for BimoduleIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| {
            if v.is_empty() {
                "∅".to_string()
            } else {
                v.iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            }
        };
        write!(
            f,
            "({}|{}|{})",
            join(&self.left),
            self.eps as u8,
            join(&self.right)
        )
    }
}

impl fmt::Debug for BimoduleIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for BimoduleIndex {
    type Err = IndexError;

    /// Parses `"2,0|1|2,1"`; an empty side is written as nothing or `∅`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = text.trim().trim_matches(['(', ')']).split('|').collect();
        if parts.len() != 3 {
            return Err(IndexError::Parse(text.to_string()));
        }
        let side = |s: &str| -> Result<Vec<usize>, IndexError> {
            let s = s.trim();
            if s.is_empty() || s == "∅" {
                return Ok(Vec::new());
            }
            s.split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|_| IndexError::Parse(text.to_string()))
        };
        let eps = match parts[1].trim() {
            "0" => false,
            "1" => true,
            _ => return Err(IndexError::Parse(text.to_string())),
        };
        BimoduleIndex::new(side(parts[0])?, eps, side(parts[2])?)
    }
}

/// One term of a bimodule splitting: `((b0, l0), (b1, l1))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BimoduleSplitting {
    pub b0: BimoduleIndex,
    pub l0: MultiIndex,
    pub b1: BimoduleIndex,
    pub l1: MultiIndex,
}

/// All splittings `(b, l) = (b1, l1) ♯ (b0, l0)` of a bimodule index.
pub fn bimodule_split(
    b: &BimoduleIndex,
    l: &MultiIndex,
) -> Result<Vec<BimoduleSplitting>, IndexError> {
    let mut halves: Vec<(BimoduleIndex, BimoduleIndex)> = Vec::new();
    if b.eps {
        let k = b.total();
        let i = b.module_leaf().expect("eps = 1");
        for s in enumerate_splittings(&k) {
            let b1 = BimoduleIndex::from_module_leaf(&s.k1, i)?;
            let b0 = BimoduleIndex::from_module_leaf(&s.k0, b1.left.len())?;
            if glue(&b1.total(), &b0.total())? != k {
                return Err(IndexError::ArityMismatch(format!(
                    "splitting of {b} does not re-glue"
                )));
            }
            halves.push((b0, b1));
        }
    } else {
        let sides = |v: &[usize]| -> Vec<(Vec<usize>, Vec<usize>)> {
            if v.is_empty() {
                vec![(Vec::new(), Vec::new())]
            } else {
                enumerate_splittings(&MultiIndex(v.to_vec()))
                    .into_iter()
                    .map(|s| (s.k0.0, s.k1.0))
                    .collect()
            }
        };
        for (l0, l1) in sides(&b.left) {
            for (r0, r1) in sides(&b.right) {
                halves.push((
                    BimoduleIndex::new(l0.clone(), false, r0.clone())?,
                    BimoduleIndex::new(l1.clone(), false, r1.clone())?,
                ));
            }
        }
    }
    let mut out = Vec::new();
    for (b0, b1) in &halves {
        for (l0, l1) in enumerate_cosplittings(l) {
            out.push(BimoduleSplitting {
                b0: b0.clone(),
                l0,
                b1: b1.clone(),
                l1,
            });
        }
    }
    Ok(out)
}

/// All multi-indices with the given number of leaves, in lexicographic order.
pub fn compositions(n: usize) -> Vec<MultiIndex> {
    fn rec(rest: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
        if rest == 0 {
            out.push(MultiIndex(cur.clone()));
            return;
        }
        for first in 1..=rest {
            cur.push(first);
            rec(rest - first, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, &mut Vec::new(), &mut out);
    }
    out
}

/// All multi-indices with `1 ≤ |k| ≤ max`.
pub fn indices_up_to(max: usize) -> Vec<MultiIndex> {
    (1..=max).flat_map(compositions).collect()
}
