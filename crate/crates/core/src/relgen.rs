//! Symbolic coherence relations and the normal forms of simplifiable operations.
//!
//! Operations act on tensor grids: `α^k_l` sends `(A^b)^{|k|}` (one row of `b`
//! factors per leaf of `k`) to `(A^{|l|})^a` (one row per tree of `k`), with
//! `a = n(k)`, `b = n(l)`. Grids are flattened row-major.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::multiindex::{
    bimodule_split, compositions, enumerate_cosplittings, enumerate_splittings, symmetry_dim,
    BimoduleIndex, IndexError, MultiIndex,
};
use crate::signs::{rho, tau_order, SignBit};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelgenError {
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("{0} is not simplifiable")]
    NotSimplifiable(OpLabel),
    #[error("cannot delete tree {tree} on the {side} side of {op}")]
    BadDeletion {
        op: OpLabel,
        side: &'static str,
        tree: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Alpha,
    F,
    Beta,
    Mu,
    Nu,
    #[serde(rename = "Phi")]
    Phi,
}

impl OpKind {
    fn symbol(self) -> &'static str {
        match self {
            OpKind::Alpha => "α",
            OpKind::F => "f",
            OpKind::Beta => "β",
            OpKind::Mu => "μ",
            OpKind::Nu => "ν",
            OpKind::Phi => "Φ",
        }
    }

    fn is_bimodule(self) -> bool {
        matches!(self, OpKind::Mu | OpKind::Nu | OpKind::Phi)
    }
}

/// Which algebra a tensor factor belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    A,
    M,
    B,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpIndex {
    Plain(MultiIndex),
    Bimodule(BimoduleIndex),
}

/// An operation `α^k_l`, `f^k_l`, `β^k_l`, `μ^{k^l|ε|k^r}_l`, ...
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpLabel {
    kind: OpKind,
    upper: OpIndex,
    l: MultiIndex,
}

impl OpLabel {
    pub fn alpha(k: MultiIndex, l: MultiIndex) -> Self {
        OpLabel {
            kind: OpKind::Alpha,
            upper: OpIndex::Plain(k),
            l,
        }
    }

    pub fn beta(k: MultiIndex, l: MultiIndex) -> Self {
        OpLabel {
            kind: OpKind::Beta,
            upper: OpIndex::Plain(k),
            l,
        }
    }

    pub fn f(k: MultiIndex, l: MultiIndex) -> Self {
        OpLabel {
            kind: OpKind::F,
            upper: OpIndex::Plain(k),
            l,
        }
    }

    /// A module operation, with the empty-side substitution applied.
    pub fn mu(b: BimoduleIndex, l: MultiIndex) -> Self {
        if !b.eps() && b.right().is_empty() {
            return OpLabel::alpha(MultiIndex::new(b.left().to_vec()).expect("nonempty"), l);
        }
        if !b.eps() && b.left().is_empty() {
            return OpLabel::beta(MultiIndex::new(b.right().to_vec()).expect("nonempty"), l);
        }
        OpLabel {
            kind: OpKind::Mu,
            upper: OpIndex::Bimodule(b),
            l,
        }
    }

    /// A module operation kept as written, without substitution.
    pub fn mu_raw(b: BimoduleIndex, l: MultiIndex) -> Self {
        OpLabel {
            kind: OpKind::Mu,
            upper: OpIndex::Bimodule(b),
            l,
        }
    }

    pub fn nu(b: BimoduleIndex, l: MultiIndex) -> Self {
        OpLabel {
            kind: OpKind::Nu,
            upper: OpIndex::Bimodule(b),
            l,
        }
    }

    pub fn phi(b: BimoduleIndex, l: MultiIndex) -> Self {
        OpLabel {
            kind: OpKind::Phi,
            upper: OpIndex::Bimodule(b),
            l,
        }
    }

    pub fn kind(&self) -> OpKind {
        self.kind
    }

    pub fn upper(&self) -> &OpIndex {
        &self.upper
    }

    pub fn l(&self) -> &MultiIndex {
        &self.l
    }

    /// The total upper multi-index.
    pub fn k(&self) -> MultiIndex {
        match &self.upper {
            OpIndex::Plain(k) => k.clone(),
            OpIndex::Bimodule(b) => b.total(),
        }
    }

    pub fn c(&self) -> usize {
        symmetry_dim(&self.k(), &self.l)
    }

    /// `dim K` for structure maps, `dim J` for morphism components.
    pub fn degree(&self) -> i64 {
        let v = (self.k().vertices() + self.l.vertices()) as i64;
        match self.kind {
            OpKind::F | OpKind::Phi => v,
            _ => v - 1,
        }
    }

    /// `(inputs, outputs)`: `|k|·n(l)` and `n(k)·|l|` factors.
    pub fn arity(&self) -> (usize, usize) {
        let k = self.k();
        (k.size() * self.l.trees(), k.trees() * self.l.size())
    }

    fn leaf_colors(&self) -> Vec<Color> {
        match (&self.upper, self.kind) {
            (_, OpKind::F | OpKind::Alpha) => vec![Color::A; self.k().size()],
            (_, OpKind::Beta) => vec![Color::B; self.k().size()],
            (OpIndex::Bimodule(b), _) => {
                let mut out = vec![Color::A; b.left().iter().sum()];
                if b.eps() {
                    out.push(Color::M);
                }
                out.extend(vec![Color::B; b.right().iter().sum()]);
                out
            }
            (OpIndex::Plain(k), _) => vec![Color::A; k.size()],
        }
    }

    fn tree_colors(&self) -> Vec<Color> {
        match (&self.upper, self.kind) {
            (_, OpKind::F) => vec![Color::B; self.k().trees()],
            (_, OpKind::Alpha) => vec![Color::A; self.k().trees()],
            (_, OpKind::Beta) => vec![Color::B; self.k().trees()],
            (OpIndex::Bimodule(b), _) => tree_colors(b),
            (OpIndex::Plain(k), _) => vec![Color::A; k.trees()],
        }
    }

    /// Color of each input factor, row-major.
    pub fn input_colors(&self) -> Vec<Color> {
        let b = self.l.trees();
        self.leaf_colors()
            .into_iter()
            .flat_map(|c| std::iter::repeat_n(c, b))
            .collect()
    }

    /// Color of each output factor, row-major.
    pub fn output_colors(&self) -> Vec<Color> {
        let n = self.l.size();
        self.tree_colors()
            .into_iter()
            .flat_map(|c| std::iter::repeat_n(c, n))
            .collect()
    }

    /// Colored bimodule form of an `α`, `β` or `μ` label.
    fn colored(&self) -> Option<BimoduleIndex> {
        match (self.kind, &self.upper) {
            (OpKind::Alpha, OpIndex::Plain(k)) => {
                Some(BimoduleIndex::new(k.entries().to_vec(), false, Vec::new()).expect("valid"))
            }
            (OpKind::Beta, OpIndex::Plain(k)) => {
                Some(BimoduleIndex::new(Vec::new(), false, k.entries().to_vec()).expect("valid"))
            }
            (OpKind::Mu, OpIndex::Bimodule(b)) => Some(b.clone()),
            _ => None,
        }
    }
}

fn tree_colors(b: &BimoduleIndex) -> Vec<Color> {
    if b.eps() {
        let mut out = vec![Color::A; b.left().len() - 1];
        out.push(Color::M);
        out.extend(vec![Color::B; b.right().len() - 1]);
        out
    } else {
        let mut out = vec![Color::A; b.left().len()];
        out.extend(vec![Color::B; b.right().len()]);
        out
    }
}

/// Removes the vertical tree `t` (an index into the total multi-index).
fn remove_tree(b: &BimoduleIndex, t: usize) -> BimoduleIndex {
    let (mut left, mut right) = (b.left().to_vec(), b.right().to_vec());
    let nl = if b.eps() { left.len() - 1 } else { left.len() };
    if t < nl {
        left.remove(t);
        BimoduleIndex::new(left, b.eps(), right).expect("still valid")
    } else if b.eps() && t == nl {
        left.pop();
        right.remove(0);
        BimoduleIndex::new(left, false, right).expect("another tree remains")
    } else {
        let offset = t - nl;
        right.remove(offset);
        BimoduleIndex::new(left, b.eps(), right).expect("still valid")
    }
}

/// The operation of a single tree `t` of a colored index.
fn single_tree(b: &BimoduleIndex, t: usize, l: MultiIndex) -> OpLabel {
    let k = b.total();
    let size = k.entries()[t];
    let colors = tree_colors(b);
    match colors[t] {
        Color::A => OpLabel::alpha(MultiIndex::single(size), l),
        Color::B => OpLabel::beta(MultiIndex::single(size), l),
        Color::M => {
            let x = *b.left().last().expect("eps");
            let y = b.right()[0];
            OpLabel::mu(
                BimoduleIndex::new(vec![x], true, vec![y]).expect("valid"),
                l,
            )
        }
    }
}

fn with_upper(label: &OpLabel, b: BimoduleIndex) -> OpLabel {
    OpLabel::mu(b, label.l.clone())
}

fn sup(n: usize) -> String {
    const D: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    n.to_string()
        .chars()
        .map(|c| D[c as usize - '0' as usize])
        .collect()
}

fn sub(n: usize) -> String {
    const D: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    n.to_string()
        .chars()
        .map(|c| D[c as usize - '0' as usize])
        .collect()
}

impl fmt::Display for OpLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.kind.symbol();
        match &self.upper {
            OpIndex::Plain(k) if k.trees() == 1 && self.l.trees() == 1 => {
                write!(f, "{s}{}{}", sup(k.entries()[0]), sub(self.l.entries()[0]))
            }
            OpIndex::Plain(k) => write!(f, "{s}^{{{k}}}_{{{}}}", self.l),
            OpIndex::Bimodule(b) => write!(f, "{s}^{{{b}}}_{{{}}}", self.l),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawLabel {
    op: OpKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    k: Option<MultiIndex>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    b: Option<BimoduleIndex>,
    l: MultiIndex,
}

impl Serialize for OpLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (k, b) = match &self.upper {
            OpIndex::Plain(k) => (Some(k.clone()), None),
            OpIndex::Bimodule(b) => (None, Some(b.clone())),
        };
        RawLabel {
            op: self.kind,
            k,
            b,
            l: self.l.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OpLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = RawLabel::deserialize(d)?;
        let upper = match (raw.op.is_bimodule(), raw.k, raw.b) {
            (false, Some(k), None) => OpIndex::Plain(k),
            (true, None, Some(b)) => OpIndex::Bimodule(b),
            _ => {
                return Err(D::Error::custom(
                    "label needs \"k\" for α/β/f and \"b\" for μ/ν/Φ",
                ))
            }
        };
        Ok(OpLabel {
            kind: raw.op,
            upper,
            l: raw.l,
        })
    }
}

/// A symbolic composite of operations, identities, differentials and
/// Koszul-signed permutations of tensor factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    /// The zero map with the shape of the given operation.
    Zero(OpLabel),
    Gen(OpLabel),
    Id(usize),
    /// `Σ id ⊗ ∂ ⊗ id` on `n` factors.
    Diff(usize),
    /// Output position `t` receives input factor `perm[t]`.
    Shuffle(Vec<usize>),
    Tensor(Vec<Expr>),
    /// Outermost first.
    Compose(Vec<Expr>),
}

impl Expr {
    pub fn arity(&self) -> (usize, usize) {
        match self {
            Expr::Zero(op) | Expr::Gen(op) => op.arity(),
            Expr::Id(n) | Expr::Diff(n) => (*n, *n),
            Expr::Shuffle(p) => (p.len(), p.len()),
            Expr::Tensor(xs) => xs.iter().fold((0, 0), |(i, o), x| {
                let (a, b) = x.arity();
                (i + a, o + b)
            }),
            Expr::Compose(xs) => (
                xs.last().map_or(0, |x| x.arity().0),
                xs.first().map_or(0, |x| x.arity().1),
            ),
        }
    }

    /// Operations occurring in the expression, in order of appearance.
    pub fn generators(&self) -> Vec<OpLabel> {
        let mut out = Vec::new();
        self.collect_generators(&mut out);
        out
    }

    fn collect_generators(&self, out: &mut Vec<OpLabel>) {
        match self {
            Expr::Gen(op) => out.push(op.clone()),
            Expr::Tensor(xs) | Expr::Compose(xs) => {
                xs.iter().for_each(|x| x.collect_generators(out))
            }
            _ => {}
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Zero(_))
    }

    /// Flattens nested products, drops identities, merges permutations and
    /// pulls permutations out of tensor products.
    pub fn simplify(self) -> Expr {
        let (n_in, _) = self.arity();
        match self {
            Expr::Shuffle(p) if is_identity(&p) => Expr::Id(p.len()),
            Expr::Tensor(xs) => simplify_tensor(xs),
            Expr::Compose(xs) => simplify_compose(xs, n_in),
            other => other,
        }
    }
}

fn is_identity(p: &[usize]) -> bool {
    p.iter().enumerate().all(|(i, &x)| i == x)
}

fn simplify_tensor(xs: Vec<Expr>) -> Expr {
    let mut flat: Vec<Expr> = Vec::new();
    for x in xs {
        match x.simplify() {
            Expr::Tensor(inner) => flat.extend(inner),
            Expr::Id(0) => {}
            other => flat.push(other),
        }
    }
    // Hoist leading/trailing permutations of composite factors.
    let mut outer: Vec<usize> = Vec::new();
    let mut inner: Vec<usize> = Vec::new();
    let (mut out_off, mut in_off) = (0, 0);
    let mut stripped = Vec::with_capacity(flat.len());
    let mut hoisted = false;
    for x in flat {
        let (ni, no) = x.arity();
        let mut core = x;
        let mut o: Vec<usize> = (0..no).collect();
        let mut i: Vec<usize> = (0..ni).collect();
        if let Expr::Compose(mut parts) = core {
            if let Some(Expr::Shuffle(p)) = parts.first() {
                o = p.clone();
                parts.remove(0);
                hoisted = true;
            }
            if let Some(Expr::Shuffle(p)) = parts.last() {
                i = p.clone();
                parts.pop();
                hoisted = true;
            }
            core = match parts.len() {
                0 => Expr::Id(ni),
                1 => parts.pop().expect("one part"),
                _ => Expr::Compose(parts),
            };
        } else if let Expr::Shuffle(p) = core {
            i = p;
            core = Expr::Id(ni);
            hoisted = true;
        }
        outer.extend(o.iter().map(|&t| t + out_off));
        inner.extend(i.iter().map(|&t| t + in_off));
        out_off += no;
        in_off += ni;
        stripped.push(core);
    }
    // Merge neighbouring identities.
    let mut merged: Vec<Expr> = Vec::new();
    for x in stripped {
        match (merged.last_mut(), x) {
            (_, Expr::Id(0)) => {}
            (Some(Expr::Id(n)), Expr::Id(m)) => *n += m,
            (_, x) => merged.push(x),
        }
    }
    let body = match merged.len() {
        0 => Expr::Id(in_off),
        1 => merged.pop().expect("one factor"),
        _ => Expr::Tensor(merged),
    };
    if hoisted {
        simplify_compose(
            vec![Expr::Shuffle(outer), body, Expr::Shuffle(inner)],
            in_off,
        )
    } else {
        body
    }
}

fn simplify_compose(xs: Vec<Expr>, n_in: usize) -> Expr {
    let mut flat: Vec<Expr> = Vec::new();
    for x in xs {
        match x.simplify() {
            Expr::Compose(inner) => flat.extend(inner),
            Expr::Id(_) => {}
            other => flat.push(other),
        }
    }
    let mut merged: Vec<Expr> = Vec::new();
    for x in flat {
        match (merged.last_mut(), x) {
            (Some(Expr::Shuffle(outer)), Expr::Shuffle(p)) => {
                // `outer` is applied after `p`.
                *outer = outer.iter().map(|&t| p[t]).collect();
                if is_identity(outer) {
                    merged.pop();
                }
            }
            (_, Expr::Shuffle(p)) if is_identity(&p) => {}
            (_, x) => merged.push(x),
        }
    }
    match merged.len() {
        0 => Expr::Id(n_in),
        1 => merged.pop().expect("one factor"),
        _ => Expr::Compose(merged),
    }
}

fn tau_shape(p: &[usize]) -> Option<(usize, usize)> {
    let n = p.len();
    (2..n)
        .filter(|a| n.is_multiple_of(*a) && n / a >= 2)
        .map(|a| (a, n / a))
        .find(|&(a, b)| tau_order(a, b) == p)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Zero(_) => write!(f, "0"),
            Expr::Gen(op) => write!(f, "{op}"),
            Expr::Id(1) => write!(f, "id"),
            Expr::Id(n) => write!(f, "id^{{⊗{n}}}"),
            Expr::Diff(1) => write!(f, "∂"),
            Expr::Diff(n) => write!(f, "∂_{{{n}}}"),
            Expr::Shuffle(p) => match tau_shape(p) {
                Some((a, b)) => write!(f, "τ{}{}", sup(a), sub(b)),
                None => {
                    let ps: Vec<String> = p.iter().map(|x| (x + 1).to_string()).collect();
                    write!(f, "σ[{}]", ps.join(","))
                }
            },
            Expr::Tensor(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ⊗ ")?;
                    }
                    match x {
                        Expr::Compose(_) | Expr::Tensor(_) => write!(f, "({x})")?,
                        _ => write!(f, "{x}")?,
                    }
                }
                Ok(())
            }
            Expr::Compose(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "∘")?;
                    }
                    match x {
                        Expr::Compose(_) | Expr::Tensor(_) => write!(f, "({x})")?,
                        _ => write!(f, "{x}")?,
                    }
                }
                Ok(())
            }
        }
    }
}

/// Permutation moving the column blocks of a `rows × Σwidths` grid apart:
/// block by block, each block read row-major.
pub fn column_blocks_perm(rows: usize, widths: &[usize]) -> Vec<usize> {
    let total: usize = widths.iter().sum();
    let mut out = Vec::with_capacity(rows * total);
    let mut start = 0;
    for &w in widths {
        for r in 0..rows {
            out.extend((start..start + w).map(|c| r * total + c));
        }
        start += w;
    }
    out
}

/// Moves row `p` of a `rows × width` grid to the end.
fn row_to_end(rows: usize, width: usize, p: usize) -> Vec<usize> {
    (0..rows)
        .filter(|&r| r != p)
        .chain(std::iter::once(p))
        .flat_map(|r| r * width..(r + 1) * width)
        .collect()
}

/// Moves column `c` of a `rows × width` grid to the end (after all rows).
fn column_to_end(rows: usize, width: usize, c: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..rows)
        .flat_map(|r| {
            (0..width)
                .filter(move |&x| x != c)
                .map(move |x| r * width + x)
        })
        .collect();
    out.extend((0..rows).map(|r| r * width + c));
    out
}

pub fn inverse(p: &[usize]) -> Vec<usize> {
    let mut out = vec![0; p.len()];
    for (t, &x) in p.iter().enumerate() {
        out[x] = t;
    }
    out
}

/// Side of a vertical-tree deletion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Deletion {
    /// Delete the vertical tree at this position of the upper index.
    Upper(usize),
    /// Delete the vertical tree at this position of `l`.
    Lower(usize),
}

/// Deletions applicable to a structure operation with `c = 1`, in position order.
pub fn applicable_deletions(op: &OpLabel) -> Vec<Deletion> {
    let Some(_) = op.colored() else {
        return Vec::new();
    };
    let k = op.k();
    let l = &op.l;
    if symmetry_dim(&k, l) != 1 {
        return Vec::new();
    }
    let mut out = Vec::new();
    if l.has_entries_at_most_two() && k.trees() >= 2 {
        out.extend(
            (0..k.trees())
                .filter(|&t| k.entries()[t] == 1)
                .map(Deletion::Upper),
        );
    }
    if k.has_entries_at_most_two() && l.trees() >= 2 {
        out.extend(
            (0..l.trees())
                .filter(|&j| l.entries()[j] == 1)
                .map(Deletion::Lower),
        );
    }
    out
}

fn tilde_upper(color: Color, l: &MultiIndex) -> Expr {
    Expr::Tensor(
        l.entries()
            .iter()
            .map(|&e| match e {
                1 => Expr::Id(1),
                _ => Expr::Gen(match color {
                    Color::A => OpLabel::alpha(MultiIndex::single(1), MultiIndex::single(2)),
                    Color::B => OpLabel::beta(MultiIndex::single(1), MultiIndex::single(2)),
                    Color::M => OpLabel::mu(
                        BimoduleIndex::new(vec![0], true, vec![0]).expect("valid"),
                        MultiIndex::single(2),
                    ),
                }),
            })
            .collect(),
    )
}

fn tilde_lower(b: &BimoduleIndex) -> Expr {
    let k = b.total();
    Expr::Tensor(
        (0..k.trees())
            .map(|t| match k.entries()[t] {
                1 => Expr::Id(1),
                _ => Expr::Gen(single_tree(b, t, MultiIndex::single(1))),
            })
            .collect(),
    )
}

/// One deletion step: `op ≃ op' ⊗ α̃` with the block identifications, where
/// `op'` is expanded by `rest`.
fn delete_step(
    op: &OpLabel,
    step: Deletion,
    rest: &dyn Fn(&OpLabel) -> Result<Expr, RelgenError>,
) -> Result<Expr, RelgenError> {
    let bad = |side, tree| RelgenError::BadDeletion {
        op: op.clone(),
        side,
        tree,
    };
    let b = op.colored().ok_or_else(|| bad("upper", 0))?;
    if !applicable_deletions(op).contains(&step) {
        return Err(match step {
            Deletion::Upper(t) => bad("upper", t),
            Deletion::Lower(j) => bad("lower", j),
        });
    }
    let k = b.total();
    let l = op.l.clone();
    let (bn, ln, a) = (l.trees(), l.size(), k.trees());
    match step {
        Deletion::Upper(t) => {
            let p: usize = k.entries()[..t].iter().sum();
            let m_in = row_to_end(k.size(), bn, p);
            let m_out = row_to_end(a, ln, t);
            let residual = with_upper(op, remove_tree(&b, t));
            let piece = tilde_upper(tree_colors(&b)[t], &l);
            Ok(Expr::Compose(vec![
                Expr::Shuffle(inverse(&m_out)),
                Expr::Tensor(vec![rest(&residual)?, piece]),
                Expr::Shuffle(m_in),
            ]))
        }
        Deletion::Lower(j) => {
            let q: usize = l.entries()[..j].iter().sum();
            let m_in = column_to_end(k.size(), bn, j);
            let m_out = column_to_end(a, ln, q);
            let mut lhat = l.entries().to_vec();
            lhat.remove(j);
            let residual = OpLabel::mu(b.clone(), MultiIndex::new(lhat).expect("b ≥ 2"));
            let piece = tilde_lower(&b);
            Ok(Expr::Compose(vec![
                Expr::Shuffle(inverse(&m_out)),
                Expr::Tensor(vec![rest(&residual)?, piece]),
                Expr::Shuffle(m_in),
            ]))
        }
    }
}

fn colored_normal_form(op: &OpLabel, b: &BimoduleIndex) -> Expr {
    let k = b.total();
    let l = &op.l;
    let (bn, a) = (l.trees(), k.trees());
    match symmetry_dim(&k, l) {
        0 => return Expr::Diff(op.arity().0),
        1 => {}
        _ => return Expr::Zero(op.clone()),
    }
    if l.is_vertical() && a >= 2 {
        // The single non-vertical tree t carries the whole operation.
        let t = k.entries().iter().position(|&e| e >= 2).expect("c = 1");
        let core = normal_form(&single_tree(b, t, l.clone()));
        return Expr::Tensor(vec![Expr::Id(t * bn), core, Expr::Id((a - t - 1) * bn)]).simplify();
    }
    if k.is_vertical() && bn >= 2 {
        let j = l.entries().iter().position(|&e| e >= 2).expect("c = 1");
        let lj = l.entries()[j];
        let psi_in = column_blocks_perm(a, &[j, 1, bn - j - 1]);
        let psi_out = column_blocks_perm(a, &[j, lj, bn - j - 1]);
        let core = normal_form(&OpLabel::mu(b.clone(), MultiIndex::single(lj)));
        return Expr::Compose(vec![
            Expr::Shuffle(inverse(&psi_out)),
            Expr::Tensor(vec![Expr::Id(a * j), core, Expr::Id(a * (bn - j - 1))]),
            Expr::Shuffle(psi_in),
        ])
        .simplify();
    }
    let dels = applicable_deletions(op);
    let step = dels
        .iter()
        .rev()
        .find(|d| matches!(d, Deletion::Upper(_)))
        .or_else(|| dels.last())
        .copied();
    match step {
        Some(step) => delete_step(op, step, &|x| Ok(normal_form(x)))
            .expect("applicable deletion")
            .simplify(),
        None => Expr::Gen(op.clone()),
    }
}

fn morphism_normal_form(op: &OpLabel) -> Expr {
    let OpIndex::Plain(k) = &op.upper else {
        return Expr::Gen(op.clone());
    };
    let l = &op.l;
    let (a, bn) = (k.trees(), l.trees());
    let f11 = || Expr::Gen(OpLabel::f(MultiIndex::single(1), MultiIndex::single(1)));
    if k.size() == 1 && l.size() == 1 {
        return Expr::Gen(op.clone());
    }
    if l.is_vertical() {
        if a == 1 && k.entries()[0] >= 2 {
            return Expr::Gen(op.clone());
        }
        let pieces = k
            .entries()
            .iter()
            .map(|&e| match e {
                1 => Expr::Tensor(vec![f11(); bn]),
                _ => Expr::Gen(OpLabel::f(MultiIndex::single(e), l.clone())),
            })
            .collect();
        return Expr::Tensor(pieces).simplify();
    }
    if k.is_vertical() {
        if bn == 1 {
            return Expr::Gen(op.clone());
        }
        let pieces = l
            .entries()
            .iter()
            .map(|&e| match e {
                1 => Expr::Tensor(vec![f11(); a]),
                _ => Expr::Gen(OpLabel::f(k.clone(), MultiIndex::single(e))),
            })
            .collect();
        return Expr::Compose(vec![
            Expr::Shuffle(inverse(&column_blocks_perm(a, l.entries()))),
            Expr::Tensor(pieces),
            Expr::Shuffle(column_blocks_perm(a, &vec![1; bn])),
        ])
        .simplify();
    }
    Expr::Gen(op.clone())
}

/// Canonical expansion by the vanishing, T, V, D, W and E rules; an operation
/// no rule applies to is returned as a generator.
///
/// Deletions run upper side first, from the last vertical tree.
pub fn normal_form(op: &OpLabel) -> Expr {
    match op.kind {
        OpKind::F => morphism_normal_form(op),
        _ => match op.colored() {
            Some(b) => colored_normal_form(op, &b),
            None => Expr::Gen(op.clone()),
        },
    }
}

pub fn expand_simplifications(op: &OpLabel) -> Result<Expr, RelgenError> {
    let nf = normal_form(op);
    if nf == Expr::Gen(op.clone()) {
        return Err(RelgenError::NotSimplifiable(op.clone()));
    }
    Ok(nf)
}

/// Expansion performing the given deletions first (positions refer to the
/// operation current at each step), then the canonical normal form.
pub fn expand_with_deletions(op: &OpLabel, steps: &[Deletion]) -> Result<Expr, RelgenError> {
    match steps.split_first() {
        None => Ok(normal_form(op)),
        Some((&first, rest)) => {
            Ok(delete_step(op, first, &|x| expand_with_deletions(x, rest))?.simplify())
        }
    }
}

/// One summand `(-1)^sign · outer ∘ inner`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationTerm {
    pub sign: SignBit,
    pub outer: OpLabel,
    pub inner: OpLabel,
    /// One factor is a tensor differential.
    pub d_term: bool,
}

impl RelationTerm {
    pub fn expr(&self) -> Expr {
        Expr::Compose(vec![
            Expr::Gen(self.outer.clone()),
            Expr::Gen(self.inner.clone()),
        ])
    }
}

impl fmt::Display for RelationTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sign.is_minus() { "−" } else { "+" };
        write!(f, "{s}{}∘{}", self.outer, self.inner)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub lhs: OpLabel,
    pub terms: Vec<RelationTerm>,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = if self.lhs.kind == OpKind::F { "M" } else { "R" };
        write!(f, "({name}) {}: 0 =", self.lhs)?;
        if self.terms.is_empty() {
            return write!(f, " 0");
        }
        for t in &self.terms {
            write!(f, " {t}")?;
        }
        Ok(())
    }
}

type Quad = (MultiIndex, MultiIndex, MultiIndex, MultiIndex);

fn splitting_quads(k: &MultiIndex, l: &MultiIndex) -> Vec<Quad> {
    let cos = enumerate_cosplittings(l);
    let mut out: Vec<Quad> = enumerate_splittings(k)
        .into_iter()
        .flat_map(|s| {
            cos.iter()
                .map(move |(l0, l1)| (s.k0.clone(), l0.clone(), s.k1.clone(), l1.clone()))
        })
        .collect();
    out.sort();
    out
}

/// `(R^k_l)`: every splitting whose factors are not forced to vanish, signs `ρ`.
pub fn generate_r(k: &MultiIndex, l: &MultiIndex) -> Relation {
    let mut terms = Vec::new();
    for (k0, l0, k1, l1) in splitting_quads(k, l) {
        let (c0, c1) = (symmetry_dim(&k0, &l0), symmetry_dim(&k1, &l1));
        if c0 > 1 || c1 > 1 {
            continue;
        }
        let sign = rho(&k0, &l0, &k1, &l1).expect("splitting glues").rho;
        terms.push(RelationTerm {
            sign,
            outer: OpLabel::alpha(k0, l0),
            inner: OpLabel::alpha(k1, l1),
            d_term: c0 == 0 || c1 == 0,
        });
    }
    Relation {
        lhs: OpLabel::alpha(k.clone(), l.clone()),
        terms,
    }
}

/// `(M^k_l)`: `f∘α` terms with `ρ0` and `β∘f` terms with `ρ1`.
pub fn generate_m(k: &MultiIndex, l: &MultiIndex) -> Relation {
    let mut terms = Vec::new();
    for (k0, l0, k1, l1) in splitting_quads(k, l) {
        let (c0, c1) = (symmetry_dim(&k0, &l0), symmetry_dim(&k1, &l1));
        let r = rho(&k0, &l0, &k1, &l1).expect("splitting glues");
        if c1 <= 1 {
            terms.push(RelationTerm {
                sign: r.rho0,
                outer: OpLabel::f(k0.clone(), l0.clone()),
                inner: OpLabel::alpha(k1.clone(), l1.clone()),
                d_term: c1 == 0,
            });
        }
        if c0 <= 1 {
            terms.push(RelationTerm {
                sign: r.rho1,
                outer: OpLabel::beta(k0, l0),
                inner: OpLabel::f(k1, l1),
                d_term: c0 == 0,
            });
        }
    }
    Relation {
        lhs: OpLabel::f(k.clone(), l.clone()),
        terms,
    }
}

/// Bimodule relation; signs use `ρ` of the total multi-indices and empty
/// sides are replaced by `α` or `β`.
pub fn generate_bimodule_r(b: &BimoduleIndex, l: &MultiIndex) -> Result<Relation, RelgenError> {
    let mut rows = Vec::new();
    for s in bimodule_split(b, l)? {
        let (k0, k1) = (s.b0.total(), s.b1.total());
        let (c0, c1) = (symmetry_dim(&k0, &s.l0), symmetry_dim(&k1, &s.l1));
        if c0 > 1 || c1 > 1 {
            continue;
        }
        let sign = rho(&k0, &s.l0, &k1, &s.l1).expect("splitting glues").rho;
        let key = (
            k0,
            s.l0.clone(),
            k1,
            s.l1.clone(),
            s.b0.clone(),
            s.b1.clone(),
        );
        let term = RelationTerm {
            sign,
            outer: OpLabel::mu(s.b0, s.l0),
            inner: OpLabel::mu(s.b1, s.l1),
            d_term: c0 == 0 || c1 == 0,
        };
        rows.push((key, term));
    }
    rows.sort_by(|x, y| x.0.cmp(&y.0));
    Ok(Relation {
        lhs: OpLabel::mu(b.clone(), l.clone()),
        terms: rows.into_iter().map(|r| r.1).collect(),
    })
}

/// The vanishing criterion for a `ℤ`-graded algebra concentrated in degrees
/// `0..=maxdeg`: `|k| > (a·maxdeg - 1)|l| + a + b + 1` for structure maps, one
/// less on the right for morphism components (one degree higher).
pub fn degree_prunable(op: &OpLabel, maxdeg: u32) -> bool {
    let k = op.k();
    let (a, b) = (k.trees() as i64, op.l.trees() as i64);
    let (size_k, size_l) = (k.size() as i64, op.l.size() as i64);
    let bound = (a * maxdeg as i64 - 1) * size_l + a + b;
    match op.kind {
        OpKind::F | OpKind::Phi => size_k > bound,
        _ => size_k > bound + 1,
    }
}

pub fn prune_by_degree(relation: &Relation, maxdeg: u32) -> Relation {
    Relation {
        lhs: relation.lhs.clone(),
        terms: relation
            .terms
            .iter()
            .filter(|t| !degree_prunable(&t.outer, maxdeg) && !degree_prunable(&t.inner, maxdeg))
            .cloned()
            .collect(),
    }
}

/// All pairs `(k, l)` with `|k| + |l| ≤ max`, ordered by total size then lexicographically.
pub fn index_pairs(max: usize) -> Vec<(MultiIndex, MultiIndex)> {
    let mut out = Vec::new();
    for total in 2..=max {
        for sk in 1..total {
            for k in compositions(sk) {
                for l in compositions(total - sk) {
                    out.push((k.clone(), l));
                }
            }
        }
    }
    out
}

/// `(R^k_l)` for every pair with `|k| + |l| ≤ max`.
pub fn relations_up_to(max: usize) -> Vec<Relation> {
    index_pairs(max)
        .par_iter()
        .map(|(k, l)| generate_r(k, l))
        .collect()
}

/// Canonical order on terms, as emitted by the generators.
pub fn term_order(a: &RelationTerm, b: &RelationTerm) -> Ordering {
    (&a.outer, &a.inner).cmp(&(&b.outer, &b.inner))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::mi;

    fn alpha(k: &[usize], l: &[usize]) -> OpLabel {
        OpLabel::alpha(mi(k), mi(l))
    }

    #[test]
    fn label_display() {
        assert_eq!(alpha(&[2], &[1]).to_string(), "α²₁");
        assert_eq!(alpha(&[1, 1], &[2]).to_string(), "α^{(1,1)}_{(2)}");
        assert_eq!(alpha(&[12], &[3]).to_string(), "α¹²₃");
        let b: BimoduleIndex = "2,0|1|2,1".parse().unwrap();
        assert_eq!(
            OpLabel::mu(b, mi(&[1])).to_string(),
            "μ^{(2,0|1|2,1)}_{(1)}"
        );
    }

    #[test]
    fn label_json_round_trip() {
        let b: BimoduleIndex = "1|1|0".parse().unwrap();
        for op in [
            alpha(&[2, 1], &[3]),
            OpLabel::f(mi(&[1]), mi(&[2])),
            OpLabel::mu(b, mi(&[1])),
        ] {
            let text = serde_json::to_string(&op).unwrap();
            assert_eq!(serde_json::from_str::<OpLabel>(&text).unwrap(), op);
        }
        assert_eq!(
            serde_json::to_string(&alpha(&[2], &[1])).unwrap(),
            r#"{"op":"alpha","k":[2],"l":[1]}"#
        );
    }

    #[test]
    fn hopf_simplifications() {
        assert_eq!(
            expand_simplifications(&alpha(&[1, 1], &[2]))
                .unwrap()
                .to_string(),
            "α¹₂ ⊗ α¹₂"
        );
        assert_eq!(
            expand_simplifications(&alpha(&[2], &[1, 1]))
                .unwrap()
                .to_string(),
            "(α²₁ ⊗ α²₁)∘τ²₂"
        );
        assert!(expand_simplifications(&alpha(&[1, 1], &[2, 3]))
            .unwrap()
            .is_zero());
        assert!(matches!(
            expand_simplifications(&alpha(&[2], &[2])),
            Err(RelgenError::NotSimplifiable(_))
        ));
    }

    #[test]
    fn vertical_normal_forms() {
        assert_eq!(normal_form(&alpha(&[1, 1], &[1, 1])), Expr::Diff(4));
        assert_eq!(
            normal_form(&alpha(&[1, 3, 1], &[1])).to_string(),
            "id ⊗ α³₁ ⊗ id"
        );
        assert_eq!(normal_form(&alpha(&[1], &[1, 4])).to_string(), "id ⊗ α¹₄");
        assert_eq!(
            normal_form(&alpha(&[2], &[1, 1, 1])).to_string(),
            "(α²₁ ⊗ α²₁ ⊗ α²₁)∘τ²₃"
        );
        assert_eq!(
            normal_form(&alpha(&[1, 1, 1], &[2])).to_string(),
            "α¹₂ ⊗ α¹₂ ⊗ α¹₂"
        );
    }

    #[test]
    fn arities_are_consistent() {
        for (k, l) in index_pairs(6) {
            let op = OpLabel::alpha(k.clone(), l.clone());
            assert_eq!(normal_form(&op).arity(), op.arity(), "{op}");
            let f = OpLabel::f(k, l);
            assert_eq!(normal_form(&f).arity(), f.arity(), "{f}");
        }
    }

    #[test]
    fn morphism_expansions() {
        let f = |k: &[usize], l: &[usize]| OpLabel::f(mi(k), mi(l));
        assert_eq!(
            normal_form(&f(&[2, 1, 3], &[1])).to_string(),
            "f²₁ ⊗ f¹₁ ⊗ f³₁"
        );
        assert_eq!(normal_form(&f(&[1], &[2, 1])).to_string(), "f¹₂ ⊗ f¹₁");
        assert_eq!(normal_form(&f(&[1, 1], &[1])).to_string(), "f¹₁ ⊗ f¹₁");
        assert!(expand_simplifications(&f(&[2], &[2])).is_err());
    }

    #[test]
    fn hopf_relation() {
        let r = generate_r(&mi(&[2]), &mi(&[2]));
        let main: Vec<String> = r
            .terms
            .iter()
            .filter(|t| !t.d_term)
            .map(|t| t.to_string())
            .collect();
        assert_eq!(main, vec!["−α¹₂∘α²₁", "+α^{(2)}_{(1,1)}∘α^{(1,1)}_{(2)}"]);
        assert_eq!(r.terms.len(), 4);
    }

    #[test]
    fn differential_terms_carry_the_expected_signs() {
        for (k, l) in index_pairs(6) {
            let op = OpLabel::alpha(k.clone(), l.clone());
            if op.c() > 1 {
                continue;
            }
            let r = generate_r(&k, &l);
            let outer_d: Vec<_> = r.terms.iter().filter(|t| t.outer.c() == 0).collect();
            let inner_d: Vec<_> = r.terms.iter().filter(|t| t.inner.c() == 0).collect();
            assert_eq!((outer_d.len(), inner_d.len()), (1, 1), "{op}");
            if op.c() == 1 {
                assert_eq!(outer_d[0].sign, SignBit::MINUS);
                assert_eq!(inner_d[0].sign, SignBit::from_i64(op.degree()));
            }
        }
    }

    #[test]
    fn bimodule_relations() {
        let b: BimoduleIndex = "0|1|0".parse().unwrap();
        let r = generate_bimodule_r(&b, &mi(&[1])).unwrap();
        assert_eq!(r.terms.len(), 1);
        let left: BimoduleIndex = "1|1|0".parse().unwrap();
        let r = generate_bimodule_r(&left, &mi(&[1])).unwrap();
        assert_eq!(r.terms.len(), 2);
        let elementary: usize = r
            .terms
            .iter()
            .map(|t| match (normal_form(&t.outer), normal_form(&t.inner)) {
                (Expr::Diff(n), _) | (_, Expr::Diff(n)) => n,
                _ => 1,
            })
            .sum();
        assert_eq!(elementary, 3);
    }

    #[test]
    fn empty_side_matches_plain_relation() {
        for (k, l) in index_pairs(5) {
            let b = BimoduleIndex::new(Vec::new(), false, k.entries().to_vec()).unwrap();
            let rb = generate_bimodule_r(&b, &l).unwrap();
            let ra = generate_r(&k, &l);
            let swap = |op: &OpLabel| OpLabel::alpha(op.k(), op.l().clone());
            assert_eq!(rb.terms.len(), ra.terms.len());
            for (x, y) in rb.terms.iter().zip(&ra.terms) {
                assert_eq!(x.outer.kind(), OpKind::Beta);
                assert_eq!(
                    (x.sign, swap(&x.outer), swap(&x.inner)),
                    (y.sign, y.outer.clone(), y.inner.clone())
                );
            }
        }
    }

    #[test]
    fn pruning_examples() {
        assert!(degree_prunable(&alpha(&[5], &[1]), 1));
        assert!(!degree_prunable(&alpha(&[3], &[1]), 1));
        for (k, l) in index_pairs(7) {
            let op = OpLabel::alpha(k.clone(), l.clone());
            if k.vertices() + l.vertices() >= 2 {
                assert!(degree_prunable(&op, 0), "{op}");
            }
            assert!(!degree_prunable(&op, 20));
        }
    }

    #[test]
    fn tau_recognition() {
        assert_eq!(Expr::Shuffle(tau_order(2, 3)).to_string(), "τ²₃");
        assert_eq!(Expr::Shuffle(vec![1, 0, 2]).to_string(), "σ[2,1,3]");
    }

    #[test]
    fn deletions_need_a_vertical_tree() {
        let op = alpha(&[2, 1], &[2]);
        assert_eq!(applicable_deletions(&op), vec![Deletion::Upper(1)]);
        assert!(expand_with_deletions(&op, &[Deletion::Upper(0)]).is_err());
        assert!(applicable_deletions(&alpha(&[1, 1], &[1])).is_empty());
    }
}
