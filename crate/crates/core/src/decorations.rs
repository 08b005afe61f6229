//! Multi-indices decorated by objects, their splittings and hom-grids.

use std::collections::HashMap;
use std::fmt::Debug;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multiindex::{glue, BimoduleIndex, IndexError, MultiIndex};
use crate::relgen::{Color, OpLabel, Relation, RelationTerm};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecorationError {
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("monoid table has no product for ({0}, {1})")]
    MissingProduct(String, String),
}

/// Labels `L_{j,j'}` for `1 ≤ j ≤ b`, `0 ≤ j' ≤ l_j`, stored per tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDecoration<T>", into = "RawDecoration<T>")]
#[serde(bound(
    serialize = "T: Clone + Serialize",
    deserialize = "T: Deserialize<'de>"
))]
pub struct Decoration<T> {
    l: MultiIndex,
    labels: Vec<Vec<T>>,
}

#[derive(Serialize, Deserialize)]
struct RawDecoration<T> {
    l: MultiIndex,
    labels: Vec<Vec<T>>,
}

impl<T> TryFrom<RawDecoration<T>> for Decoration<T> {
    type Error = DecorationError;
    fn try_from(raw: RawDecoration<T>) -> Result<Self, Self::Error> {
        Decoration::new(raw.l, raw.labels)
    }
}

impl<T> From<Decoration<T>> for RawDecoration<T> {
    fn from(d: Decoration<T>) -> Self {
        RawDecoration {
            l: d.l,
            labels: d.labels,
        }
    }
}

/// An ordered list of `(source, target)` object pairs, one per tensor factor.
pub type HomGrid<T> = Vec<(T, T)>;

/// A hom-grid with the colour of each factor.
pub type ColoredHomGrid<T> = Vec<(Color, (T, T))>;

impl<T> Decoration<T> {
    pub fn new(l: MultiIndex, labels: Vec<Vec<T>>) -> Result<Self, DecorationError> {
        let ok = labels.len() == l.trees()
            && labels
                .iter()
                .zip(l.entries())
                .all(|(row, &n)| row.len() == n + 1);
        if !ok {
            return Err(DecorationError::ArityMismatch(format!(
                "a decoration of {l} needs {} labels in rows of lengths l_j + 1",
                l.size() + l.trees()
            )));
        }
        Ok(Decoration { l, labels })
    }

    pub fn l(&self) -> &MultiIndex {
        &self.l
    }

    pub fn labels(&self) -> &[Vec<T>] {
        &self.labels
    }

    /// `L_{j,j'}`, with `j` counted from zero.
    pub fn get(&self, j: usize, j_prime: usize) -> &T {
        &self.labels[j][j_prime]
    }

    pub fn label_count(&self) -> usize {
        self.labels.iter().map(Vec::len).sum()
    }
}

impl<T: Clone> Decoration<T> {
    /// `(L_{j,0}, L_{j,l_j})` per tree.
    pub fn hom_in(&self) -> HomGrid<T> {
        self.labels
            .iter()
            .map(|r| (r[0].clone(), r[r.len() - 1].clone()))
            .collect()
    }

    /// `(L_{j,j'-1}, L_{j,j'})` per tree and leaf.
    pub fn hom_out(&self) -> HomGrid<T> {
        self.labels
            .iter()
            .flat_map(|r| r.windows(2).map(|w| (w[0].clone(), w[1].clone())))
            .collect()
    }

    fn map_rows(
        &self,
        l: MultiIndex,
        pick: impl Fn(usize, usize) -> (usize, usize),
    ) -> Decoration<T> {
        let labels = l
            .entries()
            .iter()
            .enumerate()
            .map(|(j, &n)| {
                (0..=n)
                    .map(|jp| {
                        let (h, hp) = pick(j, jp);
                        self.labels[h][hp].clone()
                    })
                    .collect()
            })
            .collect();
        Decoration { l, labels }
    }
}

/// Splits a decoration of `l = l0 ♯ l1` (`l0` grafted on the leaves of `l1`).
///
/// `L¹_{j,j'}` is the label of tree `j` after the `l0` trees on its first
/// `j'` leaves; `L⁰_{j,j'}` is read off the tree of `l1` carrying `l0`'s tree `j`.
pub fn split_decoration<T: Clone>(
    d: &Decoration<T>,
    l0: &MultiIndex,
    l1: &MultiIndex,
) -> Result<(Decoration<T>, Decoration<T>), DecorationError> {
    if glue(l0, l1)? != d.l {
        return Err(DecorationError::ArityMismatch(format!(
            "{l0} ♯ {l1} ≠ {}",
            d.l
        )));
    }
    let e0 = l0.entries();
    // First leaf of each tree of l1.
    let starts: Vec<usize> = l1
        .entries()
        .iter()
        .scan(0, |acc, &n| {
            let s = *acc;
            *acc += n;
            Some(s)
        })
        .collect();
    let d1 = d.map_rows(l1.clone(), |j, jp| {
        (j, e0[starts[j]..starts[j] + jp].iter().sum())
    });
    let tree_of: Vec<usize> = l1
        .entries()
        .iter()
        .enumerate()
        .flat_map(|(h, &n)| std::iter::repeat_n(h, n))
        .collect();
    let d0 = d.map_rows(l0.clone(), |j, jp| {
        let h = tree_of[j];
        (h, e0[starts[h]..j].iter().sum::<usize>() + jp)
    });
    Ok((d0, d1))
}

/// An associative product on objects.
pub trait Monoid<T> {
    fn product(&self, a: &T, b: &T) -> Result<T, DecorationError>;
}

/// Words under concatenation.
#[derive(Debug, Clone, Copy, Default)]
pub struct FreeMonoid;

impl Monoid<String> for FreeMonoid {
    fn product(&self, a: &String, b: &String) -> Result<String, DecorationError> {
        Ok(format!("{a}{b}"))
    }
}

/// A monoid given by its multiplication table.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TableMonoid {
    pub table: HashMap<String, HashMap<String, String>>,
}

impl TableMonoid {
    pub fn elements(&self) -> Vec<String> {
        let mut out: Vec<String> = self.table.keys().cloned().collect();
        out.sort();
        out
    }

    /// Triples violating associativity.
    pub fn associativity_failures(&self) -> Vec<(String, String, String)> {
        let els = self.elements();
        let mut out = Vec::new();
        for a in &els {
            for b in &els {
                for c in &els {
                    let left = self.product(a, b).and_then(|ab| self.product(&ab, c));
                    let right = self.product(b, c).and_then(|bc| self.product(a, &bc));
                    if left.is_err() || left != right {
                        out.push((a.clone(), b.clone(), c.clone()));
                    }
                }
            }
        }
        out
    }
}

impl Monoid<String> for TableMonoid {
    fn product(&self, a: &String, b: &String) -> Result<String, DecorationError> {
        self.table
            .get(a)
            .and_then(|row| row.get(b))
            .cloned()
            .ok_or_else(|| DecorationError::MissingProduct(a.clone(), b.clone()))
    }
}

/// A decoration of `(k, l)`: one decoration of `l` per leaf of `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Clone + Serialize",
    deserialize = "T: Deserialize<'de>"
))]
pub struct BiDecoration<T> {
    k: MultiIndex,
    leaves: Vec<Decoration<T>>,
}

impl<T: Clone + PartialEq> BiDecoration<T> {
    pub fn new(k: MultiIndex, leaves: Vec<Decoration<T>>) -> Result<Self, DecorationError> {
        if leaves.len() != k.size() {
            return Err(DecorationError::ArityMismatch(format!(
                "{k} has {} leaves, got {} decorations",
                k.size(),
                leaves.len()
            )));
        }
        if leaves.windows(2).any(|w| w[0].l != w[1].l) || leaves.is_empty() {
            return Err(DecorationError::ArityMismatch(
                "leaf decorations must share l".into(),
            ));
        }
        Ok(BiDecoration { k, leaves })
    }

    pub fn k(&self) -> &MultiIndex {
        &self.k
    }

    pub fn l(&self) -> &MultiIndex {
        &self.leaves[0].l
    }

    /// `L^{i,i'}`, indexed by the leaf position `s_k(i, i')` from zero.
    pub fn leaves(&self) -> &[Decoration<T>] {
        &self.leaves
    }

    /// `L^{i,×}_{j,j'} = L^{i,1}_{j,j'} × ⋯ × L^{i,k_i}_{j,j'}` per tree `i`.
    pub fn times<M: Monoid<T>>(&self, monoid: &M) -> Result<Vec<Decoration<T>>, DecorationError> {
        let mut out = Vec::with_capacity(self.k.trees());
        let mut leaf = 0;
        for &size in self.k.entries() {
            let group = &self.leaves[leaf..leaf + size];
            let mut acc = group[0].clone();
            for d in &group[1..] {
                for (row, other) in acc.labels.iter_mut().zip(&d.labels) {
                    for (x, y) in row.iter_mut().zip(other) {
                        *x = monoid.product(x, y)?;
                    }
                }
            }
            out.push(acc);
            leaf += size;
        }
        Ok(out)
    }

    /// `In(𝕃)`: the input hom-grid of every leaf decoration, leaf by leaf.
    pub fn hom_in(&self) -> HomGrid<T> {
        self.leaves.iter().flat_map(Decoration::hom_in).collect()
    }

    /// `Out(𝕃)`: the output hom-grid of `L^{i,×}`, tree by tree.
    pub fn hom_out<M: Monoid<T>>(&self, monoid: &M) -> Result<HomGrid<T>, DecorationError> {
        Ok(self
            .times(monoid)?
            .iter()
            .flat_map(Decoration::hom_out)
            .collect())
    }
}

/// Splits a decoration of `(k, l) = (k1, l1) ♯ (k0, l0)`; returns `(𝕃⁰, 𝕃¹)`.
pub fn split_bidecoration<T: Clone + PartialEq, M: Monoid<T>>(
    d: &BiDecoration<T>,
    monoid: &M,
    k0: &MultiIndex,
    l0: &MultiIndex,
    k1: &MultiIndex,
    l1: &MultiIndex,
) -> Result<(BiDecoration<T>, BiDecoration<T>), DecorationError> {
    if glue(k1, k0)? != d.k {
        return Err(DecorationError::ArityMismatch(format!(
            "{k1} ♯ {k0} ≠ {}",
            d.k
        )));
    }
    // The same leaves, now read as a decoration of (k1, l).
    let tilde = BiDecoration {
        k: k1.clone(),
        leaves: d.leaves.clone(),
    };
    let upper = d
        .leaves
        .iter()
        .map(|x| Ok(split_decoration(x, l0, l1)?.1))
        .collect::<Result<Vec<_>, DecorationError>>()?;
    let lower = tilde
        .times(monoid)?
        .iter()
        .map(|x| Ok(split_decoration(x, l0, l1)?.0))
        .collect::<Result<Vec<_>, DecorationError>>()?;
    Ok((
        BiDecoration::new(k0.clone(), lower)?,
        BiDecoration::new(k1.clone(), upper)?,
    ))
}

/// A decoration of a bimodule index `(𝕃^l | L^ε | 𝕃^r)`, stored over the total
/// multi-index with the module leaf's decoration in place. Both actions on
/// module objects are modelled by the one monoid product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BimoduleDecoration<T> {
    b: BimoduleIndex,
    total: BiDecoration<T>,
}

impl<T: Clone + PartialEq> BimoduleDecoration<T> {
    pub fn new(b: BimoduleIndex, leaves: Vec<Decoration<T>>) -> Result<Self, DecorationError> {
        Ok(BimoduleDecoration {
            total: BiDecoration::new(b.total(), leaves)?,
            b,
        })
    }

    fn colors(&self, out: bool) -> Vec<Color> {
        let op = OpLabel::mu_raw(self.b.clone(), self.total.l().clone());
        if out {
            op.output_colors()
        } else {
            op.input_colors()
        }
    }

    pub fn hom_in(&self) -> ColoredHomGrid<T> {
        self.colors(false)
            .into_iter()
            .zip(self.total.hom_in())
            .collect()
    }

    pub fn hom_out<M: Monoid<T>>(&self, monoid: &M) -> Result<ColoredHomGrid<T>, DecorationError> {
        Ok(self
            .colors(true)
            .into_iter()
            .zip(self.total.hom_out(monoid)?)
            .collect())
    }
}

/// A relation term together with the decorations of its two factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoratedTerm<T> {
    pub term: RelationTerm,
    /// Decoration of the outer factor `(k0, l0)`.
    pub outer: BiDecoration<T>,
    /// Decoration of the inner factor `(k1, l1)`.
    pub inner: BiDecoration<T>,
}

/// Attaches `(𝕃⁰, 𝕃¹)` to every term of an `α` relation.
pub fn decorate_relation<T: Clone + PartialEq, M: Monoid<T>>(
    relation: &Relation,
    d: &BiDecoration<T>,
    monoid: &M,
) -> Result<Vec<DecoratedTerm<T>>, DecorationError> {
    relation
        .terms
        .iter()
        .map(|t| {
            let (k0, l0, k1, l1) = (t.outer.k(), t.outer.l(), t.inner.k(), t.inner.l());
            let (outer, inner) = split_bidecoration(d, monoid, &k0, l0, &k1, l1)?;
            Ok(DecoratedTerm {
                term: t.clone(),
                outer,
                inner,
            })
        })
        .collect()
}

/// Every decoration of `l` with labels from `objects`.
pub fn all_decorations<T: Clone>(l: &MultiIndex, objects: &[T]) -> Vec<Decoration<T>> {
    let n = l.size() + l.trees();
    let mut out = Vec::new();
    let mut digits = vec![0usize; n];
    loop {
        let mut it = digits.iter().map(|&i| objects[i].clone());
        let labels = l
            .entries()
            .iter()
            .map(|&e| it.by_ref().take(e + 1).collect())
            .collect();
        out.push(Decoration {
            l: l.clone(),
            labels,
        });
        let Some(pos) = digits.iter().rposition(|&d| d + 1 < objects.len()) else {
            break;
        };
        digits[pos] += 1;
        digits[pos + 1..].iter_mut().for_each(|d| *d = 0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::{enumerate_cosplittings, mi};

    fn deco(l: &[usize], labels: &[&[&str]]) -> Decoration<String> {
        Decoration::new(
            mi(l),
            labels
                .iter()
                .map(|r| r.iter().map(|s| s.to_string()).collect())
                .collect(),
        )
        .unwrap()
    }

    fn pair(a: &str, b: &str) -> (String, String) {
        (a.to_string(), b.to_string())
    }

    #[test]
    fn label_counts_and_grids() {
        let d = deco(&[1], &[&["L0", "L1"]]);
        assert_eq!(d.hom_in(), vec![pair("L0", "L1")]);
        assert_eq!(d.hom_out(), d.hom_in());
        let d = deco(&[3, 2], &[&["a", "b", "c", "d"], &["e", "f", "g"]]);
        assert_eq!(d.label_count(), 7);
        assert_eq!((d.hom_in().len(), d.hom_out().len()), (2, 5));
        assert!(Decoration::new(mi(&[2]), vec![vec!["a".to_string()]]).is_err());
    }

    #[test]
    fn degenerate_splits() {
        let d = deco(&[2, 1], &[&["a", "b", "c"], &["d", "e"]]);
        let (d0, d1) = split_decoration(&d, &mi(&[2, 1]), &mi(&[1, 1])).unwrap();
        assert_eq!(d0, d);
        assert_eq!(d1, deco(&[1, 1], &[&["a", "c"], &["d", "e"]]));
        let (d0, d1) = split_decoration(&d, &mi(&[1, 1, 1]), &mi(&[2, 1])).unwrap();
        assert_eq!(d1, d);
        assert_eq!(
            d0,
            deco(&[1, 1, 1], &[&["a", "b"], &["b", "c"], &["d", "e"]])
        );
    }

    #[test]
    fn two_splittings_of_a_binary_tree() {
        let d = deco(&[2], &[&["L0", "L1", "L2"]]);
        for (l0, l1) in enumerate_cosplittings(&mi(&[2])) {
            let (d0, d1) = split_decoration(&d, &l0, &l1).unwrap();
            assert_eq!(d1.hom_out(), d0.hom_in());
            assert_eq!(d1.hom_in(), d.hom_in());
            assert_eq!(d0.hom_out(), d.hom_out());
        }
    }

    #[test]
    fn split_of_a_later_tree() {
        // l = (1,3) = (1,1,2) ♯ (1,2): the second tree of l1 carries (1,2).
        let d = deco(&[1, 3], &[&["p", "q"], &["a", "b", "c", "d"]]);
        let (d0, d1) = split_decoration(&d, &mi(&[1, 1, 2]), &mi(&[1, 2])).unwrap();
        assert_eq!(d1, deco(&[1, 2], &[&["p", "q"], &["a", "b", "d"]]));
        assert_eq!(
            d0,
            deco(&[1, 1, 2], &[&["p", "q"], &["a", "b"], &["b", "c", "d"]])
        );
    }

    #[test]
    fn free_monoid_products_concatenate_leaves() {
        let leaves = vec![
            deco(&[1], &[&["g", "h"]]),
            deco(&[1], &[&["h", "h"]]),
            deco(&[1], &[&["g", "g"]]),
        ];
        let d = BiDecoration::new(mi(&[2, 1]), leaves).unwrap();
        let t = d.times(&FreeMonoid).unwrap();
        assert_eq!(t[0], deco(&[1], &[&["gh", "hh"]]));
        assert_eq!(
            d.hom_out(&FreeMonoid).unwrap(),
            vec![pair("gh", "hh"), pair("g", "g")]
        );
    }

    #[test]
    fn table_monoid() {
        let mut m = TableMonoid::default();
        for (a, b, c) in [
            ("0", "0", "0"),
            ("0", "1", "1"),
            ("1", "0", "1"),
            ("1", "1", "0"),
        ] {
            m.table
                .entry(a.into())
                .or_default()
                .insert(b.into(), c.into());
        }
        assert!(m.associativity_failures().is_empty());
        assert_eq!(m.product(&"1".into(), &"1".into()).unwrap(), "0");
    }

    #[test]
    fn bimodule_grid_sizes() {
        let b: BimoduleIndex = "1|1|0".parse().unwrap();
        let one = all_decorations(&mi(&[2]), &["x".to_string()]).remove(0);
        let leaves = vec![one.clone(), one];
        let d = BimoduleDecoration::new(b.clone(), leaves).unwrap();
        let op = OpLabel::mu_raw(b, mi(&[2]));
        assert_eq!(d.hom_in().len(), op.arity().0);
        assert_eq!(d.hom_out(&FreeMonoid).unwrap().len(), op.arity().1);
        assert_eq!(d.hom_in()[1].0, Color::M);
    }

    #[test]
    fn json_shape() {
        let d = deco(&[1], &[&["L10", "L11"]]);
        let text = serde_json::to_string(&d).unwrap();
        assert_eq!(text, r#"{"l":[1],"labels":[["L10","L11"]]}"#);
        assert!(
            serde_json::from_str::<Decoration<String>>(r#"{"l":[2],"labels":[["a"]]}"#).is_err()
        );
    }
}
