use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::scalar::Scalar;
use super::AlgebraError;
use crate::signs::SignBit;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisElement {
    pub name: String,
    pub degree: i64,
}

/// A finite graded free module given by a homogeneous basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedSpace {
    pub basis: Vec<BasisElement>,
}

impl GradedSpace {
    pub fn new(basis: Vec<(&str, i64)>) -> Self {
        GradedSpace {
            basis: basis
                .into_iter()
                .map(|(n, d)| BasisElement {
                    name: n.to_string(),
                    degree: d,
                })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn degrees(&self) -> Vec<i64> {
        self.basis.iter().map(|b| b.degree).collect()
    }
}

/// Basis of a tensor product of spaces, ordered lexicographically with the
/// first factor most significant.
#[derive(Debug, Clone)]
pub struct TensorBasis {
    factor_degrees: Vec<Vec<i64>>,
    len: usize,
}

impl TensorBasis {
    pub fn new(factors: Vec<Vec<i64>>, limit: usize) -> Result<Self, AlgebraError> {
        let mut len: usize = 1;
        for f in &factors {
            len = len.checked_mul(f.len()).filter(|&n| n <= limit).ok_or(
                AlgebraError::TensorTooLarge {
                    factors: factors.len(),
                    limit,
                },
            )?;
        }
        Ok(TensorBasis {
            factor_degrees: factors,
            len,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn factors(&self) -> usize {
        self.factor_degrees.len()
    }

    /// Per-factor basis indices of the vector at `index`.
    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factor_degrees.len()];
        for (t, f) in self.factor_degrees.iter().enumerate().rev() {
            out[t] = index % f.len();
            index /= f.len();
        }
        out
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.factor_degrees)
            .fold(0, |acc, (&d, f)| acc * f.len() + d)
    }

    pub fn factor_degrees_of(&self, index: usize) -> Vec<i64> {
        self.decode(index)
            .iter()
            .zip(&self.factor_degrees)
            .map(|(&d, f)| f[d])
            .collect()
    }

    pub fn degree_of(&self, index: usize) -> i64 {
        self.factor_degrees_of(index).iter().sum()
    }

    pub fn degrees(&self) -> Vec<i64> {
        (0..self.len).map(|i| self.degree_of(i)).collect()
    }
}

/// A homogeneous linear map stored as sparse columns (one per source basis vector).
#[derive(Debug, Clone, PartialEq)]
pub struct GradedMap<S> {
    pub rows: usize,
    pub degree: i64,
    columns: Vec<Vec<(usize, S)>>,
}

fn push_entry<S: Scalar>(acc: &mut BTreeMap<usize, S>, row: usize, value: S) {
    let slot = acc.entry(row).or_insert_with(S::zero);
    *slot = slot.clone() + value;
}

fn finish<S: Scalar>(acc: BTreeMap<usize, S>) -> Vec<(usize, S)> {
    acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

impl<S: Scalar> GradedMap<S> {
    pub fn zero(rows: usize, cols: usize, degree: i64) -> Self {
        GradedMap {
            rows,
            degree,
            columns: vec![Vec::new(); cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        GradedMap {
            rows: n,
            degree: 0,
            columns: (0..n).map(|i| vec![(i, S::one())]).collect(),
        }
    }

    pub fn from_columns(rows: usize, degree: i64, columns: Vec<Vec<(usize, S)>>) -> Self {
        let columns = columns
            .into_iter()
            .map(|c| {
                let mut acc = BTreeMap::new();
                for (r, v) in c {
                    push_entry(&mut acc, r, v);
                }
                finish(acc)
            })
            .collect();
        GradedMap {
            rows,
            degree,
            columns,
        }
    }

    /// Dense input with `rows[i][j]` the coefficient of output `i` in the image of input `j`.
    pub fn from_dense(dense: &[Vec<S>], cols: usize, degree: i64) -> Result<Self, AlgebraError> {
        if dense.iter().any(|r| r.len() != cols) {
            return Err(AlgebraError::ShapeMismatch(format!(
                "rows must have {cols} entries"
            )));
        }
        let columns = (0..cols)
            .map(|j| {
                dense
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| !r[j].is_zero())
                    .map(|(i, r)| (i, r[j].clone()))
                    .collect()
            })
            .collect();
        Ok(GradedMap {
            rows: dense.len(),
            degree,
            columns,
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<S>> {
        let mut out = vec![vec![S::zero(); self.cols()]; self.rows];
        for (j, c) in self.columns.iter().enumerate() {
            for (i, v) in c {
                out[*i][j] = v.clone();
            }
        }
        out
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[(usize, S)] {
        &self.columns[j]
    }

    pub fn entry(&self, i: usize, j: usize) -> S {
        self.columns[j]
            .iter()
            .find(|(r, _)| *r == i)
            .map_or_else(S::zero, |(_, v)| v.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Vec::is_empty)
    }

    /// First nonzero entry in column-major order.
    pub fn first_nonzero(&self) -> Option<(usize, usize, S)> {
        self.columns
            .iter()
            .enumerate()
            .find_map(|(j, c)| c.first().map(|(i, v)| (*i, j, v.clone())))
    }

    /// Checks that every entry maps degree `d` to degree `d + self.degree`.
    pub fn respects_degrees(&self, source: &[i64], target: &[i64]) -> bool {
        self.columns
            .iter()
            .enumerate()
            .all(|(j, c)| c.iter().all(|(i, _)| target[*i] == source[j] + self.degree))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &GradedMap<S>) -> Result<GradedMap<S>, AlgebraError> {
        if inner.rows != self.cols() {
            return Err(AlgebraError::ShapeMismatch(format!(
                "cannot compose {}×{} after {}×{}",
                self.rows,
                self.cols(),
                inner.rows,
                inner.cols()
            )));
        }
        let columns = inner
            .columns
            .iter()
            .map(|c| {
                let mut acc = BTreeMap::new();
                for (k, a) in c {
                    for (i, b) in &self.columns[*k] {
                        push_entry(&mut acc, *i, b.clone() * a.clone());
                    }
                }
                finish(acc)
            })
            .collect();
        Ok(GradedMap {
            rows: self.rows,
            degree: self.degree + inner.degree,
            columns,
        })
    }

    pub fn add(&self, other: &GradedMap<S>) -> Result<GradedMap<S>, AlgebraError> {
        if self.rows != other.rows || self.cols() != other.cols() {
            return Err(AlgebraError::ShapeMismatch(
                "sum of maps of different shapes".into(),
            ));
        }
        let columns = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| {
                let mut acc = BTreeMap::new();
                for (i, v) in a.iter().chain(b) {
                    push_entry(&mut acc, *i, v.clone());
                }
                finish(acc)
            })
            .collect();
        Ok(GradedMap {
            rows: self.rows,
            degree: self.degree,
            columns,
        })
    }

    pub fn signed(mut self, s: SignBit) -> GradedMap<S> {
        if s.is_minus() {
            for c in &mut self.columns {
                for (_, v) in c.iter_mut() {
                    *v = -v.clone();
                }
            }
        }
        self
    }

    /// `(self ⊗ other)(x ⊗ y) = (-1)^{|other||x|} self(x) ⊗ other(y)`, where
    /// `source_degrees` are the degrees of the basis `x` ranges over.
    pub fn tensor(&self, other: &GradedMap<S>, source_degrees: &[i64]) -> GradedMap<S> {
        let odd = other.degree.rem_euclid(2) == 1;
        let mut columns = Vec::with_capacity(self.cols() * other.cols());
        for (jx, cx) in self.columns.iter().enumerate() {
            let flip = odd && source_degrees[jx].rem_euclid(2) == 1;
            for cy in &other.columns {
                let mut col = Vec::with_capacity(cx.len() * cy.len());
                for (ix, a) in cx {
                    for (iy, b) in cy {
                        let v = a.clone() * b.clone();
                        col.push((ix * other.rows + iy, if flip { -v } else { v }));
                    }
                }
                columns.push(col);
            }
        }
        GradedMap {
            rows: self.rows * other.rows,
            degree: self.degree + other.degree,
            columns,
        }
    }
}
