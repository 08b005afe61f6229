use std::collections::BTreeMap;

use super::map::{GradedMap, GradedSpace, TensorBasis};
use super::scalar::Scalar;
use super::AlgebraError;
use crate::relgen::{normal_form, Color, Expr, OpKind, OpLabel};
use crate::signs::koszul_sign;

/// Default cap on the dimension of any tensor power built during evaluation.
pub const DEFAULT_TENSOR_LIMIT: usize = 1 << 20;

/// The cap, overridable through `BIFOREST_MAX_TENSOR`.
pub fn tensor_limit() -> usize {
    std::env::var("BIFOREST_MAX_TENSOR")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_TENSOR_LIMIT)
}

/// Matrices of operations. Every operation with `|k| + |l| ≤ bound` that is
/// neither listed nor simplifiable is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct OpTable<S> {
    pub bound: usize,
    pub entries: BTreeMap<OpLabel, GradedMap<S>>,
}

impl<S> OpTable<S> {
    pub fn new(bound: usize) -> Self {
        OpTable {
            bound,
            entries: BTreeMap::new(),
        }
    }
}

/// A graded space with its differential and a table of operations.
#[derive(Debug, Clone)]
pub struct FBialgebra<S> {
    pub space: GradedSpace,
    pub differential: GradedMap<S>,
    pub table: OpTable<S>,
}

struct Side<'a, S> {
    space: &'a GradedSpace,
    diff: &'a GradedMap<S>,
    table: &'a OpTable<S>,
}

/// Evaluates symbolic expressions as matrices. Colour `A` factors live in the
/// source algebra, `B` factors in the target (the same algebra unless a
/// morphism is being checked).
pub struct Evaluator<'a, S> {
    a: Side<'a, S>,
    b: Side<'a, S>,
    morphism: Option<&'a OpTable<S>>,
    limit: usize,
}

impl<'a, S: Scalar> Evaluator<'a, S> {
    pub fn new(alg: &'a FBialgebra<S>) -> Self {
        let side = Side {
            space: &alg.space,
            diff: &alg.differential,
            table: &alg.table,
        };
        let other = Side {
            space: &alg.space,
            diff: &alg.differential,
            table: &alg.table,
        };
        Evaluator {
            a: side,
            b: other,
            morphism: None,
            limit: tensor_limit(),
        }
    }

    pub fn for_morphism(
        source: &'a FBialgebra<S>,
        target: &'a FBialgebra<S>,
        morphism: &'a OpTable<S>,
    ) -> Self {
        Evaluator {
            a: Side {
                space: &source.space,
                diff: &source.differential,
                table: &source.table,
            },
            b: Side {
                space: &target.space,
                diff: &target.differential,
                table: &target.table,
            },
            morphism: Some(morphism),
            limit: tensor_limit(),
        }
    }

    pub fn with_limit(mut self, limit: usize) -> Self {
        self.limit = limit;
        self
    }

    fn side(&self, c: Color) -> Result<&Side<'a, S>, AlgebraError> {
        match c {
            Color::A => Ok(&self.a),
            Color::B => Ok(&self.b),
            Color::M => Err(AlgebraError::ShapeMismatch(
                "no module factor is available".into(),
            )),
        }
    }

    pub fn basis(&self, shape: &[Color]) -> Result<TensorBasis, AlgebraError> {
        let factors = shape
            .iter()
            .map(|&c| Ok(self.side(c)?.space.degrees()))
            .collect::<Result<Vec<_>, AlgebraError>>()?;
        TensorBasis::new(factors, self.limit)
    }

    /// Matrix of a generator: table entry, else its normal form, else zero
    /// within the table bound.
    pub fn lookup(&self, op: &OpLabel) -> Result<GradedMap<S>, AlgebraError> {
        let (table, key) = match op.kind() {
            OpKind::Alpha => (self.a.table, op.clone()),
            OpKind::Beta => (self.b.table, OpLabel::alpha(op.k(), op.l().clone())),
            OpKind::F => match self.morphism {
                Some(t) => (t, op.clone()),
                None => return Err(AlgebraError::MissingOperation(op.clone())),
            },
            _ => return Err(AlgebraError::MissingOperation(op.clone())),
        };
        if let Some(m) = table.entries.get(&key) {
            return Ok(m.clone());
        }
        let nf = normal_form(op);
        if nf != Expr::Gen(op.clone()) {
            return Ok(self.eval(&nf, &op.input_colors())?.0);
        }
        if op.k().size() + op.l().size() <= table.bound {
            return self.zero_of(op);
        }
        Err(AlgebraError::MissingOperation(op.clone()))
    }

    fn zero_of(&self, op: &OpLabel) -> Result<GradedMap<S>, AlgebraError> {
        let rows = self.basis(&op.output_colors())?.len();
        let cols = self.basis(&op.input_colors())?.len();
        Ok(GradedMap::zero(rows, cols, op.degree()))
    }

    /// Evaluates `expr` on the tensor product of the given factor colours;
    /// returns the matrix and the output colours.
    pub fn eval(
        &self,
        expr: &Expr,
        shape: &[Color],
    ) -> Result<(GradedMap<S>, Vec<Color>), AlgebraError> {
        let (n_in, _) = expr.arity();
        if n_in != shape.len() {
            return Err(AlgebraError::ShapeMismatch(format!(
                "{expr} takes {n_in} factors, got {}",
                shape.len()
            )));
        }
        match expr {
            Expr::Zero(op) | Expr::Gen(op) => {
                if op.input_colors() != shape {
                    return Err(AlgebraError::ShapeMismatch(format!("{op} on {shape:?}")));
                }
                let m = match expr {
                    Expr::Zero(_) => self.zero_of(op)?,
                    _ => self.lookup(op)?,
                };
                Ok((m, op.output_colors()))
            }
            Expr::Id(_) => Ok((
                GradedMap::identity(self.basis(shape)?.len()),
                shape.to_vec(),
            )),
            Expr::Diff(_) => Ok((self.tensor_differential(shape)?, shape.to_vec())),
            Expr::Shuffle(perm) => self.shuffle(perm, shape),
            Expr::Tensor(xs) => {
                let mut acc = GradedMap::identity(1);
                let mut acc_in: Vec<Color> = Vec::new();
                let mut out: Vec<Color> = Vec::new();
                let mut start = 0;
                for x in xs {
                    let n = x.arity().0;
                    let part = &shape[start..start + n];
                    let (m, o) = self.eval(x, part)?;
                    acc = acc.tensor(&m, &self.basis(&acc_in)?.degrees());
                    acc_in.extend_from_slice(part);
                    out.extend(o);
                    start += n;
                }
                Ok((acc, out))
            }
            Expr::Compose(xs) => {
                let mut cur = shape.to_vec();
                let mut acc: Option<GradedMap<S>> = None;
                for x in xs.iter().rev() {
                    let (m, o) = self.eval(x, &cur)?;
                    acc = Some(match acc {
                        None => m,
                        Some(inner) => m.compose(&inner)?,
                    });
                    cur = o;
                }
                let acc = acc.unwrap_or_else(|| GradedMap::identity(1));
                Ok((acc, cur))
            }
        }
    }

    fn tensor_differential(&self, shape: &[Color]) -> Result<GradedMap<S>, AlgebraError> {
        let total = self.basis(shape)?.len();
        let mut sum = GradedMap::zero(total, total, -1);
        for i in 0..shape.len() {
            let before = self.basis(&shape[..i])?;
            let after = self.basis(&shape[i + 1..])?.len();
            let d = self.side(shape[i])?.diff;
            let term = GradedMap::identity(before.len())
                .tensor(d, &before.degrees())
                .tensor(&GradedMap::identity(after), &[]);
            sum = sum.add(&term)?;
        }
        Ok(sum)
    }

    fn shuffle(
        &self,
        perm: &[usize],
        shape: &[Color],
    ) -> Result<(GradedMap<S>, Vec<Color>), AlgebraError> {
        let out_shape: Vec<Color> = perm.iter().map(|&p| shape[p]).collect();
        let src = self.basis(shape)?;
        let dst = self.basis(&out_shape)?;
        let columns = (0..src.len())
            .map(|j| {
                let digits = src.decode(j);
                let degrees = src.factor_degrees_of(j);
                let moved: Vec<usize> = perm.iter().map(|&p| digits[p]).collect();
                let sign = koszul_sign(&degrees, perm).expect("valid permutation");
                vec![(dst.encode(&moved), S::one().signed(sign))]
            })
            .collect();
        Ok((GradedMap::from_columns(dst.len(), 0, columns), out_shape))
    }
}
