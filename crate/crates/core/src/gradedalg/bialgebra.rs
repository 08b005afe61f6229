use serde::{Deserialize, Serialize};

use super::eval::{Evaluator, FBialgebra, OpTable};
use super::map::{BasisElement, GradedMap, GradedSpace, TensorBasis};
use super::scalar::{Scalar, F2};
use super::verify::{verify_morphism, verify_relations, Report};
use super::AlgebraError;
use crate::multiindex::MultiIndex;
use crate::rational::{matrix_serde, Q};
use crate::relgen::{index_pairs, normal_form, Color, Expr, OpLabel};
use crate::signs::tau_order;

/// A differential graded bialgebra (no unit or counit required).
#[derive(Debug, Clone, PartialEq)]
pub struct DgBialgebra<S> {
    pub space: GradedSpace,
    pub differential: GradedMap<S>,
    pub product: GradedMap<S>,
    pub coproduct: GradedMap<S>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomFailure {
    pub axiom: String,
    pub row: usize,
    pub col: usize,
    pub value: String,
}

fn op(k: usize, l: usize) -> OpLabel {
    OpLabel::alpha(MultiIndex::single(k), MultiIndex::single(l))
}

pub fn product_label() -> OpLabel {
    op(2, 1)
}

pub fn coproduct_label() -> OpLabel {
    op(1, 2)
}

pub fn differential_label() -> OpLabel {
    op(1, 1)
}

impl<S: Scalar> DgBialgebra<S> {
    pub fn new(
        space: GradedSpace,
        differential: GradedMap<S>,
        product: GradedMap<S>,
        coproduct: GradedMap<S>,
    ) -> Result<Self, AlgebraError> {
        let n = space.dim();
        let deg = |k| TensorBasis::new(vec![space.degrees(); k], usize::MAX).map(|b| b.degrees());
        let (d1, d2) = (deg(1)?, deg(2)?);
        let checks = [
            ("differential", &differential, n, n, -1, &d1, &d1),
            ("product", &product, n, n * n, 0, &d2, &d1),
            ("coproduct", &coproduct, n * n, n, 0, &d1, &d2),
        ];
        for (name, m, rows, cols, degree, src, dst) in checks {
            if m.rows != rows || m.cols() != cols {
                return Err(AlgebraError::ShapeMismatch(format!(
                    "{name} must be {rows}×{cols}, got {}×{}",
                    m.rows,
                    m.cols()
                )));
            }
            if m.degree != degree || !m.respects_degrees(src, dst) {
                return Err(AlgebraError::DegreeViolation(name.to_string()));
            }
        }
        Ok(DgBialgebra {
            space,
            differential,
            product,
            coproduct,
        })
    }

    fn base(&self) -> FBialgebra<S> {
        let mut table = OpTable::new(0);
        table
            .entries
            .insert(differential_label(), self.differential.clone());
        table.entries.insert(product_label(), self.product.clone());
        table
            .entries
            .insert(coproduct_label(), self.coproduct.clone());
        FBialgebra {
            space: self.space.clone(),
            differential: self.differential.clone(),
            table,
        }
    }

    /// Differential, Leibniz, associativity, coassociativity and Hopf
    /// compatibility, each reported by its first nonzero entry.
    pub fn check_axioms(&self) -> Result<Vec<AxiomFailure>, AlgebraError> {
        let base = self.base();
        let ev = Evaluator::new(&base);
        let m = || Expr::Gen(product_label());
        let d = || Expr::Gen(coproduct_label());
        let c = |xs: Vec<Expr>| Expr::Compose(xs);
        let t = |xs: Vec<Expr>| Expr::Tensor(xs);
        let axioms: Vec<(&str, usize, Expr, Expr)> = vec![
            (
                "differential squares to zero",
                1,
                c(vec![Expr::Diff(1), Expr::Diff(1)]),
                Expr::Zero(op(1, 1)),
            ),
            (
                "Leibniz rule for the product",
                2,
                c(vec![Expr::Diff(1), m()]),
                c(vec![m(), Expr::Diff(2)]),
            ),
            (
                "Leibniz rule for the coproduct",
                1,
                c(vec![Expr::Diff(2), d()]),
                c(vec![d(), Expr::Diff(1)]),
            ),
            (
                "associativity",
                3,
                c(vec![m(), t(vec![m(), Expr::Id(1)])]),
                c(vec![m(), t(vec![Expr::Id(1), m()])]),
            ),
            (
                "coassociativity",
                1,
                c(vec![t(vec![d(), Expr::Id(1)]), d()]),
                c(vec![t(vec![Expr::Id(1), d()]), d()]),
            ),
            (
                "Hopf compatibility",
                2,
                c(vec![d(), m()]),
                c(vec![
                    t(vec![m(), m()]),
                    Expr::Shuffle(tau_order(2, 2)),
                    t(vec![d(), d()]),
                ]),
            ),
        ];
        let mut out = Vec::new();
        for (name, n, lhs, rhs) in axioms {
            let shape = vec![Color::A; n];
            let l = ev.eval(&lhs, &shape)?.0;
            let r = ev.eval(&rhs, &shape)?.0;
            let diff = l.add(&r.signed(crate::signs::SignBit::MINUS))?;
            if let Some((row, col, v)) = diff.first_nonzero() {
                out.push(AxiomFailure {
                    axiom: name.to_string(),
                    row,
                    col,
                    value: v.to_text(),
                });
            }
        }
        Ok(out)
    }

    /// The dg f-bialgebra: `∂`, `m`, `Δ` and every degree-zero or
    /// differential operation expanded from them; all other operations with
    /// `|k| + |l| ≤ bound` vanish.
    pub fn to_f_bialgebra(&self, bound: usize) -> Result<FBialgebra<S>, AlgebraError> {
        let mut alg = self.base();
        let mut fill = Vec::new();
        {
            let ev = Evaluator::new(&alg);
            for (k, l) in index_pairs(bound) {
                let label = OpLabel::alpha(k, l);
                if label.c() > 1 || label.degree() > 0 || alg.table.entries.contains_key(&label) {
                    continue;
                }
                let m = ev.eval(&normal_form(&label), &label.input_colors())?.0;
                fill.push((label, m));
            }
        }
        alg.table.entries.extend(fill);
        alg.table.bound = bound;
        Ok(alg)
    }
}

/// The result of the construction, with the axiom check that preceded it.
pub fn dg_to_f<S: Scalar>(
    b: &DgBialgebra<S>,
    bound: usize,
) -> Result<(FBialgebra<S>, Vec<AxiomFailure>), AlgebraError> {
    Ok((b.to_f_bialgebra(bound)?, b.check_axioms()?))
}

fn morphism_table<S: Scalar>(
    source: &FBialgebra<S>,
    target: &FBialgebra<S>,
    f11: GradedMap<S>,
    bound: usize,
) -> Result<OpTable<S>, AlgebraError> {
    let mut table = OpTable::new(bound);
    table.entries.insert(
        OpLabel::f(MultiIndex::single(1), MultiIndex::single(1)),
        f11,
    );
    let mut fill = Vec::new();
    {
        let ev = Evaluator::for_morphism(source, target, &table);
        for (k, l) in index_pairs(bound) {
            let label = OpLabel::f(k, l);
            let nf = normal_form(&label);
            if nf != Expr::Gen(label.clone()) {
                fill.push((label.clone(), ev.eval(&nf, &label.input_colors())?.0));
            }
        }
    }
    table.entries.extend(fill);
    Ok(table)
}

/// `f¹₁ = id`, the components forced by the simplification relations
/// expanded, everything else zero.
pub fn identity_morphism<S: Scalar>(
    alg: &FBialgebra<S>,
    bound: usize,
) -> Result<OpTable<S>, AlgebraError> {
    morphism_table(alg, alg, GradedMap::identity(alg.space.dim()), bound)
}

pub fn zero_morphism<S: Scalar>(
    source: &FBialgebra<S>,
    target: &FBialgebra<S>,
    bound: usize,
) -> Result<OpTable<S>, AlgebraError> {
    let f11 = GradedMap::zero(target.space.dim(), source.space.dim(), 0);
    morphism_table(source, target, f11, bound)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ring {
    Q,
    F2,
}

/// On-disk form: dense matrices with rows indexed by outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub ring: Ring,
    pub basis: Vec<BasisElement>,
    #[serde(with = "matrix_serde", default)]
    pub differential: Vec<Vec<Q>>,
    #[serde(with = "matrix_serde")]
    pub product: Vec<Vec<Q>>,
    #[serde(with = "matrix_serde")]
    pub coproduct: Vec<Vec<Q>>,
}

fn dense<S: Scalar>(
    name: &str,
    m: &[Vec<Q>],
    cols: usize,
    degree: i64,
) -> Result<GradedMap<S>, AlgebraError> {
    let conv = m
        .iter()
        .map(|r| {
            r.iter()
                .map(S::from_rational)
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| AlgebraError::Parse(format!("{name}: {e}")))?;
    GradedMap::from_dense(&conv, cols, degree)
        .map_err(|e| AlgebraError::Parse(format!("{name}: {e}")))
}

impl AlgebraFile {
    fn build<S: Scalar>(&self) -> Result<DgBialgebra<S>, AlgebraError> {
        let space = GradedSpace {
            basis: self.basis.clone(),
        };
        let n = space.dim();
        let differential = if self.differential.is_empty() {
            GradedMap::zero(n, n, -1)
        } else {
            dense("differential", &self.differential, n, -1)?
        };
        DgBialgebra::new(
            space,
            differential,
            dense("product", &self.product, n * n, 0)?,
            dense("coproduct", &self.coproduct, n, 0)?,
        )
    }
}

/// A bialgebra over either supported ring.
#[derive(Debug, Clone)]
pub enum AnyAlgebra {
    Q(DgBialgebra<Q>),
    F2(DgBialgebra<F2>),
}

/// Outcome of checking a bialgebra file.
#[derive(Debug, Clone, Serialize)]
pub struct AlgebraReport {
    pub ring: Ring,
    pub axiom_failures: Vec<AxiomFailure>,
    pub relations: Report,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity_morphism: Option<Report>,
}

impl AlgebraReport {
    pub fn holds(&self) -> bool {
        self.relations.holds() && self.identity_morphism.as_ref().is_none_or(Report::holds)
    }
}

fn run<S: Scalar>(
    ring: Ring,
    b: &DgBialgebra<S>,
    bound: usize,
    morphism_bound: Option<usize>,
) -> Result<AlgebraReport, AlgebraError> {
    let (f, axiom_failures) = dg_to_f(b, bound)?;
    let relations = verify_relations(&f, bound)?;
    let identity_morphism = match morphism_bound {
        Some(n) => Some(verify_morphism(&f, &f, &identity_morphism(&f, n)?, n)?),
        None => None,
    };
    Ok(AlgebraReport {
        ring,
        axiom_failures,
        relations,
        identity_morphism,
    })
}

impl AnyAlgebra {
    pub fn from_json(text: &str) -> Result<Self, AlgebraError> {
        let file: AlgebraFile =
            serde_json::from_str(text).map_err(|e| AlgebraError::Parse(e.to_string()))?;
        Ok(match file.ring {
            Ring::Q => AnyAlgebra::Q(file.build()?),
            Ring::F2 => AnyAlgebra::F2(file.build()?),
        })
    }

    pub fn ring(&self) -> Ring {
        match self {
            AnyAlgebra::Q(_) => Ring::Q,
            AnyAlgebra::F2(_) => Ring::F2,
        }
    }

    /// Builds the dg f-bialgebra and verifies every relation up to `bound`,
    /// optionally also the identity morphism up to `morphism_bound`.
    pub fn verify(
        &self,
        bound: usize,
        morphism_bound: Option<usize>,
    ) -> Result<AlgebraReport, AlgebraError> {
        match self {
            AnyAlgebra::Q(b) => run(Ring::Q, b, bound, morphism_bound),
            AnyAlgebra::F2(b) => run(Ring::F2, b, bound, morphism_bound),
        }
    }
}

/// `Λ[x]` with `|x| = 1` over `ℚ`: `x² = 0`, `Δx = x⊗1 + 1⊗x`.
pub fn exterior_algebra() -> DgBialgebra<Q> {
    let one = Q::from_integer(1);
    let space = GradedSpace::new(vec![("1", 0), ("x", 1)]);
    let product = GradedMap::from_columns(
        2,
        0,
        vec![vec![(0, one)], vec![(1, one)], vec![(1, one)], vec![]],
    );
    let coproduct = GradedMap::from_columns(4, 0, vec![vec![(0, one)], vec![(1, one), (2, one)]]);
    DgBialgebra::new(space, GradedMap::zero(2, 2, -1), product, coproduct).expect("valid")
}

/// The group bialgebra of `ℤ/2` over `𝔽₂` in degree zero.
pub fn z2_group_algebra() -> DgBialgebra<F2> {
    let one = F2(true);
    let space = GradedSpace::new(vec![("e", 0), ("g", 0)]);
    let product = GradedMap::from_columns(
        2,
        0,
        vec![
            vec![(0, one)],
            vec![(1, one)],
            vec![(1, one)],
            vec![(0, one)],
        ],
    );
    let coproduct = GradedMap::from_columns(4, 0, vec![vec![(0, one)], vec![(3, one)]]);
    DgBialgebra::new(space, GradedMap::zero(2, 2, -1), product, coproduct).expect("valid")
}

/// `Λ[x]` with the non-coassociative coproduct `Δx = x⊗1 - 1⊗x`.
pub fn corrupted_exterior_algebra() -> DgBialgebra<Q> {
    let mut b = exterior_algebra();
    let one = Q::from_integer(1);
    b.coproduct = GradedMap::from_columns(4, 0, vec![vec![(0, one)], vec![(1, -one), (2, one)]]);
    b
}
