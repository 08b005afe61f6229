//! Exact graded linear algebra with Koszul signs, the dg f-bialgebra of a dg
//! bialgebra and the matrix verifier for the coherence relations.

use thiserror::Error;

use crate::relgen::OpLabel;

pub mod bialgebra;
pub mod eval;
pub mod map;
pub mod scalar;
pub mod verify;

pub use bialgebra::{
    corrupted_exterior_algebra, dg_to_f, exterior_algebra, identity_morphism, z2_group_algebra,
    zero_morphism, AlgebraReport, AnyAlgebra, AxiomFailure, DgBialgebra, Ring,
};
pub use eval::{tensor_limit, Evaluator, FBialgebra, OpTable};
pub use map::{BasisElement, GradedMap, GradedSpace, TensorBasis};
pub use scalar::{Scalar, F2};
pub use verify::{verify_morphism, verify_relations, Check, Report};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("a tensor power with {factors} factors exceeds the limit of {limit} basis vectors")]
    TensorTooLarge { factors: usize, limit: usize },
    #[error("no matrix for {0}")]
    MissingOperation(OpLabel),
    #[error("{0} does not have the required degree")]
    DegreeViolation(String),
    #[error("invalid algebra: {0}")]
    Parse(String),
}

/// `τ^a_b` on `a·b` copies of `space`, with its Koszul signs.
pub fn tau_map<S: Scalar>(
    a: usize,
    b: usize,
    space: &GradedSpace,
) -> Result<GradedMap<S>, AlgebraError> {
    let alg = FBialgebra {
        space: space.clone(),
        differential: GradedMap::zero(space.dim(), space.dim(), -1),
        table: OpTable::new(0),
    };
    let ev = Evaluator::new(&alg);
    let shape = vec![crate::relgen::Color::A; a * b];
    Ok(ev
        .eval(
            &crate::relgen::Expr::Shuffle(crate::signs::tau_order(a, b)),
            &shape,
        )?
        .0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Q;
    use crate::signs::tau_sign;

    #[test]
    fn tau_is_an_involution_up_to_transpose() {
        let space = GradedSpace::new(vec![("1", 0), ("x", 1)]);
        for a in 1..=3 {
            for b in 1..=3 {
                let t = tau_map::<Q>(a, b, &space).unwrap();
                let back = tau_map::<Q>(b, a, &space).unwrap();
                assert_eq!(
                    back.compose(&t).unwrap(),
                    GradedMap::identity(t.cols()),
                    "{a} {b}"
                );
                if a == 1 || b == 1 {
                    assert_eq!(t, GradedMap::identity(t.cols()));
                }
            }
        }
    }

    #[test]
    fn tau_entries_match_the_clubsuit_sign() {
        let space = GradedSpace::new(vec![("1", 0), ("x", 1)]);
        let t = tau_map::<Q>(2, 2, &space).unwrap();
        let basis = TensorBasis::new(vec![space.degrees(); 4], 1 << 10).unwrap();
        for j in 0..basis.len() {
            let degrees = basis.factor_degrees_of(j);
            let (_, v) = t.column(j)[0];
            let expected = if tau_sign(&degrees, 2, 2).unwrap().is_minus() {
                -1
            } else {
                1
            };
            assert_eq!(v, Q::from_integer(expected));
        }
        // x⊗1⊗x⊗1 ↦ x⊗x⊗1⊗1 with no sign; 1⊗x⊗x⊗1 ↦ -1⊗x⊗x⊗1.
        assert_eq!(
            t.entry(basis.encode(&[1, 1, 0, 0]), basis.encode(&[1, 0, 1, 0])),
            Q::from_integer(1)
        );
        assert_eq!(
            t.entry(basis.encode(&[0, 1, 1, 0]), basis.encode(&[0, 1, 1, 0])),
            Q::from_integer(-1)
        );
    }

    #[test]
    fn tensor_differential_squares_to_zero() {
        let space = GradedSpace::new(vec![("a", 0), ("b", 1)]);
        let d = GradedMap::from_columns(2, -1, vec![vec![], vec![(0, Q::from_integer(1))]]);
        let alg = FBialgebra {
            space,
            differential: d,
            table: OpTable::new(0),
        };
        let ev = Evaluator::new(&alg);
        let shape = vec![crate::relgen::Color::A; 3];
        let (m, _) = ev.eval(&crate::relgen::Expr::Diff(3), &shape).unwrap();
        assert!(!m.is_zero());
        assert!(m.compose(&m).unwrap().is_zero());
    }
}
