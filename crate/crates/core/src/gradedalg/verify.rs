use rayon::prelude::*;
use serde::Serialize;

use super::eval::{Evaluator, FBialgebra, OpTable};
use super::map::GradedMap;
use super::scalar::Scalar;
use super::AlgebraError;
use crate::multiindex::MultiIndex;
use crate::relgen::{
    applicable_deletions, expand_with_deletions, generate_m, generate_r, index_pairs, normal_form,
    Expr, OpLabel, Relation,
};
use crate::signs::SignBit;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Offending {
    pub row: usize,
    pub col: usize,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    /// `"R"`, `"M"`, or `"S"` for a table entry checked against its expansions.
    pub family: &'static str,
    pub op: OpLabel,
    pub k: MultiIndex,
    pub l: MultiIndex,
    pub holds: bool,
    pub offending: Option<Offending>,
    pub terms: Vec<String>,
}

impl Check {
    pub fn name(&self) -> String {
        format!("({}^{}_{})", self.family, self.k, self.l)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub bound: usize,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

fn evaluate_relation<S: Scalar>(
    ev: &Evaluator<'_, S>,
    rel: &Relation,
) -> Result<GradedMap<S>, AlgebraError> {
    let shape = rel.lhs.input_colors();
    let rows = ev.basis(&rel.lhs.output_colors())?.len();
    let cols = ev.basis(&shape)?.len();
    let mut sum = GradedMap::zero(rows, cols, rel.lhs.degree() - 1);
    for t in &rel.terms {
        let (m, _) = ev.eval(&t.expr(), &shape)?;
        sum = sum.add(&m.signed(t.sign))?;
    }
    Ok(sum)
}

fn check_of<S: Scalar>(
    family: &'static str,
    op: &OpLabel,
    m: &GradedMap<S>,
    terms: Vec<String>,
) -> Check {
    let offending = m.first_nonzero().map(|(row, col, v)| Offending {
        row,
        col,
        value: v.to_text(),
    });
    Check {
        family,
        op: op.clone(),
        k: op.k(),
        l: op.l().clone(),
        holds: offending.is_none(),
        offending,
        terms,
    }
}

fn relation_check<S: Scalar>(
    ev: &Evaluator<'_, S>,
    family: &'static str,
    rel: &Relation,
) -> Result<Check, AlgebraError> {
    let m = evaluate_relation(ev, rel)?;
    Ok(check_of(
        family,
        &rel.lhs,
        &m,
        rel.terms.iter().map(|t| t.to_string()).collect(),
    ))
}

/// Compares a stored matrix with the evaluation of its normal form and of
/// every expansion starting with a different deletion.
fn entry_checks<S: Scalar>(
    ev: &Evaluator<'_, S>,
    table: &OpTable<S>,
) -> Result<Vec<Check>, AlgebraError> {
    let mut out = Vec::new();
    for (op, stored) in &table.entries {
        let nf = normal_form(op);
        if nf == Expr::Gen(op.clone()) {
            continue;
        }
        let mut variants = vec![nf];
        for d in applicable_deletions(op) {
            variants.push(expand_with_deletions(op, &[d]).expect("applicable"));
        }
        for v in variants {
            let (m, _) = ev.eval(&v, &op.input_colors())?;
            let diff = m.add(&stored.clone().signed(SignBit::MINUS))?;
            out.push(check_of("S", op, &diff, vec![v.to_string()]));
        }
    }
    Ok(out)
}

/// Evaluates every `(R^k_l)` with `|k| + |l| ≤ bound`, in canonical order,
/// plus the simplification identities of the table entries.
pub fn verify_relations<S: Scalar>(
    alg: &FBialgebra<S>,
    bound: usize,
) -> Result<Report, AlgebraError> {
    let ev = Evaluator::new(alg);
    let mut checks = index_pairs(bound)
        .par_iter()
        .map(|(k, l)| relation_check(&ev, "R", &generate_r(k, l)))
        .collect::<Result<Vec<_>, _>>()?;
    checks.extend(entry_checks(&ev, &alg.table)?);
    Ok(Report { bound, checks })
}

/// Evaluates every `(M^k_l)` with `|k| + |l| ≤ bound`.
pub fn verify_morphism<S: Scalar>(
    source: &FBialgebra<S>,
    target: &FBialgebra<S>,
    morphism: &OpTable<S>,
    bound: usize,
) -> Result<Report, AlgebraError> {
    let ev = Evaluator::for_morphism(source, target, morphism);
    let mut checks = index_pairs(bound)
        .into_iter()
        .chain(std::iter::once((
            MultiIndex::single(1),
            MultiIndex::single(1),
        )))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(k, l)| relation_check(&ev, "M", &generate_m(k, l)))
        .collect::<Result<Vec<_>, _>>()?;
    checks.sort_by(|a, b| {
        (a.k.size() + a.l.size(), &a.k, &a.l).cmp(&(b.k.size() + b.l.size(), &b.k, &b.l))
    });
    checks.extend(entry_checks(&ev, morphism)?);
    Ok(Report { bound, checks })
}
