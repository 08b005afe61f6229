//! Sign exponents and their brute-force oracles.
//!
//! Every sign is an exponent in ℤ/2: the actual sign is `(-1)^bit`.

use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multiindex::{glue, symmetry_dim, vertex_identification, IndexError, MultiIndex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignError {
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("not a bijection: {0}")]
    NotABijection(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("gluing map undefined: {0}")]
    SymmetryMismatch(String),
}

/// An exponent in ℤ/2.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub struct SignBit(bool);

impl SignBit {
    pub const PLUS: SignBit = SignBit(false);
    pub const MINUS: SignBit = SignBit(true);

    pub fn from_parity(n: usize) -> Self {
        SignBit(n % 2 == 1)
    }

    pub fn from_i64(n: i64) -> Self {
        SignBit(n.rem_euclid(2) == 1)
    }

    pub fn is_minus(self) -> bool {
        self.0
    }

    pub fn bit(self) -> u8 {
        self.0 as u8
    }

    /// `(-1)^bit` as an integer.
    pub fn to_int(self) -> i64 {
        if self.0 {
            -1
        } else {
            1
        }
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Add for SignBit {
    type Output = SignBit;
    fn add(self, rhs: SignBit) -> SignBit {
        SignBit(self.0 ^ rhs.0)
    }
}

#[allow(clippy::suspicious_op_assign_impl)]
impl AddAssign for SignBit {
    fn add_assign(&mut self, rhs: SignBit) {
        self.0 ^= rhs.0;
    }
}

impl From<SignBit> for u8 {
    fn from(s: SignBit) -> u8 {
        s.bit()
    }
}

impl TryFrom<u8> for SignBit {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            0 => Ok(SignBit::PLUS),
            1 => Ok(SignBit::MINUS),
            _ => Err(format!("sign exponent must be 0 or 1, got {v}")),
        }
    }
}

impl fmt::Debug for SignBit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit())
    }
}

impl fmt::Display for SignBit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.0 { "-" } else { "+" })
    }
}

/// `♠_k = Σ (a - i) k_i`.
pub fn spadesuit(k: &MultiIndex) -> SignBit {
    let a = k.trees();
    SignBit::from_parity(
        k.entries()
            .iter()
            .enumerate()
            .map(|(i, &e)| (a - 1 - i) * e)
            .sum(),
    )
}

/// `♠` of an index that may have become empty (e.g. `tilde` of a vertical index).
pub fn spadesuit_opt(k: Option<&MultiIndex>) -> SignBit {
    k.map(spadesuit).unwrap_or_default()
}

/// `♥^{k1}_{k0} = Σ_h (k1_h - 1) v_{≥h}(k0)`.
pub fn heartsuit(k1: &MultiIndex, k0: &MultiIndex) -> Result<SignBit, SignError> {
    glue(k1, k0)?;
    let mut total = 0;
    for (h, &e) in k1.entries().iter().enumerate() {
        if e > 1 {
            total += (e - 1) * k0.vertices_right_of(h + 1)?;
        }
    }
    Ok(SignBit::from_parity(total))
}

/// The three gluing-map exponents for one splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Rho {
    pub rho: SignBit,
    pub rho0: SignBit,
    pub rho1: SignBit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhoKind {
    Rho,
    Rho0,
    Rho1,
}

/// Exponents for `k = k1 ♯ k0`, `l = l0 ♯ l1`.
pub fn rho(
    k0: &MultiIndex,
    l0: &MultiIndex,
    k1: &MultiIndex,
    l1: &MultiIndex,
) -> Result<Rho, SignError> {
    let heart_k = heartsuit(k1, k0)?;
    let heart_l = heartsuit(l0, l1)?;
    let (x0, x1) = (k0.vertices(), k1.vertices());
    let (y0, y1) = (l0.vertices(), l1.vertices());
    let shared = heart_k + heart_l + SignBit::from_parity(y0 * (x1 + y1));
    let one = SignBit::MINUS;
    let tail0 = SignBit::from_parity(x0 + y0);
    Ok(Rho {
        rho: shared + tail0 + one,
        rho0: shared + tail0,
        rho1: shared + one,
    })
}

impl Rho {
    pub fn get(&self, which: RhoKind) -> SignBit {
        match which {
            RhoKind::Rho => self.rho,
            RhoKind::Rho0 => self.rho0,
            RhoKind::Rho1 => self.rho1,
        }
    }
}

/// `♣^a_b = Σ_{i' < i, j < j'} |x_{ij}| |x_{i'j'}|` for a row-major `a × b` grid.
pub fn tau_sign(degrees: &[i64], a: usize, b: usize) -> Result<SignBit, SignError> {
    if degrees.len() != a * b {
        return Err(SignError::ShapeMismatch(format!(
            "{} degrees for a {a}×{b} grid",
            degrees.len()
        )));
    }
    let d = |i: usize, j: usize| degrees[i * b + j].rem_euclid(2);
    let mut total = 0;
    for i in 0..a {
        for ip in 0..i {
            for j in 0..b {
                for jp in j + 1..b {
                    total += d(i, j) * d(ip, jp);
                }
            }
        }
    }
    Ok(SignBit::from_i64(total))
}

/// Order of the factors after `τ^a_b`: position `t` of the output holds input factor `order[t]`.
pub fn tau_order(a: usize, b: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(a * b);
    for j in 0..b {
        for i in 0..a {
            order.push(i * b + j);
        }
    }
    order
}

fn check_permutation(order: &[usize]) -> Result<(), SignError> {
    let mut seen = vec![false; order.len()];
    for &o in order {
        if o >= order.len() || seen[o] {
            return Err(SignError::NotABijection(format!("{order:?}")));
        }
        seen[o] = true;
    }
    Ok(())
}

/// Parity of the inversion count of a permutation given in one-line notation.
pub fn permutation_signature(order: &[usize]) -> Result<SignBit, SignError> {
    check_permutation(order)?;
    let mut inversions = 0;
    for s in 0..order.len() {
        for t in s + 1..order.len() {
            if order[s] > order[t] {
                inversions += 1;
            }
        }
    }
    Ok(SignBit::from_parity(inversions))
}

/// Koszul sign of reordering graded factors: each inverted pair contributes
/// the product of their degrees.
pub fn koszul_sign(degrees: &[i64], order: &[usize]) -> Result<SignBit, SignError> {
    if degrees.len() != order.len() {
        return Err(SignError::ShapeMismatch(format!(
            "{} degrees for a permutation of {}",
            degrees.len(),
            order.len()
        )));
    }
    check_permutation(order)?;
    let mut total = 0i64;
    for s in 0..order.len() {
        for t in s + 1..order.len() {
            if order[s] > order[t] {
                total += degrees[order[s]].rem_euclid(2) * degrees[order[t]].rem_euclid(2);
            }
        }
    }
    Ok(SignBit::from_i64(total))
}

/// Parity of permuting blocks of the given dimensions into `order`.
pub fn sign_of_block_move(block_dims: &[usize], order: &[usize]) -> Result<SignBit, SignError> {
    let degrees: Vec<i64> = block_dims.iter().map(|&d| d as i64).collect();
    koszul_sign(&degrees, order)
}

/// `♥` recomputed as the signature of `Vert(k0) ⊔ Vert(k1) → Vert(k1 ♯ k0)`.
pub fn heartsuit_oracle(k1: &MultiIndex, k0: &MultiIndex) -> Result<SignBit, SignError> {
    let k = glue(k1, k0)?;
    let (lower, upper) = vertex_identification(k1, k0)?;
    let verts = k.vert_set();
    let order: Vec<usize> = lower
        .iter()
        .chain(upper.iter())
        .map(|p| {
            verts
                .iter()
                .position(|q| q == p)
                .expect("identified vertex")
        })
        .collect();
    // `order[t]` is the target of source `t`; the signature is that of its inverse,
    // which has the same parity.
    permutation_signature(&order)
}

/// `♠` recomputed by moving the symmetry directions `v_i` in front of the
/// blocks `⟨v_i⟩ ⊕ K_{k_i}`.
pub fn spadesuit_oracle(k: &MultiIndex) -> SignBit {
    let mut dims = Vec::new();
    for &e in k.entries() {
        dims.push(1);
        dims.push(e);
    }
    let a = k.trees();
    let order: Vec<usize> = (0..a)
        .map(|i| 2 * i)
        .chain((0..a).map(|i| 2 * i + 1))
        .collect();
    sign_of_block_move(&dims, &order).expect("consistent block layout")
}

/// Sign of the determinant of an integer matrix (given as columns), by
/// fraction-free elimination. Returns 0 for singular matrices.
pub fn det_sign(columns: &[Vec<i64>]) -> i8 {
    let n = columns.len();
    if n == 0 {
        return 1;
    }
    // Work on rows of the transpose; the determinant is unchanged.
    let mut m: Vec<Vec<i128>> = columns
        .iter()
        .map(|c| {
            assert_eq!(c.len(), n, "square matrix expected");
            c.iter().map(|&x| x as i128).collect()
        })
        .collect();
    let mut sign = 1i8;
    let mut prev = 1i128;
    for p in 0..n {
        let Some(pivot) = (p..n).find(|&r| m[r][p] != 0) else {
            return 0;
        };
        if pivot != p {
            m.swap(pivot, p);
            sign = -sign;
        }
        for r in p + 1..n {
            for c in p + 1..n {
                m[r][c] = (m[r][c] * m[p][p] - m[r][p] * m[p][c]) / prev;
            }
            m[r][p] = 0;
        }
        prev = m[p][p];
    }
    if m[n - 1][n - 1] < 0 {
        -sign
    } else {
        sign
    }
}

fn unit(n: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

/// A basis of the orthogonal complement of `(1, ..., 1)` in `ℝ^n`, ordered so
/// that `(1,...,1)` followed by it is positively oriented.
fn oriented_complement(n: usize) -> Vec<Vec<i64>> {
    let mut basis: Vec<Vec<i64>> = (0..n.saturating_sub(1))
        .map(|i| {
            let mut v = unit(n, i);
            v[n - 1] = -1;
            v
        })
        .collect();
    if n >= 2 {
        let mut all = vec![vec![1; n]];
        all.extend(basis.iter().cloned());
        if det_sign(&all) < 0 {
            for x in basis[0].iter_mut() {
                *x = -*x;
            }
        }
    }
    basis
}

/// Coordinates of `J^k_l` occupied by the factors of a splitting.
///
/// Coordinates of `J` are the heights at `Vert(k)` followed by those at
/// `Vert(l)`. The returned vectors give, for each coordinate of `J^0`
/// (resp. `J^1`) in its own standard order, the coordinate of `J` it lands on.
pub fn splitting_embeddings(
    k0: &MultiIndex,
    l0: &MultiIndex,
    k1: &MultiIndex,
    l1: &MultiIndex,
) -> Result<(Vec<usize>, Vec<usize>), SignError> {
    let k = glue(k1, k0)?;
    let l = glue(l0, l1)?;
    let vk = k.vert_set();
    let vl = l.vert_set();
    let (k_lower, k_upper) = vertex_identification(k1, k0)?;
    // For l = l0 ♯ l1 the factor l0 plays the role of the upper index.
    let (l_of_l1, l_of_l0) = vertex_identification(l0, l1)?;
    let pos_k = |p: &usize| vk.iter().position(|q| q == p).expect("vertex of k");
    let pos_l = |p: &usize| vk.len() + vl.iter().position(|q| q == p).expect("vertex of l");
    let emb0 = k_lower
        .iter()
        .map(pos_k)
        .chain(l_of_l0.iter().map(pos_l))
        .collect();
    let emb1 = k_upper
        .iter()
        .map(pos_k)
        .chain(l_of_l1.iter().map(pos_l))
        .collect();
    Ok((emb0, emb1))
}

fn embed(v: &[i64], emb: &[usize], n: usize) -> Vec<i64> {
    let mut out = vec![0; n];
    for (x, &e) in v.iter().zip(emb) {
        out[e] = *x;
    }
    out
}

/// Orientation sign of a gluing map, computed from explicit bases.
///
/// * `Rho1`: `ℝ × K^0 × J^1 → J`, `(h, B0, B1) ↦ -h v^0 + B0 + B1`.
/// * `Rho0`: `ℝ × J^0 × K^1 → J`, `(h, B0, B1) ↦ h v^1 + B0 + B1`.
/// * `Rho`: `ℝ × K^0 × K^1 → K`, the previous map followed by the quotient.
///
/// Each `K^i` carries the quotient orientation `J^i = ⟨v^i⟩ ⊕ K^i`.
pub fn orientation_oracle(
    k0: &MultiIndex,
    l0: &MultiIndex,
    k1: &MultiIndex,
    l1: &MultiIndex,
    which: RhoKind,
) -> Result<SignBit, SignError> {
    let k = glue(k1, k0)?;
    let l = glue(l0, l1)?;
    let c0 = symmetry_dim(k0, l0);
    let c1 = symmetry_dim(k1, l1);
    let c = symmetry_dim(&k, &l);
    let need = |name: &str, value: usize| {
        if value == 1 {
            Ok(())
        } else {
            Err(SignError::SymmetryMismatch(format!(
                "{name} = {value}, needs 1"
            )))
        }
    };
    match which {
        RhoKind::Rho1 => need("c(k0,l0)", c0)?,
        RhoKind::Rho0 => need("c(k1,l1)", c1)?,
        RhoKind::Rho => {
            need("c(k0,l0)", c0)?;
            need("c(k1,l1)", c1)?;
            need("c(k,l)", c)?;
        }
    }
    let (emb0, emb1) = splitting_embeddings(k0, l0, k1, l1)?;
    let n = k.vertices() + l.vertices();
    let (n0, n1) = (emb0.len(), emb1.len());
    let mut columns: Vec<Vec<i64>> = Vec::with_capacity(n);
    match which {
        RhoKind::Rho1 => {
            columns.push(embed(&vec![-1; n0], &emb0, n));
            columns.extend(oriented_complement(n0).iter().map(|w| embed(w, &emb0, n)));
            columns.extend((0..n1).map(|i| embed(&unit(n1, i), &emb1, n)));
        }
        RhoKind::Rho0 => {
            columns.push(embed(&vec![1; n1], &emb1, n));
            columns.extend((0..n0).map(|i| embed(&unit(n0, i), &emb0, n)));
            columns.extend(oriented_complement(n1).iter().map(|w| embed(w, &emb1, n)));
        }
        RhoKind::Rho => {
            // Orientation of K is read off J = ⟨v⟩ ⊕ K, so put v in front.
            columns.push(vec![1; n]);
            columns.push(embed(&vec![1; n1], &emb1, n));
            columns.extend(oriented_complement(n0).iter().map(|w| embed(w, &emb0, n)));
            columns.extend(oriented_complement(n1).iter().map(|w| embed(w, &emb1, n)));
        }
    }
    match det_sign(&columns) {
        0 => Err(SignError::SymmetryMismatch("degenerate gluing map".into())),
        s => Ok(SignBit(s < 0)),
    }
}

/// Orientation sign of `K̃^k_l ≅ Π K_{k_i}` for vertical `l`, from explicit bases.
///
/// `K̃` is oriented by `J = ⟨v_1, ..., v_ã⟩ ⊕ K̃` where `v_i` is the indicator
/// of the vertices of the i-th non-vertical tree; each `K_{k_i}` by
/// `ℝ^{k_i - 1} = ⟨v⟩ ⊕ K_{k_i}`.
pub fn vertical_split_oracle(k: &MultiIndex) -> SignBit {
    let n = k.vertices();
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for &e in k.entries() {
        if e >= 2 {
            blocks.push((start, e - 1));
        }
        start += e - 1;
    }
    let mut columns = Vec::with_capacity(n);
    for &(s, len) in &blocks {
        let emb: Vec<usize> = (s..s + len).collect();
        columns.push(embed(&vec![1; len], &emb, n));
    }
    for &(s, len) in &blocks {
        let emb: Vec<usize> = (s..s + len).collect();
        columns.extend(oriented_complement(len).iter().map(|w| embed(w, &emb, n)));
    }
    SignBit(det_sign(&columns) < 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::mi;

    #[test]
    fn spade_examples() {
        assert_eq!(spadesuit(&mi(&[5])), SignBit::PLUS);
        assert_eq!(spadesuit(&mi(&[2, 3])), SignBit::PLUS);
        assert_eq!(spadesuit(&mi(&[3, 2])), SignBit::MINUS);
        assert_eq!(spadesuit_opt(None), SignBit::PLUS);
        assert_eq!(spadesuit_oracle(&mi(&[3, 2])), SignBit::MINUS);
    }

    #[test]
    fn heart_examples() {
        assert_eq!(heartsuit(&mi(&[1, 1]), &mi(&[2])).unwrap(), SignBit::PLUS);
        assert_eq!(heartsuit(&mi(&[2, 1]), &mi(&[2])).unwrap(), SignBit::MINUS);
        assert_eq!(
            heartsuit_oracle(&mi(&[2, 1]), &mi(&[2])).unwrap(),
            SignBit::MINUS
        );
        assert!(heartsuit(&mi(&[2]), &mi(&[2])).is_err());
    }

    #[test]
    fn permutation_signatures() {
        assert_eq!(permutation_signature(&[0, 1, 2]).unwrap(), SignBit::PLUS);
        assert_eq!(permutation_signature(&[1, 0, 2]).unwrap(), SignBit::MINUS);
        assert!(matches!(
            permutation_signature(&[0, 0]),
            Err(SignError::NotABijection(_))
        ));
    }

    #[test]
    fn rho_examples() {
        let r = rho(&mi(&[1]), &mi(&[2]), &mi(&[2]), &mi(&[1])).unwrap();
        assert_eq!(r.rho, SignBit::MINUS);
        let r = rho(&mi(&[2]), &mi(&[1, 1]), &mi(&[1, 1]), &mi(&[2])).unwrap();
        assert_eq!(r.rho, SignBit::PLUS);
        let r = rho(&mi(&[1]), &mi(&[1]), &mi(&[2]), &mi(&[1])).unwrap();
        assert_eq!(r.rho0, SignBit::PLUS);
        let r = rho(&mi(&[2]), &mi(&[1]), &mi(&[1, 1]), &mi(&[1])).unwrap();
        assert_eq!(r.rho1, SignBit::MINUS);
    }

    #[test]
    fn oracle_reproduces_hopf_signs() {
        let o = orientation_oracle(&mi(&[1]), &mi(&[2]), &mi(&[2]), &mi(&[1]), RhoKind::Rho);
        assert_eq!(o.unwrap(), SignBit::MINUS);
        let o = orientation_oracle(
            &mi(&[2]),
            &mi(&[1, 1]),
            &mi(&[1, 1]),
            &mi(&[2]),
            RhoKind::Rho,
        );
        assert_eq!(o.unwrap(), SignBit::PLUS);
        let refused =
            orientation_oracle(&mi(&[2]), &mi(&[1]), &mi(&[1, 1]), &mi(&[1]), RhoKind::Rho0);
        assert!(matches!(refused, Err(SignError::SymmetryMismatch(_))));
    }

    #[test]
    fn tau_sign_examples() {
        assert_eq!(tau_sign(&[0; 4], 2, 2).unwrap(), SignBit::PLUS);
        assert_eq!(tau_sign(&[1; 4], 2, 2).unwrap(), SignBit::MINUS);
        let order = tau_order(2, 2);
        assert_eq!(koszul_sign(&[1; 4], &order).unwrap(), SignBit::MINUS);
        assert!(tau_sign(&[1; 3], 2, 2).is_err());
    }

    #[test]
    fn block_moves() {
        assert_eq!(
            sign_of_block_move(&[1, 3], &[1, 0]).unwrap(),
            SignBit::MINUS
        );
        assert_eq!(sign_of_block_move(&[1, 4], &[1, 0]).unwrap(), SignBit::PLUS);
        assert_eq!(
            sign_of_block_move(&[2, 3, 5], &[0, 1, 2]).unwrap(),
            SignBit::PLUS
        );
    }

    #[test]
    fn determinant_signs() {
        assert_eq!(det_sign(&[vec![1, 0], vec![0, 1]]), 1);
        assert_eq!(det_sign(&[vec![0, 1], vec![1, 0]]), -1);
        assert_eq!(det_sign(&[vec![1, 1], vec![1, 1]]), 0);
        assert_eq!(
            det_sign(&[vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, -4]]),
            -1
        );
    }

    #[test]
    fn closed_forms_match_oracles_on_small_indices() {
        use crate::multiindex::{enumerate_cosplittings, enumerate_splittings, indices_up_to};
        let mut checked = 0;
        for k in indices_up_to(4) {
            for l in indices_up_to(5 - k.size().min(4)) {
                for ks in enumerate_splittings(&k) {
                    for (l0, l1) in enumerate_cosplittings(&l) {
                        let r = rho(&ks.k0, &l0, &ks.k1, &l1).unwrap();
                        for which in [RhoKind::Rho, RhoKind::Rho0, RhoKind::Rho1] {
                            if let Ok(o) = orientation_oracle(&ks.k0, &l0, &ks.k1, &l1, which) {
                                assert_eq!(
                                    o,
                                    r.get(which),
                                    "{which:?} {:?} {l0} {:?} {l1}",
                                    ks.k0,
                                    ks.k1
                                );
                                checked += 1;
                            }
                        }
                    }
                }
            }
        }
        assert!(checked > 50);
    }
}
