//! Points of `J^k_l` and `K^k_l`, gluing maps and signed boundary faces.
//!
//! A point of `J^k_l` is the vector of vertex heights indexed by `Vert(k)`
//! followed by `Vert(l)`. `K^k_l` is represented by mean-zero vectors.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forest::{Biforest, ForestError};
use crate::multiindex::{
    enumerate_cosplittings, enumerate_splittings, glue, symmetry_dim, IndexError, MultiIndex,
};
use crate::rational::{vec_serde, Q};
use crate::signs::{rho, splitting_embeddings, SignBit, SignError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModuliError {
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Sign(#[from] SignError),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error("K^{k}_{l} is empty: c(k,l) = {c}")]
    SymmetryMismatch {
        k: MultiIndex,
        l: MultiIndex,
        c: usize,
    },
    #[error("expected {expected} coordinates, got {got}")]
    Length { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Dims {
    pub dim_j: usize,
    /// `None` when `K^k_l` is empty.
    pub dim_k: Option<usize>,
    pub dim_k_tilde: usize,
    pub c: usize,
}

/// Dimensions of `J^k_l`, `K^k_l` and `K̃^k_l`.
///
/// For `c = 0` both spaces are points.
pub fn dims(k: &MultiIndex, l: &MultiIndex) -> Dims {
    let c = symmetry_dim(k, l);
    let dim_j = k.vertices() + l.vertices();
    let dim_k = match c {
        0 => Some(0),
        1 => Some(dim_j - 1),
        _ => None,
    };
    Dims {
        dim_j,
        dim_k,
        dim_k_tilde: dim_j - c,
        c,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuliPoint {
    pub k: MultiIndex,
    pub l: MultiIndex,
    #[serde(with = "vec_serde")]
    pub heights: Vec<Q>,
}

impl ModuliPoint {
    pub fn new(k: MultiIndex, l: MultiIndex, heights: Vec<Q>) -> Result<Self, ModuliError> {
        let expected = k.vertices() + l.vertices();
        if heights.len() != expected {
            return Err(ModuliError::Length {
                expected,
                got: heights.len(),
            });
        }
        Ok(ModuliPoint { k, l, heights })
    }

    pub fn zero(k: MultiIndex, l: MultiIndex) -> Self {
        let n = k.vertices() + l.vertices();
        ModuliPoint {
            k,
            l,
            heights: vec![Q::from_integer(0); n],
        }
    }

    pub fn biforest(&self) -> Result<Biforest, ModuliError> {
        Ok(Biforest::from_heights(&self.k, &self.l, &self.heights)?)
    }

    /// All heights shifted by `t` (the action of `v = (1, ..., 1)`).
    pub fn shifted(&self, t: Q) -> ModuliPoint {
        ModuliPoint {
            k: self.k.clone(),
            l: self.l.clone(),
            heights: self.heights.iter().map(|h| h + t).collect(),
        }
    }
}

impl fmt::Display for ModuliPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hs: Vec<String> = self
            .heights
            .iter()
            .map(crate::rational::format_rational)
            .collect();
        write!(f, "{}/{}: ({})", self.k, self.l, hs.join(", "))
    }
}

fn require_k(k: &MultiIndex, l: &MultiIndex) -> Result<usize, ModuliError> {
    match symmetry_dim(k, l) {
        c @ (0 | 1) => Ok(c),
        c => Err(ModuliError::SymmetryMismatch {
            k: k.clone(),
            l: l.clone(),
            c,
        }),
    }
}

/// Canonical representative in `K^k_l`: orthogonal projection onto the
/// complement of the symmetry orbit.
///
/// With `c = 1` the orbit direction is `(1, ..., 1)` in every case: when one
/// side is vertical the other has a single non-vertical tree carrying all
/// coordinates.
pub fn project_k(p: &ModuliPoint) -> Result<ModuliPoint, ModuliError> {
    if require_k(&p.k, &p.l)? == 0 || p.heights.is_empty() {
        return Ok(p.clone());
    }
    let n = Q::from_integer(p.heights.len() as i64);
    let mean = p.heights.iter().sum::<Q>() / n;
    Ok(p.shifted(-mean))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GlueVariant {
    /// `ℝ × K^0 × K^1 → K`.
    #[serde(rename = "g")]
    G,
    /// `ℝ × J^0 × K^1 → J`.
    #[serde(rename = "g0")]
    G0,
    /// `ℝ × K^0 × J^1 → J`.
    #[serde(rename = "g1")]
    G1,
}

/// The gluing map `h v^1 + B0 + B1` (or `-h v^0 + B0 + B1` for `g1`), where
/// `p0` has type `(k0, l0)`, `p1` type `(k1, l1)` and the result type
/// `(k1 ♯ k0, l0 ♯ l1)`.
pub fn glue_point(
    h: Q,
    p0: &ModuliPoint,
    p1: &ModuliPoint,
    variant: GlueVariant,
) -> Result<ModuliPoint, ModuliError> {
    let k = glue(&p1.k, &p0.k)?;
    let l = glue(&p0.l, &p1.l)?;
    let need_one = |a: &MultiIndex, b: &MultiIndex| match symmetry_dim(a, b) {
        1 => Ok(()),
        c => Err(ModuliError::SymmetryMismatch {
            k: a.clone(),
            l: b.clone(),
            c,
        }),
    };
    match variant {
        GlueVariant::G => {
            need_one(&p0.k, &p0.l)?;
            need_one(&p1.k, &p1.l)?;
            need_one(&k, &l)?;
        }
        GlueVariant::G0 => need_one(&p1.k, &p1.l)?,
        GlueVariant::G1 => need_one(&p0.k, &p0.l)?,
    }
    let (emb0, emb1) = splitting_embeddings(&p0.k, &p0.l, &p1.k, &p1.l)?;
    let mut out = ModuliPoint::zero(k, l);
    let (s0, s1) = match variant {
        GlueVariant::G | GlueVariant::G0 => (Q::from_integer(0), h),
        GlueVariant::G1 => (-h, Q::from_integer(0)),
    };
    for (x, &e) in p0.heights.iter().zip(&emb0) {
        out.heights[e] = x + s0;
    }
    for (x, &e) in p1.heights.iter().zip(&emb1) {
        out.heights[e] = x + s1;
    }
    match variant {
        GlueVariant::G => project_k(&out),
        _ => Ok(out),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FaceKind {
    #[serde(rename = "K")]
    K,
    #[serde(rename = "J0")]
    J0,
    #[serde(rename = "J1")]
    J1,
}

impl fmt::Display for FaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FaceKind::K => "K",
            FaceKind::J0 => "J0",
            FaceKind::J1 => "J1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    K,
    J,
}

impl std::str::FromStr for Space {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "K" | "k" => Ok(Space::K),
            "J" | "j" => Ok(Space::J),
            _ => Err(format!("unknown space {s:?}, expected K or J")),
        }
    }
}

/// A codimension-one face `image(g)` for the splitting `k = k1 ♯ k0`, `l = l0 ♯ l1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryFace {
    pub k0: MultiIndex,
    pub l0: MultiIndex,
    pub k1: MultiIndex,
    pub l1: MultiIndex,
    pub sign: SignBit,
    pub kind: FaceKind,
}

impl fmt::Display for BoundaryFace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (s0, s1) = match self.kind {
            FaceKind::K => ("K", "K"),
            FaceKind::J0 => ("J", "K"),
            FaceKind::J1 => ("K", "J"),
        };
        write!(
            f,
            "{} {}^{}_{} × {}^{}_{}",
            self.sign, s0, self.k0, self.l0, s1, self.k1, self.l1
        )
    }
}

/// Boundary faces of `K^k_l` or `J^k_l`, ordered by `(k0, l0, k1, l1, kind)`.
pub fn boundary_faces(
    k: &MultiIndex,
    l: &MultiIndex,
    space: Space,
) -> Result<Vec<BoundaryFace>, ModuliError> {
    if space == Space::K && require_k(k, l)? == 0 {
        return Ok(Vec::new());
    }
    let cos = enumerate_cosplittings(l);
    let mut faces: Vec<BoundaryFace> = enumerate_splittings(k)
        .par_iter()
        .flat_map_iter(|s| {
            cos.iter().flat_map(move |(l0, l1)| {
                let c0 = symmetry_dim(&s.k0, l0);
                let c1 = symmetry_dim(&s.k1, l1);
                let r = rho(&s.k0, l0, &s.k1, l1).expect("splittings glue");
                let face = |sign, kind| BoundaryFace {
                    k0: s.k0.clone(),
                    l0: l0.clone(),
                    k1: s.k1.clone(),
                    l1: l1.clone(),
                    sign,
                    kind,
                };
                let mut out = Vec::new();
                match space {
                    Space::K => {
                        if c0 == 1 && c1 == 1 {
                            out.push(face(r.rho, FaceKind::K));
                        }
                    }
                    Space::J => {
                        if c1 == 1 {
                            out.push(face(r.rho0, FaceKind::J0));
                        }
                        if c0 == 1 {
                            out.push(face(r.rho1, FaceKind::J1));
                        }
                    }
                }
                out
            })
        })
        .collect();
    faces.sort_by(|a, b| {
        (&a.k0, &a.l0, &a.k1, &a.l1, a.kind).cmp(&(&b.k0, &b.l0, &b.k1, &b.l1, b.kind))
    });
    Ok(faces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::Node;
    use crate::multiindex::{indices_up_to, mi};
    use crate::signs::{orientation_oracle, RhoKind};
    use std::collections::BTreeSet;

    fn q(n: i64) -> Q {
        Q::from_integer(n)
    }

    #[test]
    fn dimension_examples() {
        let d = dims(&mi(&[2]), &mi(&[2]));
        assert_eq!((d.dim_j, d.dim_k), (2, Some(1)));
        assert_eq!(dims(&mi(&[3]), &mi(&[2])).dim_k, Some(2));
        let d = dims(&mi(&[1, 1]), &mi(&[2, 3]));
        assert_eq!((d.c, d.dim_k, d.dim_k_tilde), (2, None, 1));
    }

    #[test]
    fn projections() {
        let p = ModuliPoint::new(mi(&[2]), mi(&[2]), vec![q(3), q(1)]).unwrap();
        assert_eq!(project_k(&p).unwrap().heights, vec![q(1), q(-1)]);
        let z = ModuliPoint::new(mi(&[2]), mi(&[2]), vec![q(2), q(-2)]).unwrap();
        assert_eq!(project_k(&z).unwrap(), z);
        let v = ModuliPoint::new(mi(&[2]), mi(&[1]), vec![q(5)]).unwrap();
        assert_eq!(project_k(&v).unwrap().heights, vec![q(0)]);
        let p = ModuliPoint::new(mi(&[3]), mi(&[2]), vec![q(1), q(2), q(6)]).unwrap();
        let once = project_k(&p).unwrap();
        assert_eq!(project_k(&once).unwrap(), once);
        assert_eq!(project_k(&p.shifted(q(7))).unwrap(), once);
        let empty = ModuliPoint::zero(mi(&[1, 1]), mi(&[2, 3]));
        assert!(matches!(
            project_k(&empty),
            Err(ModuliError::SymmetryMismatch { c: 2, .. })
        ));
    }

    #[test]
    fn gluing_zero_is_zero() {
        let p0 = ModuliPoint::zero(mi(&[2]), mi(&[2]));
        let p1 = ModuliPoint::zero(mi(&[2, 1]), mi(&[1]));
        let out = glue_point(q(0), &p0, &p1, GlueVariant::G).unwrap();
        assert_eq!(out, ModuliPoint::zero(mi(&[3]), mi(&[2])));
    }

    #[test]
    fn gluing_onto_vertical_factor() {
        let p0 = ModuliPoint::new(mi(&[2]), mi(&[1]), vec![q(4)]).unwrap();
        let p1 = ModuliPoint::zero(mi(&[1, 1]), mi(&[1]));
        let out = glue_point(q(3), &p0, &p1, GlueVariant::G1).unwrap();
        assert_eq!((out.k.clone(), out.heights.clone()), (mi(&[2]), vec![q(1)]));
        assert!(glue_point(q(3), &p0, &p1, GlueVariant::G0).is_err());
    }

    #[test]
    fn gluing_shifts_upper_heights() {
        let p0 = ModuliPoint::new(mi(&[2]), mi(&[2]), vec![q(1), q(-1)]).unwrap();
        let p1 = ModuliPoint::new(mi(&[2, 1]), mi(&[1]), vec![q(0)]).unwrap();
        let out = glue_point(q(10), &p0, &p1, GlueVariant::G0).unwrap();
        // Vert(3) = {1, 2}: the k1 vertex sits at leaf 1, the k0 vertex at leaf 2.
        assert_eq!(out.heights, vec![q(10), q(1), q(-1)]);
    }

    fn interval_clusters(b: &crate::forest::Forest) -> BTreeSet<(usize, usize)> {
        b.clusters().into_iter().collect()
    }

    /// Leaf intervals of the lower factor, pulled back along the upper
    /// factor's trees.
    fn pulled_back(
        lower: &BTreeSet<(usize, usize)>,
        upper: &MultiIndex,
    ) -> BTreeSet<(usize, usize)> {
        let ends = upper.tree_ends();
        let starts: Vec<usize> = std::iter::once(0)
            .chain(ends.iter().copied())
            .take(ends.len())
            .collect();
        lower
            .iter()
            .map(|&(a, b)| (starts[a], ends[b] - 1))
            .collect()
    }

    #[test]
    fn large_gluing_parameter_stacks_forests() {
        let p0 = ModuliPoint::new(mi(&[2]), mi(&[2, 1]), vec![q(1), q(-2)]).unwrap();
        let p1 = ModuliPoint::new(mi(&[2, 1]), mi(&[2]), vec![q(3), q(5)]).unwrap();
        let out = glue_point(q(100), &p0, &p1, GlueVariant::G0).unwrap();
        let (b, b0, b1) = (
            out.biforest().unwrap(),
            p0.biforest().unwrap(),
            p1.biforest().unwrap(),
        );
        assert_eq!(b.types(), (mi(&[3]), mi(&[3])));
        let mut up = interval_clusters(b1.up.forest());
        up.extend(pulled_back(&interval_clusters(b0.up.forest()), &p1.k));
        assert_eq!(interval_clusters(b.up.forest()), up);
        let mut down = interval_clusters(b0.down.forest());
        down.extend(pulled_back(&interval_clusters(b1.down.forest()), &p0.l));
        assert_eq!(interval_clusters(b.down.forest()), down);
        // Root of the upper factor sits above the lower factor's vertex.
        let top = b.up.forest().out_edge(Node::Leaf(0)).dst;
        assert!(matches!(top, Node::Vertex(_)));
    }

    #[test]
    fn face_counts() {
        let faces = boundary_faces(&mi(&[2]), &mi(&[2]), Space::K).unwrap();
        assert_eq!(faces.len(), 2);
        assert_eq!(
            (
                faces[0].k0.clone(),
                faces[0].l0.clone(),
                faces[0].k1.clone(),
                faces[0].l1.clone()
            ),
            (mi(&[1]), mi(&[2]), mi(&[2]), mi(&[1]))
        );
        assert_eq!(
            (
                faces[1].k0.clone(),
                faces[1].l0.clone(),
                faces[1].k1.clone(),
                faces[1].l1.clone()
            ),
            (mi(&[2]), mi(&[1, 1]), mi(&[1, 1]), mi(&[2]))
        );
        assert_eq!(
            boundary_faces(&mi(&[3]), &mi(&[2]), Space::K)
                .unwrap()
                .len(),
            6
        );
        assert!(boundary_faces(&mi(&[1]), &mi(&[1]), Space::K)
            .unwrap()
            .is_empty());
        assert!(boundary_faces(&mi(&[1, 1]), &mi(&[2, 3]), Space::K).is_err());
    }

    #[test]
    fn faces_have_complementary_dimensions_and_oracle_signs() {
        for k in indices_up_to(5) {
            for l in indices_up_to(7 - k.size()) {
                if k.size() + l.size() > 7 || symmetry_dim(&k, &l) != 1 {
                    continue;
                }
                let dk = dims(&k, &l).dim_k.unwrap();
                for f in boundary_faces(&k, &l, Space::K).unwrap() {
                    let d0 = dims(&f.k0, &f.l0).dim_k.unwrap();
                    let d1 = dims(&f.k1, &f.l1).dim_k.unwrap();
                    assert_eq!(d0 + d1 + 1, dk, "{f}");
                    let o = orientation_oracle(&f.k0, &f.l0, &f.k1, &f.l1, RhoKind::Rho).unwrap();
                    assert_eq!(o, f.sign, "{k} {l}: {f}");
                }
                for f in boundary_faces(&k, &l, Space::J).unwrap() {
                    let which = if f.kind == FaceKind::J0 {
                        RhoKind::Rho0
                    } else {
                        RhoKind::Rho1
                    };
                    let o = orientation_oracle(&f.k0, &f.l0, &f.k1, &f.l1, which).unwrap();
                    assert_eq!(o, f.sign, "{k} {l}: {f}");
                }
            }
        }
    }

    #[test]
    fn projection_of_glued_point_ignores_orbit_shift() {
        let p0 = ModuliPoint::new(mi(&[2]), mi(&[2]), vec![q(1), q(-1)]).unwrap();
        let p1 = ModuliPoint::new(mi(&[2, 1]), mi(&[1]), vec![q(0)]).unwrap();
        let a = glue_point(q(4), &p0, &p1, GlueVariant::G0).unwrap();
        let b = glue_point(q(1), &p0, &p1.shifted(q(3)), GlueVariant::G0).unwrap();
        assert_eq!(project_k(&a).unwrap(), project_k(&b).unwrap());
    }
}
