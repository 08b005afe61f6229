use std::collections::{BTreeMap, BTreeSet};

use biforest::decorations::{all_decorations, split_decoration};
use biforest::forest::{AscendingForest, Biforest, MetricForest};
use biforest::gradedalg::GradedMap;
use biforest::moduli::{boundary_faces, dims, Space};
use biforest::multiindex::{enumerate_splittings, glue, symmetry_dim};
use biforest::rational::Q;
use biforest::realize::henriques_graph;
use biforest::relgen::{generate_r, OpLabel};
use biforest::signs::{heartsuit, spadesuit_opt, tau_sign, vertical_split_oracle};
use biforest::{MultiIndex, SignBit};
use proptest::prelude::*;

fn index(max_trees: usize, max_entry: usize) -> impl Strategy<Value = MultiIndex> {
    prop::collection::vec(1..=max_entry, 1..=max_trees).prop_map(|v| MultiIndex::new(v).unwrap())
}

/// A composition of `n` chosen by a cut mask.
fn cut(n: usize, mask: u32) -> MultiIndex {
    let mut out = vec![1];
    for p in 1..n {
        if mask >> p & 1 == 1 {
            out.push(1);
        } else {
            *out.last_mut().unwrap() += 1;
        }
    }
    MultiIndex::new(out).unwrap()
}

fn rational() -> impl Strategy<Value = Q> {
    (-6i64..=6, 1i64..=3).prop_map(|(n, d)| Q::new(n, d))
}

/// `(k, heights)` with one height per vertex of `k`.
fn with_heights(max_trees: usize, max_entry: usize) -> impl Strategy<Value = (MultiIndex, Vec<Q>)> {
    index(max_trees, max_entry).prop_flat_map(|k| {
        let n = k.vertices();
        (Just(k), prop::collection::vec(rational(), n))
    })
}

fn biforest() -> impl Strategy<Value = (MultiIndex, MultiIndex, Vec<Q>)> {
    (index(3, 3), index(3, 3)).prop_flat_map(|(k, l)| {
        let n = k.vertices() + l.vertices();
        (Just(k), Just(l), prop::collection::vec(rational(), n))
    })
}

proptest! {
    #[test]
    fn glue_preserves_sizes_and_adds_vertices(k1 in index(4, 3), mask in any::<u32>()) {
        let k0 = cut(k1.trees(), mask);
        let k = glue(&k1, &k0).unwrap();
        prop_assert_eq!(k.size(), k1.size());
        prop_assert_eq!(k.trees(), k0.trees());
        prop_assert_eq!(k.vertices(), k1.vertices() + k0.vertices());
    }

    #[test]
    fn splittings_are_distinct_and_reglue(k in index(4, 3)) {
        let all = enumerate_splittings(&k);
        let distinct: BTreeSet<_> = all.iter().map(|s| (s.k1.clone(), s.k0.clone())).collect();
        prop_assert_eq!(distinct.len(), all.len());
        prop_assert_eq!(all.len(), 1 << k.vertices());
        for s in &all {
            prop_assert_eq!(glue(&s.k1, &s.k0).unwrap(), k.clone());
        }
    }

    #[test]
    fn leaf_coordinates_are_a_bijection(k in index(5, 4)) {
        for h in 1..=k.size() {
            let (i, ip) = k.leaf_coord_inv(h).unwrap();
            prop_assert_eq!(k.leaf_coord(i, ip).unwrap(), h);
        }
    }

    #[test]
    fn heart_is_a_cocycle(k2 in index(4, 2), m1 in any::<u32>(), m0 in any::<u32>()) {
        let k1 = cut(k2.trees(), m1);
        let k0 = cut(k1.trees(), m0);
        let left = heartsuit(&k2, &k1).unwrap() + heartsuit(&glue(&k2, &k1).unwrap(), &k0).unwrap();
        let right = heartsuit(&k1, &k0).unwrap() + heartsuit(&k2, &glue(&k1, &k0).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn heart_vanishes_on_vertical_upper_factor(n in 1usize..6, mask in any::<u32>()) {
        let k0 = cut(n, mask);
        prop_assert_eq!(heartsuit(&MultiIndex::vertical(n), &k0).unwrap(), SignBit::PLUS);
    }

    #[test]
    fn clubsuit_of_transpose_undoes_tau(a in 1usize..5, b in 1usize..5, seed in prop::collection::vec(-3i64..=3, 16)) {
        let grid: Vec<i64> = seed[..a * b].to_vec();
        let transposed: Vec<i64> = (0..b).flat_map(|j| (0..a).map(move |i| (i, j))).map(|(i, j)| grid[i * b + j]).collect();
        prop_assert_eq!(tau_sign(&grid, a, b).unwrap(), tau_sign(&transposed, b, a).unwrap());
    }

    #[test]
    fn spade_matches_the_vertical_splitting_orientation(k in index(4, 4)) {
        prop_assume!(k.size() <= 7);
        prop_assert_eq!(vertical_split_oracle(&k), spadesuit_opt(k.tilde().as_ref()));
    }

    #[test]
    fn dendrograms_have_the_requested_type((k, h) in with_heights(3, 4)) {
        let f = AscendingForest::from_heights(&k, &h).unwrap();
        prop_assert_eq!(f.forest().type_of(), k.clone());
        prop_assert_eq!(f.to_heights(), h.clone());
        let distinct = f.forest().vertex_count() == k.vertices();
        // Equal heights that never meet at one vertex keep the count generic.
        if distinct {
            let tied = (0..h.len()).any(|a| (a + 1..h.len()).any(|b| h[a] == h[b] && h[a..=b].iter().all(|x| *x >= h[a])
                && (k.vert_set()[a]..k.vert_set()[b]).all(|p| k.vert_set().contains(&p))));
            prop_assert!(!tied);
        }
    }

    #[test]
    fn irreducible_form_is_idempotent((k, h) in with_heights(3, 4), zeros in any::<u32>()) {
        let m = AscendingForest::from_heights(&k, &h).unwrap().to_metric();
        let lengths: BTreeMap<usize, Q> = m
            .lengths()
            .iter()
            .enumerate()
            .map(|(n, (&e, &len))| (e, if zeros >> n & 1 == 1 { Q::from_integer(0) } else { len }))
            .collect();
        let m = MetricForest::new(m.forest().clone(), lengths).unwrap();
        let once = m.irreducible();
        prop_assert_eq!(once.forest().type_of(), k.clone());
        prop_assert_eq!(once.irreducible(), once);
    }

    #[test]
    fn face_dimensions_add_up(k in index(2, 3), l in index(2, 3)) {
        prop_assume!(symmetry_dim(&k, &l) == 1 && k.size() + l.size() <= 7);
        let total = dims(&k, &l).dim_k.unwrap();
        for f in boundary_faces(&k, &l, Space::K).unwrap() {
            let a = dims(&f.k0, &f.l0).dim_k.unwrap();
            let b = dims(&f.k1, &f.l1).dim_k.unwrap();
            prop_assert_eq!(a + b + 1, total);
        }
    }

    #[test]
    fn relation_terms_compose_and_count_faces(k in index(2, 3), l in index(2, 3)) {
        prop_assume!(symmetry_dim(&k, &l) == 1 && k.size() + l.size() <= 7);
        let r = generate_r(&k, &l);
        for t in &r.terms {
            prop_assert_eq!(t.inner.arity().1, t.outer.arity().0);
            prop_assert_eq!(t.outer.arity().1, r.lhs.arity().1);
            prop_assert_eq!(t.inner.arity().0, r.lhs.arity().0);
        }
        let faces = boundary_faces(&k, &l, Space::K).unwrap().len();
        prop_assert_eq!(r.terms.len(), faces + 2);
        prop_assert_eq!(r.terms.iter().filter(|t| t.d_term).count(), 2);
    }

    #[test]
    fn tensor_and_composition_interchange(seed in prop::collection::vec(-2i64..=2, 64), d in prop::collection::vec(-1i64..=1, 4)) {
        let degrees = [0i64, 1, 1, 2];
        let mut it = seed.into_iter().cycle();
        let mut map = |deg: i64| -> GradedMap<Q> {
            let columns = degrees
                .iter()
                .map(|&s| (0..4).filter(|&t| degrees[t] == s + deg).map(|t| (t, Q::from_integer(it.next().unwrap()))).collect())
                .collect();
            GradedMap::from_columns(4, deg, columns)
        };
        let (f, g, f1, g1) = (map(d[0]), map(d[1]), map(d[2]), map(d[3]));
        let pair: Vec<i64> = degrees.iter().flat_map(|&a| degrees.iter().map(move |&b| a + b)).collect();
        for m in [&f, &g, &f1, &g1] {
            prop_assert!(m.respects_degrees(&degrees, &degrees));
        }
        let lhs = f.tensor(&g, &degrees).compose(&f1.tensor(&g1, &degrees)).unwrap();
        let sign = SignBit::from_i64(g.degree * f1.degree);
        let rhs = f.compose(&f1).unwrap().tensor(&g.compose(&g1).unwrap(), &degrees).signed(sign);
        prop_assert_eq!(lhs.to_dense(), rhs.to_dense());
        prop_assert!(lhs.respects_degrees(&pair, &pair));
    }

    #[test]
    fn decorations_count_and_degenerate_splits(l in index(3, 3), pick in any::<usize>()) {
        let labels = ["a", "b", "c"];
        let all = all_decorations(&l, &labels);
        let d = all[pick % all.len()].clone();
        prop_assert_eq!(d.label_count(), l.size() + l.trees());
        let (d0, d1) = split_decoration(&d, &l, &MultiIndex::vertical(l.trees())).unwrap();
        prop_assert_eq!(d0, d.clone());
        prop_assert_eq!(d1.hom_out(), d.hom_in());
        let (d0, d1) = split_decoration(&d, &MultiIndex::vertical(l.size()), &l).unwrap();
        prop_assert_eq!(d1, d.clone());
        prop_assert_eq!(d0.hom_in(), d.hom_out());
    }

    #[test]
    fn intersection_graph_properties((k, l, h) in biforest(), t in rational(), shift in rational()) {
        let b = Biforest::from_heights(&k, &l, &h).unwrap();
        let g = henriques_graph(&b);
        let hit_up: BTreeSet<usize> = g.edges.iter().map(|e| e.up_edge).collect();
        let hit_down: BTreeSet<usize> = g.edges.iter().map(|e| e.down_edge).collect();
        prop_assert_eq!(hit_up.len(), b.up.forest().edges().len());
        prop_assert_eq!(hit_down.len(), b.down.forest().edges().len());
        for e in &g.edges {
            for n in [e.low_node, e.high_node].into_iter().flatten() {
                let node = &g.nodes[n];
                let on_edge = |p: biforest::realize::Point, id: usize, f: &biforest::forest::Forest| match p {
                    biforest::realize::Point::Edge(x) => x == id,
                    biforest::realize::Point::Vertex(v) => {
                        let ed = f.edges()[id];
                        ed.src == biforest::forest::Node::Vertex(v) || ed.dst == biforest::forest::Node::Vertex(v)
                    }
                };
                prop_assert!(on_edge(node.up, e.up_edge, b.up.forest()));
                prop_assert!(on_edge(node.down, e.down_edge, b.down.forest()));
            }
        }
        if !h.contains(&t) {
            let up = k.trees() + h[..k.vertices()].iter().filter(|x| **x < t).count();
            let down = l.trees() + h[k.vertices()..].iter().filter(|x| **x > t).count();
            prop_assert_eq!(g.cross_section(t), up * down);
        }
        let moved: Vec<Q> = h.iter().map(|x| x + shift).collect();
        let g2 = henriques_graph(&Biforest::from_heights(&k, &l, &moved).unwrap());
        prop_assert!(g.is_shift_of(&g2));
        prop_assert_eq!(g.to_dot(), henriques_graph(&b).to_dot());
    }
}

#[test]
fn operation_labels_survive_json() {
    let op = OpLabel::alpha(
        MultiIndex::new(vec![2, 1]).unwrap(),
        MultiIndex::new(vec![3]).unwrap(),
    );
    let text = serde_json::to_string(&op).unwrap();
    assert_eq!(serde_json::from_str::<OpLabel>(&text).unwrap(), op);
}
