//! Property tests over seeded random trees: tree-operation invariants,
//! packing invariants, and the construction's structural guarantees.

use proptest::prelude::*;
use starpack::packer::{build_packing, lambda_min, BoundaryRef, BuildConfig, LambdaPolicy};
use starpack::samples::{random_normalized_tree, random_normalized_tree_with_leaves};
use starpack::tree::{LengthTree, NodeId};
use std::f64::consts::{PI, TAU};

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normalize_is_idempotent(seed in any::<u64>()) {
        let t = random_normalized_tree(seed, 24, 0.1, 10.0);
        let n1 = t.normalize();
        let n2 = n1.normalize();
        prop_assert!(n1.canonical_eq(&n2));
    }

    #[test]
    fn leaf_distances_invariant_under_normalize_and_reroot(seed in any::<u64>()) {
        let t = random_normalized_tree(seed, 16, 0.1, 10.0);
        let d0 = t.leaf_distances();
        let n = t.normalize();
        let dn = n.leaf_distances();
        prop_assert_eq!(d0.len(), dn.len());
        for (a, b) in d0.iter().zip(&dn) {
            prop_assert!(close(*a, *b, 1e-12));
        }
        let target = (seed % t.node_count() as u64) as NodeId;
        let r = t.reroot(target).unwrap();
        let dr = r.leaf_distances();
        prop_assert_eq!(d0.len(), dr.len());
        for (a, b) in d0.iter().zip(&dr) {
            prop_assert!(close(*a, *b, 1e-12));
        }
    }

    #[test]
    fn reroot_round_trip_restores_tree(seed in any::<u64>()) {
        let t = random_normalized_tree(seed, 16, 0.1, 10.0);
        let target = (seed % t.node_count() as u64) as NodeId;
        let back = t.reroot(target).unwrap().reroot(t.root()).unwrap();
        prop_assert!(t.canonical_eq(&back));
    }

    #[test]
    fn stats_longest_path_bounds_edges(seed in any::<u64>()) {
        let t = random_normalized_tree(seed, 24, 0.1, 10.0);
        prop_assert!(t.stats().longest_root_path >= t.max_edge_weight() - 1e-12);
    }

    #[test]
    fn tree_json_round_trip(seed in any::<u64>()) {
        let t = random_normalized_tree(seed, 16, 0.1, 10.0);
        let text = t.to_json_value().to_string();
        let t2 = LengthTree::parse(&text).unwrap();
        prop_assert!(t.canonical_eq(&t2));
        prop_assert_eq!(text, t2.to_json_value().to_string());
    }

    #[test]
    fn packing_structural_invariants(seed in any::<u64>()) {
        let t = random_normalized_tree(seed, 16, 0.1, 10.0);
        let alpha = [TAU, 1.5 * PI, TAU / 3.0][(seed % 3) as usize];
        let cfg = BuildConfig { alpha, ..Default::default() };
        let p = build_packing(&t, &cfg).unwrap();
        let m = t.edge_count();
        let n = t.leaf_count();

        // exactly two congruent triangles per edge, bases equal the weights
        prop_assert_eq!(p.triangles.len(), 2 * m);
        for (e, pair) in p.triangles.chunks(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            prop_assert_eq!(a.base_parent, b.base_parent);
            prop_assert_eq!(a.base_child, b.base_child);
            let w = t.weight(a.base_child);
            prop_assert!(close(a.base_length(), w, 1e-9), "edge {} base length", e);
            // congruence: equal base, equal lateral sides
            let la = a.corners[0].dist(a.corners[2]);
            let lb = b.corners[0].dist(b.corners[2]);
            prop_assert!(close(la, lb, 1e-9));
            let ma = a.corners[1].dist(a.corners[2]);
            let mb = b.corners[1].dist(b.corners[2]);
            prop_assert!(close(ma, mb, 1e-9));
            prop_assert!(a.area() > 0.0 && b.area() > 0.0);
        }

        // distinct image count
        prop_assert_eq!(p.distinct_x_count(), n + usize::from(!p.wrap));

        // equidistance: every image of a step sits at that node's λ
        for node in 0..t.node_count() {
            for &img in &p.images_at[node] {
                let d = p.node_pos[node].dist(p.x_images[img]);
                prop_assert!(close(d, p.per_node_lambda[node], 1e-9));
            }
        }

        // nesting bound with auto λ: λ_child ≥ λ_parent − w, and the cup λ
        // strictly exceeds the child's subtree height
        fn subtree_height(t: &LengthTree, v: NodeId) -> f64 {
            t.node(v)
                .children
                .iter()
                .map(|&c| t.weight(c) + subtree_height(t, c))
                .fold(0.0, f64::max)
        }
        for v in 0..t.node_count() {
            if let Some(parent) = t.node(v).parent {
                let w = t.weight(v);
                prop_assert!(p.per_node_lambda[v] >= p.per_node_lambda[parent] - w - 1e-9);
                prop_assert!(p.per_node_lambda[v] > subtree_height(&t, v));
            }
        }

        // boundary alternation: x-images at every other slot
        let offset = usize::from(!p.wrap); // root ref first when α < 2π
        for (i, r) in p.boundary.iter().enumerate() {
            let is_x = matches!(r, BoundaryRef::XImage(_));
            if i >= offset {
                prop_assert_eq!((i - offset) % 2 == 0, is_x);
            }
        }
        let x_refs = p.boundary.iter().filter(|r| matches!(r, BoundaryRef::XImage(_))).count();
        prop_assert_eq!(x_refs, n + usize::from(!p.wrap));

        // packing JSON round trip is byte-stable
        let s1 = p.to_json_string();
        let s2 = starpack::packer::Packing::from_json_str(&s1).unwrap().to_json_string();
        prop_assert_eq!(s1, s2);
    }

    #[test]
    fn auto_lambda_theta_within_budget(seed in any::<u64>()) {
        let t = random_normalized_tree(seed, 16, 0.1, 10.0);
        let p = build_packing(&t, &BuildConfig::default()).unwrap();
        prop_assert!(p.theta_x().total <= TAU + 1e-9);
    }

    #[test]
    fn theta_strictly_decreasing_in_lambda(seed in any::<u64>()) {
        let t = random_normalized_tree(seed, 12, 0.1, 10.0);
        let base = lambda_min(&t).lambda_min;
        let mut prev = f64::INFINITY;
        for mult in [1.0, 1.5, 2.5, 4.0] {
            let cfg = BuildConfig {
                lambda: LambdaPolicy::Explicit(base * mult),
                ..Default::default()
            };
            let theta = build_packing(&t, &cfg).unwrap().theta_x().total;
            prop_assert!(theta < prev);
            prev = theta;
        }
    }
}

proptest! {
    // the Voronoi round trip is slower; fewer cases here, the acceptance
    // suite runs the 200-instance version
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn voronoi_round_trip_small(seed in any::<u64>()) {
        let t = random_normalized_tree_with_leaves(seed, 3 + (seed % 10) as usize, 0.1, 10.0);
        let alpha = [TAU, 1.5 * PI, TAU / 3.0][(seed % 3) as usize];
        let p = build_packing(&t, &BuildConfig { alpha, ..Default::default() }).unwrap();
        let report = starpack::validator::validate(&p);
        prop_assert!(report.agt_ok());
        let ridge = starpack::ridge::extract_ridge(&p).unwrap();
        let m = starpack::ridge::match_tree(&ridge, &t, 1e-6);
        prop_assert!(m.isomorphic);
        prop_assert!(m.max_length_error < 1e-6);
        // interior ridge vertices all have degree ≥ 3
        let mut deg = vec![0usize; ridge.vertices.len()];
        for e in &ridge.edges {
            deg[e.a] += 1;
            deg[e.b] += 1;
        }
        for (v, d) in ridge.vertices.iter().zip(&deg) {
            if v.kind == starpack::ridge::RidgeVertexKind::Ramification {
                prop_assert!(*d >= 3);
            }
        }
        // cells tile the polygon
        let (sum, area) = starpack::ridge::cell_area_tiling(&p).unwrap();
        prop_assert!((sum - area).abs() <= 1e-8 * area);
        // oracle agrees
        prop_assert!(starpack::ridge::bisector_oracle(&p, 16).pass);
    }
}
