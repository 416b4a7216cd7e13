//! Gluing-theorem precondition checks on a packing: polygon simplicity,
//! perimeter matching, angle budgets, curvature audit and the predicted
//! vertex count of the folded polyhedron.

use crate::geom::segments_intersect;
use crate::packer::{BoundaryRef, Packing};
use crate::tree::NodeId;
use serde::Serialize;
use std::f64::consts::TAU;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Per-vertex curvature of the folded surface. Ramification (internal)
/// nodes are flat and carry no entry.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    /// 2π minus the two incident triangle angles, per leaf.
    pub per_leaf: Vec<(NodeId, f64)>,
    /// 2π − α at the root vertex; present only when α < 2π.
    pub root: Option<f64>,
    /// 2π − θ_x at the source.
    pub source_x: f64,
    /// Sum of all entries; 4π for a valid closed gluing.
    pub gauss_bonnet_sum: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub simple_polygon: bool,
    /// Boundary segment indices of the first detected violation.
    pub first_crossing: Option<(usize, usize)>,
    pub theta_x: f64,
    pub theta_x_ok: bool,
    pub glue_ok: bool,
    pub max_glue_residual: f64,
    /// External cup angle < π at every non-root node (leaf notches included).
    pub cups_ok: bool,
    /// The same restricted to internal nodes (the cups that received
    /// sub-packings); leaf notches may legitimately open past π.
    pub internal_cups_ok: bool,
    pub worst_cup: Option<(NodeId, f64)>,
    /// 2π of triangle angle around every internal node (root included
    /// when α = 2π).
    pub coverage_ok: bool,
    pub max_coverage_defect: f64,
    pub curvatures: CurvatureReport,
    pub gauss_bonnet_sum: f64,
    pub n_leaves: usize,
    pub alpha: f64,
    pub predicted_vertices: usize,
}

impl ValidationReport {
    /// The Alexandrov-gluing precondition panel: simple polygon, matched
    /// perimeters, θ_x ≤ 2π, and full 2π coverage at internal points.
    pub fn agt_ok(&self) -> bool {
        self.simple_polygon && self.glue_ok && self.theta_x_ok && self.coverage_ok
    }

    /// The verification gate: AGT panel plus well-formed internal cups.
    pub fn gate_ok(&self) -> bool {
        self.agt_ok() && self.internal_cups_ok
    }
}

/// True iff no two non-adjacent boundary segments share a point and the
/// boundary has no zero-length edges. Exact orientation predicates; the
/// scan is O(k²) and intended for desk-scale polygons.
pub fn check_polygon_simple(packing: &Packing) -> (bool, Option<(usize, usize)>) {
    let pts = packing.boundary_points();
    let k = pts.len();
    if k < 3 {
        return (false, Some((0, 0)));
    }
    for i in 0..k {
        if pts[i] == pts[(i + 1) % k] {
            return (false, Some((i, (i + 1) % k)));
        }
    }

    let test_row = |i: usize| -> Option<(usize, usize)> {
        let a1 = pts[i];
        let a2 = pts[(i + 1) % k];
        for j in (i + 2)..k {
            if i == 0 && j == k - 1 {
                continue; // adjacent around the wrap
            }
            let b1 = pts[j];
            let b2 = pts[(j + 1) % k];
            if segments_intersect(a1, a2, b1, b2) {
                return Some((i, j));
            }
        }
        None
    };

    #[cfg(feature = "parallel")]
    let hit = (0..k)
        .into_par_iter()
        .filter_map(test_row)
        .min();
    #[cfg(not(feature = "parallel"))]
    let hit = (0..k).filter_map(test_row).min();

    (hit.is_none(), hit)
}

#[derive(Debug, Clone, Serialize)]
pub struct GlueReport {
    pub ok: bool,
    pub max_residual: f64,
    /// (boundary index of the glued vertex, |left| − |right| residual).
    pub residuals: Vec<(usize, f64)>,
}

/// At every leaf (and the root when α < 2π) the two incident boundary
/// edges are glued to each other; their lengths must match within eps_len
/// relative.
pub fn check_gluing(packing: &Packing) -> GlueReport {
    let pts = packing.boundary_points();
    let k = pts.len();
    let eps = packing.config.tolerances.eps_len;
    let mut residuals = Vec::new();
    let mut ok = true;
    let mut max_res = 0.0f64;
    for (idx, r) in packing.boundary.iter().enumerate() {
        let glued = match r {
            BoundaryRef::Root => true,
            BoundaryRef::Node(n) => packing.tree.is_leaf(*n),
            BoundaryRef::XImage(_) => false,
        };
        if !glued {
            continue;
        }
        let prev = pts[(idx + k - 1) % k];
        let next = pts[(idx + 1) % k];
        let a = prev.dist(pts[idx]);
        let b = pts[idx].dist(next);
        let res = (a - b).abs();
        residuals.push((idx, res));
        max_res = max_res.max(res);
        if res > eps * a.max(b) {
            ok = false;
        }
    }
    GlueReport {
        ok,
        max_residual: max_res,
        residuals,
    }
}

/// Triangle-angle accumulation at every tree node.
fn angle_accumulation(packing: &Packing) -> Vec<f64> {
    let mut acc = vec![0.0f64; packing.tree.node_count()];
    for t in &packing.triangles {
        acc[t.base_parent] += crate::geom::angle_at(t.corners[0], t.corners[1], t.corners[2]);
        acc[t.base_child] += crate::geom::angle_at(t.corners[1], t.corners[0], t.corners[2]);
    }
    acc
}

#[derive(Debug, Clone, Serialize)]
pub struct AngleReport {
    pub theta_x: f64,
    pub theta_x_ok: bool,
    pub cups_ok: bool,
    pub internal_cups_ok: bool,
    pub worst_cup: Option<(NodeId, f64)>,
    pub coverage_ok: bool,
    pub max_coverage_defect: f64,
}

/// θ_x ≤ 2π, cup angles < π at non-root nodes, and 2π coverage around
/// internal nodes.
pub fn check_angle_conditions(packing: &Packing) -> AngleReport {
    let tol = packing.config.tolerances;
    let theta = packing.theta_x().total;
    let theta_ok = theta <= TAU + tol.eps_ang;

    let tree = &packing.tree;
    let mut cups_ok = true;
    let mut internal_cups_ok = true;
    let mut worst_cup: Option<(NodeId, f64)> = None;
    for n in tree.nodes() {
        if n.id == tree.root() {
            continue;
        }
        let a = packing.per_node_alpha[n.id];
        if worst_cup.is_none_or(|(_, wa)| a > wa) {
            worst_cup = Some((n.id, a));
        }
        if a >= std::f64::consts::PI {
            cups_ok = false;
            if !tree.is_leaf(n.id) {
                internal_cups_ok = false;
            }
        }
    }

    let acc = angle_accumulation(packing);
    let mut coverage_ok = true;
    let mut max_defect = 0.0f64;
    for n in tree.nodes() {
        let covered = if n.id == tree.root() {
            packing.wrap
        } else {
            !tree.is_leaf(n.id)
        };
        if !covered {
            continue;
        }
        let defect = (acc[n.id] - TAU).abs();
        max_defect = max_defect.max(defect);
        if defect > tol.eps_ang {
            coverage_ok = false;
        }
    }

    AngleReport {
        theta_x: theta,
        theta_x_ok: theta_ok,
        cups_ok,
        internal_cups_ok,
        worst_cup,
        coverage_ok,
        max_coverage_defect: max_defect,
    }
}

/// Curvature at every future polyhedron vertex; the sum must be 4π.
pub fn curvature_report(packing: &Packing) -> CurvatureReport {
    let acc = angle_accumulation(packing);
    let tree = &packing.tree;
    let mut per_leaf = Vec::new();
    let mut sum = 0.0;
    for n in tree.nodes() {
        if tree.is_leaf(n.id) {
            let k = TAU - acc[n.id];
            per_leaf.push((n.id, k));
            sum += k;
        }
    }
    let root = if packing.wrap {
        None
    } else {
        let k = TAU - acc[tree.root()];
        sum += k;
        Some(k)
    };
    let source_x = TAU - packing.theta_x().total;
    sum += source_x;
    CurvatureReport {
        per_leaf,
        root,
        source_x,
        gauss_bonnet_sum: sum,
    }
}

/// Run every check and predict the folded vertex count.
pub fn validate(packing: &Packing) -> ValidationReport {
    let (simple, crossing) = check_polygon_simple(packing);
    let glue = check_gluing(packing);
    let angles = check_angle_conditions(packing);
    let curv = curvature_report(packing);
    let tol = packing.config.tolerances;
    let n_leaves = packing.tree.leaf_count();
    let alpha = packing.config.alpha;
    let predicted = n_leaves
        + usize::from(angles.theta_x < TAU - tol.eps_ang)
        + usize::from(alpha < TAU - tol.eps_ang);
    ValidationReport {
        simple_polygon: simple,
        first_crossing: crossing,
        theta_x: angles.theta_x,
        theta_x_ok: angles.theta_x_ok,
        glue_ok: glue.ok,
        max_glue_residual: glue.max_residual,
        cups_ok: angles.cups_ok,
        internal_cups_ok: angles.internal_cups_ok,
        worst_cup: angles.worst_cup,
        coverage_ok: angles.coverage_ok,
        max_coverage_defect: angles.max_coverage_defect,
        gauss_bonnet_sum: curv.gauss_bonnet_sum,
        curvatures: curv,
        n_leaves,
        alpha,
        predicted_vertices: predicted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point2;
    use crate::packer::{build_packing, BuildConfig, LambdaPolicy};
    use crate::samples;
    use std::f64::consts::PI;

    fn fig3_packing() -> Packing {
        build_packing(
            &samples::fig3_tree(),
            &BuildConfig {
                alpha: 120f64.to_radians(),
                lambda: LambdaPolicy::Explicit(4.0),
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn fig3_is_simple_and_glues() {
        let p = fig3_packing();
        let (simple, _) = check_polygon_simple(&p);
        assert!(simple);
        let g = check_gluing(&p);
        assert!(g.ok);
        assert!(g.max_residual < 1e-12);
        let r = validate(&p);
        assert!(r.agt_ok());
        // 3 leaves + source vertex + root vertex (α < 2π, θ_x < 2π)
        assert_eq!(r.predicted_vertices, 5);
    }

    #[test]
    fn single_edge_packing_simple_and_curvature() {
        let t = samples::star_tree(&[5.0]);
        let p = build_packing(
            &t,
            &BuildConfig {
                alpha: 120f64.to_radians(),
                lambda: LambdaPolicy::Explicit(6.0),
                ..Default::default()
            },
        )
        .unwrap();
        let (simple, _) = check_polygon_simple(&p);
        assert!(simple);
        let c = curvature_report(&p);
        // doubly covered triangle: three vertex curvatures sum to 4π
        assert_eq!(c.per_leaf.len(), 1);
        assert!(c.root.is_some());
        assert!((c.gauss_bonnet_sum - 2.0 * TAU).abs() < 1e-12);
    }

    #[test]
    fn corrupted_packing_reports_crossing() {
        let mut p = build_packing(
            &samples::fig3_tree(),
            &BuildConfig {
                lambda: LambdaPolicy::Explicit(4.0),
                ..Default::default()
            },
        )
        .unwrap();
        // reflect one leaf across the ray to a flanking image: the notch
        // swings over the neighboring sector and the boundary must cross
        let leaf = p.tree.node(p.tree.root()).children[1];
        let (il, _) = p.edge_flanks(1);
        let apex = p.node_pos[p.tree.root()];
        let xl = p.x_images[il];
        let d = xl - apex;
        let v = p.node_pos[leaf] - apex;
        let proj = d * (v.dot(d) / d.norm2());
        p.node_pos[leaf] = apex + proj * 2.0 - v;
        // rebuild the boundary positions through the moved node
        let (simple, pair) = check_polygon_simple(&p);
        assert!(!simple);
        let (i, j) = pair.unwrap();
        // brute-force float oracle on the reported pair: the minimum
        // distance between the two segments must be zero
        let pts = p.boundary_points();
        let k = pts.len();
        let (a1, a2) = (pts[i], pts[(i + 1) % k]);
        let (b1, b2) = (pts[j], pts[(j + 1) % k]);
        fn point_seg_dist(p: Point2, a: Point2, b: Point2) -> f64 {
            let d = b - a;
            let t = ((p - a).dot(d) / d.norm2()).clamp(0.0, 1.0);
            p.dist(a + d * t)
        }
        let samples = 2000;
        let mut min_d = f64::INFINITY;
        for s in 0..=samples {
            let t = s as f64 / samples as f64;
            min_d = min_d.min(point_seg_dist(a1 + (a2 - a1) * t, b1, b2));
        }
        assert!(min_d < 1e-6, "reported pair does not touch: {min_d}");
    }

    #[test]
    fn perturbed_image_breaks_gluing() {
        let mut p = fig3_packing();
        p.x_images[1] = p.x_images[1] + Point2::new(1e-3, 0.0);
        // refresh triangle corners for the moved image
        for t in &mut p.triangles {
            t.corners = [
                p.node_pos[t.base_parent],
                p.node_pos[t.base_child],
                p.x_images[t.apex_image],
            ];
        }
        let g = check_gluing(&p);
        assert!(!g.ok);
        assert!(g.max_residual > 1e-4 && g.max_residual < 1e-2);
    }

    #[test]
    fn auto_lambda_passes_all_angle_checks() {
        for seed in [3u64, 17, 42] {
            let t = samples::random_normalized_tree(seed, 16, 0.1, 10.0);
            let p = build_packing(&t, &BuildConfig::default()).unwrap();
            let a = check_angle_conditions(&p);
            assert!(a.theta_x_ok);
            assert!(a.coverage_ok);
            assert!(a.internal_cups_ok);
        }
    }

    #[test]
    fn symmetric_curvature_closed_form() {
        // κ_x = 2π − 4 arctan(w/λ) for the symmetric 2-star
        let w = 1.0;
        let lam = 3.0;
        let t = samples::star_tree(&[w, w]);
        let p = build_packing(
            &t,
            &BuildConfig {
                lambda: LambdaPolicy::Explicit(lam),
                ..Default::default()
            },
        )
        .unwrap();
        let c = curvature_report(&p);
        assert!((c.source_x - (TAU - 4.0 * (w / lam).atan())).abs() < 1e-12);
        assert!((c.gauss_bonnet_sum - 2.0 * TAU).abs() < 1e-12);
    }

    #[test]
    fn flat_source_predicts_n_vertices() {
        // symmetric 3-star with w = λ: each tip is exactly π/3, so
        // θ_x = 6·(π/3) = 2π and the source stays flat
        let w = 2.0;
        let t = samples::star_tree(&[w, w, w]);
        let p = build_packing(
            &t,
            &BuildConfig {
                lambda: LambdaPolicy::Explicit(w),
                ..Default::default()
            },
        )
        .unwrap();
        let r = validate(&p);
        assert!((r.theta_x - TAU).abs() < 1e-12);
        // flat source and α = 2π: only the leaves become vertices
        assert_eq!(r.predicted_vertices, 3);
    }

    #[test]
    fn tiny_lambda_reports_theta_failure() {
        // a bushy 13-star with λ barely above L = ℓ blows far past 2π
        let t = samples::star_tree(&[2.0; 13]);
        let l = t.stats().longest_root_path;
        let p = build_packing(
            &t,
            &BuildConfig {
                lambda: LambdaPolicy::Explicit(l * (1.0 + 1e-6)),
                ..Default::default()
            },
        )
        .unwrap();
        let a = check_angle_conditions(&p);
        assert!(a.theta_x > TAU);
        assert!(!a.theta_x_ok);
    }

    #[test]
    fn leaf_notch_can_open_past_pi_with_auto_lambda() {
        // a dominant leaf on a 3-star opens its notch past π even at the
        // sufficient λ; the internal panel stays clean
        let t = samples::star_tree(&[10.0, 0.1, 0.1]);
        let p = build_packing(&t, &BuildConfig::default()).unwrap();
        let a = check_angle_conditions(&p);
        assert!(!a.cups_ok);
        assert!(a.internal_cups_ok);
        assert!(a.theta_x_ok);
        let r = validate(&p);
        assert!(r.agt_ok());
    }

    #[test]
    fn theta_pi_case_fails_only_cups() {
        let w = 2.5;
        let t = samples::star_tree(&[w, w]);
        let p = build_packing(
            &t,
            &BuildConfig {
                lambda: LambdaPolicy::Explicit(w),
                ..Default::default()
            },
        )
        .unwrap();
        let r = validate(&p);
        assert!((r.theta_x - PI).abs() < 1e-12);
        assert!(r.agt_ok());
        assert!(!r.cups_ok);
    }
}
