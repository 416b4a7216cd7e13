//! Independent verification: the Voronoi diagram of the x-images restricted
//! to the packing polygon, its embedded ridge tree, and the comparison of
//! that tree against the input.
//!
//! Two routes are provided. [`voronoi_cell`] clips the polygon against the
//! bisector half-planes (cells tile the polygon; used for area checks).
//! [`extract_ridge`] builds each site's convex half-plane region first and
//! trims the shared bisector segments to the polygon, which is robust when
//! the polygon is far from convex. [`bisector_oracle`] is a cheaper,
//! Voronoi-free check that scales to large instances.

use crate::error::{Error, Result};
use crate::geom::{point_in_polygon, polygon_signed_area, HalfPlane, Point2};
use crate::packer::{BoundaryRef, Packing};
use crate::tree::{LengthTree, NodeId};
use serde::Serialize;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

// ---------------------------------------------------------------------------
// Voronoi cells clipped to the polygon (Sutherland–Hodgman route)
// ---------------------------------------------------------------------------

fn neighbor_order(site: usize, sites: &[Point2]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sites.len()).filter(|&j| j != site).collect();
    order.sort_by(|&a, &b| {
        sites[site]
            .dist2(sites[a])
            .partial_cmp(&sites[site].dist2(sites[b]))
            .unwrap()
    });
    order
}

/// The cell of one site: the polygon successively clipped by every
/// bisector half-plane. Nearer sites are clipped first so the scan can
/// stop once the remaining bisectors cannot touch the cell.
pub fn voronoi_cell(site: usize, sites: &[Point2], polygon: &[Point2]) -> Result<Vec<Point2>> {
    if sites.len() < 2 {
        return Err(Error::Extraction("need at least two sites".into()));
    }
    let s = sites[site];
    let mut cell = polygon.to_vec();
    for j in neighbor_order(site, sites) {
        if sites[j].dist2(s) == 0.0 {
            return Err(Error::Extraction(format!("coincident sites {site} and {j}")));
        }
        let reach = cell.iter().map(|p| p.dist(s)).fold(0.0, f64::max);
        if sites[j].dist(s) / 2.0 > reach {
            break;
        }
        cell = crate::geom::clip_polygon(&cell, &HalfPlane::bisector_keeping(s, sites[j]));
        if cell.is_empty() {
            break;
        }
    }
    Ok(cell)
}

/// All cells, one per site.
pub fn voronoi_cells(sites: &[Point2], polygon: &[Point2]) -> Result<Vec<Vec<Point2>>> {
    #[cfg(feature = "parallel")]
    {
        (0..sites.len())
            .into_par_iter()
            .map(|i| voronoi_cell(i, sites, polygon))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        voronoi_cells_seq(sites, polygon)
    }
}

/// Sequential twin of [`voronoi_cells`]; kept callable for benchmarks.
pub fn voronoi_cells_seq(sites: &[Point2], polygon: &[Point2]) -> Result<Vec<Vec<Point2>>> {
    (0..sites.len()).map(|i| voronoi_cell(i, sites, polygon)).collect()
}

/// (sum of cell areas, polygon area); they agree for a correct tiling.
pub fn cell_area_tiling(packing: &Packing) -> Result<(f64, f64)> {
    let polygon = packing.boundary_points();
    let cells = voronoi_cells(&packing.x_images, &polygon)?;
    let sum = cells.iter().map(|c| polygon_signed_area(c).abs()).sum();
    Ok((sum, polygon_signed_area(&polygon).abs()))
}

// ---------------------------------------------------------------------------
// Ridge extraction (convex half-plane regions + polygon trimming)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
enum EdgeTag {
    Free,
    Bis(usize),
}

/// Convex region, vertices CCW-or-CW with the tag of the edge that STARTS
/// at each vertex.
type TaggedRegion = Vec<(Point2, EdgeTag)>;

fn clip_tagged(region: &TaggedRegion, hp: &HalfPlane, tag: EdgeTag) -> TaggedRegion {
    let n = region.len();
    let mut out: TaggedRegion = Vec::with_capacity(n + 2);
    for i in 0..n {
        let (cur, cur_tag) = region[i];
        let (nxt, _) = region[(i + 1) % n];
        let sc = hp.eval(cur);
        let sn = hp.eval(nxt);
        if sc <= 0.0 {
            // a vertex exactly on the clip line whose successor is outside
            // is itself the exit point: its outgoing edge runs along the
            // clip chord
            let out_tag = if sc == 0.0 && sn > 0.0 { tag } else { cur_tag };
            out.push((cur, out_tag));
        }
        if (sc < 0.0 && sn > 0.0) || (sc > 0.0 && sn < 0.0) {
            let t = sc / (sc - sn);
            let p = cur + (nxt - cur) * t;
            if sc < 0.0 {
                // exiting: the chord along the clip line starts here
                out.push((p, tag));
            } else {
                // entering: the original edge continues
                out.push((p, cur_tag));
            }
        }
    }
    out
}

/// Convex region of points whose nearest site is `site`, clipped to a
/// bounding box; edges are tagged with the bisector they lie on.
fn halfplane_region(site: usize, sites: &[Point2], bbox: &[Point2; 4]) -> Result<TaggedRegion> {
    let s = sites[site];
    let mut region: TaggedRegion = bbox.iter().map(|&p| (p, EdgeTag::Free)).collect();
    for j in neighbor_order(site, sites) {
        if sites[j].dist2(s) == 0.0 {
            return Err(Error::Extraction(format!("coincident sites {site} and {j}")));
        }
        let reach = region.iter().map(|(p, _)| p.dist(s)).fold(0.0, f64::max);
        if sites[j].dist(s) / 2.0 > reach {
            break;
        }
        region = clip_tagged(&region, &HalfPlane::bisector_keeping(s, sites[j]), EdgeTag::Bis(j));
        if region.is_empty() {
            return Err(Error::Extraction(format!("empty half-plane region for site {site}")));
        }
    }
    Ok(region)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RidgeVertexKind {
    Ramification,
    BoundaryLeaf,
    BoundaryRoot,
}

#[derive(Debug, Clone, Serialize)]
pub struct RidgeVertex {
    pub pos: Point2,
    pub kind: RidgeVertexKind,
}

#[derive(Debug, Clone, Serialize)]
pub struct RidgeEdge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
    /// The two sites whose bisector carries this edge.
    pub sites: (usize, usize),
}

/// The extracted restricted-Voronoi tree with its planar embedding.
#[derive(Debug, Clone, Serialize)]
pub struct RidgeGraph {
    pub vertices: Vec<RidgeVertex>,
    pub edges: Vec<RidgeEdge>,
    /// Incident edge ids in CCW order around each vertex.
    pub embedding: Vec<Vec<usize>>,
    /// The vertex realizing the tree root, when one could be identified.
    pub root_vertex: Option<usize>,
}

/// Interval of a bisector segment in the pair's canonical line frame.
fn segment_interval(
    region: &TaggedRegion,
    other: usize,
    origin: Point2,
    dir: Point2,
) -> Option<(f64, f64)> {
    let n = region.len();
    for i in 0..n {
        let (a, tag) = region[i];
        if tag != EdgeTag::Bis(other) {
            continue;
        }
        let (b, _) = region[(i + 1) % n];
        let ta = (a - origin).dot(dir);
        let tb = (b - origin).dot(dir);
        return Some((ta.min(tb), ta.max(tb)));
    }
    None
}

struct RawEdge {
    a: Point2,
    b: Point2,
    sites: (usize, usize),
}

/// Compute the Voronoi diagram of the x-images restricted to the packing
/// polygon and extract the embedded ridge tree. Fails when the merged
/// structure is not a tree (a bug or tolerance signal, or a corrupted
/// packing).
pub fn extract_ridge(packing: &Packing) -> Result<RidgeGraph> {
    let sites = &packing.x_images;
    if sites.len() < 2 {
        return Err(Error::Extraction(
            "packing has fewer than two distinct x-images".into(),
        ));
    }
    let polygon = packing.boundary_points();
    let eps_merge = packing.config.tolerances.eps_merge_rel * packing.scale();

    // padded bounding box
    let (mut lo, mut hi) = (polygon[0], polygon[0]);
    for p in &polygon {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let pad = (hi - lo).norm() * 0.25 + packing.scale();
    let bbox = [
        Point2::new(lo.x - pad, lo.y - pad),
        Point2::new(hi.x + pad, lo.y - pad),
        Point2::new(hi.x + pad, hi.y + pad),
        Point2::new(lo.x - pad, hi.y + pad),
    ];

    #[cfg(feature = "parallel")]
    let regions: Vec<TaggedRegion> = (0..sites.len())
        .into_par_iter()
        .map(|i| halfplane_region(i, sites, &bbox))
        .collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let regions: Vec<TaggedRegion> = (0..sites.len())
        .map(|i| halfplane_region(i, sites, &bbox))
        .collect::<Result<_>>()?;

    // Shared bisector segments, trimmed to the polygon.
    let mut raw_edges: Vec<RawEdge> = Vec::new();
    for i in 0..sites.len() {
        for j in (i + 1)..sites.len() {
            let delta = sites[j] - sites[i];
            let norm = delta.norm();
            let normal = delta * (1.0 / norm);
            let dir = Point2::new(-normal.y, normal.x);
            let origin = (sites[i] + sites[j]) * 0.5;

            let int_i = segment_interval(&regions[i], j, origin, dir);
            let int_j = segment_interval(&regions[j], i, origin, dir);
            let (t0, t1) = match (int_i, int_j) {
                (Some((a0, a1)), Some((b0, b1))) => (a0.max(b0), a1.min(b1)),
                _ => continue,
            };
            if t1 - t0 <= 2.0 * eps_merge {
                continue;
            }

            // cut candidates: polygon vertices lying on the bisector line
            #[derive(Clone, Copy)]
            struct Cut {
                t: f64,
                vertex: Option<usize>,
            }
            let mut cuts = vec![Cut { t: t0, vertex: None }, Cut { t: t1, vertex: None }];
            for (vi, &v) in polygon.iter().enumerate() {
                let off = (v - origin).dot(normal);
                if off.abs() > eps_merge {
                    continue;
                }
                let tv = (v - origin).dot(dir);
                if tv > t0 - eps_merge && tv < t1 + eps_merge {
                    cuts.push(Cut { t: tv, vertex: Some(vi) });
                }
            }
            cuts.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
            // collapse near-coincident cuts, preferring exact polygon vertices
            let mut merged: Vec<Cut> = Vec::with_capacity(cuts.len());
            for c in cuts {
                match merged.last_mut() {
                    Some(last) if (c.t - last.t).abs() <= 2.0 * eps_merge => {
                        if last.vertex.is_none() {
                            last.vertex = c.vertex;
                            last.t = c.t;
                        }
                    }
                    _ => merged.push(c),
                }
            }

            let snap = |c: &Cut| -> Point2 {
                match c.vertex {
                    Some(vi) => polygon[vi],
                    None => origin + dir * c.t,
                }
            };
            for w in merged.windows(2) {
                let (ca, cb) = (&w[0], &w[1]);
                if cb.t - ca.t <= 2.0 * eps_merge {
                    continue;
                }
                let mid = origin + dir * ((ca.t + cb.t) / 2.0);
                if !point_in_polygon(mid, &polygon) {
                    continue;
                }
                let d_own = mid.dist(sites[i]);
                let dominated = sites
                    .iter()
                    .enumerate()
                    .any(|(k, s)| k != i && k != j && mid.dist(*s) < d_own - eps_merge);
                if dominated {
                    continue;
                }
                raw_edges.push(RawEdge {
                    a: snap(ca),
                    b: snap(cb),
                    sites: (i, j),
                });
            }
        }
    }

    if raw_edges.is_empty() {
        return Err(Error::Extraction("no ridge edges found inside the polygon".into()));
    }

    // merge endpoints into vertices
    let mut centers: Vec<Point2> = Vec::new();
    let mut members: Vec<Vec<Point2>> = Vec::new();
    let assign = |p: Point2, centers: &mut Vec<Point2>, members: &mut Vec<Vec<Point2>>| -> usize {
        for (ci, c) in centers.iter().enumerate() {
            if c.dist(p) <= eps_merge {
                members[ci].push(p);
                return ci;
            }
        }
        centers.push(p);
        members.push(vec![p]);
        centers.len() - 1
    };
    let mut edges: Vec<RidgeEdge> = Vec::new();
    for re in &raw_edges {
        let ia = assign(re.a, &mut centers, &mut members);
        let ib = assign(re.b, &mut centers, &mut members);
        if ia == ib {
            continue;
        }
        edges.push(RidgeEdge {
            a: ia,
            b: ib,
            length: 0.0,
            sites: re.sites,
        });
    }
    let positions: Vec<Point2> = members
        .iter()
        .map(|m| {
            let mut s = Point2::ORIGIN;
            for p in m {
                s = s + *p;
            }
            s * (1.0 / m.len() as f64)
        })
        .collect();
    for e in &mut edges {
        e.length = positions[e.a].dist(positions[e.b]);
    }

    // duplicate edges between the same vertex pair signal a tolerance problem
    {
        let mut seen = std::collections::HashSet::new();
        for e in &edges {
            let key = (e.a.min(e.b), e.a.max(e.b));
            if !seen.insert(key) {
                return Err(Error::Extraction(format!(
                    "duplicate ridge edge between vertices {} and {}",
                    e.a, e.b
                )));
            }
        }
    }

    // tree check: connected with V = E + 1
    let nv = positions.len();
    if edges.len() + 1 != nv {
        return Err(Error::Extraction(format!(
            "ridge is not a tree: {} vertices, {} edges",
            nv,
            edges.len()
        )));
    }
    {
        let mut parent: Vec<usize> = (0..nv).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &edges {
            let (ra, rb) = (find(&mut parent, e.a), find(&mut parent, e.b));
            if ra == rb {
                return Err(Error::Extraction("ridge contains a cycle".into()));
            }
            parent[ra] = rb;
        }
    }

    // classification against the polygon corners
    let mut vertices = Vec::with_capacity(nv);
    let mut degrees = vec![0usize; nv];
    for e in &edges {
        degrees[e.a] += 1;
        degrees[e.b] += 1;
    }
    let mut root_vertex = None;
    for (vi, &pos) in positions.iter().enumerate() {
        let mut kind = RidgeVertexKind::Ramification;
        let mut on_boundary = false;
        for (bi, &r) in packing.boundary.iter().enumerate() {
            if polygon[bi].dist(pos) <= eps_merge {
                on_boundary = true;
                match r {
                    BoundaryRef::Root => {
                        kind = RidgeVertexKind::BoundaryRoot;
                        root_vertex = Some(vi);
                    }
                    BoundaryRef::Node(_) => kind = RidgeVertexKind::BoundaryLeaf,
                    BoundaryRef::XImage(_) => {
                        return Err(Error::Extraction(format!(
                            "ridge vertex coincides with site at boundary index {bi}"
                        )))
                    }
                }
                break;
            }
        }
        if !on_boundary && degrees[vi] < 3 {
            return Err(Error::Extraction(format!(
                "interior ridge vertex {vi} has degree {}",
                degrees[vi]
            )));
        }
        vertices.push(RidgeVertex { pos, kind });
    }
    if packing.wrap {
        let rp = packing.node_pos[packing.tree.root()];
        root_vertex = positions
            .iter()
            .position(|p| p.dist(rp) <= eps_merge);
    }

    // CCW embedding
    let mut embedding: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (ei, e) in edges.iter().enumerate() {
        embedding[e.a].push(ei);
        embedding[e.b].push(ei);
    }
    for (vi, inc) in embedding.iter_mut().enumerate() {
        inc.sort_by(|&x, &y| {
            let ox = edges[x].a + edges[x].b - vi;
            let oy = edges[y].a + edges[y].b - vi;
            let ax = (positions[ox] - positions[vi]).angle();
            let ay = (positions[oy] - positions[vi]).angle();
            ax.partial_cmp(&ay).unwrap()
        });
    }

    Ok(RidgeGraph {
        vertices,
        edges,
        embedding,
        root_vertex,
    })
}

// ---------------------------------------------------------------------------
// Tree matching
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct MatchReport {
    /// Ordered-weighted-tree isomorphism, up to a cyclic rotation at the
    /// root and a global reflection of the embedding.
    pub isomorphic: bool,
    /// Whether the match used the mirror orientation.
    pub reflected: bool,
    /// Largest relative discrepancy between ridge edge lengths and tree
    /// weights over the best structural correspondence (infinite when no
    /// structural correspondence exists).
    pub max_length_error: f64,
    /// ridge vertex index → tree node id, for the successful match.
    pub node_correspondence: Vec<(usize, NodeId)>,
}

fn other_end(e: &RidgeEdge, v: usize) -> usize {
    e.a + e.b - v
}

struct Matcher<'a> {
    ridge: &'a RidgeGraph,
    tree: &'a LengthTree,
    reflected: bool,
}

impl<'a> Matcher<'a> {
    /// Walk into `edge` from `from`, which must realize tree node `tn`.
    /// Returns false on structural mismatch; accumulates the worst relative
    /// length error and the correspondence.
    fn walk(
        &self,
        edge: usize,
        from: usize,
        tn: NodeId,
        max_err: &mut f64,
        corr: &mut Vec<(usize, NodeId)>,
    ) -> bool {
        let e = &self.ridge.edges[edge];
        let v = other_end(e, from);
        let w = self.tree.weight(tn);
        let err = (e.length - w).abs() / w;
        if err > *max_err {
            *max_err = err;
        }
        let children = &self.tree.node(tn).children;
        let inc = &self.ridge.embedding[v];
        if inc.len() != children.len() + 1 {
            return false;
        }
        let leaf_kind = matches!(
            self.ridge.vertices[v].kind,
            RidgeVertexKind::BoundaryLeaf | RidgeVertexKind::BoundaryRoot
        );
        if children.is_empty() != leaf_kind {
            return false;
        }
        corr.push((v, tn));
        if children.is_empty() {
            return true;
        }
        let deg = inc.len();
        let p = inc.iter().position(|&x| x == edge).unwrap();
        for (step, &child) in children.iter().enumerate() {
            let idx = if self.reflected {
                (p + deg - 1 - step) % deg
            } else {
                (p + 1 + step) % deg
            };
            if !self.walk(inc[idx], v, child, max_err, corr) {
                return false;
            }
        }
        true
    }
}

/// Compare the extracted ridge against the input tree as rooted embedded
/// weighted trees, allowing any rotation of the root cycle and a global
/// reflection. Lengths are compared relatively against `eps_match`.
pub fn match_tree(ridge: &RidgeGraph, tree: &LengthTree, eps_match: f64) -> MatchReport {
    let mismatch = |err: f64| MatchReport {
        isomorphic: false,
        reflected: false,
        max_length_error: err,
        node_correspondence: Vec::new(),
    };
    let Some(root_v) = ridge.root_vertex else {
        return mismatch(f64::INFINITY);
    };
    let root_children = &tree.node(tree.root()).children;
    let k = root_children.len();
    if ridge.embedding[root_v].len() != k {
        return mismatch(f64::INFINITY);
    }
    let mut best_err = f64::INFINITY;
    for reflected in [false, true] {
        for rot in 0..k {
            let m = Matcher { ridge, tree, reflected };
            let mut max_err = 0.0f64;
            let mut corr = vec![(root_v, tree.root())];
            let mut ok = true;
            for (step, &child) in root_children.iter().enumerate() {
                let idx = if reflected {
                    (rot + k - step) % k
                } else {
                    (rot + step) % k
                };
                if !m.walk(ridge.embedding[root_v][idx], root_v, child, &mut max_err, &mut corr) {
                    ok = false;
                    break;
                }
            }
            if ok {
                if max_err <= eps_match {
                    return MatchReport {
                        isomorphic: true,
                        reflected,
                        max_length_error: max_err,
                        node_correspondence: corr,
                    };
                }
                best_err = best_err.min(max_err);
            }
        }
    }
    mismatch(best_err)
}

// ---------------------------------------------------------------------------
// Bisector oracle
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OracleReport {
    pub pass: bool,
    /// Worst |d_left − d_right| over all sampled edge points (absolute).
    pub worst_equidistance: f64,
    /// Worst amount by which some other site undercuts the flanking
    /// distance (absolute; 0 when no site is closer).
    pub worst_domination: f64,
    /// Worst of both, relative to the local flank distance.
    pub worst_relative: f64,
    pub samples_per_edge: usize,
}

fn oracle_edge(packing: &Packing, e: usize, samples: usize) -> (f64, f64, f64) {
    let t0 = &packing.triangles[2 * e];
    let (i, j) = packing.edge_flanks(e);
    let (q, c) = (t0.corners[0], t0.corners[1]);
    let sites = &packing.x_images;
    let mut worst_eq = 0.0f64;
    let mut worst_dom = 0.0f64;
    let mut worst_rel = 0.0f64;
    for s in 0..samples {
        let t = s as f64 / (samples - 1) as f64;
        let p = q + (c - q) * t;
        let di = p.dist(sites[i]);
        let dj = p.dist(sites[j]);
        let eq = (di - dj).abs();
        let flank = di.min(dj);
        let mut dom = 0.0f64;
        for (k, sk) in sites.iter().enumerate() {
            if k == i || k == j {
                continue;
            }
            dom = dom.max(flank - p.dist(*sk));
        }
        worst_eq = worst_eq.max(eq);
        worst_dom = worst_dom.max(dom);
        worst_rel = worst_rel.max(eq.max(dom) / flank);
    }
    (worst_eq, worst_dom, worst_rel)
}

/// Sample points along every tree edge and check they are equidistant from
/// the edge's two flanking x-images and no farther from them than from any
/// other image.
pub fn bisector_oracle(packing: &Packing, samples_per_edge: usize) -> OracleReport {
    let samples = samples_per_edge.max(2);
    let m = packing.tree.edge_count();
    #[cfg(feature = "parallel")]
    let acc = (0..m)
        .into_par_iter()
        .map(|e| oracle_edge(packing, e, samples))
        .reduce(|| (0.0, 0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1), a.2.max(b.2)));
    #[cfg(not(feature = "parallel"))]
    let acc = (0..m)
        .map(|e| oracle_edge(packing, e, samples))
        .fold((0.0f64, 0.0f64, 0.0f64), |a, b| (a.0.max(b.0), a.1.max(b.1), a.2.max(b.2)));
    let eps = packing.config.tolerances.eps_len;
    OracleReport {
        pass: acc.2 <= eps,
        worst_equidistance: acc.0,
        worst_domination: acc.1,
        worst_relative: acc.2,
        samples_per_edge: samples,
    }
}

/// Sequential twin of [`bisector_oracle`]; kept callable for benchmarks.
pub fn bisector_oracle_seq(packing: &Packing, samples_per_edge: usize) -> OracleReport {
    let samples = samples_per_edge.max(2);
    let m = packing.tree.edge_count();
    let acc = (0..m)
        .map(|e| oracle_edge(packing, e, samples))
        .fold((0.0f64, 0.0f64, 0.0f64), |a, b| (a.0.max(b.0), a.1.max(b.1), a.2.max(b.2)));
    let eps = packing.config.tolerances.eps_len;
    OracleReport {
        pass: acc.2 <= eps,
        worst_equidistance: acc.0,
        worst_domination: acc.1,
        worst_relative: acc.2,
        samples_per_edge: samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packer::{build_packing, BuildConfig, Distribution, LambdaPolicy};
    use crate::samples;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn coincident_sites_rejected() {
        let square = vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 2.0),
            Point2::new(0.0, 2.0),
        ];
        let sites = [Point2::new(0.5, 1.0), Point2::new(0.5, 1.0)];
        let err = voronoi_cell(0, &sites, &square).unwrap_err();
        assert!(err.to_string().contains("coincident"));
    }

    #[test]
    fn two_sites_split_square() {
        let square = vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 2.0),
            Point2::new(0.0, 2.0),
        ];
        let sites = [Point2::new(0.5, 1.0), Point2::new(1.5, 1.0)];
        let c0 = voronoi_cell(0, &sites, &square).unwrap();
        let c1 = voronoi_cell(1, &sites, &square).unwrap();
        assert!((polygon_signed_area(&c0).abs() - 2.0).abs() < 1e-12);
        assert!((polygon_signed_area(&c1).abs() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_quad_cells_match_rasterization() {
        // m=2 symmetric packing: cells checked against brute-force
        // nearest-site rasterization on a grid
        let w = 1.0;
        let t = samples::star_tree(&[w, w]);
        let p = build_packing(
            &t,
            &BuildConfig {
                lambda: LambdaPolicy::Explicit(2.0 * w),
                ..Default::default()
            },
        )
        .unwrap();
        let polygon = p.boundary_points();
        let cells = voronoi_cells(&p.x_images, &polygon).unwrap();
        let n = 512;
        let (lo, hi) = (Point2::new(-2.2, -1.2), Point2::new(2.2, 1.2));
        let mut checked = 0usize;
        for gy in 0..n {
            for gx in 0..n {
                let pt = Point2::new(
                    lo.x + (hi.x - lo.x) * (gx as f64 + 0.5) / n as f64,
                    lo.y + (hi.y - lo.y) * (gy as f64 + 0.5) / n as f64,
                );
                if !point_in_polygon(pt, &polygon) {
                    continue;
                }
                let nearest = (0..p.x_images.len())
                    .min_by(|&a, &b| {
                        pt.dist2(p.x_images[a])
                            .partial_cmp(&pt.dist2(p.x_images[b]))
                            .unwrap()
                    })
                    .unwrap();
                // skip points within a half-pixel of the bisector
                let d0 = pt.dist(p.x_images[0]);
                let d1 = pt.dist(p.x_images[1]);
                if (d0 - d1).abs() < 2.0 * (hi.x - lo.x) / n as f64 {
                    continue;
                }
                assert!(
                    point_in_polygon(pt, &cells[nearest]),
                    "grid point {pt:?} missing from its cell"
                );
                checked += 1;
            }
        }
        assert!(checked > 10_000);
    }

    #[test]
    fn cells_tile_fig3() {
        let p = build_packing(
            &samples::fig3_tree(),
            &BuildConfig {
                alpha: 120f64.to_radians(),
                lambda: LambdaPolicy::Explicit(4.0),
                ..Default::default()
            },
        )
        .unwrap();
        let (sum, area) = cell_area_tiling(&p).unwrap();
        assert!((sum - area).abs() <= 1e-8 * area);
    }

    #[test]
    fn single_edge_ridge() {
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
        let r = extract_ridge(&p).unwrap();
        assert_eq!(r.vertices.len(), 2);
        assert_eq!(r.edges.len(), 1);
        assert!((r.edges[0].length - 5.0).abs() < 1e-9);
        let kinds: Vec<_> = r.vertices.iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&RidgeVertexKind::BoundaryRoot));
        assert!(kinds.contains(&RidgeVertexKind::BoundaryLeaf));
        let m = match_tree(&r, &t, 1e-6);
        assert!(m.isomorphic);
    }

    #[test]
    fn star_ridge_has_central_ramification() {
        let t = samples::fig3_tree();
        let p = build_packing(
            &t,
            &BuildConfig {
                lambda: LambdaPolicy::Explicit(4.0),
                ..Default::default()
            },
        )
        .unwrap();
        let r = extract_ridge(&p).unwrap();
        assert_eq!(r.edges.len(), 3);
        assert_eq!(r.vertices.len(), 4);
        let ram: Vec<_> = r
            .vertices
            .iter()
            .filter(|v| v.kind == RidgeVertexKind::Ramification)
            .collect();
        assert_eq!(ram.len(), 1);
        assert!(ram[0].pos.dist(Point2::ORIGIN) < 1e-9);
        let mut lens: Vec<f64> = r.edges.iter().map(|e| e.length).collect();
        lens.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in lens.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-9);
        }
        let m = match_tree(&r, &t, 1e-6);
        assert!(m.isomorphic);
        assert!(m.max_length_error < 1e-9);
    }

    #[test]
    fn ridge_positions_match_placements() {
        let t = samples::random_normalized_tree_with_leaves(5, 8, 0.5, 3.0);
        let p = build_packing(&t, &BuildConfig::default()).unwrap();
        let r = extract_ridge(&p).unwrap();
        let m = match_tree(&r, &t, 1e-6);
        assert!(m.isomorphic);
        let eps = p.config.tolerances.eps_merge_rel * p.scale();
        for &(rv, tn) in &m.node_correspondence {
            assert!(r.vertices[rv].pos.dist(p.node_pos[tn]) <= eps * 10.0);
        }
    }

    #[test]
    fn match_rejects_wrong_weights() {
        let p = build_packing(
            &samples::fig3_tree(),
            &BuildConfig {
                lambda: LambdaPolicy::Explicit(4.0),
                ..Default::default()
            },
        )
        .unwrap();
        let r = extract_ridge(&p).unwrap();
        let wrong = samples::star_tree(&[2.0, 3.0, 2.0]);
        let m = match_tree(&r, &wrong, 1e-6);
        assert!(!m.isomorphic);
        assert!(m.max_length_error > 0.1);
    }

    #[test]
    fn match_cyclic_order_and_reflection() {
        // a 5-leaf star with distinct weights: a reflection of the cyclic
        // order matches (mirrored), an arbitrary swap does not
        let t = samples::star_tree(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let p = build_packing(&t, &BuildConfig::default()).unwrap();
        let r = extract_ridge(&p).unwrap();

        let reflected = samples::star_tree(&[5.0, 4.0, 3.0, 2.0, 1.0]);
        let m = match_tree(&r, &reflected, 1e-6);
        assert!(m.isomorphic);
        assert!(m.reflected);

        let swapped = samples::star_tree(&[2.0, 1.0, 3.0, 4.0, 5.0]);
        let m2 = match_tree(&r, &swapped, 1e-6);
        assert!(!m2.isomorphic);

        // brute force: every rotation (and reflected rotation) that the
        // matcher accepts must be a genuine cyclic permutation
        let weights = [1.0, 2.0, 3.0, 4.0, 5.0];
        for rot in 0..5 {
            let rotated: Vec<f64> = (0..5).map(|i| weights[(i + rot) % 5]).collect();
            let mt = match_tree(&r, &samples::star_tree(&rotated), 1e-6);
            assert!(mt.isomorphic, "rotation {rot} must match");
        }
    }

    #[test]
    fn oracle_passes_on_valid_packing() {
        let p = build_packing(
            &samples::fig3_tree(),
            &BuildConfig {
                lambda: LambdaPolicy::Explicit(4.0),
                ..Default::default()
            },
        )
        .unwrap();
        let rep = bisector_oracle(&p, 16);
        assert!(rep.pass);
        assert!(rep.worst_relative < 1e-12);
        let rep_seq = bisector_oracle_seq(&p, 16);
        assert!(rep_seq.pass);
        assert_eq!(rep.worst_relative, rep_seq.worst_relative);
    }

    #[test]
    fn oracle_detects_displaced_node() {
        let mut p = build_packing(
            &samples::fig3_tree(),
            &BuildConfig {
                lambda: LambdaPolicy::Explicit(4.0),
                ..Default::default()
            },
        )
        .unwrap();
        let leaf = p.tree.node(p.tree.root()).children[0];
        p.node_pos[leaf] = p.node_pos[leaf] + Point2::new(0.0, 1e-3);
        for t in &mut p.triangles {
            t.corners = [
                p.node_pos[t.base_parent],
                p.node_pos[t.base_child],
                p.x_images[t.apex_image],
            ];
        }
        let rep = bisector_oracle(&p, 16);
        assert!(!rep.pass);
        assert!(rep.worst_equidistance > 1e-4 && rep.worst_equidistance < 1e-2);
    }

    #[test]
    fn symmetric_packing_oracle_exact() {
        let t = samples::star_tree(&[1.0, 1.0]);
        let p = build_packing(
            &t,
            &BuildConfig {
                lambda: LambdaPolicy::Explicit(2.0),
                ..Default::default()
            },
        )
        .unwrap();
        let rep = bisector_oracle(&p, 16);
        assert!(rep.pass);
        assert!(rep.worst_equidistance < 1e-14);
    }

    #[test]
    fn deep_tree_round_trip() {
        let t = samples::fig5_class_tree();
        for alpha in [TAU, 1.5 * PI, TAU / 3.0] {
            let p = build_packing(
                &t,
                &BuildConfig {
                    alpha,
                    lambda: LambdaPolicy::Explicit(5.0),
                    ..Default::default()
                },
            )
            .unwrap();
            let r = extract_ridge(&p).unwrap();
            let m = match_tree(&r, &t, 1e-6);
            assert!(m.isomorphic, "alpha {alpha}: ridge must realize the tree");
            assert!(!m.reflected);
        }
    }

    #[test]
    fn random_distribution_round_trip() {
        let t = samples::fig4_tree();
        let p = build_packing(
            &t,
            &BuildConfig {
                alpha: PI,
                lambda: LambdaPolicy::Explicit(5.0),
                distribution: Distribution::SeededRandom(7),
                ..Default::default()
            },
        )
        .unwrap();
        let r = extract_ridge(&p).unwrap();
        let m = match_tree(&r, &t, 1e-6);
        assert!(m.isomorphic);
    }
}
