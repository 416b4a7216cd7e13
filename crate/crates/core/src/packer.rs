//! Triangle-packing construction: place a star step at the root, then fill
//! each cup level by level with sub-stars. Produces the planar polygon whose
//! folding realizes the input tree as a cut locus.

use crate::error::{Error, Result};
use crate::geom::{angle_at, Point2};
use crate::tree::{LengthTree, NodeId};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::{PI, TAU};

/// Numeric tolerances used across validation and verification.
/// `eps_len` is relative on lengths, `eps_ang` absolute in radians,
/// `eps_merge_rel` is scaled by the root λ when coalescing ridge vertices,
/// `eps_match` is the relative length tolerance for tree matching.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub eps_len: f64,
    pub eps_ang: f64,
    pub eps_merge_rel: f64,
    pub eps_match: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps_len: 1e-9,
            eps_ang: 1e-9,
            eps_merge_rel: 1e-7,
            eps_match: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LambdaPolicy {
    /// Use the sufficient bound from [`lambda_min`].
    Auto,
    Explicit(f64),
}

/// Angular placement of the x-images inside each node's sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Distribution {
    /// Evenly spaced: sector angle α_q / k between consecutive rays.
    Equiangular,
    /// Interior directions drawn uniformly per node, sorted, with a minimum
    /// gap of 1e-3·α_q enforced by rejection. Deterministic under the seed.
    SeededRandom(u64),
    /// Per-node interior ray offsets (radians from the sector start ray),
    /// keyed by node label; must be strictly increasing inside (0, α_q).
    Explicit(BTreeMap<String, Vec<f64>>),
}

/// Free parameters of the construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    /// Cone apex angle at the root, radians, 0 < α ≤ 2π.
    pub alpha: f64,
    pub lambda: LambdaPolicy,
    pub distribution: Distribution,
    /// Bisector direction of the root cone (default 0).
    pub root_direction: f64,
    pub tolerances: Tolerances,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            alpha: TAU,
            lambda: LambdaPolicy::Auto,
            distribution: Distribution::Equiangular,
            root_direction: 0.0,
            tolerances: Tolerances::default(),
        }
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= TAU + 1e-12) {
            return Err(Error::Config(format!(
                "alpha must be in (0, 2π], got {}",
                self.alpha
            )));
        }
        if let LambdaPolicy::Explicit(v) = self.lambda {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::Config(format!("explicit lambda must be positive, got {v}")));
            }
        }
        if !self.root_direction.is_finite() {
            return Err(Error::Config("root_direction must be finite".into()));
        }
        Ok(())
    }

    pub fn is_wrap(&self) -> bool {
        self.alpha >= TAU - 1e-12
    }
}

/// The sufficient λ bound L·(1 + cot(π/m)) and its constituents.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LambdaBound {
    pub m: usize,
    /// L, the longest root-to-leaf path.
    pub longest_root_path: f64,
    /// ℓ, the longest single edge.
    pub max_edge: f64,
    /// D = L·cot(π/m), the diagonal target.
    pub diagonal_bound: f64,
    pub lambda_min: f64,
}

/// Sufficient λ so the total angle at the source stays ≤ 2π.
/// For m = 1 any λ > L works; we report L·(1 + 1e-9).
pub fn lambda_min(tree: &LengthTree) -> LambdaBound {
    let stats = tree.stats();
    let m = stats.m;
    let l = stats.longest_root_path;
    let (d, lm) = if m == 1 {
        let lm = l * (1.0 + 1e-9);
        (lm - l, lm)
    } else {
        let d = l / (PI / m as f64).tan();
        (d, l + d)
    };
    LambdaBound {
        m,
        longest_root_path: l,
        max_edge: tree.max_edge_weight(),
        diagonal_bound: d,
        lambda_min: lm,
    }
}

/// Geometry of one star step, before image ids are assigned.
#[derive(Debug, Clone)]
pub struct StarPlacement {
    /// k+1 x-image points, first and last on the cone boundary rays.
    /// For α = 2π the first and last coincide.
    pub x_points: Vec<Point2>,
    /// k child points on the sector bisectors at their edge weights.
    pub child_points: Vec<Point2>,
    /// Absolute ray angles of the x-images.
    pub ray_angles: Vec<f64>,
}

/// Evenly spaced ray offsets in [0, α].
pub fn equiangular_offsets(alpha: f64, k: usize) -> Vec<f64> {
    (0..=k).map(|j| alpha * j as f64 / k as f64).collect()
}

fn random_offsets(alpha: f64, k: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let min_gap = 1e-3 * alpha;
    for _ in 0..1000 {
        let mut interior: Vec<f64> = (0..k - 1).map(|_| rng.random_range(0.0..alpha)).collect();
        interior.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut offs = Vec::with_capacity(k + 1);
        offs.push(0.0);
        offs.extend(interior);
        offs.push(alpha);
        if offs.windows(2).all(|w| w[1] - w[0] >= min_gap) {
            return Ok(offs);
        }
    }
    Err(Error::Construction(format!(
        "could not place {k} rays with minimum gap {min_gap} in a sector of {alpha}"
    )))
}

/// Place one star: k+1 x-images at distance `lambda` from `apex` inside the
/// cone of angle `alpha` bisected by `direction`, and k child points on the
/// sector bisectors. `offsets` gives the ray offsets from the cone start
/// (k+1 increasing values from 0 to α); `None` means equiangular.
pub fn place_star(
    apex: Point2,
    direction: f64,
    alpha: f64,
    lambda: f64,
    child_weights: &[f64],
    offsets: Option<&[f64]>,
) -> Result<StarPlacement> {
    let k = child_weights.len();
    if k == 0 {
        return Err(Error::Construction("star step needs at least one child".into()));
    }
    if !(alpha > 0.0 && alpha <= TAU + 1e-12) {
        return Err(Error::Config(format!("cone angle out of range: {alpha}")));
    }
    let wrap = alpha >= TAU - 1e-12;
    if wrap && k == 1 {
        return Err(Error::Construction(
            "alpha = 2π with a single child is degenerate (the two x-images coincide)".into(),
        ));
    }
    for &w in child_weights {
        if w <= 0.0 || !w.is_finite() {
            return Err(Error::Config(format!("child weight must be positive, got {w}")));
        }
        if w > lambda {
            return Err(Error::Construction(format!(
                "λ not sufficiently large at node: weight {w} exceeds λ = {lambda}"
            )));
        }
    }
    let own_offsets;
    let offs = match offsets {
        Some(o) => o,
        None => {
            own_offsets = equiangular_offsets(alpha, k);
            &own_offsets
        }
    };
    if offs.len() != k + 1
        || offs[0] != 0.0
        || (offs[k] - alpha).abs() > 1e-12 * alpha.max(1.0)
        || offs.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::Config(
            "ray offsets must be strictly increasing from 0 to alpha with one ray per sector boundary".into(),
        ));
    }

    let start = direction - alpha / 2.0;
    let mut x_points = Vec::with_capacity(k + 1);
    let mut ray_angles = Vec::with_capacity(k + 1);
    for (j, &off) in offs.iter().enumerate() {
        let psi = start + off;
        ray_angles.push(psi);
        if wrap && j == k {
            x_points.push(x_points[0]);
        } else {
            x_points.push(apex + Point2::from_angle(psi) * lambda);
        }
    }
    let child_points = (0..k)
        .map(|j| {
            let psi = start + (offs[j] + offs[j + 1]) / 2.0;
            apex + Point2::from_angle(psi) * child_weights[j]
        })
        .collect();
    Ok(StarPlacement {
        x_points,
        child_points,
        ray_angles,
    })
}

/// A flat triangle of the packing: base = a tree edge, apex = an x-image.
/// These come in congruent pairs straddling each edge.
#[derive(Debug, Clone)]
pub struct FundamentalTriangle {
    pub base_parent: NodeId,
    pub base_child: NodeId,
    /// Index into the packing's x-image list.
    pub apex_image: usize,
    /// (parent, child, apex) corner positions.
    pub corners: [Point2; 3],
}

impl FundamentalTriangle {
    pub fn tip_angle(&self) -> f64 {
        angle_at(self.corners[2], self.corners[0], self.corners[1])
    }

    pub fn base_length(&self) -> f64 {
        self.corners[0].dist(self.corners[1])
    }

    pub fn area(&self) -> f64 {
        (self.corners[1] - self.corners[0])
            .cross(self.corners[2] - self.corners[0])
            .abs()
            / 2.0
    }
}

/// One entry of the boundary polygon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryRef {
    /// The root vertex; present only when α < 2π.
    Root,
    XImage(usize),
    Node(NodeId),
}

impl BoundaryRef {
    pub fn to_token(self) -> String {
        match self {
            BoundaryRef::Root => "u".into(),
            BoundaryRef::XImage(i) => format!("x{i}"),
            BoundaryRef::Node(n) => format!("n{n}"),
        }
    }

    pub fn from_token(s: &str) -> Result<Self> {
        if s == "u" {
            return Ok(BoundaryRef::Root);
        }
        if let Some(rest) = s.strip_prefix('x') {
            if let Ok(i) = rest.parse() {
                return Ok(BoundaryRef::XImage(i));
            }
        }
        if let Some(rest) = s.strip_prefix('n') {
            if let Ok(i) = rest.parse() {
                return Ok(BoundaryRef::Node(i));
            }
        }
        Err(Error::BadPacking(format!("bad boundary token {s:?}")))
    }
}

/// Cone parameters of the cup hanging at a non-root node.
#[derive(Debug, Clone, Copy)]
pub struct CupParams {
    /// External angle at the node: 2π − 2φ.
    pub alpha: f64,
    /// Distance from the node to its two flanking x-images.
    pub lambda: f64,
    /// Outward bisector direction (parent → node, extended).
    pub direction: f64,
}

/// The planar triangle packing realizing a tree.
#[derive(Debug, Clone)]
pub struct Packing {
    pub tree: LengthTree,
    pub config: BuildConfig,
    /// One fixed location per tree node; never moved after placement.
    pub node_pos: Vec<Point2>,
    /// Distinct x-image points (the wrap image stored once when α = 2π).
    pub x_images: Vec<Point2>,
    pub wrap: bool,
    /// Cyclic boundary: optional root, then x-images and leaves interleaved.
    pub boundary: Vec<BoundaryRef>,
    /// Exactly two per tree edge, stored pairwise in creation order.
    pub triangles: Vec<FundamentalTriangle>,
    /// λ_q per node: the root's λ, or the cup λ for non-root nodes.
    pub per_node_lambda: Vec<f64>,
    /// Available cone angle per node: α at the root, cup angle elsewhere.
    pub per_node_alpha: Vec<f64>,
    /// x-image ids created or reused by each node's star step (empty for leaves).
    pub images_at: Vec<Vec<usize>>,
    /// The root λ actually used.
    pub resolved_lambda: f64,
}

/// Total tip angle at the source and its per-image breakdown.
#[derive(Debug, Clone)]
pub struct ThetaReport {
    pub total: f64,
    /// Indexed by x-image id.
    pub per_image: Vec<f64>,
}

impl Packing {
    pub fn ref_point(&self, r: BoundaryRef) -> Point2 {
        match r {
            BoundaryRef::Root => self.node_pos[self.tree.root()],
            BoundaryRef::XImage(i) => self.x_images[i],
            BoundaryRef::Node(n) => self.node_pos[n],
        }
    }

    pub fn boundary_points(&self) -> Vec<Point2> {
        self.boundary.iter().map(|&r| self.ref_point(r)).collect()
    }

    /// Distinct x-image count: n_leaves + 1 when α < 2π, n_leaves otherwise.
    pub fn distinct_x_count(&self) -> usize {
        self.x_images.len()
    }

    /// Flanking x-image ids of the e-th tree edge (pair of apexes).
    pub fn edge_flanks(&self, e: usize) -> (usize, usize) {
        (
            self.triangles[2 * e].apex_image,
            self.triangles[2 * e + 1].apex_image,
        )
    }

    /// Characteristic length of the packing.
    pub fn scale(&self) -> f64 {
        self.resolved_lambda
    }

    pub fn theta_x(&self) -> ThetaReport {
        let mut per_image = vec![0.0; self.x_images.len()];
        let mut total = 0.0;
        for t in &self.triangles {
            let a = t.tip_angle();
            per_image[t.apex_image] += a;
            total += a;
        }
        ThetaReport { total, per_image }
    }

    /// Cup cone at a non-root node: external angle, λ = distance to the
    /// flanking x-images, and the outward direction.
    pub fn cup_params(&self, child: NodeId) -> Result<CupParams> {
        let node = self.tree.node(child);
        let parent = node
            .parent
            .ok_or_else(|| Error::Construction("cup_params: the root has no cup".into()))?;
        let dir = (self.node_pos[child] - self.node_pos[parent]).angle();
        let alpha = self.per_node_alpha[child];
        if alpha <= 0.0 {
            return Err(Error::Construction(format!(
                "cup angle at node {child} is not positive"
            )));
        }
        Ok(CupParams {
            alpha,
            lambda: self.per_node_lambda[child],
            direction: dir,
        })
    }
}

/// θ over all fundamental-triangle tips (the surface angle at the source).
pub fn theta_x(packing: &Packing) -> ThetaReport {
    packing.theta_x()
}

/// Full build pipeline from tree JSON text: parse, auto-label, optionally
/// reroot at a labeled node, normalize, then pack.
pub fn build_from_json(
    text: &str,
    config: &BuildConfig,
    reroot_label: Option<&str>,
) -> Result<Packing> {
    let tree = LengthTree::parse(text)?.with_auto_labels();
    let tree = match reroot_label {
        Some(label) => tree.reroot_by_label(label)?,
        None => tree,
    };
    let tree = tree.normalize();
    build_packing(&tree, config)
}

struct Builder<'t> {
    tree: &'t LengthTree,
    config: BuildConfig,
    rng: Option<ChaCha8Rng>,
    node_pos: Vec<Point2>,
    x_images: Vec<Point2>,
    triangles: Vec<FundamentalTriangle>,
    per_node_lambda: Vec<f64>,
    per_node_alpha: Vec<f64>,
    images_at: Vec<Vec<usize>>,
}

impl<'t> Builder<'t> {
    fn offsets_for(&mut self, node: NodeId, alpha: f64, k: usize) -> Result<Option<Vec<f64>>> {
        match &self.config.distribution {
            Distribution::Equiangular => Ok(None),
            Distribution::SeededRandom(_) => {
                if k == 1 {
                    return Ok(None);
                }
                let rng = self.rng.as_mut().expect("rng present for seeded distribution");
                random_offsets(alpha, k, rng).map(Some)
            }
            Distribution::Explicit(map) => {
                let label = self.tree.node(node).label.as_deref().ok_or_else(|| {
                    Error::Config(format!(
                        "explicit distribution requires labels; node {node} has none"
                    ))
                })?;
                let interior = map.get(label).ok_or_else(|| {
                    Error::Config(format!("explicit distribution has no entry for node \"{label}\""))
                })?;
                if interior.len() != k - 1 {
                    return Err(Error::Config(format!(
                        "node \"{label}\" needs {} interior rays, got {}",
                        k - 1,
                        interior.len()
                    )));
                }
                let mut offs = Vec::with_capacity(k + 1);
                offs.push(0.0);
                offs.extend(interior.iter().copied());
                offs.push(alpha);
                if offs.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config(format!(
                        "explicit rays for node \"{label}\" must be strictly increasing within (0, {alpha})"
                    )));
                }
                Ok(Some(offs))
            }
        }
    }

    /// Run one star step at `node`, reusing the cup's flanking image ids
    /// when present. Returns the image ids of the step.
    fn star_step(
        &mut self,
        node: NodeId,
        direction: f64,
        alpha: f64,
        lambda: f64,
        reuse: Option<(usize, usize)>,
    ) -> Result<Vec<usize>> {
        let children = self.tree.node(node).children.clone();
        let k = children.len();
        let weights: Vec<f64> = children.iter().map(|&c| self.tree.weight(c)).collect();
        let offsets = self.offsets_for(node, alpha, k)?;
        let apex = self.node_pos[node];
        let sp = place_star(apex, direction, alpha, lambda, &weights, offsets.as_deref())
            .map_err(|e| match e {
                Error::Construction(msg) => Error::Construction(format!("{msg} (node {node})")),
                other => other,
            })?;

        let wrap_here = reuse.is_none() && self.config.is_wrap();
        let mut ids = Vec::with_capacity(k + 1);
        for j in 0..=k {
            let id = if j == 0 {
                match reuse {
                    Some((left, _)) => left,
                    None => {
                        self.x_images.push(sp.x_points[0]);
                        self.x_images.len() - 1
                    }
                }
            } else if j == k {
                match reuse {
                    Some((_, right)) => right,
                    None if wrap_here => ids[0],
                    None => {
                        self.x_images.push(sp.x_points[k]);
                        self.x_images.len() - 1
                    }
                }
            } else {
                self.x_images.push(sp.x_points[j]);
                self.x_images.len() - 1
            };
            ids.push(id);
        }

        for (j, &c) in children.iter().enumerate() {
            let cpos = sp.child_points[j];
            self.node_pos[c] = cpos;
            let (xl, xr) = (self.x_images[ids[j]], self.x_images[ids[j + 1]]);
            self.triangles.push(FundamentalTriangle {
                base_parent: node,
                base_child: c,
                apex_image: ids[j],
                corners: [apex, cpos, xl],
            });
            self.triangles.push(FundamentalTriangle {
                base_parent: node,
                base_child: c,
                apex_image: ids[j + 1],
                corners: [apex, cpos, xr],
            });
            // cup parameters of the child, fixed now and never revised
            let phi_l = angle_at(cpos, apex, xl);
            let phi_r = angle_at(cpos, apex, xr);
            self.per_node_alpha[c] = TAU - phi_l - phi_r;
            self.per_node_lambda[c] = (cpos.dist(xl) + cpos.dist(xr)) / 2.0;
        }
        self.images_at[node] = ids.clone();
        Ok(ids)
    }
}

/// Build the full packing for a rooted tree.
///
/// The recursion is level by level: the root star first, then every internal
/// child's cup is filled with a sub-star whose first/last x-images are the
/// cup's flanking images. Previously placed points never move.
pub fn build_packing(tree: &LengthTree, config: &BuildConfig) -> Result<Packing> {
    config.validate()?;
    if tree.edge_count() < 1 {
        return Err(Error::Construction("tree has no edges".into()));
    }
    let lambda_root = match config.lambda {
        LambdaPolicy::Auto => lambda_min(tree).lambda_min,
        LambdaPolicy::Explicit(v) => v,
    };
    let n = tree.node_count();
    let mut b = Builder {
        tree,
        config: config.clone(),
        rng: match config.distribution {
            Distribution::SeededRandom(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        },
        node_pos: vec![Point2::ORIGIN; n],
        x_images: Vec::new(),
        triangles: Vec::with_capacity(2 * tree.edge_count()),
        per_node_lambda: vec![0.0; n],
        per_node_alpha: vec![0.0; n],
        images_at: vec![Vec::new(); n],
    };
    let root = tree.root();
    b.per_node_lambda[root] = lambda_root;
    b.per_node_alpha[root] = config.alpha;

    let root_ids = b.star_step(root, config.root_direction, config.alpha, lambda_root, None)?;

    let mut queue: VecDeque<NodeId> = tree.node(root).children.iter().copied().collect();
    while let Some(node) = queue.pop_front() {
        if tree.is_leaf(node) {
            continue;
        }
        let parent = tree.node(node).parent.unwrap();
        let slot = tree
            .node(parent)
            .children
            .iter()
            .position(|&c| c == node)
            .unwrap();
        let (left, right) = (b.images_at[parent][slot], b.images_at[parent][slot + 1]);
        let dir = (b.node_pos[node] - b.node_pos[parent]).angle();
        let alpha = b.per_node_alpha[node];
        let lambda = b.per_node_lambda[node];
        if alpha <= 0.0 {
            return Err(Error::Construction(format!(
                "cup angle at node {node} is not positive"
            )));
        }
        b.star_step(node, dir, alpha, lambda, Some((left, right)))?;
        for &c in &tree.node(node).children {
            queue.push_back(c);
        }
    }

    // boundary assembly: recursive walk interleaving leaves and x-images
    fn walk(tree: &LengthTree, images_at: &[Vec<usize>], node: NodeId, out: &mut Vec<BoundaryRef>) {
        if tree.is_leaf(node) {
            out.push(BoundaryRef::Node(node));
            return;
        }
        let ids = &images_at[node];
        let children = &tree.node(node).children;
        for (j, &c) in children.iter().enumerate() {
            walk(tree, images_at, c, out);
            if j + 1 < children.len() {
                out.push(BoundaryRef::XImage(ids[j + 1]));
            }
        }
    }
    let wrap = config.is_wrap();
    let mut boundary = Vec::new();
    if !wrap {
        boundary.push(BoundaryRef::Root);
    }
    boundary.push(BoundaryRef::XImage(root_ids[0]));
    let children = &tree.node(root).children;
    for (j, &c) in children.iter().enumerate() {
        walk(tree, &b.images_at, c, &mut boundary);
        if j + 1 < children.len() {
            boundary.push(BoundaryRef::XImage(root_ids[j + 1]));
        } else if !wrap {
            boundary.push(BoundaryRef::XImage(*root_ids.last().unwrap()));
        }
    }

    let packing = Packing {
        tree: tree.clone(),
        config: config.clone(),
        node_pos: b.node_pos,
        x_images: b.x_images,
        wrap,
        boundary,
        triangles: b.triangles,
        per_node_lambda: b.per_node_lambda,
        per_node_alpha: b.per_node_alpha,
        images_at: b.images_at,
        resolved_lambda: lambda_root,
    };
    debug_assert_eq!(
        packing.distinct_x_count(),
        packing.tree.leaf_count() + usize::from(!packing.wrap)
    );
    debug_assert_eq!(packing.triangles.len(), 2 * tree.edge_count());
    Ok(packing)
}

// ---------------------------------------------------------------------------
// JSON document form
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct NodeDoc {
    id: usize,
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
struct PointDoc {
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
struct TriDoc {
    parent: usize,
    child: usize,
    apex: usize,
}

#[derive(Serialize, Deserialize)]
struct ConfigDoc {
    alpha: f64,
    lambda: f64,
    lambda_policy: String,
    distribution: Distribution,
    root_direction: f64,
    tolerances: Tolerances,
}

#[derive(Serialize)]
struct PackingDocSer<'a> {
    tree: crate::tree::NestedTree<'a>,
    config: ConfigDoc,
    nodes: Vec<NodeDoc>,
    x_images: Vec<PointDoc>,
    boundary: Vec<String>,
    triangles: Vec<TriDoc>,
    theta_x: f64,
}

#[derive(Deserialize)]
struct PackingDoc {
    tree: serde_json::Value,
    config: ConfigDoc,
    nodes: Vec<NodeDoc>,
    x_images: Vec<PointDoc>,
    boundary: Vec<String>,
    triangles: Vec<TriDoc>,
    theta_x: f64,
}

impl Packing {
    /// Serialize. Node ids are remapped to the tree's preorder so the nested
    /// tree JSON and the flat node list agree on reload regardless of how
    /// the in-memory tree was built.
    pub fn to_json_string(&self) -> String {
        let order = self.tree.preorder();
        let mut to_new = vec![usize::MAX; self.tree.node_count()];
        for (new, &old) in order.iter().enumerate() {
            to_new[old] = new;
        }
        let doc = PackingDocSer {
            tree: crate::tree::NestedTree {
                tree: &self.tree,
                id: self.tree.root(),
            },
            config: ConfigDoc {
                alpha: self.config.alpha,
                lambda: self.resolved_lambda,
                lambda_policy: match self.config.lambda {
                    LambdaPolicy::Auto => "auto".into(),
                    LambdaPolicy::Explicit(_) => "explicit".into(),
                },
                distribution: self.config.distribution.clone(),
                root_direction: self.config.root_direction,
                tolerances: self.config.tolerances,
            },
            nodes: order
                .iter()
                .enumerate()
                .map(|(new, &old)| NodeDoc {
                    id: new,
                    x: self.node_pos[old].x,
                    y: self.node_pos[old].y,
                })
                .collect(),
            x_images: self.x_images.iter().map(|p| PointDoc { x: p.x, y: p.y }).collect(),
            boundary: self
                .boundary
                .iter()
                .map(|r| match r {
                    BoundaryRef::Node(n) => BoundaryRef::Node(to_new[*n]).to_token(),
                    other => other.to_token(),
                })
                .collect(),
            triangles: self
                .triangles
                .iter()
                .map(|t| TriDoc {
                    parent: to_new[t.base_parent],
                    child: to_new[t.base_child],
                    apex: t.apex_image,
                })
                .collect(),
            theta_x: self.theta_x().total,
        };
        serde_json::to_string(&doc).expect("packing serialization cannot fail")
    }

    pub fn from_json_str(text: &str) -> Result<Packing> {
        let doc: PackingDoc = serde_json::from_str(text)?;
        let tree = LengthTree::parse(&doc.tree.to_string())?;
        let n = tree.node_count();
        if doc.nodes.len() != n {
            return Err(Error::BadPacking(format!(
                "node list has {} entries for a tree of {} nodes",
                doc.nodes.len(),
                n
            )));
        }
        for (i, nd) in doc.nodes.iter().enumerate() {
            if nd.id != i {
                return Err(Error::BadPacking("node ids must be 0..n in order".into()));
            }
        }
        if doc.triangles.len() != 2 * tree.edge_count() {
            return Err(Error::BadPacking(format!(
                "expected {} triangles, got {}",
                2 * tree.edge_count(),
                doc.triangles.len()
            )));
        }
        let node_pos: Vec<Point2> = doc.nodes.iter().map(|d| Point2::new(d.x, d.y)).collect();
        let x_images: Vec<Point2> = doc.x_images.iter().map(|d| Point2::new(d.x, d.y)).collect();
        let config = BuildConfig {
            alpha: doc.config.alpha,
            lambda: match doc.config.lambda_policy.as_str() {
                "auto" => LambdaPolicy::Auto,
                _ => LambdaPolicy::Explicit(doc.config.lambda),
            },
            distribution: doc.config.distribution,
            root_direction: doc.config.root_direction,
            tolerances: doc.config.tolerances,
        };
        config.validate()?;
        let mut triangles = Vec::with_capacity(doc.triangles.len());
        for t in &doc.triangles {
            if t.parent >= n || t.child >= n || t.apex >= x_images.len() {
                return Err(Error::BadPacking("triangle index out of range".into()));
            }
            triangles.push(FundamentalTriangle {
                base_parent: t.parent,
                base_child: t.child,
                apex_image: t.apex,
                corners: [node_pos[t.parent], node_pos[t.child], x_images[t.apex]],
            });
        }
        let mut boundary = Vec::with_capacity(doc.boundary.len());
        for tok in &doc.boundary {
            let r = BoundaryRef::from_token(tok)?;
            match r {
                BoundaryRef::XImage(i) if i >= x_images.len() => {
                    return Err(Error::BadPacking(format!("boundary x-image {i} out of range")))
                }
                BoundaryRef::Node(i) if i >= n => {
                    return Err(Error::BadPacking(format!("boundary node {i} out of range")))
                }
                _ => boundary.push(r),
            }
        }

        // reconstruct per-step image lists from the pairwise triangle order
        let mut images_at: Vec<Vec<usize>> = vec![Vec::new(); n];
        for pair in triangles.chunks(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.base_parent != b.base_parent || a.base_child != b.base_child {
                return Err(Error::BadPacking("triangles are not paired per edge".into()));
            }
            let q = a.base_parent;
            if images_at[q].is_empty() {
                images_at[q].push(a.apex_image);
            }
            images_at[q].push(b.apex_image);
        }

        let resolved_lambda = doc.config.lambda;
        if resolved_lambda <= 0.0 || !resolved_lambda.is_finite() {
            return Err(Error::BadPacking(format!(
                "stored lambda must be positive, got {resolved_lambda}"
            )));
        }
        let mut per_node_lambda = vec![0.0; n];
        let mut per_node_alpha = vec![0.0; n];
        per_node_lambda[tree.root()] = resolved_lambda;
        per_node_alpha[tree.root()] = config.alpha;
        for (e, pair) in triangles.chunks(2).enumerate() {
            let _ = e;
            let c = pair[0].base_child;
            let cpos = node_pos[c];
            let qpos = node_pos[pair[0].base_parent];
            let xl = x_images[pair[0].apex_image];
            let xr = x_images[pair[1].apex_image];
            per_node_lambda[c] = (cpos.dist(xl) + cpos.dist(xr)) / 2.0;
            per_node_alpha[c] = TAU - angle_at(cpos, qpos, xl) - angle_at(cpos, qpos, xr);
        }

        // the stored theta_x is advisory metadata; verification recomputes
        // it from the geometry, so corrupted coordinates surface as
        // validation failures rather than load errors
        if !doc.theta_x.is_finite() {
            return Err(Error::BadPacking("stored theta_x must be finite".into()));
        }
        Ok(Packing {
            wrap: config.is_wrap(),
            tree,
            config,
            node_pos,
            x_images,
            boundary,
            triangles,
            per_node_lambda,
            per_node_alpha,
            images_at,
            resolved_lambda,
        })
    }
}
