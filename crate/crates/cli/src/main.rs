//! starpack CLI: build triangle packings from length-tree files, validate
//! and verify them, print the sufficient λ bound, render SVG figures, and
//! emit bundled demo instances.
//!
//! Exit codes: 0 ok, 1 validation/construction failure, 2 input error,
//! 3 verification mismatch.

use clap::{Parser, Subcommand, ValueEnum};
use starpack::error::Error;
use starpack::packer::{
    build_packing, lambda_min, BuildConfig, Distribution, LambdaPolicy, Packing, Tolerances,
};
use starpack::render::{render_svg, RenderStyle};
use starpack::ridge::{bisector_oracle, extract_ridge, match_tree};
use starpack::tree::LengthTree;
use starpack::validator::{validate, ValidationReport};
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

#[derive(Parser)]
#[command(name = "starpack", version, about = "Star-unfolding triangle packings that realize weighted trees as cut loci")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a packing from a length-tree JSON file.
    Build {
        /// Tree file: nested {"label"?, "weight", "children"?} JSON.
        tree: PathBuf,
        /// Cone apex angle at the root, degrees (0 < α ≤ 360).
        #[arg(long, default_value_t = 360.0)]
        alpha: f64,
        /// "auto" (sufficient bound) or an explicit value.
        #[arg(long, default_value = "auto")]
        lambda: String,
        /// equiangular | random:SEED | explicit:FILE
        #[arg(long, default_value = "equiangular")]
        dist: String,
        /// Reroot at the node carrying this label before building.
        #[arg(long)]
        root: Option<String>,
        /// Root cone bisector direction, degrees.
        #[arg(long, default_value_t = 0.0)]
        direction: f64,
        #[arg(long, default_value = "packing.json")]
        out: PathBuf,
    },
    /// Validate a packing and verify the realized cut locus.
    Verify {
        packing: PathBuf,
        #[arg(long, value_enum, default_value_t = VerifyMode::Both)]
        mode: VerifyMode,
        /// Sample points per edge for the bisector oracle.
        #[arg(long, default_value_t = 16)]
        samples: usize,
        /// Print machine-readable JSON reports after the summary.
        #[arg(long)]
        json: bool,
    },
    /// Print the sufficient λ bound for a tree.
    Bound { tree: PathBuf },
    /// Render a packing to SVG.
    Render {
        packing: PathBuf,
        #[arg(long)]
        svg: PathBuf,
        /// Overlay the extracted restricted-Voronoi ridge.
        #[arg(long)]
        overlay_ridge: bool,
        /// Draw node labels.
        #[arg(long)]
        labels: bool,
    },
    /// Write a bundled demo instance: tree, packing, and SVG.
    Demo {
        /// fig3 | fig4a | fig4b | fig4c | fig5-class | fig6-class
        figure: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyMode {
    Voronoi,
    Oracle,
    Both,
}

fn main() -> ExitCode {
    ExitCode::from(run())
}

fn run() -> u8 {
    match Cli::parse().cmd {
        Cmd::Build {
            tree,
            alpha,
            lambda,
            dist,
            root,
            direction,
            out,
        } => cmd_build(&tree, alpha, &lambda, &dist, root.as_deref(), direction, &out),
        Cmd::Verify {
            packing,
            mode,
            samples,
            json,
        } => cmd_verify(&packing, mode, samples, json),
        Cmd::Bound { tree } => cmd_bound(&tree),
        Cmd::Render {
            packing,
            svg,
            overlay_ridge,
            labels,
        } => cmd_render(&packing, &svg, overlay_ridge, labels),
        Cmd::Demo { figure, out_dir } => cmd_demo(&figure, &out_dir),
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    code
}

fn env_tolerances(mut t: Tolerances) -> Tolerances {
    let read = |name: &str, v: &mut f64| {
        if let Ok(s) = std::env::var(name) {
            if let Ok(x) = s.parse::<f64>() {
                if x > 0.0 {
                    *v = x;
                }
            }
        }
    };
    read("STARPACK_EPS_LEN", &mut t.eps_len);
    read("STARPACK_EPS_ANG", &mut t.eps_ang);
    read("STARPACK_EPS_MERGE_REL", &mut t.eps_merge_rel);
    read("STARPACK_EPS_MATCH", &mut t.eps_match);
    t
}

fn load_tree(path: &Path) -> Result<LengthTree, u8> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(EXIT_INPUT, format_args!("cannot read {}: {e}", path.display())))?;
    LengthTree::parse(&text).map_err(|e| fail(EXIT_INPUT, e))
}

fn parse_dist(value: &str) -> Result<Distribution, u8> {
    if value == "equiangular" {
        return Ok(Distribution::Equiangular);
    }
    if let Some(seed) = value.strip_prefix("random:") {
        let seed: u64 = seed
            .parse()
            .map_err(|_| fail(EXIT_INPUT, format_args!("bad random seed in --dist {value}")))?;
        return Ok(Distribution::SeededRandom(seed));
    }
    if let Some(file) = value.strip_prefix("explicit:") {
        let text = std::fs::read_to_string(file)
            .map_err(|e| fail(EXIT_INPUT, format_args!("cannot read {file}: {e}")))?;
        let deg: BTreeMap<String, Vec<f64>> = serde_json::from_str(&text)
            .map_err(|e| fail(EXIT_INPUT, format_args!("bad explicit-distribution file: {e}")))?;
        let rad = deg
            .into_iter()
            .map(|(k, v)| (k, v.into_iter().map(f64::to_radians).collect()))
            .collect();
        return Ok(Distribution::Explicit(rad));
    }
    Err(fail(
        EXIT_INPUT,
        format_args!("--dist must be equiangular, random:SEED, or explicit:FILE, got {value}"),
    ))
}

fn build_pipeline(
    tree_text: &str,
    alpha_deg: f64,
    lambda: &str,
    dist: &Distribution,
    root: Option<&str>,
    direction_deg: f64,
) -> Result<Packing, Error> {
    let lambda = match lambda {
        "auto" => LambdaPolicy::Auto,
        v => LambdaPolicy::Explicit(v.parse::<f64>().map_err(|_| {
            Error::Config(format!("--lambda must be \"auto\" or a number, got {v}"))
        })?),
    };
    let config = BuildConfig {
        alpha: alpha_deg.to_radians(),
        lambda,
        distribution: dist.clone(),
        root_direction: direction_deg.to_radians(),
        tolerances: env_tolerances(Tolerances::default()),
    };
    starpack::packer::build_from_json(tree_text, &config, root)
}

fn cmd_build(
    tree_path: &Path,
    alpha: f64,
    lambda: &str,
    dist: &str,
    root: Option<&str>,
    direction: f64,
    out: &Path,
) -> u8 {
    let text = match std::fs::read_to_string(tree_path) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_INPUT, format_args!("cannot read {}: {e}", tree_path.display())),
    };
    let dist = match parse_dist(dist) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let packing = match build_pipeline(&text, alpha, lambda, &dist, root, direction) {
        Ok(p) => p,
        Err(e @ (Error::Parse { .. } | Error::Json(_) | Error::UnknownNode(_) | Error::Config(_))) => {
            return fail(EXIT_INPUT, e)
        }
        Err(e) => return fail(EXIT_FAIL, e),
    };
    if let Err(e) = std::fs::write(out, packing.to_json_string()) {
        return fail(EXIT_FAIL, format_args!("cannot write {}: {e}", out.display()));
    }
    let th = packing.theta_x().total;
    println!(
        "built packing: {} nodes, {} x-images, {} triangles, lambda = {:.6}, theta_x = {:.4}°",
        packing.node_pos.len(),
        packing.distinct_x_count(),
        packing.triangles.len(),
        packing.resolved_lambda,
        th.to_degrees()
    );
    println!("wrote {}", out.display());
    EXIT_OK
}

fn print_validation(r: &ValidationReport) {
    let pf = |ok: bool| if ok { "PASS" } else { "FAIL" };
    println!("validation:");
    println!("  simple polygon ............. {}", pf(r.simple_polygon));
    if let Some((i, j)) = r.first_crossing {
        println!("    first crossing: boundary segments {i} and {j}");
    }
    println!(
        "  perimeter gluing ........... {} (max residual {:.3e})",
        pf(r.glue_ok),
        r.max_glue_residual
    );
    println!(
        "  theta_x .................... {} ({:.4}° ≤ 360°)",
        pf(r.theta_x_ok),
        r.theta_x.to_degrees()
    );
    println!(
        "  2π coverage (internal) ..... {} (max defect {:.3e})",
        pf(r.coverage_ok),
        r.max_coverage_defect
    );
    println!("  cups V-shaped (internal) ... {}", pf(r.internal_cups_ok));
    let worst = r
        .worst_cup
        .map(|(n, a)| format!("worst {:.2}° at node {n}", a.to_degrees()))
        .unwrap_or_default();
    println!(
        "  cups incl. leaf notches .... {} ({worst})",
        if r.cups_ok { "PASS" } else { "WARN" }
    );
    println!(
        "  gauss-bonnet sum ........... {:.12} rad (target 4π = {:.12})",
        r.gauss_bonnet_sum,
        2.0 * TAU
    );
    println!(
        "  predicted vertices ......... {} (= {} leaves + {} source + {} root)",
        r.predicted_vertices,
        r.n_leaves,
        usize::from(r.theta_x < TAU - 1e-9),
        usize::from(r.alpha < TAU - 1e-9)
    );
}

fn cmd_verify(path: &Path, mode: VerifyMode, samples: usize, json: bool) -> u8 {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_INPUT, format_args!("cannot read {}: {e}", path.display())),
    };
    let mut packing = match Packing::from_json_str(&text) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    packing.config.tolerances = env_tolerances(packing.config.tolerances);

    let report = validate(&packing);
    print_validation(&report);
    if json {
        println!("{}", serde_json::to_string(&report).unwrap());
    }
    if !report.gate_ok() {
        eprintln!("validation failed");
        return EXIT_FAIL;
    }

    let mut ok = true;
    if mode == VerifyMode::Voronoi || mode == VerifyMode::Both {
        match extract_ridge(&packing) {
            Ok(ridge) => {
                let m = match_tree(&ridge, &packing.tree, packing.config.tolerances.eps_match);
                println!(
                    "ridge: {} vertices, {} edges; match: {} (orientation {}), max length error {:.3e}",
                    ridge.vertices.len(),
                    ridge.edges.len(),
                    if m.isomorphic { "isomorphic" } else { "MISMATCH" },
                    if m.reflected { "mirrored" } else { "direct" },
                    m.max_length_error
                );
                if json {
                    println!("{}", serde_json::to_string(&ridge).unwrap());
                    println!("{}", serde_json::to_string(&m).unwrap());
                }
                ok &= m.isomorphic;
            }
            Err(e) => {
                println!("ridge extraction: FAILED ({e})");
                ok = false;
            }
        }
    }
    if mode == VerifyMode::Oracle || mode == VerifyMode::Both {
        let rep = bisector_oracle(&packing, samples);
        println!(
            "oracle: {} (worst relative residual {:.3e}, {} samples/edge)",
            if rep.pass { "pass" } else { "FAIL" },
            rep.worst_relative,
            rep.samples_per_edge
        );
        if json {
            println!("{}", serde_json::to_string(&rep).unwrap());
        }
        ok &= rep.pass;
    }
    if ok {
        println!("verification: OK");
        EXIT_OK
    } else {
        eprintln!("verification mismatch");
        EXIT_MISMATCH
    }
}

fn cmd_bound(path: &Path) -> u8 {
    let tree = match load_tree(path) {
        Ok(t) => t.normalize(),
        Err(code) => return code,
    };
    let b = lambda_min(&tree);
    println!("m (edges) .......... {}", b.m);
    println!("L (longest path) ... {:.6}", b.longest_root_path);
    println!("max edge ........... {:.6}", b.max_edge);
    if b.m == 1 {
        println!("lambda_min ......... any λ > L suffices (reported {:.9})", b.lambda_min);
    } else {
        println!("D = L·cot(π/m) ..... {:.6}", b.diagonal_bound);
        println!("lambda_min ......... {:.6}", b.lambda_min);
        println!("suggested integer .. {}", b.lambda_min.ceil() as i64);
    }
    EXIT_OK
}

fn cmd_render(path: &Path, svg_path: &Path, overlay: bool, labels: bool) -> u8 {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_INPUT, format_args!("cannot read {}: {e}", path.display())),
    };
    let packing = match Packing::from_json_str(&text) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let ridge = if overlay {
        match extract_ridge(&packing) {
            Ok(r) => Some(r),
            Err(e) => return fail(EXIT_MISMATCH, format_args!("ridge overlay unavailable: {e}")),
        }
    } else {
        None
    };
    let style = RenderStyle {
        show_labels: labels,
        ..Default::default()
    };
    let svg = render_svg(&packing, ridge.as_ref(), &style);
    if let Err(e) = std::fs::write(svg_path, svg) {
        return fail(EXIT_FAIL, format_args!("cannot write {}: {e}", svg_path.display()));
    }
    println!(
        "rendered {} (theta_x = {:.4}°)",
        svg_path.display(),
        packing.theta_x().total.to_degrees()
    );
    EXIT_OK
}

fn cmd_demo(figure: &str, out_dir: &Path) -> u8 {
    use starpack::samples;
    let (tree, alpha_deg, lambda, dist, note): (LengthTree, f64, f64, Distribution, &str) =
        match figure {
            "fig3" => (
                samples::fig3_tree(),
                120.0,
                4.0,
                Distribution::Equiangular,
                "3-star (2,3,1) in a 120° cone, λ = 4",
            ),
            "fig4a" => (
                samples::fig4_tree(),
                270.0,
                6.0,
                Distribution::Equiangular,
                "5-star (3,1,4,2,1), α = 270°, equiangular, λ = 6",
            ),
            "fig4b" => (
                samples::fig4_tree(),
                180.0,
                5.0,
                Distribution::SeededRandom(7),
                "5-star (3,1,4,2,1), α = 180°, random rays (seed 7), λ = 5",
            ),
            "fig4c" => (
                samples::fig4_tree(),
                360.0,
                6.0,
                Distribution::Equiangular,
                "5-star (3,1,4,2,1), α = 360°, equiangular, λ = 6",
            ),
            "fig5-class" => (
                samples::fig5_class_tree(),
                360.0,
                5.0,
                Distribution::Equiangular,
                "height-3 tree, 8 leaves, 13 edges, L = 5, λ = L (fixed instance of the class)",
            ),
            "fig6-class" => (
                samples::fig6_class_tree(1),
                360.0,
                f64::NAN, // resolved below from the tree
                Distribution::Equiangular,
                "regular degree-3 tree, 48 leaves, seeded random lengths (fixed seed 1)",
            ),
            other => return fail(EXIT_INPUT, format_args!("unknown demo figure {other:?}")),
        };
    let lambda = if lambda.is_nan() {
        // fig6 class: λ = 1.5·L keeps θ_x under 2π while staying in the
        // fractal-looking small-λ regime
        tree.stats().longest_root_path * 1.5
    } else {
        lambda
    };

    if let Err(e) = std::fs::create_dir_all(out_dir) {
        return fail(EXIT_FAIL, format_args!("cannot create {}: {e}", out_dir.display()));
    }
    let tree = tree.with_auto_labels();
    let config = BuildConfig {
        alpha: alpha_deg.to_radians(),
        lambda: LambdaPolicy::Explicit(lambda),
        distribution: dist,
        root_direction: 0.0,
        tolerances: env_tolerances(Tolerances::default()),
    };
    let packing = match build_packing(&tree, &config) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_FAIL, e),
    };
    let stem = figure.replace('-', "_");
    let tree_path = out_dir.join(format!("{stem}.tree.json"));
    let packing_path = out_dir.join(format!("{stem}.packing.json"));
    let svg_path = out_dir.join(format!("{stem}.svg"));
    let ridge = extract_ridge(&packing).ok();
    let svg = render_svg(&packing, ridge.as_ref(), &RenderStyle::default());
    for (p, content) in [
        (&tree_path, tree.to_json_string()),
        (&packing_path, packing.to_json_string()),
        (&svg_path, svg),
    ] {
        if let Err(e) = std::fs::write(p, content) {
            return fail(EXIT_FAIL, format_args!("cannot write {}: {e}", p.display()));
        }
    }
    println!("{figure}: {note}");
    println!(
        "theta_x = {:.4}° (lambda = {:.4}); instances of this class vary with the seed",
        packing.theta_x().total.to_degrees(),
        packing.resolved_lambda
    );
    println!(
        "wrote {}, {}, {}",
        tree_path.display(),
        packing_path.display(),
        svg_path.display()
    );
    EXIT_OK
}
