//! Deterministic SVG emitter: boundary in black, tree edges in red,
//! x-images in green, optional extracted-ridge overlay. Element order and
//! number formatting are fixed so identical inputs give identical bytes.

use crate::packer::Packing;
use crate::ridge::RidgeGraph;
use std::fmt::Write;

#[derive(Debug, Clone)]
pub struct RenderStyle {
    pub stroke_boundary: f64,
    pub stroke_tree: f64,
    pub color_boundary: String,
    pub color_tree: String,
    pub color_images: String,
    pub color_ridge: String,
    pub show_labels: bool,
    /// World-units margin around the drawing.
    pub margin: f64,
    /// Multiplier on the auto-fit scale.
    pub scale: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle {
            stroke_boundary: 1.6,
            stroke_tree: 1.6,
            color_boundary: "#111111".into(),
            color_tree: "#cc2222".into(),
            color_images: "#2c9f2c".into(),
            color_ridge: "#cc2222".into(),
            show_labels: false,
            margin: 0.5,
            scale: 1.0,
        }
    }
}

struct Frame {
    min_x: f64,
    max_y: f64,
    s: f64,
}

impl Frame {
    fn map(&self, p: crate::geom::Point2) -> (f64, f64) {
        ((p.x - self.min_x) * self.s, (self.max_y - p.y) * self.s)
    }
}

fn f(v: f64) -> String {
    format!("{v:.4}")
}

/// Render a packing (and optionally its extracted ridge) to SVG text.
pub fn render_svg(packing: &Packing, ridge: Option<&RidgeGraph>, style: &RenderStyle) -> String {
    assert!(style.scale > 0.0 && style.margin >= 0.0, "scale and margin must be positive");
    let boundary = packing.boundary_points();
    let mut pts: Vec<crate::geom::Point2> = boundary.clone();
    pts.extend(packing.node_pos.iter().copied());
    pts.extend(packing.x_images.iter().copied());
    let (mut lo_x, mut lo_y, mut hi_x, mut hi_y) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in &pts {
        lo_x = lo_x.min(p.x);
        lo_y = lo_y.min(p.y);
        hi_x = hi_x.max(p.x);
        hi_y = hi_y.max(p.y);
    }
    let margin = style.margin + 0.02 * ((hi_x - lo_x) + (hi_y - lo_y));
    lo_x -= margin;
    lo_y -= margin;
    hi_x += margin;
    hi_y += margin;
    let extent = (hi_x - lo_x).max(hi_y - lo_y).max(1e-9);
    let s = style.scale * 720.0 / extent;
    let frame = Frame {
        min_x: lo_x,
        max_y: hi_y,
        s,
    };
    let width = (hi_x - lo_x) * s;
    let height = (hi_y - lo_y) * s;

    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        f(width),
        f(height),
        f(width),
        f(height)
    )
    .unwrap();
    writeln!(out, "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>").unwrap();

    // boundary polygon
    let mut d = String::new();
    for (i, p) in boundary.iter().enumerate() {
        let (x, y) = frame.map(*p);
        let _ = write!(d, "{}{} {}", if i == 0 { "M" } else { " L" }, f(x), f(y));
    }
    d.push_str(" Z");
    writeln!(
        out,
        "  <path d=\"{}\" fill=\"#f7f4ec\" stroke=\"{}\" stroke-width=\"{}\"/>",
        d,
        style.color_boundary,
        f(style.stroke_boundary)
    )
    .unwrap();

    // tree edges (red), one line per edge in id order
    for n in packing.tree.nodes() {
        if let Some(parent) = n.parent {
            let (x1, y1) = frame.map(packing.node_pos[parent]);
            let (x2, y2) = frame.map(packing.node_pos[n.id]);
            writeln!(
                out,
                "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"{}\"/>",
                f(x1), f(y1), f(x2), f(y2), style.color_tree, f(style.stroke_tree)
            )
            .unwrap();
        }
    }

    // node dots
    for p in &packing.node_pos {
        let (x, y) = frame.map(*p);
        writeln!(
            out,
            "  <circle cx=\"{}\" cy=\"{}\" r=\"2.2\" fill=\"{}\"/>",
            f(x),
            f(y),
            style.color_tree
        )
        .unwrap();
    }

    // x-images (green)
    for p in &packing.x_images {
        let (x, y) = frame.map(*p);
        writeln!(
            out,
            "  <circle cx=\"{}\" cy=\"{}\" r=\"3.2\" fill=\"{}\"/>",
            f(x),
            f(y),
            style.color_images
        )
        .unwrap();
    }

    // extracted ridge overlay, dashed so it reads against the tree edges
    if let Some(r) = ridge {
        for e in &r.edges {
            let (x1, y1) = frame.map(r.vertices[e.a].pos);
            let (x2, y2) = frame.map(r.vertices[e.b].pos);
            writeln!(
                out,
                "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"{}\" stroke-dasharray=\"6 4\" opacity=\"0.85\"/>",
                f(x1), f(y1), f(x2), f(y2), style.color_ridge, f(style.stroke_tree * 0.9)
            )
            .unwrap();
        }
        for v in &r.vertices {
            let (x, y) = frame.map(v.pos);
            writeln!(
                out,
                "  <circle cx=\"{}\" cy=\"{}\" r=\"1.8\" fill=\"none\" stroke=\"{}\" stroke-width=\"1\"/>",
                f(x),
                f(y),
                style.color_ridge
            )
            .unwrap();
        }
    }

    if style.show_labels {
        for n in packing.tree.nodes() {
            if let Some(label) = &n.label {
                let (x, y) = frame.map(packing.node_pos[n.id]);
                writeln!(
                    out,
                    "  <text x=\"{}\" y=\"{}\" font-size=\"11\" font-family=\"sans-serif\" fill=\"#333333\">{}</text>",
                    f(x + 4.0),
                    f(y - 4.0),
                    label
                )
                .unwrap();
            }
        }
    }

    out.push_str("</svg>\n");
    out
}
