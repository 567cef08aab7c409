//! SVG plots of extended diagrams with optional staircase overlays.

use std::fmt::Write;

use multinerve::covers::{build_staircase, Side, Square};
use multinerve::{DiagramPoint, ExtendedDiagram, GomicCover, StairKind};

const SIZE: f64 = 420.0;
const MARGIN: f64 = 40.0;
const MARK: f64 = 4.5;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Stroke pattern of each staircase, also used as its CSS class suffix.
pub fn stair_style(kind: StairKind) -> (&'static str, &'static str) {
    match kind {
        StairKind::Ord => ("ord", "6,4"),
        StairKind::Rel => ("rel", "8,3,2,3"),
        StairKind::ExtMinus => ("ext-minus", "2,3"),
        StairKind::Ext => ("ext", "8,3,2,3,2,3"),
    }
}

/// Square data window covering the points and the cover's range.
fn window(d: &ExtendedDiagram, cover: Option<&GomicCover>) -> (f64, f64) {
    let mut vals: Vec<f64> = d.points().iter().flat_map(|p| [p.birth, p.death]).collect();
    if let Some(c) = cover {
        let r = c.range();
        vals.extend([r.lo, r.hi]);
    }
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
    (lo - pad, hi + pad)
}

struct Frame {
    lo: f64,
    scale: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.lo) * self.scale
    }

    fn y(&self, v: f64) -> f64 {
        SIZE - MARGIN - (v - self.lo) * self.scale
    }
}

fn half_square(fr: &Frame, s: &Square) -> String {
    let (a, b) = (s.interval.lo, s.interval.hi);
    let corner = match s.side {
        Side::Above => (a, b),
        Side::Below => (b, a),
    };
    let pts = [(a, a), corner, (b, b)];
    pts.iter().map(|&(u, v)| format!("{:.2},{:.2}", fr.x(u), fr.y(v))).collect::<Vec<_>>().join(" ")
}

fn mark(out: &mut String, fr: &Frame, p: &DiagramPoint) {
    let (cx, cy) = (fr.x(p.birth), fr.y(p.death));
    let color = PALETTE[p.dim.min(PALETTE.len() - 1)];
    let title = format!("{:?}_{} ({}, {})", p.kind, p.dim, p.birth, p.death);
    if p.kind.is_extended() {
        let _ = writeln!(
            out,
            r#"  <rect class="pt" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}"><title>{title}</title></rect>"#,
            cx - MARK,
            cy - MARK,
            2.0 * MARK,
            2.0 * MARK
        );
    } else {
        let _ = writeln!(
            out,
            r#"  <circle class="pt" cx="{cx:.2}" cy="{cy:.2}" r="{MARK}" fill="{color}"><title>{title}</title></circle>"#
        );
    }
}

/// Birth on the horizontal axis, death on the vertical one. Extended points
/// are squares, the others disks; colour encodes dimension. With a cover the
/// four staircases are outlined half-square by half-square.
pub fn render_diagram_svg(d: &ExtendedDiagram, cover: Option<&GomicCover>) -> String {
    let (lo, hi) = window(d, cover);
    let fr = Frame { lo, scale: (SIZE - 2.0 * MARGIN) / (hi - lo) };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"  <rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1, y0, y1) = (fr.x(lo), fr.x(hi), fr.y(lo), fr.y(hi));
    let _ = writeln!(
        out,
        r#"  <g class="axes" stroke="black" stroke-width="1"><line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/><line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/></g>"#
    );
    let _ = writeln!(
        out,
        r#"  <text x="{x0:.2}" y="{:.2}" font-size="11">{lo:.3}</text><text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{hi:.3}</text>"#,
        y0 + 14.0,
        x1,
        y0 + 14.0
    );
    let _ = writeln!(
        out,
        r##"  <line class="diagonal" x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}" stroke="#888" stroke-width="1"/>"##
    );
    if let Some(c) = cover {
        for kind in StairKind::ALL {
            let (name, dash) = stair_style(kind);
            let _ = writeln!(
                out,
                r#"  <g class="stair stair-{name}" fill="none" stroke="black" stroke-width="1.2" stroke-dasharray="{dash}">"#
            );
            for s in &build_staircase(c, kind).squares {
                let _ = writeln!(out, r#"    <polyline points="{}"/>"#, half_square(&fr, s));
            }
            let _ = writeln!(out, "  </g>");
        }
    }
    for p in d.points() {
        mark(&mut out, &fr, p);
    }
    out.push_str("</svg>\n");
    out
}
