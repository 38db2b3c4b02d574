//! SVG figures.
//!
//! Figure A shows the z-plane: poles as crosses, zeroes as dots, petal
//! boundaries as closed curves and the cut tree as polylines. Figure B shows
//! the developed log-polygon with its side labels and truncated cylinder
//! stubs. Both fit their content into the canvas with a 5% margin.

use std::fmt::Write;

use crate::blueprint::{SideKind, SurfaceBlueprint};
use crate::C64;

const SIZE: f64 = 800.0;
const MARGIN: f64 = 0.05;
/// Cylinder stubs are drawn this many circumferences long.
pub const STUB_LENGTH: f64 = 1.5;

const PETAL_COLORS: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

struct Frame {
    lo: C64,
    scale: f64,
    height: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = C64>) -> Frame {
        let (mut lo, mut hi) = (C64::new(f64::INFINITY, f64::INFINITY), C64::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in points.filter(|p| p.is_finite()) {
            lo = C64::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = C64::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        if !lo.re.is_finite() {
            lo = C64::new(-1.0, -1.0);
            hi = C64::new(1.0, 1.0);
        }
        let span = (hi.re - lo.re).max(hi.im - lo.im).max(1e-12);
        let pad = MARGIN * span;
        let lo = lo - C64::new(pad, pad);
        let scale = SIZE / (span + 2.0 * pad);
        Frame { lo, scale, height: (hi.im - lo.im + pad) * scale }
    }

    /// Canvas coordinates with the y axis pointing up in the plane.
    fn map(&self, z: C64) -> (f64, f64) {
        ((z.re - self.lo.re) * self.scale, self.height - (z.im - self.lo.im) * self.scale)
    }

    fn path(&self, pts: &[C64], closed: bool) -> String {
        let mut d = String::new();
        let mut pen_down = false;
        for &p in pts {
            if !p.is_finite() || p.norm() > 1e6 {
                pen_down = false;
                continue;
            }
            let (x, y) = self.map(p);
            let _ = write!(d, "{}{x:.3},{y:.3} ", if pen_down { "L" } else { "M" });
            pen_down = true;
        }
        if closed {
            d.push('Z');
        }
        d
    }
}

fn header(out: &mut String, frame: &Frame) {
    let h = frame.height.max(1.0);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{h:.0}" viewBox="0 0 {SIZE} {h:.3}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<defs><clipPath id="frame"><rect width="{SIZE}" height="{h:.3}"/></clipPath></defs>"#);
}

/// Z-plane figure. The view covers the poles and zeroes with room for one
/// diameter around them; curves leaving it are clipped.
pub fn render_plane(bp: &SurfaceBlueprint) -> String {
    let singular: Vec<C64> = bp.poles.iter().chain(&bp.zeroes).copied().collect();
    let center = singular.iter().sum::<C64>() / singular.len().max(1) as f64;
    let radius = singular.iter().map(|p| (p - center).norm()).fold(0.0, f64::max).max(1e-3);
    let frame = Frame::fit([center - C64::new(1.6 * radius, 1.6 * radius), center + C64::new(1.6 * radius, 1.6 * radius)].into_iter());
    let mut out = String::new();
    header(&mut out, &frame);
    let _ = writeln!(out, r#"<g clip-path="url(#frame)">"#);
    for p in &bp.petals {
        let color = PETAL_COLORS[p.pole % PETAL_COLORS.len()];
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="{color}" fill-opacity="0.15" stroke="{color}" stroke-width="1.5"/>"#,
            frame.path(&p.boundary, true)
        );
    }
    for (k, e) in bp.tree.iter().enumerate() {
        let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="black" stroke-width="2"/>"#, frame.path(&e.polyline, false));
        if let Some(mid) = e.polyline.get(e.polyline.len() / 2) {
            let (x, y) = frame.map(*mid);
            let _ = writeln!(out, r#"<text x="{:.3}" y="{:.3}" font-size="13" font-family="sans-serif">&#964;{}</text>"#, x + 4.0, y - 4.0, k + 1);
        }
    }
    for (j, &p) in bp.poles.iter().enumerate() {
        let (x, y) = frame.map(p);
        let _ = writeln!(
            out,
            r#"<path d="M{:.3},{:.3} L{:.3},{:.3} M{:.3},{:.3} L{:.3},{:.3}" stroke="black" stroke-width="2"/>"#,
            x - 5.0, y - 5.0, x + 5.0, y + 5.0, x - 5.0, y + 5.0, x + 5.0, y - 5.0
        );
        let _ = writeln!(out, r#"<text x="{:.3}" y="{:.3}" font-size="12" font-family="sans-serif">z{}</text>"#, x + 6.0, y + 14.0, j + 1);
    }
    for (i, &c) in bp.zeroes.iter().enumerate() {
        let (x, y) = frame.map(c);
        let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="4" fill="black"/>"#);
        let _ = writeln!(out, r#"<text x="{:.3}" y="{:.3}" font-size="12" font-family="sans-serif">c{}</text>"#, x + 6.0, y - 6.0, i + 1);
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// Development figure: the polygon with cylinder stubs on its petal sides.
/// For degree four the two cut sides are drawn dashed and labelled as the
/// identified pair.
pub fn render_development(bp: &SurfaceBlueprint) -> String {
    let w = bp.polygon.development();
    let sides = &bp.polygon.sides;
    // The domain lies to the right of each side; stubs extend to the left.
    let stubs: Vec<Option<[C64; 4]>> = sides
        .iter()
        .enumerate()
        .map(|(i, s)| match s.kind {
            SideKind::Petal { .. } if s.length > 0.0 => {
                let normal = C64::new(0.0, 1.0) * s.vector / s.length * (STUB_LENGTH * s.length);
                Some([w[i], w[i + 1], w[i + 1] + normal, w[i] + normal])
            }
            _ => None,
        })
        .collect();
    let frame = Frame::fit(w.iter().copied().chain(stubs.iter().flatten().flatten().copied()));
    let mut out = String::new();
    header(&mut out, &frame);
    for (i, stub) in stubs.iter().enumerate() {
        if let (Some(q), SideKind::Petal { pole }) = (stub, sides[i].kind) {
            let color = PETAL_COLORS[pole % PETAL_COLORS.len()];
            let _ = writeln!(
                out,
                r#"<path d="{}" fill="{color}" fill-opacity="0.2" stroke="{color}" stroke-dasharray="2,3"/>"#,
                frame.path(q, true)
            );
        }
    }
    let _ = writeln!(out, r##"<path d="{}" fill="#eeeeee" stroke="none"/>"##, frame.path(&w[..w.len() - 1], true));
    for (i, s) in sides.iter().enumerate() {
        let (label, dash, color) = match s.kind {
            SideKind::Petal { pole } => (format!("2&#960;i&#955;{}", pole + 1), "", PETAL_COLORS[pole % PETAL_COLORS.len()]),
            SideKind::Cut { edge, sign } => {
                let name = if bp.degree == 4 { "&#956;".to_string() } else { format!("&#964;{}", edge + 1) };
                (format!("{}{name}", if sign > 0 { "+" } else { "&#8722;" }), r#" stroke-dasharray="8,4""#, "black")
            }
        };
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="2.5"{dash}/>"#,
            frame.path(&[w[i], w[i + 1]], false)
        );
        let mid = 0.5 * (w[i] + w[i + 1]);
        let inward = if s.length > 0.0 { C64::new(0.0, -1.0) * s.vector / s.length } else { C64::new(0.0, 0.0) };
        let (x, y) = frame.map(mid);
        let (dx, dy) = (inward.re * 14.0, -inward.im * 14.0);
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" font-size="13" font-family="sans-serif" text-anchor="middle">{label}</text>"#,
            x + dx,
            y + dy
        );
    }
    for (i, v) in bp.polygon.vertices.iter().enumerate() {
        let (x, y) = frame.map(w[i]);
        let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="3.5" fill="black"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" font-size="11" font-family="sans-serif">c{} k={}</text>"#,
            x + 5.0,
            y - 5.0,
            v.zero + 1,
            v.k
        );
    }
    out.push_str("</svg>\n");
    out
}
