//! Standalone SVG 1.1 plots: embedding scatters, persistence diagram and barcode.
//!
//! Coordinates are printed with three decimals so output is byte-stable.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::embedding::Embedding;
use crate::error::{Error, Result};
use crate::tomato::PersistenceDiagram;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 50.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// Distinct color per label: a fixed palette, then golden-angle hues.
pub fn color(label: usize) -> String {
    if label < PALETTE.len() {
        return PALETTE[label].to_string();
    }
    let hue = (label as f64 * 137.507_764) % 360.0;
    let (r, g, b) = hsl_to_rgb(hue, 0.65, 0.5);
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn hsl_to_rgb(h: f64, s: f64, l: f64) -> (u8, u8, u8) {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let to = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    (to(r), to(g), to(b))
}

/// Linear map from a data interval onto a pixel interval; empty intervals are padded.
#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Axis {
        let (lo, hi) = if hi - lo > 1e-12 * lo.abs().max(hi.abs()).max(1e-300) {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        };
        let pad = 0.05 * (hi - lo);
        Axis {
            lo: lo - pad,
            hi: hi + pad,
            px_lo,
            px_hi,
        }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.3}" y="30.000" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        SIZE / 2.0,
        escape(title)
    );
}

fn frame(out: &mut String, xlabel: &str, ylabel: &str) {
    let w = SIZE - 2.0 * MARGIN;
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN:.3}" y="{MARGIN:.3}" width="{w:.3}" height="{w:.3}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
        SIZE / 2.0,
        SIZE - 15.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="15.000" y="{:.3}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 15.000 {:.3})">{}</text>"#,
        SIZE / 2.0,
        SIZE / 2.0,
        escape(ylabel)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Scatter of the embedding, one circle per node colored by its label.
pub fn scatter_svg(coords: &[[f64; 2]], labels: &[usize], title: &str) -> Result<String> {
    if coords.len() != labels.len() {
        return Err(Error::Input(format!(
            "{} points but {} labels",
            coords.len(),
            labels.len()
        )));
    }
    let range = |a: usize| {
        coords.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p[a]), hi.max(p[a])))
    };
    let ((x0, x1), (y0, y1)) = (range(0), range(1));
    let xa = Axis::new(x0, x1, MARGIN, SIZE - MARGIN);
    let ya = Axis::new(y0, y1, SIZE - MARGIN, MARGIN);
    let mut out = String::new();
    header(&mut out, title);
    frame(&mut out, "x", "y");
    for (p, &l) in coords.iter().zip(labels) {
        let _ = writeln!(
            out,
            r#"<circle class="node" cx="{:.3}" cy="{:.3}" r="3.000" fill="{}"/>"#,
            xa.map(p[0]),
            ya.map(p[1]),
            color(l)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Diagram drawn for the sublevel filtration of `-rho`: a mode at
/// `(-birth, -death)` sits above the diagonal, and survivors (infinite
/// death) are upward arrows along the top edge.
pub fn diagram_svg(d: &PersistenceDiagram) -> String {
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    for p in &d.points {
        lo = lo.min(-p.birth);
        hi = hi.max(-p.birth);
        if !p.is_survivor() {
            hi = hi.max(-p.death);
        }
    }
    if d.points.is_empty() {
        (lo, hi) = (0.0, 1.0);
    }
    let xa = Axis::new(lo, hi, MARGIN, SIZE - MARGIN);
    let ya = Axis::new(lo, hi, SIZE - MARGIN, MARGIN + 20.0);
    let mut out = String::new();
    header(&mut out, "Persistence diagram");
    frame(&mut out, "-rho at birth", "-rho at death");
    let _ = writeln!(
        out,
        r#"<line class="diagonal" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="gray" stroke-dasharray="4 3"/>"#,
        xa.map(xa.lo),
        ya.map(ya.lo),
        xa.map(xa.hi),
        ya.map(ya.hi)
    );
    for p in &d.points {
        let x = xa.map(-p.birth);
        if p.is_survivor() {
            let top = MARGIN + 4.0;
            let _ = writeln!(
                out,
                r#"<polygon class="survivor" points="{:.3},{:.3} {:.3},{:.3} {:.3},{:.3}" fill="crimson"/>"#,
                x,
                top,
                x - 5.0,
                top + 10.0,
                x + 5.0,
                top + 10.0
            );
        } else {
            let _ = writeln!(
                out,
                r#"<circle class="finite" cx="{:.3}" cy="{:.3}" r="3.000" fill="steelblue"/>"#,
                x,
                ya.map(-p.death)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// One horizontal bar per mode spanning `[death, birth]` in density, longest
/// first; survivors run to the left edge and end in an arrow.
pub fn barcode_svg(d: &PersistenceDiagram) -> String {
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    for p in &d.points {
        hi = hi.max(p.birth);
        lo = lo.min(p.birth);
        if !p.is_survivor() {
            lo = lo.min(p.death);
        }
    }
    if d.points.is_empty() {
        (lo, hi) = (0.0, 1.0);
    }
    let xa = Axis::new(lo, hi, MARGIN, SIZE - MARGIN);
    let rows = d.points.len().max(1) as f64;
    let step = (SIZE - 2.0 * MARGIN) / rows;
    let thick = (0.7 * step).clamp(0.5, 12.0);
    let mut out = String::new();
    header(&mut out, "Persistence barcode");
    frame(&mut out, "rho", "modes by prominence");
    for (row, i) in d.by_prominence().into_iter().enumerate() {
        let p = &d.points[i];
        let y = MARGIN + (row as f64 + 0.5) * step;
        let x_end = xa.map(p.birth);
        let (x_start, class) = if p.is_survivor() {
            (MARGIN, "bar survivor")
        } else {
            (xa.map(p.death), "bar")
        };
        let _ = writeln!(
            out,
            r#"<rect class="{class}" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
            x_start,
            y - thick / 2.0,
            (x_end - x_start).max(0.5),
            thick,
            if p.is_survivor() { "crimson" } else { "steelblue" }
        );
        if p.is_survivor() {
            let _ = writeln!(
                out,
                r#"<polygon class="arrow" points="{:.3},{:.3} {:.3},{:.3} {:.3},{:.3}" fill="crimson"/>"#,
                MARGIN - 8.0,
                y,
                MARGIN,
                y - thick / 2.0 - 2.0,
                MARGIN,
                y + thick / 2.0 + 2.0
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Writes `scatter_<name>.svg` for both labelings plus `diagram.svg` and
/// `barcode.svg` into `out_dir`.
pub fn emit_svg_plots(
    emb: &Embedding,
    a: (&str, &[usize]),
    b: (&str, &[usize]),
    diagram: &PersistenceDiagram,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for (name, labels) in [a, b] {
        let svg = scatter_svg(&emb.coords, labels, &format!("{name} ({} embedding)", emb.method))?;
        let path = out_dir.join(format!("scatter_{name}.svg"));
        fs::write(&path, svg)?;
        written.push(path);
    }
    for (file, svg) in [("diagram.svg", diagram_svg(diagram)), ("barcode.svg", barcode_svg(diagram))] {
        let path = out_dir.join(file);
        fs::write(&path, svg)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tomato::DiagramPoint;

    #[test]
    fn single_node_scatter() {
        let svg = scatter_svg(&[[0.5, 0.5]], &[0], "one").unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains("cx=\"300.000\" cy=\"300.000\""));
        assert!(scatter_svg(&[[0.0, 0.0]], &[], "bad").is_err());
    }

    #[test]
    fn survivors_only_diagram() {
        let d = PersistenceDiagram {
            points: vec![
                DiagramPoint { mode: 0, birth: 4.0, death: f64::NEG_INFINITY },
                DiagramPoint { mode: 1, birth: 2.0, death: f64::NEG_INFINITY },
            ],
        };
        let svg = diagram_svg(&d);
        assert_eq!(svg.matches("class=\"finite\"").count(), 0);
        assert_eq!(svg.matches("class=\"survivor\"").count(), 2);
        assert!(svg.contains("class=\"diagonal\""));
        assert_eq!(barcode_svg(&d).matches("class=\"bar survivor\"").count(), 2);
    }

    #[test]
    fn colors_distinct() {
        let cs: std::collections::HashSet<String> = (0..40).map(color).collect();
        assert_eq!(cs.len(), 40);
    }
}
