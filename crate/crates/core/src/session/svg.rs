use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::ScalarField;

const CELL: usize = 8;
const MARGIN: usize = 24;

// viridis, sampled at five stops
const STOPS: [(f64, [f64; 3]); 5] = [
    (0.00, [68.0, 1.0, 84.0]),
    (0.25, [59.0, 82.0, 139.0]),
    (0.50, [33.0, 145.0, 140.0]),
    (0.75, [94.0, 201.0, 98.0]),
    (1.00, [253.0, 231.0, 37.0]),
];

fn colour(u: f64) -> (u8, u8, u8) {
    let u = u.clamp(0.0, 1.0);
    let k = STOPS.iter().position(|s| s.0 >= u).unwrap_or(STOPS.len() - 1).max(1);
    let (a, b) = (STOPS[k - 1], STOPS[k]);
    let w = (u - a.0) / (b.0 - a.0);
    let c = |i: usize| (a.1[i] + w * (b.1[i] - a.1[i])).round() as u8;
    (c(0), c(1), c(2))
}

/// An `n × n` heatmap with `x` to the right and `y` upward, annotated with
/// the field's minimum and maximum.
pub fn render_svg(field: &ScalarField, title: &str) -> String {
    let n = field.grid().n();
    let (lo, hi) = (field.min(), field.max());
    let span = hi - lo;
    let side = n * CELL;
    let (w, h) = (side + 2 * MARGIN, side + 3 * MARGIN);
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="16" font-family="monospace" font-size="12">{}</text>"#, escape(title));
    for i in 0..n {
        for j in 0..n {
            let u = if span > 0.0 { (field.get(i, j) - lo) / span } else { 0.5 };
            let (r, g, b) = colour(u);
            let (x, y) = (MARGIN + i * CELL, MARGIN + (n - 1 - j) * CELL);
            let _ = writeln!(out, r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="rgb({r},{g},{b})"/>"#);
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="{}" font-family="monospace" font-size="12">min {lo:.6e}  max {hi:.6e}  spread {span:.3e}</text>"#,
        side + MARGIN + 18
    );
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn emit_svg(field: &ScalarField, title: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_svg(field, title)).map_err(|e| Error::io(path, e))
}
