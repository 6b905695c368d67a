//! Text snapshots of a graph.
//!
//! ```text
//! LMCF1
//! n 4
//! t 0.0000000000000000e0
//! scheme spectral
//! ux
//! <n rows of n values, row i is x_i>
//! uy
//! ...
//! theta        (optional)
//! ...
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::error::{Error, Result};
use crate::field::{DerivativeScheme, GridSpec, ScalarField, VectorField2};
use crate::diagnostics::lagrangian_angle_with;
use crate::mcf::LagrangianGraph;

pub const MAGIC: &str = "LMCF1";

#[derive(Debug, Error, PartialEq)]
pub enum SnapshotError {
    #[error("missing {MAGIC} header")]
    Magic,

    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("unexpected end of snapshot, expected {0}")]
    Truncated(&'static str),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub displacement: VectorField2,
    pub theta: Option<ScalarField>,
}

impl Snapshot {
    /// Snapshot of a flow state; `theta` is omitted when the angle is undefined.
    pub fn of(state: &LagrangianGraph, t: f64, defect_tolerance: f64) -> Self {
        let theta = lagrangian_angle_with(state.geometry(), defect_tolerance).ok().map(|a| a.theta);
        Snapshot { t, displacement: state.map().displacement().clone(), theta }
    }

    pub fn grid(&self) -> &GridSpec {
        self.displacement.grid()
    }
}

fn push_block(out: &mut String, name: &str, f: &ScalarField) {
    let n = f.grid().n();
    out.push_str(name);
    out.push('\n');
    for i in 0..n {
        for j in 0..n {
            if j > 0 {
                out.push(' ');
            }
            write!(out, "{:.16e}", f.get(i, j)).expect("writing to a String");
        }
        out.push('\n');
    }
}

pub fn format_snapshot(s: &Snapshot) -> String {
    let g = s.grid();
    let mut out = String::new();
    writeln!(out, "{MAGIC}\nn {}\nt {:.16e}\nscheme {}", g.n(), s.t, g.scheme()).expect("writing to a String");
    push_block(&mut out, "ux", &s.displacement.x);
    push_block(&mut out, "uy", &s.displacement.y);
    if let Some(theta) = &s.theta {
        push_block(&mut out, "theta", theta);
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &'static str) -> Result<(usize, &'a str), SnapshotError> {
        self.inner.next().map(|(k, l)| (k + 1, l.trim_end_matches('\r'))).ok_or(SnapshotError::Truncated(what))
    }

    fn field(&mut self, key: &'static str) -> Result<(usize, &'a str), SnapshotError> {
        let (line, text) = self.next(key)?;
        match text.split_once(' ') {
            Some((k, v)) if k == key => Ok((line, v.trim())),
            _ => Err(SnapshotError::Malformed { line, message: format!("expected `{key} <value>`") }),
        }
    }
}

fn read_block(lines: &mut Lines<'_>, grid: GridSpec, name: &'static str) -> Result<ScalarField, SnapshotError> {
    let (line, text) = lines.next(name)?;
    if text != name {
        return Err(SnapshotError::Malformed { line, message: format!("expected block `{name}`") });
    }
    let n = grid.n();
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..n {
        let (line, text) = lines.next(name)?;
        let before = values.len();
        for tok in text.split_ascii_whitespace() {
            match tok.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => return Err(SnapshotError::Malformed { line, message: format!("bad number `{tok}`") }),
            }
        }
        if values.len() - before != n {
            return Err(SnapshotError::Malformed {
                line,
                message: format!("expected {n} values, found {}", values.len() - before),
            });
        }
    }
    Ok(ScalarField::from_values(grid, values).expect("sized by construction"))
}

pub fn parse_snapshot(text: &str) -> Result<Snapshot, SnapshotError> {
    let mut lines = Lines { inner: text.lines().enumerate().peekable() };
    match lines.next("header") {
        Ok((_, MAGIC)) => {}
        _ => return Err(SnapshotError::Magic),
    }
    let (nline, n) = lines.field("n")?;
    let n: usize = n.parse().map_err(|_| SnapshotError::Malformed { line: nline, message: "bad grid size".into() })?;
    let (line, t) = lines.field("t")?;
    let t = t
        .parse::<f64>()
        .ok()
        .filter(|t| t.is_finite())
        .ok_or_else(|| SnapshotError::Malformed { line, message: "bad time".into() })?;
    let (sline, scheme) = lines.field("scheme")?;
    let scheme = DerivativeScheme::from_name(scheme)
        .ok_or_else(|| SnapshotError::Malformed { line: sline, message: format!("unknown scheme `{scheme}`") })?;
    if n > 4096 {
        return Err(SnapshotError::Malformed { line: nline, message: format!("grid size {n} is too large") });
    }
    let grid =
        GridSpec::new(n, scheme).map_err(|e| SnapshotError::Malformed { line: nline, message: e.to_string() })?;
    let ux = read_block(&mut lines, grid, "ux")?;
    let uy = read_block(&mut lines, grid, "uy")?;
    let theta = match lines.inner.peek() {
        None => None,
        Some(_) => Some(read_block(&mut lines, grid, "theta")?),
    };
    if let Some((k, _)) = lines.inner.next() {
        return Err(SnapshotError::Malformed { line: k + 1, message: "trailing content".into() });
    }
    Ok(Snapshot { t, displacement: VectorField2::new(ux, uy), theta })
}

pub fn emit_snapshot(s: &Snapshot, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_snapshot(s)).map_err(|e| Error::io(path, e))
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<Snapshot> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_snapshot(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcf::induced_geometry;
    use crate::torus_map::TorusMap;

    #[test]
    fn identity_round_trip() {
        let g = GridSpec::spectral(8).unwrap();
        let state = induced_geometry(&TorusMap::identity(g)).unwrap();
        let s = Snapshot::of(&state, 0.0, 1e-6);
        let text = format_snapshot(&s);
        assert!(text.starts_with("LMCF1\nn 8\nt 0.0000000000000000e0\nscheme spectral\nux\n"));
        assert_eq!(parse_snapshot(&text).unwrap(), s);
    }

    #[test]
    fn values_round_trip() {
        let g = GridSpec::new(8, DerivativeScheme::Centered4).unwrap();
        let f = TorusMap::from_fn(g, |x, y| (0.1 * y.sin() + 1.0 / 3.0, 0.1 * (x + 0.1 * y.sin()).sin()));
        let state = induced_geometry(&f).unwrap();
        let s = Snapshot::of(&state, 1.0 / 7.0, 1e-3);
        assert!(s.theta.is_some());
        let back = parse_snapshot(&format_snapshot(&s)).unwrap();
        assert!(back.displacement.sub(&s.displacement).max_norm() < 1e-15);
        assert_eq!(back.t, s.t);
        assert_eq!(back.grid().scheme(), DerivativeScheme::Centered4);
    }

    #[test]
    fn malformed_inputs() {
        assert_eq!(parse_snapshot(""), Err(SnapshotError::Magic));
        assert_eq!(parse_snapshot("LMCF2\n"), Err(SnapshotError::Magic));
        assert_eq!(parse_snapshot("LMCF1\nn 8\n"), Err(SnapshotError::Truncated("t")));
        assert!(matches!(parse_snapshot("LMCF1\nn 7\nt 0\nscheme spectral\n"), Err(SnapshotError::Malformed { line: 2, .. })));
        let g = GridSpec::spectral(8).unwrap();
        let s = Snapshot { t: 0.0, displacement: VectorField2::zeros(g), theta: None };
        let mut text = format_snapshot(&s);
        text.push_str("junk\n");
        assert!(matches!(parse_snapshot(&text), Err(SnapshotError::Malformed { .. })));
    }
}
