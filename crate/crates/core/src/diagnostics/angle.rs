use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{wrap_angle, OneForm, ScalarField};
use crate::mcf::SurfaceGeometry;

use super::mean_curvature_form;

/// Largest `|ω′(e₁, e₂)|` accepted by [`lagrangian_angle`].
pub const LAGRANGIAN_TOLERANCE: f64 = 1e-6;

/// Allowed distance of a loop-averaged winding from the nearest integer.
const WINDING_SLACK: f64 = 0.01;

/// Continuous representative of the Lagrangian angle.
///
/// The ambient is identified with `ℂ²` by `w₁ = x₁ + i y₁`, `w₂ = x₂ − i y₂`;
/// `θ = arg det_ℂ(e₁, e₂)`. On the diagonal this gives `θ = −π/2`.
#[derive(Clone, Debug)]
pub struct AngleField {
    pub theta: ScalarField,
    pub branch_consistent: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MaslovWinding {
    pub w_x: i64,
    pub w_y: i64,
}

/// Complex determinant of the tangent frame at node `k`.
fn frame_determinant(geom: &SurfaceGeometry, k: usize) -> (f64, f64) {
    let [ex, ey] = &geom.tangents;
    let e = |f: &ScalarField| f.values()[k];
    // columns (a + ib, c − id)
    let (a1, b1, c1, d1) = (e(&ex[0]), e(&ex[1]), e(&ex[2]), e(&ex[3]));
    let (a2, b2, c2, d2) = (e(&ey[0]), e(&ey[1]), e(&ey[2]), e(&ey[3]));
    let mul = |(p, q): (f64, f64), (r, s): (f64, f64)| (p * r - q * s, p * s + q * r);
    let l = mul((a1, b1), (c2, -d2));
    let r = mul((a2, b2), (c1, -d1));
    (l.0 - r.0, l.1 - r.1)
}

pub fn lagrangian_angle(geom: &SurfaceGeometry) -> Result<AngleField> {
    lagrangian_angle_with(geom, LAGRANGIAN_TOLERANCE)
}

pub fn lagrangian_angle_with(geom: &SurfaceGeometry, tolerance: f64) -> Result<AngleField> {
    let defect = geom.lagrangian_form().max_abs();
    if !(defect <= tolerance) {
        return Err(Error::NotLagrangian { defect });
    }
    let grid = *geom.grid();
    let n = grid.n();
    let mut raw = vec![0.0; grid.len()];
    for (k, r) in raw.iter_mut().enumerate() {
        let (re, im) = frame_determinant(geom, k);
        if re.hypot(im) < 1e-12 {
            return Err(Error::ZeroDeterminant { i: k / n, j: k % n });
        }
        *r = im.atan2(re);
    }

    let mut theta = vec![0.0; grid.len()];
    theta[0] = raw[0];
    for j in 1..n {
        theta[j] = theta[j - 1] + wrap_angle(raw[j] - raw[j - 1]);
    }
    for i in 1..n {
        for j in 0..n {
            let (k, prev) = (i * n + j, (i - 1) * n + j);
            theta[k] = theta[prev] + wrap_angle(raw[k] - raw[prev]);
        }
    }
    let theta = ScalarField::from_values(grid, theta)?;

    let mut consistent = (1..n).all(|i| (1..n).all(|j| (theta.get(i, j) - theta.get(i, j - 1)).abs() < PI));
    if consistent {
        let loops_agree = |w: Vec<f64>| w.iter().all(|v| (v - w[0]).abs() < 0.5);
        consistent = loops_agree(loop_windings(&theta, true)) && loops_agree(loop_windings(&theta, false));
    }
    Ok(AngleField { theta, branch_consistent: consistent })
}

/// Raw winding of every closed loop along x (`along_x`) or along y.
fn loop_windings(theta: &ScalarField, along_x: bool) -> Vec<f64> {
    let n = theta.grid().n();
    (0..n)
        .map(|l| {
            let at = |p: usize| if along_x { theta.get(p % n, l) } else { theta.get(l, p % n) };
            (0..n).map(|p| wrap_angle(at(p + 1) - at(p))).sum::<f64>() / (2.0 * PI)
        })
        .collect()
}

pub fn maslov_windings(angle: &AngleField) -> Result<MaslovWinding> {
    let round = |cycle: &'static str, along_x: bool| -> Result<i64> {
        let w = loop_windings(&angle.theta, along_x);
        let raw = w.iter().sum::<f64>() / w.len() as f64;
        let r = raw.round();
        if (raw - r).abs() >= WINDING_SLACK {
            return Err(Error::NonIntegerWinding { cycle, raw });
        }
        Ok(r as i64)
    };
    Ok(MaslovWinding { w_x: round("x", true)?, w_y: round("y", false)? })
}

/// `dθ`, with the linear part `w_x x + w_y y` differentiated exactly.
pub fn angle_differential(angle: &AngleField) -> Result<OneForm> {
    let w = maslov_windings(angle)?;
    let g = *angle.theta.grid();
    let (wx, wy) = (w.w_x as f64, w.w_y as f64);
    let periodic = ScalarField::from_values(
        g,
        g.nodes().map(|(i, j, x, y)| angle.theta.get(i, j) - wx * x - wy * y).collect(),
    )?;
    Ok(OneForm::new(periodic.dx().map(|v| v + wx), periodic.dy().map(|v| v + wy)))
}

/// `‖σ − dθ‖∞`.
pub fn angle_consistency(geom: &SurfaceGeometry) -> Result<f64> {
    angle_consistency_with(geom, LAGRANGIAN_TOLERANCE)
}

pub fn angle_consistency_with(geom: &SurfaceGeometry, tolerance: f64) -> Result<f64> {
    let angle = lagrangian_angle_with(geom, tolerance)?;
    Ok(mean_curvature_form(geom).sub(&angle_differential(&angle)?).max_abs())
}
