//! Periodic fields on the flat torus `[0, 2π)²`.
//!
//! Every field is sampled on an `n × n` grid with spacing `h = 2π / n`. The
//! value stored at flat index `i * n + j` belongs to the point `(i h, j h)`,
//! so `i` runs along `x` and `j` along `y`.

mod interp;
mod spectral;

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use interp::{sample_periodic, Stencil, STENCIL_WIDTH};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivativeScheme {
    /// Trigonometric interpolation; exact for modes below `n / 2`.
    Spectral,
    /// Fourth-order centered finite differences.
    Centered4,
}

impl DerivativeScheme {
    pub fn name(self) -> &'static str {
        match self {
            DerivativeScheme::Spectral => "spectral",
            DerivativeScheme::Centered4 => "centered4",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "spectral" => Some(DerivativeScheme::Spectral),
            "centered4" => Some(DerivativeScheme::Centered4),
            _ => None,
        }
    }
}

impl fmt::Display for DerivativeScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

/// The two generators of `H₁(T²)`: the loop along `x` and the loop along `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cycle {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    n: usize,
    h: f64,
    scheme: DerivativeScheme,
}

impl GridSpec {
    pub const MIN_N: usize = 8;

    pub fn new(n: usize, scheme: DerivativeScheme) -> Result<Self> {
        if n < Self::MIN_N {
            return Err(Error::InvalidGrid(format!("n = {n} is below the minimum {}", Self::MIN_N)));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("n = {n} must be even")));
        }
        Ok(GridSpec { n, h: TAU / n as f64, scheme })
    }

    pub fn spectral(n: usize) -> Result<Self> {
        Self::new(n, DerivativeScheme::Spectral)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn scheme(&self) -> DerivativeScheme {
        self.scheme
    }

    pub fn with_scheme(self, scheme: DerivativeScheme) -> Self {
        GridSpec { scheme, ..self }
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// Node coordinates in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        (0..self.n).flat_map(move |i| (0..self.n).map(move |j| (i, j, self.coord(i), self.coord(j))))
    }

    pub(crate) fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self.n != other.n {
            return Err(Error::GridMismatch(self.n, other.n));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        ScalarField { grid, values: vec![c; grid.len()] }
    }

    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let values = grid.nodes().map(|(_, _, x, y)| f(x, y)).collect();
        ScalarField { grid, values }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values for an n = {} grid, got {}",
                grid.len(),
                grid.n(),
                values.len()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid.n, other.grid.n);
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        ScalarField { grid: self.grid, values }
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `self + c * other`
    pub fn axpy(&self, c: f64, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a + c * b)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max − min`
    pub fn spread(&self) -> f64 {
        self.max() - self.min()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Partial derivative under the grid's derivative scheme.
    pub fn partial(&self, axis: Axis) -> ScalarField {
        let values = match self.grid.scheme {
            DerivativeScheme::Spectral => spectral::derivative(&self.values, self.grid.n, axis),
            DerivativeScheme::Centered4 => centered4(&self.values, self.grid.n, self.grid.h, axis),
        };
        ScalarField { grid: self.grid, values }
    }

    pub fn dx(&self) -> ScalarField {
        self.partial(Axis::X)
    }

    pub fn dy(&self) -> ScalarField {
        self.partial(Axis::Y)
    }

    /// `∫_{T²} f dA` by the periodic trapezoid rule.
    pub fn integrate(&self) -> f64 {
        let h = self.grid.h;
        h * h * self.values.iter().sum::<f64>()
    }

    /// Periodic interpolation at an arbitrary point.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        sample_periodic(self, x, y)
    }

    /// The exterior derivative `dφ = φ_x dx + φ_y dy`.
    pub fn gradient_form(&self) -> OneForm {
        OneForm { a: self.dx(), b: self.dy() }
    }
}

pub fn partial_derivative(f: &ScalarField, axis: Axis) -> ScalarField {
    f.partial(axis)
}

pub fn integrate_torus(f: &ScalarField) -> f64 {
    f.integrate()
}

fn centered4(values: &[f64], n: usize, h: f64, axis: Axis) -> Vec<f64> {
    let inv = 1.0 / (12.0 * h);
    let at = |i: usize, j: usize| values[i * n + j];
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (p1, p2, m1, m2) = match axis {
                Axis::X => (
                    at((i + 1) % n, j),
                    at((i + 2) % n, j),
                    at((i + n - 1) % n, j),
                    at((i + n - 2) % n, j),
                ),
                Axis::Y => (
                    at(i, (j + 1) % n),
                    at(i, (j + 2) % n),
                    at(i, (j + n - 1) % n),
                    at(i, (j + n - 2) % n),
                ),
            };
            out[i * n + j] = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) * inv;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField2 {
    pub x: ScalarField,
    pub y: ScalarField,
}

impl VectorField2 {
    pub fn new(x: ScalarField, y: ScalarField) -> Self {
        debug_assert_eq!(x.grid().n(), y.grid().n());
        VectorField2 { x, y }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        VectorField2 { x: ScalarField::zeros(grid), y: ScalarField::zeros(grid) }
    }

    pub fn constant(grid: GridSpec, cx: f64, cy: f64) -> Self {
        VectorField2 { x: ScalarField::constant(grid, cx), y: ScalarField::constant(grid, cy) }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        VectorField2 {
            x: ScalarField::from_fn(grid, |x, y| f(x, y).0),
            y: ScalarField::from_fn(grid, |x, y| f(x, y).1),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.x.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn add(&self, other: &VectorField2) -> Self {
        VectorField2 { x: self.x.add(&other.x), y: self.y.add(&other.y) }
    }

    pub fn sub(&self, other: &VectorField2) -> Self {
        VectorField2 { x: self.x.sub(&other.x), y: self.y.sub(&other.y) }
    }

    pub fn scale(&self, c: f64) -> Self {
        VectorField2 { x: self.x.scale(c), y: self.y.scale(c) }
    }

    pub fn axpy(&self, c: f64, other: &VectorField2) -> Self {
        VectorField2 { x: self.x.axpy(c, &other.x), y: self.y.axpy(c, &other.y) }
    }

    /// Largest pointwise Euclidean norm.
    pub fn max_norm(&self) -> f64 {
        self.x
            .values()
            .iter()
            .zip(self.y.values())
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    pub fn divergence(&self) -> ScalarField {
        self.x.dx().add(&self.y.dy())
    }

    /// The one-form `i_X ω` for `ω = dx ∧ dy`, i.e. `X^x dy − X^y dx`.
    pub fn interior_omega(&self) -> OneForm {
        OneForm { a: self.y.scale(-1.0), b: self.x.clone() }
    }
}

/// A one-form `a dx + b dy`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    pub a: ScalarField,
    pub b: ScalarField,
}

impl OneForm {
    pub fn new(a: ScalarField, b: ScalarField) -> Self {
        debug_assert_eq!(a.grid().n(), b.grid().n());
        OneForm { a, b }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        OneForm { a: ScalarField::zeros(grid), b: ScalarField::zeros(grid) }
    }

    pub fn constant(grid: GridSpec, a: f64, b: f64) -> Self {
        OneForm { a: ScalarField::constant(grid, a), b: ScalarField::constant(grid, b) }
    }

    pub fn grid(&self) -> &GridSpec {
        self.a.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite()
    }

    pub fn add(&self, other: &OneForm) -> Self {
        OneForm { a: self.a.add(&other.a), b: self.b.add(&other.b) }
    }

    pub fn sub(&self, other: &OneForm) -> Self {
        OneForm { a: self.a.sub(&other.a), b: self.b.sub(&other.b) }
    }

    pub fn scale(&self, c: f64) -> Self {
        OneForm { a: self.a.scale(c), b: self.b.scale(c) }
    }

    pub fn axpy(&self, c: f64, other: &OneForm) -> Self {
        OneForm { a: self.a.axpy(c, &other.a), b: self.b.axpy(c, &other.b) }
    }

    /// Largest absolute component value.
    pub fn max_abs(&self) -> f64 {
        self.a.max_abs().max(self.b.max_abs())
    }

    /// `dα = (∂x b − ∂y a) dx ∧ dy`, returned as its coefficient.
    pub fn exterior_derivative(&self) -> ScalarField {
        self.b.dx().sub(&self.a.dy())
    }

    /// Period over one of the generating cycles, averaged over all parallel
    /// grid loops so that exact contributions cancel.
    pub fn period(&self, cycle: Cycle) -> f64 {
        let loops = self.loop_integrals(cycle);
        loops.iter().sum::<f64>() / loops.len() as f64
    }

    /// Both periods `(P_x, P_y)`.
    pub fn periods(&self) -> (f64, f64) {
        (self.period(Cycle::X), self.period(Cycle::Y))
    }

    /// Line integrals over each of the `n` grid loops representing `cycle`.
    pub fn loop_integrals(&self, cycle: Cycle) -> Vec<f64> {
        let grid = *self.grid();
        let (n, h) = (grid.n(), grid.h());
        match cycle {
            Cycle::X => (0..n).map(|j| h * (0..n).map(|i| self.a.get(i, j)).sum::<f64>()).collect(),
            Cycle::Y => (0..n).map(|i| h * (0..n).map(|j| self.b.get(i, j)).sum::<f64>()).collect(),
        }
    }
}

pub fn cycle_period(alpha: &OneForm, cycle: Cycle) -> f64 {
    alpha.period(cycle)
}

/// Wrap an angle difference into `(−π, π]`.
pub fn wrap_angle(d: f64) -> f64 {
    let w = (d + PI).rem_euclid(TAU) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}
