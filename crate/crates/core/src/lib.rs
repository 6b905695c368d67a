//! Mean curvature flow of symplectomorphism graphs on the flat torus.
//!
//! A map `f: T² → T²` is stored as a periodic displacement on an `n × n`
//! grid. Its graph is a Lagrangian surface in `T² × T²` which is moved by
//! its mean curvature and re-graphed after every step. Along the way the
//! crate tracks area, the symplectic defect, the flux of the path, and the
//! Lagrangian angle with its windings.
//!
//! ```
//! use lagflow::field::GridSpec;
//! use lagflow::hamiltonian::{integrate_isotopy, HamiltonianSpec};
//! use lagflow::diagnostics::flux_periods;
//!
//! let grid = GridSpec::spectral(16).unwrap();
//! let g = HamiltonianSpec::parse("0.1*cos(x)*cos(y)").unwrap();
//! let iso = integrate_isotopy(&g, grid, 16).unwrap();
//! let (px, py) = flux_periods(&iso).periods;
//! assert!(px.abs() < 1e-8 && py.abs() < 1e-8);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod expr;
pub mod field;
pub mod hamiltonian;
pub mod mcf;
pub mod session;
pub mod torus_map;

pub use error::{Error, Result};
pub use field::{DerivativeScheme, GridSpec, OneForm, ScalarField, VectorField2};
pub use mcf::{run_flow, FlowConfig, FlowHistory, LagrangianGraph};
pub use torus_map::TorusMap;
