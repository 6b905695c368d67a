//! Run configuration: a flat file of `key = value` lines with `#` comments.
//!
//! ```text
//! n = 64
//! hamiltonian = "0.1*cos(x)*cos(y)"
//! translation = [1.0, 0.0]
//! t_max = 20
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::expr;
use crate::field::{DerivativeScheme, GridSpec};
use crate::mcf::{FlowConfig, FluxQuadrature, Integrator};

pub const N_RANGE: (usize, usize) = (8, 512);
pub const M_RANGE: (usize, usize) = (4, 4096);

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub scheme: DerivativeScheme,
    pub hamiltonian: String,
    /// Isotopy steps in `s`.
    pub m: usize,
    /// Translation `(a, b)` applied before the Hamiltonian isotopy.
    pub translation: [f64; 2],
    pub dt_safety: f64,
    pub t_max: f64,
    pub conv_threshold: f64,
    pub regraph_interval: usize,
    pub defect_tolerance: f64,
    pub integrator: Integrator,
    pub flux_quadrature: FluxQuadrature,
    pub fixed_dt: Option<f64>,
    pub max_steps: usize,
    /// Observers run every `cadence` steps.
    pub cadence: usize,
    /// Write a snapshot every this many steps; 0 writes only the endpoints.
    pub snapshot_every: usize,
    pub output: PathBuf,
    pub emit_svg: bool,
    /// Reserved; no code path is stochastic.
    pub seed: u64,
    pub family_m2: usize,
    pub family_dt: f64,
    pub family_t: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let flow = FlowConfig::default();
        RunConfig {
            n: 64,
            scheme: DerivativeScheme::Spectral,
            hamiltonian: "0".into(),
            m: 128,
            translation: [0.0, 0.0],
            dt_safety: flow.dt_safety,
            t_max: flow.t_max,
            conv_threshold: flow.conv_threshold,
            regraph_interval: flow.regraph_interval,
            defect_tolerance: 1e-3,
            integrator: flow.integrator,
            flux_quadrature: flow.flux_quadrature,
            fixed_dt: None,
            max_steps: flow.max_steps,
            cadence: 1,
            snapshot_every: 0,
            output: PathBuf::from("out"),
            emit_svg: true,
            seed: 0,
            family_m2: 8,
            family_dt: 2e-3,
            family_t: 0.05,
        }
    }
}

impl RunConfig {
    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.n, self.scheme)
    }

    pub fn flow(&self) -> FlowConfig {
        FlowConfig {
            dt_safety: self.dt_safety,
            t_max: self.t_max,
            conv_threshold: self.conv_threshold,
            regraph_interval: self.regraph_interval,
            defect_tolerance: self.defect_tolerance,
            integrator: self.integrator,
            flux_quadrature: self.flux_quadrature,
            fixed_dt: self.fixed_dt,
            max_steps: self.max_steps,
            cadence: self.cadence,
            snapshot_every: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key, message: String| Err(ConfigError::Invalid { key, message });
        if self.n < N_RANGE.0 || self.n > N_RANGE.1 || !self.n.is_multiple_of(2) {
            return invalid("n", format!("{} is not an even number in [{}, {}]", self.n, N_RANGE.0, N_RANGE.1));
        }
        if self.m < M_RANGE.0 || self.m > M_RANGE.1 {
            return invalid("m", format!("{} is outside [{}, {}]", self.m, M_RANGE.0, M_RANGE.1));
        }
        if let Err(e) = expr::parse(&self.hamiltonian) {
            return invalid("hamiltonian", e.to_string());
        }
        if !self.translation.iter().all(|v| v.is_finite()) {
            return invalid("translation", "components must be finite".into());
        }
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return invalid("dt_safety", format!("{} is outside (0, 1]", self.dt_safety));
        }
        let positive: [(&'static str, f64); 6] = [
            ("t_max", self.t_max),
            ("conv_threshold", self.conv_threshold),
            ("defect_tolerance", self.defect_tolerance),
            ("family_dt", self.family_dt),
            ("family_t", self.family_t),
            ("fixed_dt", self.fixed_dt.unwrap_or(1.0)),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(key, format!("{v} must be positive and finite"));
            }
        }
        let nonzero: [(&'static str, usize); 4] = [
            ("regraph_interval", self.regraph_interval),
            ("max_steps", self.max_steps),
            ("cadence", self.cadence),
            ("family_m2", self.family_m2),
        ];
        for (key, v) in nonzero {
            if v == 0 {
                return invalid(key, "must be at least 1".into());
            }
        }
        if !self.family_m2.is_multiple_of(2) || self.family_m2 < 2 {
            return invalid("family_m2", format!("{} must be even", self.family_m2));
        }
        Ok(())
    }

    /// Canonical text form; `parse_config(c.to_text())` returns `c`.
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(0);
        ConfigError::Parse { line, message: e.message().to_string() }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_config(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::evaluate;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = parse_config("n = 32\nhamiltonian = \"0.1*cos(x)*cos(y)\"\nt_max = 5\n").unwrap();
        assert_eq!(c.n, 32);
        assert_eq!(c.t_max, 5.0);
        assert_eq!(c.m, RunConfig::default().m);
        let e = expr::parse(&c.hamiltonian).unwrap();
        let v = evaluate(&e, 0.3, 0.4, 0.0).unwrap();
        assert!((v - 0.1 * 0.3f64.cos() * 0.4f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn n_validation_names_key() {
        for text in ["n = 7", "n = 6", "n = 1024"] {
            match parse_config(text) {
                Err(ConfigError::Invalid { key: "n", .. }) => {}
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(matches!(parse_config("m = 2"), Err(ConfigError::Invalid { key: "m", .. })));
    }

    #[test]
    fn unknown_key_reports_line() {
        match parse_config("# comment\nn = 16\nbogus = 3\n") {
            Err(ConfigError::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("bogus"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_reports_line() {
        assert!(matches!(parse_config("n = 16\nt_max = = 3\n"), Err(ConfigError::Parse { line: 2, .. })));
    }

    #[test]
    fn bad_hamiltonian() {
        assert!(matches!(parse_config("hamiltonian = \"sin x\""), Err(ConfigError::Invalid { key: "hamiltonian", .. })));
    }

    #[test]
    fn text_round_trip() {
        let c = RunConfig {
            translation: [1.0, -0.25],
            fixed_dt: Some(1e-3),
            integrator: Integrator::Heun,
            scheme: DerivativeScheme::Centered4,
            ..RunConfig::default()
        };
        assert_eq!(parse_config(&c.to_text()).unwrap(), c);
    }
}
