//! Experiment configuration: TOML in, validated struct out.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::Amp2;

/// Which emulation pipeline produces the sampled data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Static embedding of the state and its metric image into one ancilla.
    Naimark,
    /// One-ancilla unitary dilation; branches carry psi and rho psi.
    Bond,
    /// Two-ancilla unitary dilation; adds the metric-frame state.
    Gbond,
    /// No sampling: exact expectations only.
    Exact,
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "naimark" => Ok(Scheme::Naimark),
            "bond" => Ok(Scheme::Bond),
            "gbond" => Ok(Scheme::Gbond),
            "exact" => Ok(Scheme::Exact),
            other => Err(Error::Config {
                field: "scheme".into(),
                message: format!("unknown scheme `{other}`, expected naimark|bond|gbond|exact"),
            }),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Naimark => "naimark",
            Scheme::Bond => "bond",
            Scheme::Gbond => "gbond",
            Scheme::Exact => "exact",
        })
    }
}

/// Full description of one experiment run. Every field has a default, so an
/// empty TOML file is a valid config; unknown keys are rejected.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Non-Hermiticity strengths to sweep.
    pub r_values: Vec<f64>,
    pub t_start: f64,
    pub t_stop: f64,
    /// Number of grid points including both endpoints.
    pub samples: usize,
    pub scheme: Scheme,
    /// Shots per measurement setting.
    pub shots: u64,
    /// Master seeds; the first one produces the emitted dataset, the rest
    /// are available for repeat-run statistics.
    pub seeds: Vec<u64>,
    /// Initial system state as (re0, im0, re1, im1); normalised on use.
    pub psi0: [f64; 4],
    pub out_dir: PathBuf,
    pub emit_plots: bool,
    /// RK4 step for the consistency integration.
    pub ode_step: f64,
    /// Finite-difference spacing for metric-root derivatives.
    pub fd_spacing: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            r_values: vec![0.6, 0.9, 1.0, 1.2],
            t_start: 0.0,
            t_stop: 5.0,
            samples: 101,
            scheme: Scheme::Gbond,
            shots: 4096,
            seeds: vec![17],
            psi0: [1.0, 0.0, 0.0, 0.0],
            out_dir: PathBuf::from("out"),
            emit_plots: false,
            ode_step: 1e-3,
            fd_spacing: 1e-3,
        }
    }
}

fn config_err(field: &str, message: impl Into<String>) -> Error {
    Error::Config { field: field.into(), message: message.into() }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text)
            .map_err(|e| config_err("<toml>", e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            config_err("<path>", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r_values.is_empty() {
            return Err(config_err("r_values", "need at least one value"));
        }
        if self.r_values.iter().any(|r| !r.is_finite()) {
            return Err(config_err("r_values", "values must be finite"));
        }
        if !self.t_start.is_finite() || !self.t_stop.is_finite() || self.t_stop <= self.t_start {
            return Err(config_err(
                "t_stop",
                format!("need t_stop > t_start, got [{}, {}]", self.t_start, self.t_stop),
            ));
        }
        if self.samples < 2 {
            return Err(config_err("samples", "need at least 2 grid points"));
        }
        if self.scheme != Scheme::Exact && self.shots == 0 {
            return Err(config_err("shots", "sampled schemes need shots >= 1"));
        }
        if self.seeds.is_empty() {
            return Err(config_err("seeds", "need at least one seed"));
        }
        if !(self.ode_step.is_finite() && self.ode_step > 0.0) {
            return Err(config_err("ode_step", "must be positive and finite"));
        }
        if !(self.fd_spacing.is_finite() && self.fd_spacing > 0.0) {
            return Err(config_err("fd_spacing", "must be positive and finite"));
        }
        if self.psi0.iter().any(|x| !x.is_finite()) {
            return Err(config_err("psi0", "components must be finite"));
        }
        let norm_sqr: f64 = self.psi0.iter().map(|x| x * x).sum();
        if norm_sqr <= 1e-14 {
            return Err(config_err("psi0", "initial state must not vanish"));
        }
        Ok(())
    }

    /// Normalised initial state.
    pub fn psi0_amps(&self) -> Result<Amp2> {
        self.validate()?;
        let norm: f64 = self.psi0.iter().map(|x| x * x).sum::<f64>().sqrt();
        Ok([
            C64::new(self.psi0[0] / norm, self.psi0[1] / norm),
            C64::new(self.psi0[2] / norm, self.psi0[3] / norm),
        ])
    }

    /// The time grid implied by (t_start, t_stop, samples).
    pub fn grid(&self) -> Vec<f64> {
        crate::metric::linspace(self.t_start, self.t_stop, self.samples)
    }

    /// Seed used for the emitted dataset.
    pub fn primary_seed(&self) -> u64 {
        self.seeds.first().copied().unwrap_or(0)
    }
}
