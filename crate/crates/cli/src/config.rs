use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use stlab::FormSpec;

use crate::error::CliError;

pub const FEM_NEL_CAP: usize = 32768;
pub const IGA_NEL_CAP: usize = 4096;
/// Largest Nel accepted by inf-sup sweeps; the dense singular value
/// computation is cubic in the dimension.
pub const SWEEP_NEL_CAP: usize = 4096;
pub const SWEEP_DEFAULT_NEL_MAX: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fem,
    Iga,
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.to_ascii_lowercase().as_str() {
            "fem" => Ok(Method::Fem),
            "iga" => Ok(Method::Iga),
            _ => Err(CliError::Config(format!("unknown method '{s}', expected 'fem' or 'iga'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormKind {
    Standard,
    FemQ0,
    FemScaled,
    IgaScaled,
    Penalty,
}

impl FromStr for FormKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "standard" => Ok(FormKind::Standard),
            "fem_q0" | "q0" | "tent1" => Ok(FormKind::FemQ0),
            "fem_scaled" => Ok(FormKind::FemScaled),
            "iga_scaled" | "tent2" => Ok(FormKind::IgaScaled),
            "penalty" | "tent3" => Ok(FormKind::Penalty),
            _ => Err(CliError::Config(format!(
                "unknown form '{s}', expected one of standard, fem_q0, fem_scaled, iga_scaled, penalty"
            ))),
        }
    }
}

/// `points` values of `log10 μ` equally spaced over `[log10_min, log10_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuGrid {
    pub log10_min: f64,
    pub log10_max: f64,
    pub points: usize,
}

impl Default for MuGrid {
    fn default() -> Self {
        MuGrid { log10_min: 0.0, log10_max: 6.0, points: 25 }
    }
}

impl MuGrid {
    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![10f64.powf(self.log10_min)],
            n => (0..n)
                .map(|i| {
                    let s = i as f64 / (n - 1) as f64;
                    10f64.powf(self.log10_min + s * (self.log10_max - self.log10_min))
                })
                .collect(),
        }
    }
}

impl FromStr for MuGrid {
    type Err = CliError;

    /// `min:max:points` in `log10 μ`.
    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("--mu-grid expects 'log10_min:log10_max:points', got '{s}'"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        Ok(MuGrid {
            log10_min: parts[0].trim().parse().map_err(|_| bad())?,
            log10_max: parts[1].trim().parse().map_err(|_| bad())?,
            points: parts[2].trim().parse().map_err(|_| bad())?,
        })
    }
}

/// Everything one experiment needs. Missing JSON fields take the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub method: Method,
    /// Spline degree; `None` means 1 for FEM and 2 for IGA.
    pub degree: Option<usize>,
    pub form: FormKind,
    pub delta: Option<f64>,
    /// Derivative order of the penalty; `None` means the degree.
    pub penalty_order: Option<usize>,
    pub per_element: bool,
    pub mu: f64,
    #[serde(rename = "T", alias = "t_final")]
    pub t_final: f64,
    pub omega: f64,
    /// Explicit element counts; empty means doubling from `nel_min` to `nel_max`.
    pub nel: Vec<usize>,
    pub nel_min: usize,
    pub nel_max: Option<usize>,
    pub mu_grid: MuGrid,
    pub quad_rhs: usize,
    /// Report errors relative to the exact solution's norms.
    pub relative: bool,
    pub out: Option<PathBuf>,
    pub plots: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            method: Method::Fem,
            degree: None,
            form: FormKind::Standard,
            delta: None,
            penalty_order: None,
            per_element: false,
            mu: 1000.0,
            t_final: 10.0,
            omega: 1.25 * PI,
            nel: Vec::new(),
            nel_min: 4,
            nel_max: None,
            mu_grid: MuGrid::default(),
            quad_rhs: 12,
            relative: false,
            out: None,
            plots: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn degree(&self) -> usize {
        self.degree.unwrap_or(match self.method {
            Method::Fem => 1,
            Method::Iga => 2,
        })
    }

    pub fn nel_cap(&self) -> usize {
        match self.method {
            Method::Fem => FEM_NEL_CAP,
            Method::Iga => IGA_NEL_CAP,
        }
    }

    /// Element counts for convergence runs.
    pub fn nel_list(&self) -> Vec<usize> {
        self.nel_list_up_to(self.nel_max.unwrap_or(self.nel_cap()))
    }

    /// Element counts for sweeps, which default to a smaller top level.
    pub fn sweep_nel_list(&self) -> Vec<usize> {
        self.nel_list_up_to(self.nel_max.unwrap_or(SWEEP_DEFAULT_NEL_MAX))
    }

    fn nel_list_up_to(&self, max: usize) -> Vec<usize> {
        if !self.nel.is_empty() {
            return self.nel.clone();
        }
        let mut out = Vec::new();
        let mut n = self.nel_min.max(1);
        while n <= max {
            out.push(n);
            n *= 2;
        }
        out
    }

    /// The bilinear form at `mu`.
    pub fn form_at(&self, mu: f64) -> FormSpec {
        let spec = match self.form {
            FormKind::Standard => FormSpec::standard(mu),
            FormKind::FemQ0 => FormSpec::fem_q0(mu),
            FormKind::FemScaled => FormSpec::fem_scaled(mu),
            FormKind::IgaScaled => FormSpec::iga_scaled(mu),
            FormKind::Penalty => FormSpec::penalty(
                mu,
                self.delta.unwrap_or(0.01),
                self.penalty_order.unwrap_or(self.degree()),
            ),
        };
        if self.per_element {
            spec.per_element()
        } else {
            spec
        }
    }

    pub fn form(&self) -> FormSpec {
        self.form_at(self.mu)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let err = |msg: String| Err(CliError::Config(msg));
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return err(format!("--mu must be a positive number, got {}", self.mu));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return err(format!("--T must be a positive number, got {}", self.t_final));
        }
        if !self.omega.is_finite() {
            return err(format!("--omega must be finite, got {}", self.omega));
        }
        if let Some(delta) = self.delta {
            if !(delta > 0.0 && delta.is_finite()) {
                return err(format!("--delta must be a positive number, got {delta}"));
            }
        }
        if self.delta.is_some() && self.form != FormKind::Penalty {
            return err("--delta only applies to --form penalty".into());
        }
        let p = self.degree();
        if p == 0 {
            return err("--degree must be at least 1".into());
        }
        if self.method == Method::Fem && p != 1 {
            return err(format!("--method fem uses degree 1, got --degree {p}; use --method iga for higher degrees"));
        }
        if let Some(q) = self.penalty_order {
            if q == 0 || q > p {
                return err(format!("penalty_order must lie in 1..={p}, got {q}"));
            }
        }
        if self.quad_rhs == 0 || self.quad_rhs > 64 {
            return err(format!("--quad-rhs must lie in 1..=64, got {}", self.quad_rhs));
        }
        if self.nel.contains(&0) || self.nel_min == 0 {
            return err("element counts must be at least 1".into());
        }
        if let Some(&n) = self.nel.iter().find(|&&n| n > self.nel_cap()) {
            return err(format!("--nel {n} exceeds the cap {} for this method", self.nel_cap()));
        }
        if let Some(max) = self.nel_max {
            if max < self.nel_min {
                return err(format!("--nel-max {max} is below the smallest element count {}", self.nel_min));
            }
        }
        let g = self.mu_grid;
        if !(g.log10_min.is_finite() && g.log10_max.is_finite()) || g.log10_max < g.log10_min {
            return err(format!("--mu-grid needs finite bounds with min <= max, got {}:{}", g.log10_min, g.log10_max));
        }
        if g.points == 0 {
            return err("--mu-grid needs at least one point".into());
        }
        self.form().validate(p).map_err(CliError::from)
    }

    /// Additional checks for inf-sup sweeps.
    pub fn validate_sweep(&self) -> Result<(), CliError> {
        self.validate()?;
        if let Some(&n) = self.sweep_nel_list().iter().find(|&&n| n > SWEEP_NEL_CAP) {
            return Err(CliError::Config(format!(
                "sweep element count {n} exceeds the inf-sup cap {SWEEP_NEL_CAP}"
            )));
        }
        Ok(())
    }
}
