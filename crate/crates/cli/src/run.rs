use rayon::prelude::*;
use stlab::analysis::{exact_norms, solve_report, DEFAULT_SLOPE_WINDOW};
use stlab::{
    convergence_slope, error_norms, infsup_beta, stability_bounds, trial_test_pair, BoundsReport, ErrorReport,
    ManufacturedSolution, Mesh, ReducedSpace, SplineSpace,
};

use crate::config::{ExperimentConfig, Method};
use crate::error::CliError;

/// Cells with `β` above this are kept but flagged as unsuitable discretizations.
pub const OVERSIZED_BETA: f64 = 1e2;

pub const DEFAULT_SOLVE_NEL: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub nel: usize,
    pub h: f64,
    pub err_h1: f64,
    pub err_l2: f64,
    pub best_h1: f64,
    /// Least-squares slope of the last rows up to this one; `None` on the first row.
    pub slope_h1: Option<f64>,
    pub slope_l2: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub bounds: BoundsReport,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub mu: f64,
    pub h: f64,
    /// `NaN` when the cell failed.
    pub beta: f64,
}

impl SweepCell {
    pub fn neg_inf(&self) -> bool {
        self.beta == 0.0
    }

    pub fn oversized(&self) -> bool {
        self.beta > OVERSIZED_BETA
    }

    pub fn failed(&self) -> bool {
        self.beta.is_nan()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub cells: Vec<SweepCell>,
    pub method: Method,
    pub form: String,
    pub degree: usize,
    pub t_final: f64,
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub nel: usize,
    pub report: ErrorReport,
    pub pivot_ratio: f64,
    /// `(t, u_h(t), u(t))` at breakpoints and element midpoints.
    pub samples: Vec<(f64, f64, f64)>,
}

/// Runs `f` on a pool of at most `threads` workers, or on the global pool.
pub fn with_thread_limit<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

/// `STLAB_THREADS`, when set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("STLAB_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

fn spaces(cfg: &ExperimentConfig, nel: usize) -> Result<(ReducedSpace, ReducedSpace), CliError> {
    let mesh = Mesh::uniform(cfg.t_final, nel)?;
    Ok(trial_test_pair(SplineSpace::maximal(mesh, cfg.degree()))?)
}

fn convergence_row(cfg: &ExperimentConfig, nel: usize, exact: &ManufacturedSolution) -> Result<ErrorReport, CliError> {
    let (trial, test) = spaces(cfg, nel)?;
    let sol = solve_report(&trial, &test, &cfg.form(), |t| exact.f(t), cfg.quad_rhs)?;
    let report = error_norms(&trial, &sol.coeffs, exact)?;
    if cfg.relative {
        let mesh = trial.parent().mesh().clone();
        Ok(report.relative(&exact_norms(exact, &mesh)))
    } else {
        Ok(report)
    }
}

fn trailing_slope(points: &[(f64, f64)]) -> f64 {
    if points.iter().any(|&(h, e)| !(h > 0.0 && e > 0.0 && e.is_finite())) {
        return f64::NAN;
    }
    convergence_slope(points, None).unwrap_or(f64::NAN)
}

/// Fills `slope_*` from the trailing window of up to four rows.
pub fn attach_slopes(rows: &mut [ConvergenceRow]) {
    for i in 0..rows.len() {
        if i == 0 {
            rows[i].slope_h1 = None;
            rows[i].slope_l2 = None;
            continue;
        }
        let lo = (i + 1).saturating_sub(DEFAULT_SLOPE_WINDOW);
        let h1: Vec<_> = rows[lo..=i].iter().map(|r| (r.h, r.err_h1)).collect();
        let l2: Vec<_> = rows[lo..=i].iter().map(|r| (r.h, r.err_l2)).collect();
        rows[i].slope_h1 = Some(trailing_slope(&h1));
        rows[i].slope_l2 = Some(trailing_slope(&l2));
    }
}

/// One row per element count. Rows whose solve fails carry `NaN` errors.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceTable, CliError> {
    cfg.validate()?;
    let exact = ManufacturedSolution::new(cfg.mu, cfg.omega);
    let nels = cfg.nel_list();
    let mut rows: Vec<ConvergenceRow> = nels
        .par_iter()
        .map(|&nel| {
            let h = cfg.t_final / nel as f64;
            let (err_h1, err_l2, best_h1) = match convergence_row(cfg, nel, &exact) {
                Ok(r) => (r.h1_semi, r.l2, r.best_h1),
                Err(_) => (f64::NAN, f64::NAN, f64::NAN),
            };
            ConvergenceRow { nel, h, err_h1, err_l2, best_h1, slope_h1: None, slope_l2: None }
        })
        .collect();
    rows.sort_by_key(|r| r.nel);
    attach_slopes(&mut rows);
    Ok(ConvergenceTable { rows, bounds: stability_bounds(cfg.mu, cfg.t_final)? })
}

fn sweep(cfg: &ExperimentConfig, mus: &[f64], nels: &[usize]) -> Result<SweepResult, CliError> {
    let pairs: Vec<_> = nels.par_iter().map(|&nel| spaces(cfg, nel).ok()).collect();
    let jobs: Vec<(f64, usize)> = mus.iter().flat_map(|&mu| (0..nels.len()).map(move |k| (mu, k))).collect();
    let mut cells: Vec<SweepCell> = jobs
        .par_iter()
        .map(|&(mu, k)| {
            let h = cfg.t_final / nels[k] as f64;
            let beta = pairs[k]
                .as_ref()
                .and_then(|(trial, test)| infsup_beta(trial, test, &cfg.form_at(mu)).ok())
                .unwrap_or(f64::NAN);
            SweepCell { mu, h, beta }
        })
        .collect();
    cells.sort_by(|a, b| a.mu.total_cmp(&b.mu).then(a.h.total_cmp(&b.h)));
    Ok(SweepResult {
        cells,
        method: cfg.method,
        form: cfg.form().name().to_string(),
        degree: cfg.degree(),
        t_final: cfg.t_final,
    })
}

/// `β` over the `μ` grid times the element counts.
pub fn run_infsup_sweep(cfg: &ExperimentConfig) -> Result<SweepResult, CliError> {
    cfg.validate_sweep()?;
    sweep(cfg, &cfg.mu_grid.values(), &cfg.sweep_nel_list())
}

/// `β` at the configured `μ` for each element count.
pub fn run_infsup(cfg: &ExperimentConfig) -> Result<SweepResult, CliError> {
    cfg.validate_sweep()?;
    sweep(cfg, &[cfg.mu], &cfg.sweep_nel_list())
}

pub fn run_bounds(cfg: &ExperimentConfig) -> Result<BoundsReport, CliError> {
    cfg.validate()?;
    Ok(stability_bounds(cfg.mu, cfg.t_final)?)
}

pub fn run_solve(cfg: &ExperimentConfig) -> Result<SolveOutput, CliError> {
    cfg.validate()?;
    let nel = cfg.nel.first().copied().unwrap_or(DEFAULT_SOLVE_NEL);
    let exact = ManufacturedSolution::new(cfg.mu, cfg.omega);
    let (trial, test) = spaces(cfg, nel)?;
    let sol = solve_report(&trial, &test, &cfg.form(), |t| exact.f(t), cfg.quad_rhs)?;
    let report = error_norms(&trial, &sol.coeffs, &exact)?;
    let mesh = trial.parent().mesh().clone();
    let mut ts: Vec<f64> = mesh.breakpoints().to_vec();
    ts.extend(mesh.elements().map(|(a, b)| 0.5 * (a + b)));
    ts.sort_by(f64::total_cmp);
    let samples = ts
        .into_iter()
        .map(|t| Ok((t, stlab::spaces::eval_discrete(&trial, &sol.coeffs, t, 0)?, exact.u(t))))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(SolveOutput { nel, report, pivot_ratio: sol.pivot_ratio, samples })
}
