//! Discrete solves and error measurement against an exact solution.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_h1_gram, assemble_load, assemble_matrix, FormSpec};
use crate::error::{Error, Result};
use crate::linalg::{BandCholesky, BandedLu};
use crate::quadrature::{gauss_legendre, DEFAULT_RHS_POINTS};
use crate::spaces::ReducedSpace;
use crate::spline::{CoeffVector, Mesh};

/// A function of time with derivatives of every order.
pub trait ExactSolution: Sync {
    /// k-th derivative at `t`.
    fn derivative(&self, k: usize, t: f64) -> f64;

    fn value(&self, t: f64) -> f64 {
        self.derivative(0, t)
    }

    /// `u'' + μu`.
    fn forcing(&self, mu: f64, t: f64) -> f64 {
        self.derivative(2, t) + mu * self.derivative(0, t)
    }
}

/// `u(t) = sin²(ωt)`, with `u(0) = u'(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedSolution {
    pub mu: f64,
    pub omega: f64,
}

pub const DEFAULT_OMEGA: f64 = 1.25 * PI;

impl ManufacturedSolution {
    pub fn new(mu: f64, omega: f64) -> Self {
        Self { mu, omega }
    }

    pub fn with_default_omega(mu: f64) -> Self {
        Self::new(mu, DEFAULT_OMEGA)
    }

    pub fn u(&self, t: f64) -> f64 {
        self.derivative(0, t)
    }

    pub fn du(&self, t: f64) -> f64 {
        self.derivative(1, t)
    }

    pub fn ddu(&self, t: f64) -> f64 {
        self.derivative(2, t)
    }

    /// `f = 2ω² cos(2ωt) + μ sin²(ωt)`.
    pub fn f(&self, t: f64) -> f64 {
        self.forcing(self.mu, t)
    }
}

impl ExactSolution for ManufacturedSolution {
    fn derivative(&self, k: usize, t: f64) -> f64 {
        let w = self.omega;
        if k == 0 {
            let s = (w * t).sin();
            return s * s;
        }
        let w2 = 2.0 * w;
        -0.5 * w2.powi(k as i32) * (w2 * t + k as f64 * PI / 2.0).cos()
    }
}

/// `Σ c_k t^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial(pub Vec<f64>);

impl ExactSolution for Polynomial {
    fn derivative(&self, k: usize, t: f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .skip(k)
            .map(|(n, c)| {
                let falling: f64 = (n - k + 1..=n).map(|m| m as f64).product();
                c * falling * t.powi((n - k) as i32)
            })
            .sum()
    }
}

/// Errors of one discrete solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub h: f64,
    pub h1_semi: f64,
    pub l2: f64,
    pub best_h1: f64,
}

impl ErrorReport {
    /// Errors divided by the matching norms of the exact solution.
    pub fn relative(&self, norms: &ExactNorms) -> ErrorReport {
        ErrorReport {
            h: self.h,
            h1_semi: self.h1_semi / norms.h1_semi,
            l2: self.l2 / norms.l2,
            best_h1: self.best_h1 / norms.h1_semi,
        }
    }
}

/// `|u|_{H¹}` and `‖u‖_{L²}` of an exact solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactNorms {
    pub h1_semi: f64,
    pub l2: f64,
}

/// `|u|_{H^k}` by element-wise quadrature on `mesh`.
pub fn exact_seminorm(exact: &dyn ExactSolution, mesh: &Mesh, k: usize) -> f64 {
    let rule = gauss_legendre(DEFAULT_RHS_POINTS).unwrap();
    mesh.elements()
        .map(|(a, b)| rule.integrate(a, b, |t| exact.derivative(k, t).powi(2)))
        .sum::<f64>()
        .sqrt()
}

pub fn exact_norms(exact: &dyn ExactSolution, mesh: &Mesh) -> ExactNorms {
    ExactNorms { h1_semi: exact_seminorm(exact, mesh, 1), l2: exact_seminorm(exact, mesh, 0) }
}

/// Solves `a_h(u_h, v_h) = ⟨f, v_h⟩` for all test `v_h`.
///
/// Nearly singular systems are solved anyway, since the blow-up of the
/// unstable discretizations is the quantity of interest; only an exactly
/// zero pivot is an error. Use [`solve_report`] to see the pivot ratio.
pub fn solve(
    trial: &ReducedSpace,
    test: &ReducedSpace,
    form: &FormSpec,
    f: impl Fn(f64) -> f64,
) -> Result<CoeffVector> {
    solve_with_quad(trial, test, form, f, DEFAULT_RHS_POINTS)
}

/// As [`solve`], with `quad_order` Gauss points per element for the load.
pub fn solve_with_quad(
    trial: &ReducedSpace,
    test: &ReducedSpace,
    form: &FormSpec,
    f: impl Fn(f64) -> f64,
    quad_order: usize,
) -> Result<CoeffVector> {
    Ok(solve_report(trial, test, form, f, quad_order)?.coeffs)
}

/// A discrete solution and the conditioning of its system.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    pub coeffs: CoeffVector,
    /// Smallest LU pivot over `max |A_ij|`; below `ε` the system is singular
    /// to working precision.
    pub pivot_ratio: f64,
}

impl DiscreteSolution {
    pub fn near_singular(&self) -> bool {
        self.pivot_ratio <= f64::EPSILON
    }
}

pub fn solve_report(
    trial: &ReducedSpace,
    test: &ReducedSpace,
    form: &FormSpec,
    f: impl Fn(f64) -> f64,
    quad_order: usize,
) -> Result<DiscreteSolution> {
    if trial.dim() != test.dim() {
        return Err(Error::DimensionMismatch { expected: trial.dim(), found: test.dim() });
    }
    let a = assemble_matrix(trial, test, form)?;
    let rhs = assemble_load(test, f, quad_order)?;
    let lu = BandedLu::factor_with_tol(&a, 0.0)?;
    Ok(DiscreteSolution { coeffs: lu.solve(&rhs).into(), pivot_ratio: lu.pivot_ratio() })
}

/// `(|u − u_h|_{H¹}, ‖u − u_h‖_{L²})` by 12-point element quadrature.
pub fn discrete_errors(space: &ReducedSpace, coeffs: &[f64], exact: &dyn ExactSolution) -> Result<(f64, f64)> {
    if coeffs.len() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), found: coeffs.len() });
    }
    let parent = space.parent();
    let mesh = parent.mesh();
    let rule = gauss_legendre(DEFAULT_RHS_POINTS)?;
    let (mut e1, mut e0) = (0.0, 0.0);
    for l in 0..mesh.num_elements() {
        let (a, b) = mesh.element(l);
        for (x, w) in rule.mapped(a, b) {
            let loc = parent.local_basis(l, x, 1);
            let (mut v, mut dv) = (0.0, 0.0);
            for r in 0..loc.values[0].len() {
                if let Some(i) = space.reduced_index(loc.first + r) {
                    v += coeffs[i] * loc.values[0][r];
                    dv += coeffs[i] * loc.values[1][r];
                }
            }
            e0 += w * (exact.derivative(0, x) - v).powi(2);
            e1 += w * (exact.derivative(1, x) - dv).powi(2);
        }
    }
    Ok((e1.sqrt(), e0.sqrt()))
}

/// H¹-seminorm projection of `u` onto the trial space and its error.
///
/// Requires `u(0) = 0`, so that the projection is the best approximation.
pub fn best_approx_h1(trial: &ReducedSpace, exact: &dyn ExactSolution) -> Result<(CoeffVector, f64)> {
    let parent = trial.parent();
    let mesh = parent.mesh();
    let rule = gauss_legendre(DEFAULT_RHS_POINTS)?;
    let mut rhs = vec![0.0; trial.dim()];
    for l in 0..mesh.num_elements() {
        let (a, b) = mesh.element(l);
        for (x, w) in rule.mapped(a, b) {
            let du = exact.derivative(1, x);
            let loc = parent.local_basis(l, x, 1);
            for (r, db) in loc.values[1].iter().enumerate() {
                if let Some(i) = trial.reduced_index(loc.first + r) {
                    rhs[i] += w * du * db;
                }
            }
        }
    }
    let chol = BandCholesky::factor(&assemble_h1_gram(trial))?;
    let coeffs = chol.solve(&rhs);
    let (err, _) = discrete_errors(trial, &coeffs, exact)?;
    Ok((coeffs.into(), err))
}

/// Full error report of a trial-space member.
pub fn error_norms(trial: &ReducedSpace, coeffs: &[f64], exact: &dyn ExactSolution) -> Result<ErrorReport> {
    let (h1_semi, l2) = discrete_errors(trial, coeffs, exact)?;
    let (_, best_h1) = best_approx_h1(trial, exact)?;
    Ok(ErrorReport { h: trial.parent().mesh().h(), h1_semi, l2, best_h1 })
}

/// Least-squares slope of `log(error)` against `log(h)` over the last
/// `window` points (all points when `None`).
pub fn convergence_slope(points: &[(f64, f64)], window: Option<usize>) -> Result<f64> {
    let take = window.unwrap_or(points.len()).min(points.len());
    if take < 2 {
        return Err(Error::InvalidParameter(format!("slope fit needs at least 2 points, got {take}")));
    }
    let pts = &points[points.len() - take..];
    if let Some(&(h, e)) = pts.iter().find(|(h, e)| !(*h > 0.0 && *e > 0.0 && h.is_finite() && e.is_finite())) {
        return Err(Error::InvalidParameter(format!("slope fit needs positive finite data, got ({h}, {e})")));
    }
    let n = take as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("slope fit needs distinct mesh sizes".into()));
    }
    Ok(sxy / sxx)
}

/// Default window of [`convergence_slope`] used by the experiments.
pub const DEFAULT_SLOPE_WINDOW: usize = 4;
