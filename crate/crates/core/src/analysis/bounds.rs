//! Closed-form mesh-size thresholds and stability constants for
//! `u'' + μu = f` on `(0, T)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Thresholds (upper bounds on `h`) and constants for one `(μ, T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub mu: f64,
    pub t_final: f64,
    /// Gårding parameter used for `iga_garding` and `c2_garding`.
    pub b: f64,
    /// Sharpened linear FEM threshold `√3π / (√2 (2+√μT) μT)`.
    pub fem_theory: f64,
    /// Linear FEM threshold `2√3 / ((2+√μT) μT)`.
    pub fem_raw: f64,
    /// `√(12/μ)`.
    pub fem_fd: f64,
    /// Quadratic IGA threshold `π² / (√2 (2+√μT) μT)`.
    pub iga_zank: f64,
    /// Gårding-based IGA threshold for parameter `b`.
    pub iga_garding: f64,
    /// `√(9/μ)`.
    pub iga_empirical: f64,
    /// IGA inf-sup lower bound `2π² / ((2+√μT)² (π² + 4μT²))`.
    pub beta1: f64,
    /// FEM inf-sup lower bound `8 / ((2+√μT)² (4 + μT²))`.
    pub beta_fem: f64,
    /// Bracket `(3b + μT²(8b/π² − ½)) / (2b − μT²)` of the Gårding stability estimate.
    pub c2_garding: f64,
    /// Full Gårding stability constant `(2+√μT) · c2_garding`.
    pub garding_stab_const: f64,
    /// Continuity constant `1 + 4T²μ/π²`.
    pub cont_const: f64,
    /// Continuous stability constant `(2+√μT)/2`.
    pub stab_const: f64,
}

fn check_params(mu: f64, t_final: f64) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter(format!("T must be positive, got {t_final}")));
    }
    Ok(())
}

/// The `b` maximizing `√((2b − μT²) / (2b(2+b)μ))`.
pub fn optimal_b(mu: f64, t_final: f64) -> f64 {
    let m = mu * t_final * t_final;
    (m + (m * m + 4.0 * m).sqrt()) / 2.0
}

/// All bounds with the optimal Gårding parameter.
pub fn stability_bounds(mu: f64, t_final: f64) -> Result<BoundsReport> {
    check_params(mu, t_final)?;
    stability_bounds_with_b(mu, t_final, optimal_b(mu, t_final))
}

/// All bounds with a given Gårding parameter `b > μT²/2`.
pub fn stability_bounds_with_b(mu: f64, t_final: f64, b: f64) -> Result<BoundsReport> {
    check_params(mu, t_final)?;
    let mt2 = mu * t_final * t_final;
    if !(b > mt2 / 2.0 && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("Garding parameter b = {b} must exceed muT^2/2 = {}", mt2 / 2.0)));
    }
    let s = 2.0 + mu.sqrt() * t_final;
    let pi2 = PI * PI;
    let garding_prefactor = PI.powi(5) / ((pi2 + 4.0 * mt2) * (pi2 + 2.0 * mt2 * s));
    let c2 = (3.0 * b + mt2 * (8.0 * b / pi2 - 0.5)) / (2.0 * b - mt2);
    Ok(BoundsReport {
        mu,
        t_final,
        b,
        fem_theory: 3f64.sqrt() * PI / (2f64.sqrt() * s * mu * t_final),
        fem_raw: 2.0 * 3f64.sqrt() / (s * mu * t_final),
        fem_fd: (12.0 / mu).sqrt(),
        iga_zank: pi2 / (2f64.sqrt() * s * mu * t_final),
        iga_garding: garding_prefactor * ((2.0 * b - mt2) / (2.0 * b * (2.0 + b) * mu)).sqrt(),
        iga_empirical: (9.0 / mu).sqrt(),
        beta1: 2.0 * pi2 / (s * s * (pi2 + 4.0 * mt2)),
        beta_fem: 8.0 / (s * s * (4.0 + mt2)),
        c2_garding: c2,
        garding_stab_const: s * c2,
        cont_const: 1.0 + 4.0 * t_final * t_final * mu / pi2,
        stab_const: s / 2.0,
    })
}

/// Quasi-optimality constant `(4b/π²)(π² + 4μT²)/(2b − μT²)` of the Gårding analysis.
pub fn garding_quasi_opt(mu: f64, t_final: f64, b: f64) -> f64 {
    let mt2 = mu * t_final * t_final;
    4.0 * b / (PI * PI) * (PI * PI + 4.0 * mt2) / (2.0 * b - mt2)
}

/// Quasi-optimality constant `1 + cont_const / β` for a discrete inf-sup `β`.
pub fn quasi_opt_const(mu: f64, t_final: f64, beta: f64) -> f64 {
    1.0 + (1.0 + 4.0 * t_final * t_final * mu / (PI * PI)) / beta
}

/// Wave number squared seen by the scaled linear FEM form, `μ / (1 + μh²/12)`.
pub fn effective_mu(mu: f64, h: f64) -> f64 {
    mu / (1.0 + mu * h * h / 12.0)
}

/// Poincaré constant `2T/π` for `‖v‖ ≤ C |v|_{H¹}` on functions vanishing at one end.
pub fn poincare_const(t_final: f64) -> f64 {
    2.0 * t_final / PI
}

/// Inf-sup lower bound `1/(1 + √2 μT²)` of the stabilized linear FEM form.
pub fn stabilized_fem_lower_bound(mu: f64, t_final: f64) -> f64 {
    1.0 / (1.0 + 2f64.sqrt() * mu * t_final * t_final)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_values() {
        let b = stability_bounds(1000.0, 10.0).unwrap();
        assert_relative_eq!(b.iga_zank, 2.193e-6, max_relative = 1e-3);
        assert_relative_eq!(b.iga_zank / b.fem_raw, 2.015, max_relative = 1e-3);
        assert_relative_eq!(b.fem_fd, 0.109544511501, max_relative = 1e-10);
        assert_relative_eq!(b.iga_empirical, 0.0948683298, max_relative = 1e-9);
        assert_relative_eq!(b.stab_const, (2.0 + 1000f64.sqrt() * 10.0) / 2.0);
        assert!(b.iga_garding < b.iga_zank);
    }

    #[test]
    fn optimal_b_maximizes_threshold() {
        let (mu, t) = (50.0, 2.0);
        let best = stability_bounds(mu, t).unwrap().iga_garding;
        let lo = mu * t * t / 2.0;
        for k in 1..200 {
            let b = lo + k as f64 * 2.0;
            assert!(stability_bounds_with_b(mu, t, b).unwrap().iga_garding <= best * (1.0 + 1e-14));
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(stability_bounds(0.0, 1.0).is_err());
        assert!(stability_bounds(1.0, -1.0).is_err());
        assert!(stability_bounds_with_b(10.0, 1.0, 5.0).is_err());
        assert!(stability_bounds_with_b(10.0, 1.0, 5.1).is_ok());
    }

    #[test]
    fn effective_mu_below_threshold() {
        assert_relative_eq!(effective_mu(1000.0, 0.0), 1000.0);
        assert!(effective_mu(1000.0, 0.2) < 12.0 / (0.2f64 * 0.2));
    }
}
