//! Solves, error measurement, inf-sup estimation and closed-form bounds.

pub mod bounds;
pub mod errors;
pub mod infsup;

pub use bounds::{
    effective_mu, garding_quasi_opt, optimal_b, poincare_const, quasi_opt_const, stability_bounds,
    stability_bounds_with_b, stabilized_fem_lower_bound, BoundsReport,
};
pub use errors::{
    best_approx_h1, convergence_slope, discrete_errors, error_norms, exact_norms, exact_seminorm, solve,
    solve_report, solve_with_quad, DiscreteSolution, ErrorReport, ExactNorms, ExactSolution, ManufacturedSolution, Polynomial, DEFAULT_OMEGA,
    DEFAULT_SLOPE_WINDOW,
};
pub use infsup::{infsup_beta, infsup_eig, infsup_extremes, infsup_from_matrices};
