//! Galerkin discretizations of `u'' + μu = f` on `(0, T)` with `u(0) = u'(0) = 0`:
//! piecewise linear finite elements and maximal-regularity B-splines, with
//! stabilized forms, discrete inf-sup estimation and closed-form stability bounds.
//!
//! ```
//! use stlab::{error_norms, infsup_beta, solve, trial_test_pair, FormSpec, ManufacturedSolution, Mesh, SplineSpace};
//!
//! let mesh = Mesh::uniform(10.0, 512)?;
//! let (trial, test) = trial_test_pair(SplineSpace::maximal(mesh, 2))?;
//! let u = ManufacturedSolution::with_default_omega(1000.0);
//! let form = FormSpec::standard(1000.0);
//!
//! let uh = solve(&trial, &test, &form, |t| u.f(t))?;
//! let err = error_norms(&trial, &uh, &u)?;
//! assert!(err.h1_semi < 1e-2);
//! assert!(infsup_beta(&trial, &test, &form)? > 0.0);
//! # Ok::<(), stlab::Error>(())
//! ```

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod linalg;
pub mod quadrature;
pub mod spaces;
pub mod spline;

pub use analysis::{
    best_approx_h1, convergence_slope, error_norms, infsup_beta, solve, stability_bounds, BoundsReport,
    ErrorReport, ExactSolution, ManufacturedSolution,
};
pub use assembly::{assemble_load, assemble_matrix, AssembledSystem, FormSpec};
pub use error::{Error, Result};
pub use linalg::{
    lu_solve, min_gen_eig, singular_value_extremes, BandCholesky, BandedLu, BandedMatrix, DenseMatrix, GenEig,
    SingularExtremes,
};
pub use quadrature::{gauss_legendre, integrate_mesh, QuadRule};
pub use spaces::{ht_map, reduce, trial_test_pair, ReducedSpace, SpaceKind};
pub use spline::{l2_project, make_maximal_space, quasi_interpolant, CoeffVector, KnotVector, Mesh, SplineSpace};
