//! Fixtures shared by the benchmarks.

use stlab::{trial_test_pair, ManufacturedSolution, Mesh, ReducedSpace, SplineSpace};

pub const T_FINAL: f64 = 10.0;
pub const MU: f64 = 1000.0;

/// Trial and test spaces of degree `p` on a uniform mesh of `(0, 10)`.
pub fn spaces(nel: usize, p: usize) -> (ReducedSpace, ReducedSpace) {
    let mesh = Mesh::uniform(T_FINAL, nel).expect("nel >= 1");
    trial_test_pair(SplineSpace::maximal(mesh, p)).expect("dimension >= 2")
}

pub fn exact() -> ManufacturedSolution {
    ManufacturedSolution::with_default_omega(MU)
}
