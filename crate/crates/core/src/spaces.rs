//! Trial and test spaces with one boundary basis function removed, and the
//! coefficient form of the map `u ↦ u(T) − u` between them.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spline::{CoeffVector, SplineSpace};

/// Which boundary function is dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    /// Drops the first basis function: members vanish at `t = 0`.
    Trial,
    /// Drops the last basis function: members vanish at `t = T`.
    Test,
}

#[derive(Debug, Clone)]
pub struct ReducedSpace {
    parent: Arc<SplineSpace>,
    kind: SpaceKind,
}

impl ReducedSpace {
    pub fn new(parent: Arc<SplineSpace>, kind: SpaceKind) -> Result<Self> {
        if parent.dim() < 2 {
            return Err(Error::ReductionTooSmall(parent.dim()));
        }
        Ok(Self { parent, kind })
    }

    pub fn parent(&self) -> &SplineSpace {
        &self.parent
    }

    pub fn parent_arc(&self) -> &Arc<SplineSpace> {
        &self.parent
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.parent.dim() - 1
    }

    pub fn degree(&self) -> usize {
        self.parent.degree()
    }

    /// Parent index of reduced index 0.
    pub fn offset(&self) -> usize {
        match self.kind {
            SpaceKind::Trial => 1,
            SpaceKind::Test => 0,
        }
    }

    pub fn parent_index(&self, i: usize) -> usize {
        i + self.offset()
    }

    /// Reduced index of a parent basis function, if it is kept.
    pub fn reduced_index(&self, parent: usize) -> Option<usize> {
        let i = parent.checked_sub(self.offset())?;
        (i < self.dim()).then_some(i)
    }

    /// Parent coefficients, with a zero for the dropped function.
    pub fn lift(&self, coeffs: &[f64]) -> Result<CoeffVector> {
        self.check_len(coeffs)?;
        let mut full = vec![0.0; self.parent.dim()];
        full[self.offset()..self.offset() + self.dim()].copy_from_slice(coeffs);
        Ok(full.into())
    }

    fn check_len(&self, coeffs: &[f64]) -> Result<()> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: coeffs.len() });
        }
        Ok(())
    }

    fn same_parent(&self, other: &ReducedSpace) -> bool {
        Arc::ptr_eq(&self.parent, &other.parent) || *self.parent == *other.parent
    }
}

/// Removes the boundary function for `kind` from `space`.
pub fn reduce(space: Arc<SplineSpace>, kind: SpaceKind) -> Result<ReducedSpace> {
    ReducedSpace::new(space, kind)
}

/// Trial and test spaces sharing `space` as parent.
pub fn trial_test_pair(space: SplineSpace) -> Result<(ReducedSpace, ReducedSpace)> {
    let parent = Arc::new(space);
    Ok((
        ReducedSpace::new(parent.clone(), SpaceKind::Trial)?,
        ReducedSpace::new(parent, SpaceKind::Test)?,
    ))
}

/// Test-space coefficients of `u_h(T) − u_h` for trial member `u_h`.
///
/// With a partition of unity, `u_h(T) − u_h = Σ (u_N − u_i) b_i`, and the last
/// coefficient `u_N − u_N` vanishes.
pub fn ht_map(trial_coeffs: &[f64], trial: &ReducedSpace, test: &ReducedSpace) -> Result<CoeffVector> {
    check_pair(trial, test)?;
    let full = trial.lift(trial_coeffs)?;
    let last = *full.last().unwrap();
    Ok(full[..test.dim()].iter().map(|c| last - c).collect::<Vec<_>>().into())
}

/// Trial-space coefficients of `v_h(0) − v_h` for test member `v_h`.
pub fn ht_inverse_map(test_coeffs: &[f64], trial: &ReducedSpace, test: &ReducedSpace) -> Result<CoeffVector> {
    check_pair(trial, test)?;
    let full = test.lift(test_coeffs)?;
    let first = full[0];
    Ok(full[1..].iter().map(|c| first - c).collect::<Vec<_>>().into())
}

fn check_pair(trial: &ReducedSpace, test: &ReducedSpace) -> Result<()> {
    if trial.kind != SpaceKind::Trial {
        return Err(Error::WrongKind { expected: "trial" });
    }
    if test.kind != SpaceKind::Test {
        return Err(Error::WrongKind { expected: "test" });
    }
    if !trial.same_parent(test) {
        return Err(Error::ParentMismatch);
    }
    Ok(())
}

/// k-th derivative of `Σ c_i b_{index(i)}` at `x`.
pub fn eval_discrete(space: &ReducedSpace, coeffs: &[f64], x: f64, k: usize) -> Result<f64> {
    space.check_len(coeffs)?;
    let p = space.degree();
    if k > p {
        return Err(Error::DerivativeOrder { order: k, degree: p });
    }
    let local = space.parent().eval_nonzero(x, k)?;
    Ok(local.values[k]
        .iter()
        .enumerate()
        .filter_map(|(i, b)| space.reduced_index(local.first + i).map(|r| coeffs[r] * b))
        .sum())
}
