//! Discrete inf-sup constant
//! `β = inf_u sup_v a(u, v) / (|u|_{H¹} |v|_{H¹})`, which is `√λ_min` of
//! `Aᵀ H₂⁻¹ A x = λ H₁ x`.
//!
//! `β` is evaluated as the smallest singular value of `L₂⁻¹ A L₁⁻ᵀ` with
//! `H_k = L_k L_kᵀ`. The eigenvalue route squares the conditioning and cannot
//! resolve `β` below about `√ε σ_max`, which for `μ = 1000` is close to the
//! stable values themselves.

use crate::assembly::{assemble_h1_gram, assemble_matrix, FormSpec};
use crate::error::{Error, Result};
use crate::linalg::{
    min_gen_eig_factored, singular_value_extremes, BandCholesky, BandedMatrix, DenseMatrix, GenEig,
    SingularExtremes,
};
use crate::spaces::ReducedSpace;

/// `β` of `form` on the given trial/test pair.
pub fn infsup_beta(trial: &ReducedSpace, test: &ReducedSpace, form: &FormSpec) -> Result<f64> {
    let a = assemble_matrix(trial, test, form)?;
    infsup_from_matrices(&a, &assemble_h1_gram(trial), &assemble_h1_gram(test))
}

/// `β` from assembled `A` (test × trial) and the derivative Gram matrices.
///
/// Returns 0 when `β ≤ n ε β_max`, i.e. `A` is singular to working precision.
pub fn infsup_from_matrices(a: &BandedMatrix, h1: &BandedMatrix, h2: &BandedMatrix) -> Result<f64> {
    let s = infsup_extremes(a, h1, h2)?;
    let n = a.rows() as f64;
    Ok(if s.min <= n * f64::EPSILON * s.max { 0.0 } else { s.min })
}

/// Smallest and largest singular values of `L₂⁻¹ A L₁⁻ᵀ`, without the
/// vanishing threshold of [`infsup_from_matrices`].
pub fn infsup_extremes(a: &BandedMatrix, h1: &BandedMatrix, h2: &BandedMatrix) -> Result<SingularExtremes> {
    let n = check_dims(a, h1, h2)?;
    let (l1, l2) = (BandCholesky::factor(h1)?, BandCholesky::factor(h2)?);
    // row j of `m` is column j of A, then L₂⁻¹ A e_j
    let mut m = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in a.row_range(i) {
            m.set(j, i, a.get(i, j));
        }
    }
    for j in 0..n {
        l2.forward(m.row_mut(j));
    }
    // rows of L₂⁻¹A, then rows of L₂⁻¹ A L₁⁻ᵀ
    m.transpose_in_place();
    for i in 0..n {
        l1.forward(m.row_mut(i));
    }
    singular_value_extremes(m)
}

fn check_dims(a: &BandedMatrix, h1: &BandedMatrix, h2: &BandedMatrix) -> Result<usize> {
    let n = a.cols();
    for found in [a.rows(), h1.rows(), h1.cols(), h2.rows(), h2.cols()] {
        if found != n {
            return Err(Error::DimensionMismatch { expected: n, found });
        }
    }
    Ok(n)
}

/// Smallest eigenpair of `Aᵀ H₂⁻¹ A x = λ H₁ x`; the vector is the trial
/// function realizing the infimum.
pub fn infsup_eig(a: &BandedMatrix, h1: &BandedMatrix, h2: &BandedMatrix) -> Result<GenEig> {
    check_dims(a, h1, h2)?;
    let k = normal_matrix(a, &BandCholesky::factor(h2)?);
    min_gen_eig_factored(k, &BandCholesky::factor(h1)?)
}

/// `K = Aᵀ H₂⁻¹ A` without forming `H₂⁻¹`.
fn normal_matrix(a: &BandedMatrix, h2: &BandCholesky) -> DenseMatrix {
    let n = a.cols();
    let at = a.transpose();
    // row j of x holds H₂⁻¹ A e_j
    let mut x = DenseMatrix::zeros(n);
    for j in 0..n {
        let row = x.row_mut(j);
        for i in at.row_range(j) {
            row[i] = at.get(j, i);
        }
        h2.forward(row);
        h2.backward(row);
    }
    let mut k = DenseMatrix::zeros(n);
    for i in 0..n {
        let cols = at.row_range(i);
        for j in i..n {
            let xj = x.row(j);
            let v: f64 = cols.clone().map(|r| at.get(i, r) * xj[r]).sum();
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{ht_map, trial_test_pair};
    use crate::spline::{Mesh, SplineSpace};
    use approx::assert_relative_eq;

    fn pair(t: f64, nel: usize, p: usize) -> (ReducedSpace, ReducedSpace) {
        trial_test_pair(SplineSpace::maximal(Mesh::uniform(t, nel).unwrap(), p)).unwrap()
    }

    /// Matrix `M` with trial coefficients → test coefficients of `H̄_T`.
    fn ht_matrix(trial: &ReducedSpace, test: &ReducedSpace) -> Vec<Vec<f64>> {
        let n = trial.dim();
        (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                ht_map(&e, trial, test).unwrap().into_inner()
            })
            .collect()
    }

    #[test]
    fn bubnov_laplace_form_has_unit_beta() {
        // a(u, H̄_T w) = ⟨u', w'⟩ at μ = 0, so Aᵀ M pairing equals H₁
        let (trial, test) = pair(2.0, 6, 2);
        let a = assemble_matrix(&trial, &test, &FormSpec::standard(0.0)).unwrap();
        let h1 = assemble_h1_gram(&trial);
        let cols = ht_matrix(&trial, &test);
        let n = trial.dim();
        let mut b = BandedMatrix::zeros(n, n, n - 1, n - 1);
        for i in 0..n {
            for j in 0..n {
                let v: f64 = (0..n).map(|r| cols[i][r] * a.get(r, j)).sum();
                b.set(i, j, v);
            }
        }
        assert!(b.combine(1.0, &h1, -1.0).max_abs() < 1e-12 * h1.max_abs());
        let beta = infsup_from_matrices(&b, &h1, &h1).unwrap();
        assert_relative_eq!(beta, 1.0, epsilon = 1e-10);
        let beta_petrov = infsup_beta(&trial, &test, &FormSpec::standard(0.0)).unwrap();
        assert_relative_eq!(beta_petrov, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn scaling_the_form_scales_beta() {
        let (trial, test) = pair(1.0, 8, 2);
        let a = assemble_matrix(&trial, &test, &FormSpec::standard(30.0)).unwrap();
        let (h1, h2) = (assemble_h1_gram(&trial), assemble_h1_gram(&test));
        let b = infsup_from_matrices(&a, &h1, &h2).unwrap();
        let mut a3 = a.clone();
        a3.scale(3.0);
        assert_relative_eq!(infsup_from_matrices(&a3, &h1, &h2).unwrap(), 3.0 * b, max_relative = 1e-10);
    }

    #[test]
    fn fem_beta_against_brute_force() {
        let (trial, test) = pair(1.0, 4, 1);
        let form = FormSpec::standard(1.0);
        let a = assemble_matrix(&trial, &test, &form).unwrap();
        let (h1, h2) = (assemble_h1_gram(&trial), assemble_h1_gram(&test));
        let beta = infsup_beta(&trial, &test, &form).unwrap();
        let eig = infsup_eig(&a, &h1, &h2).unwrap();
        // Rayleigh quotient of the returned vector reproduces λ
        let chol = BandCholesky::factor(&h2).unwrap();
        let ax = a.matvec(&eig.vector);
        let y = chol.solve(&ax);
        let num: f64 = ax.iter().zip(&y).map(|(a, b)| a * b).sum();
        let h1x = h1.matvec(&eig.vector);
        let den: f64 = eig.vector.iter().zip(&h1x).map(|(a, b)| a * b).sum();
        assert_relative_eq!((num / den).sqrt(), beta, max_relative = 1e-10);
    }

    #[test]
    fn eigen_and_singular_routes_agree_when_stable() {
        let (trial, test) = pair(10.0, 128, 2);
        let form = FormSpec::standard(1000.0);
        let a = assemble_matrix(&trial, &test, &form).unwrap();
        let (h1, h2) = (assemble_h1_gram(&trial), assemble_h1_gram(&test));
        let eig = infsup_eig(&a, &h1, &h2).unwrap();
        let beta = infsup_from_matrices(&a, &h1, &h2).unwrap();
        assert_relative_eq!(eig.value.sqrt(), beta, max_relative = 1e-3);
    }

    #[test]
    fn unstable_fem_system_has_vanishing_beta() {
        let (trial, test) = pair(10.0, 64, 1);
        assert_eq!(infsup_beta(&trial, &test, &FormSpec::standard(1000.0)).unwrap(), 0.0);
    }

    #[test]
    fn dimension_checks() {
        let (trial, test) = pair(1.0, 4, 1);
        let (t2, _) = pair(1.0, 5, 1);
        let a = assemble_matrix(&trial, &test, &FormSpec::standard(1.0)).unwrap();
        assert!(infsup_from_matrices(&a, &assemble_h1_gram(&t2), &assemble_h1_gram(&test)).is_err());
    }
}
