//! Banded storage, banded LU and Cholesky, and the smallest eigenpair of a
//! symmetric-definite pencil `K x = λ M x`.

use crate::error::{Error, Result};

/// General banded matrix in row-major band storage.
///
/// Entry `(i, j)` is stored when `i - kl <= j <= i + ku`; everything outside
/// the band is a structural zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    rows: usize,
    cols: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(rows: usize, cols: usize, kl: usize, ku: usize) -> Self {
        Self { rows, cols, kl, ku, data: vec![0.0; rows * (kl + ku + 1)] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n, 0, 0);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Copies the in-band part of a dense row-major matrix.
    pub fn from_dense(rows: usize, cols: usize, kl: usize, ku: usize, dense: &[f64]) -> Self {
        let mut m = Self::zeros(rows, cols, kl, ku);
        for i in 0..rows {
            for j in m.row_range(i) {
                m.set(i, j, dense[i * cols + j]);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.rows && j < self.cols && j + self.kl >= i && j <= i + self.ku
    }

    /// Column indices of the stored entries of row `i`.
    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.kl)..(i + self.ku + 1).min(self.cols)
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        i * self.width() + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.offset(i, j)]
        } else {
            0.0
        }
    }

    /// Panics when `(i, j)` lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let o = self.offset(i, j);
        self.data[o] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let o = self.offset(i, j);
        self.data[o] += v;
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.rows * self.cols];
        for i in 0..self.rows {
            for j in self.row_range(i) {
                d[i * self.cols + j] = self.get(i, j);
            }
        }
        d
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows, self.ku, self.kl);
        for i in 0..self.rows {
            for j in self.row_range(i) {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row_range(i).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// `self * alpha + other * beta` over the union of both bands.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = Self::zeros(self.rows, self.cols, self.kl.max(other.kl), self.ku.max(other.ku));
        for i in 0..self.rows {
            for j in out.row_range(i) {
                let v = alpha * self.get(i, j) + beta * other.get(i, j);
                out.set(i, j, v);
            }
        }
        out
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in self.row_range(i) {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}

/// LU factorization with partial pivoting inside the band (LAPACK `gbtrf`
/// layout: `kl` extra super-diagonals absorb pivoting fill).
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    /// stored width per row: kl (L part) + ku + kl (U part with fill) + 1
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
    /// Smallest pivot magnitude relative to `max |a_ij|`.
    pivot_ratio: f64,
}

impl BandedLu {
    /// Fails when a pivot is below `ε · max |a_ij|`.
    pub fn factor(a: &BandedMatrix) -> Result<Self> {
        Self::factor_with_tol(a, f64::EPSILON)
    }

    /// Fails when a pivot is at most `rel_tol · max |a_ij|`, or exactly zero.
    /// `rel_tol = 0` factors any matrix without an exactly zero pivot.
    pub fn factor_with_tol(a: &BandedMatrix, rel_tol: f64) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::DimensionMismatch { expected: a.rows, found: a.cols });
        }
        let n = a.rows;
        let kl = a.kl;
        let ku_fill = a.ku + a.kl;
        let width = kl + ku_fill + 1;
        let mut data = vec![0.0; n * width];
        let idx = |i: usize, j: usize| i * width + (j + kl - i);
        for i in 0..n {
            for j in a.row_range(i) {
                data[idx(i, j)] = a.get(i, j);
            }
        }
        let scale = a.max_abs();
        let tol = rel_tol * scale;
        let mut pivots = vec![0; n];
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = data[idx(k, k)].abs();
            for r in k + 1..=last_row {
                let v = data[idx(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            pivots[k] = p;
            if best <= tol || best == 0.0 || !best.is_finite() {
                return Err(Error::Singular { pivot: best, step: k });
            }
            min_pivot = min_pivot.min(best);
            let last_col = (k + ku_fill).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    data.swap(idx(k, j), idx(p, j));
                }
            }
            let piv = data[idx(k, k)];
            for r in k + 1..=last_row {
                let m = data[idx(r, k)] / piv;
                data[idx(r, k)] = m;
                if m != 0.0 {
                    for j in k + 1..=last_col {
                        data[idx(r, j)] -= m * data[idx(k, j)];
                    }
                }
            }
        }
        Ok(Self { n, kl, width, data, pivots, pivot_ratio: min_pivot / scale })
    }

    pub fn pivot_ratio(&self) -> f64 {
        self.pivot_ratio
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let kl = self.kl;
        let ku_fill = self.width - kl - 1;
        let idx = |i: usize, j: usize| i * self.width + (j + kl - i);
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for r in k + 1..=(k + kl).min(n.saturating_sub(1)) {
                x[r] -= self.data[idx(r, k)] * xk;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..=(k + ku_fill).min(n - 1) {
                s -= self.data[idx(k, j)] * x[j];
            }
            x[k] = s / self.data[idx(k, k)];
        }
        x
    }
}

/// Solves `A x = b` by banded LU with partial pivoting.
pub fn lu_solve(a: &BandedMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch { expected: a.rows(), found: b.len() });
    }
    Ok(BandedLu::factor(a)?.solve(b))
}

/// Band Cholesky factor `L` with `A = L Lᵀ`, stored row-wise for `i - kl <= j <= i`.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    kl: usize,
    data: Vec<f64>,
}

impl BandCholesky {
    /// Factors the lower band of a symmetric positive-definite matrix.
    pub fn factor(a: &BandedMatrix) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::DimensionMismatch { expected: a.rows, found: a.cols });
        }
        let n = a.rows;
        let kl = a.kl;
        let w = kl + 1;
        let mut l = vec![0.0; n * w];
        let at = |i: usize, j: usize| i * w + (j + kl - i);
        for i in 0..n {
            let j0 = i.saturating_sub(kl);
            for j in j0..=i {
                let mut s = a.get(i, j);
                for k in j0.max(j.saturating_sub(kl))..j {
                    s -= l[at(i, k)] * l[at(j, k)];
                }
                if j == i {
                    if !(s > 0.0) {
                        return Err(Error::NotPositiveDefinite { pivot: s, row: i });
                    }
                    l[at(i, i)] = s.sqrt();
                } else {
                    l[at(i, j)] = s / l[at(j, j)];
                }
            }
        }
        Ok(Self { n, kl, data: l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.kl
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i || i - j > self.kl {
            0.0
        } else {
            self.data[i * (self.kl + 1) + (j + self.kl - i)]
        }
    }

    /// In place `y <- L⁻¹ y`.
    pub fn forward(&self, y: &mut [f64]) {
        let w = self.kl + 1;
        for i in 0..self.n {
            let j0 = i.saturating_sub(self.kl);
            let row = &self.data[i * w..(i + 1) * w];
            let mut s = y[i];
            for j in j0..i {
                s -= row[j + self.kl - i] * y[j];
            }
            y[i] = s / row[self.kl];
        }
    }

    /// In place `y <- L⁻ᵀ y`.
    pub fn backward(&self, y: &mut [f64]) {
        let w = self.kl + 1;
        for i in (0..self.n).rev() {
            let row = &self.data[i * w..(i + 1) * w];
            let xi = y[i] / row[self.kl];
            y[i] = xi;
            let j0 = i.saturating_sub(self.kl);
            for j in j0..i {
                y[j] -= row[j + self.kl - i] * xi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.forward(&mut x);
        self.backward(&mut x);
        x
    }
}

/// Square dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n);
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|v| v * c).collect() }
    }

    pub fn transpose_in_place(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in i + 1..n {
                self.data.swap(i * n + j, j * n + i);
            }
        }
    }

    /// Replaces the matrix by its symmetric part.
    pub fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in i + 1..n {
                let v = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = v;
                self.data[j * n + i] = v;
            }
        }
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        (0..self.n)
            .map(|i| x[i] * self.row(i).iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            .sum()
    }
}

/// Smallest eigenpair of `K x = λ M x`, with `xᵀ M x = 1`.
#[derive(Debug, Clone)]
pub struct GenEig {
    pub value: f64,
    pub vector: Vec<f64>,
    /// Largest eigenvalue of the pencil, used as the rounding scale.
    pub value_max: f64,
}

/// Relative threshold below which a negative smallest eigenvalue is rounding.
const CLAMP_TOL: f64 = 1e-12;

/// Smallest eigenvalue of the pencil `(K, M)` with `K` symmetric positive
/// semi-definite and `M` symmetric positive definite.
///
/// `M = L Lᵀ` is factored, `C = L⁻¹ K L⁻ᵀ` is reduced to tridiagonal form by
/// Householder reflections, the spectrum of the tridiagonal is found with the
/// implicitly shifted QL iteration, and the eigenvector comes from inverse
/// iteration and back-transformation.
pub fn min_gen_eig(k: &DenseMatrix, m: &BandedMatrix) -> Result<GenEig> {
    let chol = BandCholesky::factor(m)?;
    min_gen_eig_factored(k.clone(), &chol)
}

/// As [`min_gen_eig`], consuming `K` and reusing a factor of `M`.
pub fn min_gen_eig_factored(mut c: DenseMatrix, chol: &BandCholesky) -> Result<GenEig> {
    let n = c.dim();
    if chol.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: chol.dim() });
    }
    if n == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    // rows of K are its columns: L⁻¹ on every row gives (L⁻¹K)ᵀ
    for i in 0..n {
        chol.forward(c.row_mut(i));
    }
    c.transpose_in_place();
    for i in 0..n {
        chol.forward(c.row_mut(i));
    }
    c.symmetrize();

    let tri = tridiagonalize(&mut c);
    let eigs = tridiagonal_eigenvalues(&tri.diag, &tri.off)?;
    let (mut lo, hi) = eigs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if lo < 0.0 {
        if lo >= -CLAMP_TOL * hi.abs().max(1.0) {
            lo = 0.0;
        } else {
            return Err(Error::Indefinite(lo));
        }
    }

    let z = tridiagonal_inverse_iteration(&tri.diag, &tri.off, lo, hi.abs().max(1.0));
    let mut y = tri.apply_q(&c, z);
    chol.backward(&mut y);
    Ok(GenEig { value: lo, vector: y, value_max: hi })
}

/// Smallest and largest singular values of a square matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularExtremes {
    pub min: f64,
    pub max: f64,
}

/// Extreme singular values by Householder bidiagonalization and bisection on
/// the Golub–Kahan tridiagonal `[[0, B], [Bᵀ, 0]]`.
///
/// The smallest value has absolute accuracy near `ε σ_max`, against
/// `√(ε) σ_max` when working with `BᵀB`.
pub fn singular_value_extremes(mut b: DenseMatrix) -> Result<SingularExtremes> {
    let n = b.dim();
    if n == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    if b.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NoConvergence);
    }
    let (d, e) = bidiagonalize(&mut b);
    let mut off = Vec::with_capacity(2 * n - 1);
    for k in 0..n {
        off.push(d[k]);
        if k + 1 < n {
            off.push(e[k]);
        }
    }
    Ok(SingularExtremes { min: golub_kahan_kth(&off, n + 1), max: golub_kahan_kth(&off, 2 * n) })
}

/// Householder `(I - τ v vᵀ) x = β e₁`, overwriting `x` with `v` (`v₀ = 1`).
fn householder(x: &mut [f64]) -> (f64, f64) {
    let alpha = x[0];
    let sigma: f64 = x[1..].iter().map(|v| v * v).sum();
    if sigma == 0.0 {
        x[0] = 1.0;
        return (alpha, 0.0);
    }
    let norm = (alpha * alpha + sigma).sqrt();
    let beta = if alpha <= 0.0 { norm } else { -norm };
    let scale = 1.0 / (alpha - beta);
    x[0] = 1.0;
    x[1..].iter_mut().for_each(|v| *v *= scale);
    (beta, (beta - alpha) / beta)
}

/// Upper bidiagonal form of `b`: returns the diagonal and superdiagonal.
///
/// Each step applies the left and right reflectors to a row and accumulates
/// the next left reflector's product in the same sweep, so the trailing
/// matrix is read once per step.
fn bidiagonalize(b: &mut DenseMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = b.dim();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    // x: column k below the diagonal; z = Σ_{i>k} x_i b[i][k+1..]
    let mut x = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 1..n {
        x[i] = b.get(i, 0);
        let xi = x[i];
        z[1..].iter_mut().zip(&b.row(i)[1..]).for_each(|(zj, r)| *zj += xi * r);
    }
    for k in 0..n {
        let alpha = b.get(k, k);
        let sigma: f64 = x[k + 1..n].iter().map(|v| v * v).sum();
        let m = n - k - 1;
        let (beta, tau, scale) = if sigma == 0.0 {
            (alpha, 0.0, 0.0)
        } else {
            let norm = (alpha * alpha + sigma).sqrt();
            let beta = if alpha <= 0.0 { norm } else { -norm };
            (beta, (beta - alpha) / beta, 1.0 / (alpha - beta))
        };
        d[k] = beta;
        if m == 0 {
            break;
        }
        // w = vᵀ B[k.., k+1..] with v = (1, scale x)
        {
            let row = &b.row(k)[k + 1..];
            for j in 0..m {
                w[j] = row[j] + scale * z[k + 1 + j];
            }
        }
        {
            let row = &mut b.row_mut(k)[k + 1..];
            row.iter_mut().zip(&w[..m]).for_each(|(r, wj)| *r -= tau * wj);
        }
        // right reflector from row k
        u[..m].copy_from_slice(&b.row(k)[k + 1..]);
        let (beta_r, tau_r) = householder(&mut u[..m]);
        e[k] = beta_r;
        z[k + 2..n].iter_mut().for_each(|v| *v = 0.0);
        for i in k + 1..n {
            let c = tau * scale * x[i];
            let row = &mut b.row_mut(i)[k + 1..];
            let mut s = 0.0;
            for j in 0..m {
                let r = row[j] - c * w[j];
                row[j] = r;
                s += r * u[j];
            }
            let cr = tau_r * s;
            row.iter_mut().zip(&u[..m]).for_each(|(r, uj)| *r -= cr * uj);
            x[i] = row[0];
            if i > k + 1 {
                let xi = row[0];
                z[k + 2..n].iter_mut().zip(&row[1..]).for_each(|(zj, r)| *zj += xi * r);
            }
        }
    }
    (d, e)
}

/// Number of eigenvalues below `x` of the zero-diagonal tridiagonal with
/// off-diagonal `off` (Sturm sequence).
fn zero_diag_sturm_count(off: &[f64], x: f64, pivmin: f64) -> usize {
    let mut q = -x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    let mut count = usize::from(q < 0.0);
    for o in off {
        q = -x - o * o / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        count += usize::from(q < 0.0);
    }
    count
}

/// k-th smallest eigenvalue (1-based) of the zero-diagonal tridiagonal,
/// for `k` in the upper half of the spectrum.
fn golub_kahan_kth(off: &[f64], k: usize) -> f64 {
    let bound = off
        .iter()
        .enumerate()
        .map(|(i, o)| o.abs() + if i + 1 < off.len() { off[i + 1].abs() } else { 0.0 })
        .fold(0.0, f64::max)
        .max(off.first().map_or(0.0, |o| o.abs()));
    if bound == 0.0 {
        return 0.0;
    }
    let pivmin = f64::MIN_POSITIVE * off.iter().map(|o| o * o).fold(1.0, f64::max);
    let (mut lo, mut hi) = (0.0, bound * (1.0 + 4.0 * f64::EPSILON));
    let safe = f64::MIN_POSITIVE / f64::EPSILON;
    while hi - lo > 2.0 * f64::EPSILON * hi + safe {
        let mid = 0.5 * (lo + hi);
        if zero_diag_sturm_count(off, mid, pivmin) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
    /// Householder scalars; vectors live below the subdiagonal of the work matrix.
    taus: Vec<f64>,
}

/// Householder reduction `Qᵀ C Q = T` working on the lower triangle of `c`.
/// Reflector `k` is `I - τ v vᵀ` with `v = (1, c[k+2.., k])` acting on rows `k+1..`.
fn tridiagonalize(c: &mut DenseMatrix) -> Tridiagonal {
    let n = c.dim();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut taus = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        // column below the diagonal
        let alpha = c.get(k + 1, k);
        let mut sigma = 0.0;
        for i in k + 2..n {
            let x = c.get(i, k);
            sigma += x * x;
        }
        diag[k] = c.get(k, k);
        if sigma == 0.0 {
            off[k] = alpha;
            taus[k] = 0.0;
            continue;
        }
        let norm = (alpha * alpha + sigma).sqrt();
        let beta = if alpha <= 0.0 { norm } else { -norm };
        let tau = (beta - alpha) / beta;
        let scale = 1.0 / (alpha - beta);
        v[0] = 1.0;
        for i in k + 2..n {
            let x = c.get(i, k) * scale;
            c.set(i, k, x);
            v[i - k - 1] = x;
        }
        off[k] = beta;
        taus[k] = tau;

        // p = τ C22 v using the lower triangle of the trailing block
        let vv = &v[..m];
        let pp = &mut p[..m];
        pp.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..m {
            let row = &c.row(k + 1 + i)[k + 1..k + 1 + i];
            let vi = vv[i];
            let mut acc = 0.0;
            for (j, a) in row.iter().enumerate() {
                acc += a * vv[j];
                pp[j] += a * vi;
            }
            pp[i] += acc + c.get(k + 1 + i, k + 1 + i) * vi;
        }
        pp.iter_mut().for_each(|x| *x *= tau);
        // w = p - (τ/2)(pᵀv) v
        let kdot: f64 = pp.iter().zip(vv).map(|(a, b)| a * b).sum::<f64>() * 0.5 * tau;
        for i in 0..m {
            pp[i] -= kdot * vv[i];
        }
        // C22 -= v wᵀ + w vᵀ on the lower triangle
        for i in 0..m {
            let (vi, wi) = (vv[i], pp[i]);
            let row = &mut c.row_mut(k + 1 + i)[k + 1..k + 2 + i];
            for (j, a) in row.iter_mut().enumerate() {
                *a -= vi * pp[j] + wi * vv[j];
            }
        }
    }
    if n > 0 {
        diag[n - 1] = c.get(n - 1, n - 1);
    }
    Tridiagonal { diag, off, taus }
}

impl Tridiagonal {
    /// `Q z` with `Q = H_0 H_1 ... H_{n-2}`.
    fn apply_q(&self, work: &DenseMatrix, mut z: Vec<f64>) -> Vec<f64> {
        let n = z.len();
        for k in (0..n.saturating_sub(1)).rev() {
            let tau = self.taus[k];
            if tau == 0.0 {
                continue;
            }
            let mut dot = z[k + 1];
            for i in k + 2..n {
                dot += work.get(i, k) * z[i];
            }
            let s = tau * dot;
            z[k + 1] -= s;
            for i in k + 2..n {
                z[i] -= s * work.get(i, k);
            }
        }
        z
    }
}

/// All eigenvalues of a symmetric tridiagonal matrix by the QL algorithm with
/// implicit Wilkinson shifts.
fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..off.len()].copy_from_slice(off);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(d)
}

/// Eigenvector of the tridiagonal for eigenvalue `lambda` by inverse iteration.
fn tridiagonal_inverse_iteration(diag: &[f64], off: &[f64], lambda: f64, scale: f64) -> Vec<f64> {
    let n = diag.len();
    if n == 1 {
        return vec![1.0];
    }
    let shift = lambda - 1e-10 * scale;
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * ((i * 7919) % 101) as f64).collect();
    for _ in 0..4 {
        x = tridiagonal_shifted_solve(diag, off, shift, &x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            break;
        }
        x.iter_mut().for_each(|v| *v /= norm);
    }
    x
}

/// Solves `(T - σ I) x = b` by Gaussian elimination with partial pivoting.
fn tridiagonal_shifted_solve(diag: &[f64], off: &[f64], sigma: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    // rows hold (sub, main, super, super2) after pivoting
    let mut main: Vec<f64> = diag.iter().map(|d| d - sigma).collect();
    let mut sup: Vec<f64> = off.to_vec();
    sup.push(0.0);
    let mut sup2 = vec![0.0; n];
    let mut sub: Vec<f64> = off.to_vec();
    let mut rhs = b.to_vec();
    let tiny = f64::EPSILON * (diag.iter().fold(0.0f64, |m, v| m.max(v.abs())) + sigma.abs()).max(f64::MIN_POSITIVE);
    for k in 0..n - 1 {
        if sub[k].abs() > main[k].abs() {
            // swap rows k and k+1
            std::mem::swap(&mut main[k], &mut sub[k]);
            std::mem::swap(&mut sup[k], &mut main[k + 1]);
            std::mem::swap(&mut sup2[k], &mut sup[k + 1]);
            rhs.swap(k, k + 1);
        }
        if main[k] == 0.0 {
            main[k] = tiny;
        }
        let m = sub[k] / main[k];
        main[k + 1] -= m * sup[k];
        sup[k + 1] -= m * sup2[k];
        rhs[k + 1] -= m * rhs[k];
    }
    if main[n - 1] == 0.0 {
        main[n - 1] = tiny;
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = rhs[k];
        if k + 1 < n {
            s -= sup[k] * x[k + 1];
        }
        if k + 2 < n {
            s -= sup2[k] * x[k + 2];
        }
        x[k] = s / main[k];
    }
    x
}
