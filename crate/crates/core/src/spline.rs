//! Meshes, open knot vectors and B-spline spaces of maximal regularity.
//!
//! Basis functions are evaluated with the Cox–de Boor recursion restricted to
//! the `p + 1` functions that are nonzero on a knot span. Values follow the
//! right-continuous convention, except at the final time where the last
//! element is used (left-continuity at `T`).

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{BandCholesky, BandedMatrix};
use crate::quadrature::{gauss_legendre, DEFAULT_RHS_POINTS};

/// Ordered break points `0 = t_0 < t_1 < ... < t_N = T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    breakpoints: Vec<f64>,
}

impl Mesh {
    pub fn new(breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidMesh(format!("{} break points", breakpoints.len())));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::InvalidMesh(format!("first break point {}", breakpoints[0])));
        }
        if breakpoints.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidMesh("non-finite break point".into()));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMesh(format!("{} followed by {}", w[0], w[1])));
        }
        Ok(Self { breakpoints })
    }

    /// `nel` elements of length `t_final / nel`.
    pub fn uniform(t_final: f64, nel: usize) -> Result<Self> {
        if nel == 0 {
            return Err(Error::InvalidMesh("zero elements".into()));
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidMesh(format!("final time {t_final}")));
        }
        let h = t_final / nel as f64;
        let mut bp: Vec<f64> = (0..nel).map(|i| i as f64 * h).collect();
        bp.push(t_final);
        Self::new(bp)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn num_elements(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn final_time(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// End points of element `l`.
    pub fn element(&self, l: usize) -> (f64, f64) {
        (self.breakpoints[l], self.breakpoints[l + 1])
    }

    pub fn element_len(&self, l: usize) -> f64 {
        self.breakpoints[l + 1] - self.breakpoints[l]
    }

    pub fn elements(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breakpoints.windows(2).map(|w| (w[0], w[1]))
    }

    /// Maximal element length.
    pub fn h(&self) -> f64 {
        (0..self.num_elements())
            .map(|l| self.element_len(l))
            .fold(0.0, f64::max)
    }

    /// Element containing `x`: right-continuous, clamped to the last element at `T`.
    pub fn find_element(&self, x: f64) -> usize {
        let n = self.num_elements();
        if x >= self.breakpoints[n - 1] {
            return n - 1;
        }
        // first break point strictly greater than x, minus one
        let idx = self.breakpoints.partition_point(|&t| t <= x);
        idx.saturating_sub(1).min(n - 1)
    }
}

/// Open knot vector: both end knots repeated `degree + 1` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotVector {
    knots: Vec<f64>,
    degree: usize,
}

impl KnotVector {
    /// Open knot vector over `mesh` with simple interior knots.
    pub fn open_maximal(mesh: &Mesh, degree: usize) -> Self {
        let t_final = mesh.final_time();
        let interior = &mesh.breakpoints()[1..mesh.num_elements()];
        let mut knots = Vec::with_capacity(interior.len() + 2 * (degree + 1));
        knots.extend(std::iter::repeat_n(0.0, degree + 1));
        knots.extend_from_slice(interior);
        knots.extend(std::iter::repeat_n(t_final, degree + 1));
        Self { knots, degree }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
}

/// Spline coefficients (control points) with respect to a basis.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CoeffVector(Vec<f64>);

impl CoeffVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for CoeffVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Deref for CoeffVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for CoeffVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// Nonzero basis functions (and derivatives) at one point.
#[derive(Debug, Clone)]
pub struct LocalBasis {
    /// Index of the first nonzero basis function.
    pub first: usize,
    /// `values[k][i]` is the k-th derivative of basis function `first + i`.
    pub values: Vec<Vec<f64>>,
}

/// Spline space `S^p` of degree `p` and maximal regularity `C^{p-1}` on a mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineSpace {
    mesh: Mesh,
    knots: KnotVector,
}

impl SplineSpace {
    /// Maximal-regularity space of any degree, including piecewise constants.
    pub fn maximal(mesh: Mesh, degree: usize) -> Self {
        let knots = KnotVector::open_maximal(&mesh, degree);
        Self { mesh, knots }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn knot_vector(&self) -> &KnotVector {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.knots.degree
    }

    /// Number of basis functions, `N_el + p`.
    pub fn dim(&self) -> usize {
        self.mesh.num_elements() + self.degree()
    }

    /// Same mesh, different degree.
    pub fn with_degree(&self, degree: usize) -> Self {
        Self::maximal(self.mesh.clone(), degree)
    }

    fn check_point(&self, x: f64) -> Result<()> {
        let t_final = self.mesh.final_time();
        if !(0.0..=t_final).contains(&x) {
            return Err(Error::PointOutOfRange { x, t_final });
        }
        Ok(())
    }

    /// Nonzero basis functions on element `l` at `x`, with derivatives up to
    /// `nders` (orders above the degree come out as zero).
    pub fn local_basis(&self, l: usize, x: f64, nders: usize) -> LocalBasis {
        let p = self.degree();
        let span = l + p;
        LocalBasis {
            first: l,
            values: basis_funs_ders(self.knots.knots(), p, span, x, nders),
        }
    }

    /// Nonzero basis functions at `x`.
    pub fn eval_nonzero(&self, x: f64, nders: usize) -> Result<LocalBasis> {
        self.check_point(x)?;
        Ok(self.local_basis(self.mesh.find_element(x), x, nders))
    }

    /// k-th derivative of basis function `j` (0-based) at `x`.
    pub fn eval_basis(&self, j: usize, x: f64, k: usize) -> Result<f64> {
        let n = self.dim();
        if j >= n {
            return Err(Error::IndexOutOfRange { index: j, dim: n });
        }
        if k > self.degree() {
            return Err(Error::DerivativeOrder { order: k, degree: self.degree() });
        }
        let local = self.eval_nonzero(x, k)?;
        let p = self.degree();
        if j < local.first || j > local.first + p {
            return Ok(0.0);
        }
        Ok(local.values[k][j - local.first])
    }

    /// k-th derivative of `Σ c_j b_j` at `x`.
    pub fn evaluate(&self, coeffs: &[f64], x: f64, k: usize) -> Result<f64> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: coeffs.len() });
        }
        let local = self.eval_nonzero(x, k)?;
        Ok(local.values[k]
            .iter()
            .enumerate()
            .map(|(i, b)| coeffs[local.first + i] * b)
            .sum())
    }

    /// Banded Gram matrix `∫ ∂^k b_i ∂^k b_j` over the full basis.
    pub fn gram(&self, k: usize) -> BandedMatrix {
        let p = self.degree();
        let n = self.dim();
        let mut g = BandedMatrix::zeros(n, n, p, p);
        let rule = gauss_legendre((p + 1).saturating_sub(k).max(1)).unwrap();
        for l in 0..self.mesh.num_elements() {
            let (a, b) = self.mesh.element(l);
            for (x, w) in rule.mapped(a, b) {
                let loc = self.local_basis(l, x, k);
                let vals = &loc.values[k];
                for (r, vr) in vals.iter().enumerate() {
                    for (c, vc) in vals.iter().enumerate() {
                        g.add(loc.first + r, loc.first + c, w * vr * vc);
                    }
                }
            }
        }
        g
    }

    /// Coefficients of the antiderivative `∫_0^t` of `Σ c_i b_i` in the space of
    /// degree `p + 1` on the same mesh (value 0 at `t = 0`).
    pub fn antiderivative(&self, coeffs: &[f64]) -> CoeffVector {
        let p = self.degree();
        let t = self.knots.knots();
        let mut out = Vec::with_capacity(coeffs.len() + 1);
        let mut acc = 0.0;
        out.push(acc);
        for (k, c) in coeffs.iter().enumerate() {
            acc += c * (t[k + p + 1] - t[k]) / (p as f64 + 1.0);
            out.push(acc);
        }
        CoeffVector(out)
    }
}

/// Builds the maximal-regularity space of degree `degree >= 1` on `mesh`.
pub fn make_maximal_space(mesh: Mesh, degree: usize) -> Result<SplineSpace> {
    if degree < 1 {
        return Err(Error::InvalidDegree { degree, min: 1 });
    }
    Ok(SplineSpace::maximal(mesh, degree))
}

/// Values and derivatives of the `p + 1` basis functions nonzero on knot span
/// `span` (so `knots[span] <= x < knots[span + 1]`, or `x = T` on the last span).
fn basis_funs_ders(knots: &[f64], p: usize, span: usize, x: f64, nders: usize) -> Vec<Vec<f64>> {
    // ndu[j][r]: basis values in the upper triangle, knot differences in the lower
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = if ndu[j][r] == 0.0 { 0.0 } else { ndu[r][j - 1] / ndu[j][r] };
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    let mut ders = vec![vec![0.0; p + 1]; nders + 1];
    for (j, d) in ders[0].iter_mut().enumerate() {
        *d = ndu[j][p];
    }
    let top = nders.min(p);
    let mut a = vec![vec![0.0; p + 1]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0].iter_mut().for_each(|v| *v = 0.0);
        a[0][0] = 1.0;
        for k in 1..=top {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = p - k;
            if r >= k {
                let rk = rk as usize;
                a[s2][0] = div0(a[s1][0], ndu[pk + 1][rk]);
                d = a[s2][0] * ndu[rk][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if r as isize - 1 <= pk as isize { k - 1 } else { p - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = div0(a[s1][j] - a[s1][j - 1], ndu[pk + 1][idx]);
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][k] = div0(-a[s1][k - 1], ndu[pk + 1][r]);
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = p as f64;
    for k in 1..=top {
        for v in ders[k].iter_mut() {
            *v *= factor;
        }
        factor *= (p - k) as f64;
    }
    ders
}

/// Division with the `0/0 = 0` convention of the recursion.
fn div0(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// `L²(0,T)` orthogonal projection of `f` onto `space`, with `quad_order`
/// Gauss points per element for the right-hand side.
pub fn l2_project(space: &SplineSpace, f: impl Fn(f64) -> f64, quad_order: usize) -> Result<CoeffVector> {
    let p = space.degree();
    if quad_order < p + 1 {
        return Err(Error::InsufficientQuadrature { points: quad_order, degree: p });
    }
    let rule = gauss_legendre(quad_order)?;
    let mut rhs = vec![0.0; space.dim()];
    let mesh = space.mesh();
    for l in 0..mesh.num_elements() {
        let (a, b) = mesh.element(l);
        for (x, w) in rule.mapped(a, b) {
            let fx = f(x);
            let loc = space.local_basis(l, x, 0);
            for (i, v) in loc.values[0].iter().enumerate() {
                rhs[loc.first + i] += w * fx * v;
            }
        }
    }
    let mass = space.gram(0);
    let chol = BandCholesky::factor(&mass)?;
    Ok(CoeffVector(chol.solve(&rhs)))
}

/// Quasi-interpolant `Q_p^q u = u(0) + ∫_0^t Q_{p-1}^{q-1}(u')`, with
/// `Q_{p-q}^0` the L² projection of `∂^q u`.
///
/// `u(k, t)` must return the k-th derivative of `u` at `t` for `k <= q`.
pub fn quasi_interpolant(
    space: &SplineSpace,
    q: usize,
    u: impl Fn(usize, f64) -> f64,
) -> Result<CoeffVector> {
    let p = space.degree();
    if q < 1 || q > p {
        return Err(Error::QuasiInterpolantOrder { q, degree: p });
    }
    let mut level = space.with_degree(p - q);
    let quad = DEFAULT_RHS_POINTS.max(p + 1);
    let mut coeffs = l2_project(&level, |t| u(q, t), quad)?;
    for m in 1..=q {
        let mut integrated = level.antiderivative(&coeffs);
        let shift = u(q - m, 0.0);
        // partition of unity: adding a constant shifts every coefficient
        integrated.iter_mut().for_each(|c| *c += shift);
        level = level.with_degree(level.degree() + 1);
        coeffs = integrated;
    }
    Ok(coeffs)
}
