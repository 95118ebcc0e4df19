//! Matrices and load vectors for the bilinear form
//! `a(u, v) = −⟨u', v'⟩ + μ⟨u, v⟩` and its stabilized variants.
//!
//! Rows index the test space and columns the trial space. All blocks are
//! integrated element by element with Gauss rules that are exact for the
//! polynomial integrands involved.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::BandedMatrix;
use crate::quadrature::gauss_legendre;
use crate::spaces::ReducedSpace;
use crate::spline::Mesh;

/// Which bilinear form to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum FormSpec {
    /// `−⟨u', v'⟩ + μ⟨u, v⟩`.
    Standard { mu: f64 },
    /// `−⟨u', v'⟩ + μ⟨u, Q⁰ v⟩` with `Q⁰` the L² projection onto piecewise constants.
    FemQ0 { mu: f64 },
    /// `−(1 + μh²/12)⟨u', v'⟩ + μ⟨u, v⟩`; per element uses `h_l`.
    FemScaled { mu: f64, per_element: bool },
    /// `−(1 + μh²/9)⟨u', v'⟩ + μ⟨u, v⟩`; per element uses `h_l`.
    IgaScaled { mu: f64, per_element: bool },
    /// `−⟨u', v'⟩ + μ⟨u, v⟩ − δμ h^{2q} ⟨∂^q u, ∂^q v⟩`; per element sums
    /// `h_l^{2q}`-weighted element contributions.
    Penalty { mu: f64, delta: f64, order: usize, per_element: bool },
}

impl FormSpec {
    pub fn standard(mu: f64) -> Self {
        Self::Standard { mu }
    }

    pub fn fem_q0(mu: f64) -> Self {
        Self::FemQ0 { mu }
    }

    pub fn fem_scaled(mu: f64) -> Self {
        Self::FemScaled { mu, per_element: false }
    }

    pub fn iga_scaled(mu: f64) -> Self {
        Self::IgaScaled { mu, per_element: false }
    }

    pub fn penalty(mu: f64, delta: f64, order: usize) -> Self {
        Self::Penalty { mu, delta, order, per_element: false }
    }

    /// Switches to element-wise `h_l` weights where the variant has them.
    pub fn per_element(self) -> Self {
        match self {
            Self::FemScaled { mu, .. } => Self::FemScaled { mu, per_element: true },
            Self::IgaScaled { mu, .. } => Self::IgaScaled { mu, per_element: true },
            Self::Penalty { mu, delta, order, .. } => Self::Penalty { mu, delta, order, per_element: true },
            other => other,
        }
    }

    pub fn mu(&self) -> f64 {
        match *self {
            Self::Standard { mu }
            | Self::FemQ0 { mu }
            | Self::FemScaled { mu, .. }
            | Self::IgaScaled { mu, .. }
            | Self::Penalty { mu, .. } => mu,
        }
    }

    /// Same variant with a different `μ`.
    pub fn with_mu(self, mu: f64) -> Self {
        match self {
            Self::Standard { .. } => Self::Standard { mu },
            Self::FemQ0 { .. } => Self::FemQ0 { mu },
            Self::FemScaled { per_element, .. } => Self::FemScaled { mu, per_element },
            Self::IgaScaled { per_element, .. } => Self::IgaScaled { mu, per_element },
            Self::Penalty { delta, order, per_element, .. } => Self::Penalty { mu, delta, order, per_element },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Standard { .. } => "standard",
            Self::FemQ0 { .. } => "fem_q0",
            Self::FemScaled { .. } => "fem_scaled",
            Self::IgaScaled { .. } => "iga_scaled",
            Self::Penalty { .. } => "penalty",
        }
    }

    /// Projection stabilization on non-linear splines under-integrates and
    /// is known to give poor results.
    pub fn known_poor(&self, degree: usize) -> bool {
        matches!(self, Self::FemQ0 { .. }) && degree != 1
    }

    pub fn validate(&self, degree: usize) -> Result<()> {
        let mu = self.mu();
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::InvalidForm(format!("mu = {mu}")));
        }
        if let Self::Penalty { delta, order, .. } = *self {
            if !(delta >= 0.0 && delta.is_finite()) {
                return Err(Error::InvalidForm(format!("delta = {delta}")));
            }
            if order == 0 || order > degree {
                return Err(Error::InvalidForm(format!(
                    "penalty order {order} must lie in 1..={degree}"
                )));
            }
        }
        Ok(())
    }
}

/// Matrices of one discrete problem.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    /// `a(b_trial(j), b_test(i))`.
    pub a: BandedMatrix,
    /// Trial derivative Gram matrix.
    pub h1: BandedMatrix,
    /// Test derivative Gram matrix.
    pub h2: BandedMatrix,
    /// `⟨f, b_test(i)⟩`, empty when no load was requested.
    pub rhs: Vec<f64>,
    pub known_poor: bool,
}

/// Band limits for rows of `rows` against columns of `cols`.
fn pair_band(rows: &ReducedSpace, cols: &ReducedSpace) -> (usize, usize) {
    let p = rows.degree() as isize;
    let shift = cols.offset() as isize - rows.offset() as isize;
    ((shift + p).max(0) as usize, (p - shift).max(0) as usize)
}

/// `Σ_l w_l ∫_{τ_l} ∂^k b_col ∂^k b_row`.
fn weighted_gram(
    rows: &ReducedSpace,
    cols: &ReducedSpace,
    k: usize,
    weight: impl Fn(usize) -> f64,
) -> BandedMatrix {
    let (kl, ku) = pair_band(rows, cols);
    let mut m = BandedMatrix::zeros(rows.dim(), cols.dim(), kl, ku);
    let p = rows.degree();
    if k > p {
        return m;
    }
    let space = rows.parent();
    let mesh = space.mesh();
    let rule = gauss_legendre((p - k + 1).max(1)).unwrap();
    for l in 0..mesh.num_elements() {
        let wl = weight(l);
        if wl == 0.0 {
            continue;
        }
        let (a, b) = mesh.element(l);
        for (x, w) in rule.mapped(a, b) {
            let loc = space.local_basis(l, x, k);
            let vals = &loc.values[k];
            for (r, vr) in vals.iter().enumerate() {
                let Some(i) = rows.reduced_index(loc.first + r) else { continue };
                for (c, vc) in vals.iter().enumerate() {
                    let Some(j) = cols.reduced_index(loc.first + c) else { continue };
                    m.add(i, j, wl * w * vr * vc);
                }
            }
        }
    }
    m
}

/// `Σ_l (1/h_l) (∫_{τ_l} b_col)(∫_{τ_l} b_row)`, i.e. `⟨b_col, Q⁰ b_row⟩`.
fn projected_mass(rows: &ReducedSpace, cols: &ReducedSpace) -> BandedMatrix {
    let (kl, ku) = pair_band(rows, cols);
    let mut m = BandedMatrix::zeros(rows.dim(), cols.dim(), kl, ku);
    let space = rows.parent();
    let mesh = space.mesh();
    let p = space.degree();
    let rule = gauss_legendre(p + 1).unwrap();
    let mut means = vec![0.0; p + 1];
    for l in 0..mesh.num_elements() {
        let (a, b) = mesh.element(l);
        means.iter_mut().for_each(|v| *v = 0.0);
        let mut first = 0;
        for (x, w) in rule.mapped(a, b) {
            let loc = space.local_basis(l, x, 0);
            first = loc.first;
            for (r, v) in loc.values[0].iter().enumerate() {
                means[r] += w * v;
            }
        }
        let inv_h = 1.0 / mesh.element_len(l);
        for (r, ir) in means.iter().enumerate() {
            let Some(i) = rows.reduced_index(first + r) else { continue };
            for (c, ic) in means.iter().enumerate() {
                let Some(j) = cols.reduced_index(first + c) else { continue };
                m.add(i, j, inv_h * ir * ic);
            }
        }
    }
    m
}

fn check_same_mesh(a: &ReducedSpace, b: &ReducedSpace) -> Result<()> {
    if a.parent() != b.parent() {
        return Err(Error::ParentMismatch);
    }
    Ok(())
}

/// Assembles `A[i][j] = a_h(b_trial(j), b_test(i))`.
pub fn assemble_matrix(trial: &ReducedSpace, test: &ReducedSpace, form: &FormSpec) -> Result<BandedMatrix> {
    check_same_mesh(trial, test)?;
    let p = trial.degree();
    form.validate(p)?;
    let mesh = trial.parent().mesh();
    let h = mesh.h();
    let mu = form.mu();

    let stiffness_scale = |factor: f64, per_element: bool| {
        move |l: usize| {
            let hl = if per_element { mesh.element_len(l) } else { h };
            1.0 + mu * hl * hl / factor
        }
    };
    let stiffness = match *form {
        FormSpec::FemScaled { per_element, .. } => weighted_gram(test, trial, 1, stiffness_scale(12.0, per_element)),
        FormSpec::IgaScaled { per_element, .. } => weighted_gram(test, trial, 1, stiffness_scale(9.0, per_element)),
        _ => weighted_gram(test, trial, 1, |_| 1.0),
    };
    let mass = match form {
        FormSpec::FemQ0 { .. } => projected_mass(test, trial),
        _ => weighted_gram(test, trial, 0, |_| 1.0),
    };
    let mut a = stiffness.combine(-1.0, &mass, mu);

    if let FormSpec::Penalty { delta, order, per_element, .. } = *form {
        let exp = 2 * order as i32;
        let penalty = weighted_gram(test, trial, order, |l| {
            let hl = if per_element { mesh.element_len(l) } else { h };
            hl.powi(exp)
        });
        a = a.combine(1.0, &penalty, -delta * mu);
    }
    Ok(a)
}

/// Derivative Gram matrix `⟨b_i', b_j'⟩` of a reduced space.
pub fn assemble_h1_gram(space: &ReducedSpace) -> BandedMatrix {
    weighted_gram(space, space, 1, |_| 1.0)
}

/// Mass matrix `⟨b_i, b_j⟩` of a reduced space.
pub fn assemble_mass(space: &ReducedSpace) -> BandedMatrix {
    weighted_gram(space, space, 0, |_| 1.0)
}

/// `⟨f, b_i⟩` with `quad_order` Gauss points per element.
pub fn assemble_load(space: &ReducedSpace, f: impl Fn(f64) -> f64, quad_order: usize) -> Result<Vec<f64>> {
    let rule = gauss_legendre(quad_order)?;
    let parent = space.parent();
    let mesh = parent.mesh();
    let mut rhs = vec![0.0; space.dim()];
    for l in 0..mesh.num_elements() {
        let (a, b) = mesh.element(l);
        for (x, w) in rule.mapped(a, b) {
            let fx = f(x);
            if fx == 0.0 {
                continue;
            }
            let loc = parent.local_basis(l, x, 0);
            for (r, v) in loc.values[0].iter().enumerate() {
                if let Some(i) = space.reduced_index(loc.first + r) {
                    rhs[i] += w * fx * v;
                }
            }
        }
    }
    Ok(rhs)
}

/// All matrices of a discrete problem, plus the load for `f` when given.
pub fn assemble_system(
    trial: &ReducedSpace,
    test: &ReducedSpace,
    form: &FormSpec,
    load: Option<(&dyn Fn(f64) -> f64, usize)>,
) -> Result<AssembledSystem> {
    let a = assemble_matrix(trial, test, form)?;
    let rhs = match load {
        Some((f, q)) => assemble_load(test, f, q)?,
        None => Vec::new(),
    };
    Ok(AssembledSystem {
        a,
        h1: assemble_h1_gram(trial),
        h2: assemble_h1_gram(test),
        rhs,
        known_poor: form.known_poor(trial.degree()),
    })
}

/// Element means `(1/h_l) ∫_{τ_l} v_h` of a reduced-space member.
pub fn q0_project(mesh: &Mesh, space: &ReducedSpace, coeffs: &[f64]) -> Result<Vec<f64>> {
    if space.parent().mesh() != mesh {
        return Err(Error::ParentMismatch);
    }
    if coeffs.len() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), found: coeffs.len() });
    }
    let parent = space.parent();
    let rule = gauss_legendre(parent.degree() + 1)?;
    Ok((0..mesh.num_elements())
        .map(|l| {
            let (a, b) = mesh.element(l);
            let integral: f64 = rule
                .mapped(a, b)
                .map(|(x, w)| {
                    let loc = parent.local_basis(l, x, 0);
                    let v: f64 = loc.values[0]
                        .iter()
                        .enumerate()
                        .filter_map(|(r, b)| space.reduced_index(loc.first + r).map(|i| coeffs[i] * b))
                        .sum();
                    w * v
                })
                .sum();
            integral / (b - a)
        })
        .collect())
}
