//! The catalog of degenerate elliptic operators `F(x, z, p, M)` with
//! pointwise evaluation and ellipticity diagnostics.
//!
//! Two catalog families are provided: a uniformly elliptic operator with
//! drift and zeroth-order term,
//! `F = -Trace(A(p) M) + <b(x), p> + c z` with `A(p) = lambda I`,
//! and quasilinear trace operators
//! `F = -Trace(A(|p|) M) + g(p) + c z`
//! whose diffusion is one of the Laplace, p-Laplace, or minimal-surface
//! profiles. A constant-matrix variant exists for scheme diagnostics.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::seed::{rng_for, stream};

/// Gradient-dependent diffusion profiles `A(|p|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum DiffusionProfile {
    /// `A = I`.
    Laplace,
    /// `A(|p|) = |p|^(q-2) I`.
    PLaplace { exponent: f64 },
    /// `A(p) = (I - p p^T / (1+|p|^2)) / sqrt(1+|p|^2)`.
    MinimalSurface,
}

impl DiffusionProfile {
    /// The diffusion matrix at gradient `p`. For the p-Laplace profile with
    /// exponent below 2 the matrix is singular at `p = 0`; passing
    /// `regularize = true` substitutes the zero matrix there, otherwise the
    /// call reports the singularity and the caller decides.
    pub fn matrix(&self, p: &DVector<f64>, regularize: bool) -> Result<DMatrix<f64>> {
        let n = p.len();
        let eye = DMatrix::identity(n, n);
        match *self {
            DiffusionProfile::Laplace => Ok(eye),
            DiffusionProfile::PLaplace { exponent } => {
                let r = p.norm();
                if r == 0.0 && exponent < 2.0 {
                    if regularize {
                        return Ok(DMatrix::zeros(n, n));
                    }
                    return Err(Error::SingularDiffusion { exponent });
                }
                Ok(eye * r.powf(exponent - 2.0))
            }
            DiffusionProfile::MinimalSurface => {
                let r2 = p.norm_squared();
                let scale = 1.0 / (1.0 + r2).sqrt();
                Ok((eye - p * p.transpose() / (1.0 + r2)) * scale)
            }
        }
    }

    /// Smallest eigenvalue of `A` at gradient norm `r`, by closed form.
    pub fn min_eigenvalue(&self, r: f64) -> f64 {
        match *self {
            DiffusionProfile::Laplace => 1.0,
            DiffusionProfile::PLaplace { exponent } => r.powf(exponent - 2.0),
            DiffusionProfile::MinimalSurface => (1.0 + r * r).powf(-1.5),
        }
    }

    /// Largest eigenvalue of `A` at gradient norm `r`.
    pub fn max_eigenvalue(&self, r: f64) -> f64 {
        match *self {
            DiffusionProfile::Laplace => 1.0,
            DiffusionProfile::PLaplace { exponent } => r.powf(exponent - 2.0),
            DiffusionProfile::MinimalSurface => (1.0 + r * r).powf(-0.5),
        }
    }
}

#[derive(Debug, Clone)]
pub enum EllipticOperator {
    /// `F = -lambda Trace(M) + <b(x), p> + c z`, uniformly elliptic with
    /// ellipticity floor `lambda`, drift field `b` bounded by `drift_bound`.
    LinearDrift {
        lambda: f64,
        drift: Vec<Expr>,
        drift_bound: f64,
        zeroth: f64,
    },
    /// `F = -Trace(A(|p|) M) + g(p) + c z`.
    QuasilinearTrace {
        profile: DiffusionProfile,
        first_order: Option<Expr>,
        zeroth: f64,
    },
    /// `F = -Trace(A0 M) + c z` for a fixed symmetric matrix; used to probe
    /// scheme rejection paths with hand-built diffusions.
    ConstantDiffusion { matrix: DMatrix<f64>, zeroth: f64 },
}

impl EllipticOperator {
    /// Builds the drift operator, validating `|b(x)| <= drift_bound` by dense
    /// sampling over `[-10, 10]^n` (the expression grammar has no symbolic
    /// bound).
    pub fn linear_drift(
        lambda: f64,
        drift: Vec<Expr>,
        drift_bound: f64,
        zeroth: f64,
    ) -> Result<Self> {
        if lambda <= 0.0 {
            return Err(Error::Config(format!(
                "ellipticity floor must be positive: {lambda}"
            )));
        }
        if zeroth <= 0.0 {
            return Err(Error::Config(format!(
                "zeroth-order coefficient must be positive: {zeroth}"
            )));
        }
        if drift_bound < 0.0 {
            return Err(Error::Config(format!(
                "drift bound must be nonnegative: {drift_bound}"
            )));
        }
        let dim = drift.len();
        if dim == 0 || dim > 4 {
            return Err(Error::Config(format!(
                "drift field must have 1..=4 components, got {dim}"
            )));
        }
        let op = EllipticOperator::LinearDrift {
            lambda,
            drift,
            drift_bound,
            zeroth,
        };
        op.validate_drift_bound(20_000, 0)?;
        Ok(op)
    }

    pub fn quasilinear(
        profile: DiffusionProfile,
        first_order: Option<Expr>,
        zeroth: f64,
    ) -> Result<Self> {
        if zeroth <= 0.0 {
            return Err(Error::Config(format!(
                "zeroth-order coefficient must be positive: {zeroth}"
            )));
        }
        if let DiffusionProfile::PLaplace { exponent } = profile {
            if exponent <= 1.0 {
                return Err(Error::Config(format!(
                    "p-Laplace exponent must exceed 1: {exponent}"
                )));
            }
        }
        Ok(EllipticOperator::QuasilinearTrace {
            profile,
            first_order,
            zeroth,
        })
    }

    pub fn constant_diffusion(matrix: DMatrix<f64>, zeroth: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        Ok(EllipticOperator::ConstantDiffusion { matrix, zeroth })
    }

    fn validate_drift_bound(&self, samples: usize, seed: u64) -> Result<()> {
        let EllipticOperator::LinearDrift {
            drift, drift_bound, ..
        } = self
        else {
            return Ok(());
        };
        let dim = drift.len();
        for i in 0..samples {
            let mut rng = rng_for(seed, stream::DRIFT_BOUND, i as u64);
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect();
            let norm2: f64 = drift.iter().map(|e| e.eval(&x).powi(2)).sum();
            if norm2.sqrt() > *drift_bound + 1e-9 {
                return Err(Error::Config(format!(
                    "drift field exceeds its bound {drift_bound} at x = {x:?} (|b| = {})",
                    norm2.sqrt()
                )));
            }
        }
        Ok(())
    }

    /// Ambient dimension determined by the operator data, if any.
    pub fn dim_hint(&self) -> Option<usize> {
        match self {
            EllipticOperator::LinearDrift { drift, .. } => Some(drift.len()),
            EllipticOperator::QuasilinearTrace { .. } => None,
            EllipticOperator::ConstantDiffusion { matrix, .. } => Some(matrix.nrows()),
        }
    }

    pub fn zeroth(&self) -> f64 {
        match self {
            EllipticOperator::LinearDrift { zeroth, .. }
            | EllipticOperator::QuasilinearTrace { zeroth, .. }
            | EllipticOperator::ConstantDiffusion { zeroth, .. } => *zeroth,
        }
    }

    /// Diffusion matrix at gradient `p`.
    pub fn diffusion(&self, p: &DVector<f64>, regularize: bool) -> Result<DMatrix<f64>> {
        match self {
            EllipticOperator::LinearDrift { lambda, .. } => {
                Ok(DMatrix::identity(p.len(), p.len()) * *lambda)
            }
            EllipticOperator::QuasilinearTrace { profile, .. } => profile.matrix(p, regularize),
            EllipticOperator::ConstantDiffusion { matrix, .. } => Ok(matrix.clone()),
        }
    }

    /// The 1x1 diffusion value at slope magnitude `r` (the one-dimensional
    /// matrix is its own smallest eigenvalue). Used by the solver's scalar
    /// fast path.
    pub fn diffusion_scalar_1d(&self, r: f64) -> f64 {
        match self {
            EllipticOperator::LinearDrift { lambda, .. } => *lambda,
            EllipticOperator::QuasilinearTrace { profile, .. } => profile.min_eigenvalue(r),
            EllipticOperator::ConstantDiffusion { matrix, .. } => matrix[(0, 0)],
        }
    }

    /// Smallest eigenvalue of the diffusion matrix at gradient `p`.
    pub fn min_eigen_lambda(&self, p: &DVector<f64>) -> f64 {
        match self {
            EllipticOperator::LinearDrift { lambda, .. } => *lambda,
            EllipticOperator::QuasilinearTrace { profile, .. } => profile.min_eigenvalue(p.norm()),
            EllipticOperator::ConstantDiffusion { matrix, .. } => symmetric_eigen_range(matrix).0,
        }
    }

    /// Largest eigenvalue of the diffusion matrix at gradient norm `r`.
    pub fn max_eigen_lambda(&self, r: f64) -> f64 {
        match self {
            EllipticOperator::LinearDrift { lambda, .. } => *lambda,
            EllipticOperator::QuasilinearTrace { profile, .. } => profile.max_eigenvalue(r),
            EllipticOperator::ConstantDiffusion { matrix, .. } => symmetric_eigen_range(matrix).1,
        }
    }

    /// Evaluates `F(x, z, p, M)`. `M` is symmetrized; input asymmetry beyond
    /// 1e-12 relative is rejected.
    pub fn eval(&self, x: &[f64], z: f64, p: &DVector<f64>, m: &DMatrix<f64>) -> Result<f64> {
        self.eval_with(x, z, p, m, false)
    }

    pub fn eval_with(
        &self,
        x: &[f64],
        z: f64,
        p: &DVector<f64>,
        m: &DMatrix<f64>,
        regularize: bool,
    ) -> Result<f64> {
        let n = p.len();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: m.nrows(),
            });
        }
        if let Some(d) = self.dim_hint() {
            if d != n {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: n,
                });
            }
        }
        let m_sym = symmetrize_checked(m)?;
        let a = self.diffusion(p, regularize)?;
        let second = -(&a * &m_sym).trace();
        let first = match self {
            EllipticOperator::LinearDrift { drift, .. } => {
                if x.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: x.len(),
                    });
                }
                drift
                    .iter()
                    .zip(p.iter())
                    .map(|(b_k, p_k)| b_k.eval(x) * p_k)
                    .sum::<f64>()
            }
            EllipticOperator::QuasilinearTrace { first_order, .. } => first_order
                .as_ref()
                .map(|g| g.eval(p.as_slice()))
                .unwrap_or(0.0),
            EllipticOperator::ConstantDiffusion { .. } => 0.0,
        };
        Ok(second + first + self.zeroth() * z)
    }
}

/// Symmetrizes `m`, rejecting inputs whose asymmetry exceeds 1e-12 relative.
pub fn symmetrize_checked(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = (m + m.transpose()) * 0.5;
    let skew = (m - m.transpose()) * 0.5;
    let scale = m.norm().max(1.0);
    let asymmetry = skew.norm() / scale;
    if asymmetry > 1e-12 {
        return Err(Error::NotSymmetric { asymmetry });
    }
    Ok(sym)
}

/// Smallest and largest eigenvalues of a symmetric matrix.
pub fn symmetric_eigen_range(m: &DMatrix<f64>) -> (f64, f64) {
    let eig = m.clone().symmetric_eigen();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in eig.eigenvalues.iter() {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    (lo, hi)
}

#[derive(Debug, Clone, Serialize)]
pub struct EllipticityViolation {
    pub sample: usize,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EllipticityReport {
    pub samples: usize,
    pub violations: Vec<EllipticityViolation>,
}

impl EllipticityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples random `(x, z, p, A, B)` with `A <= B` and checks that `F` is
/// order-reversing in the matrix slot: `F(..., B) <= F(..., A) + 1e-10`.
pub fn check_degenerate_ellipticity(
    op: &EllipticOperator,
    dim: usize,
    sample_count: usize,
    seed: u64,
) -> EllipticityReport {
    check_order_reversing(
        |x, z, p, m| op.eval_with(x, z, p, m, true).unwrap_or(f64::NAN),
        dim,
        sample_count,
        seed,
    )
}

/// Closure form of the ellipticity probe, usable against arbitrary maps
/// (e.g. deliberately anti-monotone controls).
pub fn check_order_reversing<F>(f: F, dim: usize, sample_count: usize, seed: u64) -> EllipticityReport
where
    F: Fn(&[f64], f64, &DVector<f64>, &DMatrix<f64>) -> f64,
{
    let mut violations = Vec::new();
    for i in 0..sample_count {
        let mut rng = rng_for(seed, stream::ELLIPTICITY, i as u64);
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
        let z: f64 = rng.random_range(-2.0..2.0);
        let p = DVector::from_fn(dim, |_, _| rng.random_range(-2.0..2.0));
        let a_raw = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
        let a = (&a_raw + a_raw.transpose()) * 0.5;
        let g = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
        let b = &a + &g * g.transpose(); // B = A + PSD
        let fa = f(&x, z, &p, &a);
        let fb = f(&x, z, &p, &b);
        let gap = fb - fa;
        if !(gap <= 1e-10) {
            violations.push(EllipticityViolation { sample: i, gap });
        }
    }
    EllipticityReport {
        samples: sample_count,
        violations,
    }
}
