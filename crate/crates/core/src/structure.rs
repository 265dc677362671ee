//! Two-point matrix calculus: the Hessian blocks `P` and `Q = P + 2 eps P^2`
//! of the doubled test function, sampling of matrix pairs `(A, B)` from the
//! block inequality
//! `[[A, 0], [0, -B]] <= [[Q, -Q], [-Q, Q]]`,
//! verification of the order and trace lemmas those pairs satisfy, the
//! reflection-matrix trace bound, and the structure condition linking an
//! n-dimensional operator `F` to a one-dimensional operator `f`.
//!
//! Everything here is sampled falsification, not proof: generators mix
//! boundary-projected, shifted-identity, and rejection-sampled pairs so the
//! checks actually visit the extremal set where the bounds are tight.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::oned::{eval_f, OneDimOperator, OneDimProfile};
use crate::operators::{symmetric_eigen_range, DiffusionProfile, EllipticOperator};
use crate::seed::{rng_for, stream};

/// Eigenvalue certificates may dip this far below zero before a pair counts
/// as inadmissible.
pub const CERTIFICATE_TOL: f64 = 1e-10;
/// Tolerance for the scalar trace and structure inequalities.
pub const INEQUALITY_TOL: f64 = 1e-8;

/// The two-point Hessian data at a sample of the doubled variables:
/// `P = (phi''/2) u u^T + (phi'/(2s)) (I - u u^T)` and `Q = P + 2 eps P^2`.
#[derive(Debug, Clone)]
pub struct TwoPointHessian {
    pub dim: usize,
    pub s: f64,
    pub phi_prime: f64,
    pub phi_second: f64,
    pub direction: DVector<f64>,
    pub epsilon: f64,
    pub p_matrix: DMatrix<f64>,
    pub q_matrix: DMatrix<f64>,
}

/// Builds `P` (the `eps = 0` Hessian) at the given one-dimensional jet.
pub fn build_p(
    dim: usize,
    s: f64,
    phi_prime: f64,
    phi_second: f64,
    direction: DVector<f64>,
) -> Result<TwoPointHessian> {
    if dim == 0 || dim > 4 {
        return Err(Error::Config(format!(
            "two-point Hessians support dimensions 1..=4, got {dim}"
        )));
    }
    if s <= 0.0 {
        return Err(Error::Config(format!("pair separation must be positive: {s}")));
    }
    if direction.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: direction.len(),
        });
    }
    if (direction.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "direction must be a unit vector (|u| = {})",
            direction.norm()
        )));
    }
    let uut = &direction * direction.transpose();
    let eye = DMatrix::identity(dim, dim);
    let p_matrix = &uut * (phi_second / 2.0) + (&eye - &uut) * (phi_prime / (2.0 * s));
    Ok(TwoPointHessian {
        dim,
        s,
        phi_prime,
        phi_second,
        direction,
        epsilon: 0.0,
        q_matrix: p_matrix.clone(),
        p_matrix,
    })
}

/// `Q = P + 2 eps P^2`.
pub fn build_q(p: &DMatrix<f64>, epsilon: f64) -> DMatrix<f64> {
    p + (p * p) * (2.0 * epsilon)
}

impl TwoPointHessian {
    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if epsilon < 0.0 {
            return Err(Error::Config(format!(
                "epsilon must be nonnegative: {epsilon}"
            )));
        }
        self.epsilon = epsilon;
        self.q_matrix = build_q(&self.p_matrix, epsilon);
        Ok(self)
    }

    /// The full doubled Hessian `[[P, -P], [-P, P]]`.
    pub fn full_block(&self) -> DMatrix<f64> {
        block2(
            &self.p_matrix,
            &(-&self.p_matrix),
            &(-&self.p_matrix),
            &self.p_matrix,
        )
    }

    /// `|P u| = |phi''| / 2` since `P u = (phi''/2) u`.
    pub fn p_u_norm(&self) -> f64 {
        self.phi_second.abs() / 2.0
    }

    /// The trace bound `2 phi'' + 8 eps |P u|^2`.
    pub fn trace_bound(&self) -> f64 {
        2.0 * self.phi_second + 8.0 * self.epsilon * self.p_u_norm().powi(2)
    }
}

fn block2(
    m11: &DMatrix<f64>,
    m12: &DMatrix<f64>,
    m21: &DMatrix<f64>,
    m22: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = m11.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => m11[(i, j)],
        (true, false) => m12[(i, j - n)],
        (false, true) => m21[(i - n, j)],
        (false, false) => m22[(i - n, j - n)],
    })
}

/// Smallest eigenvalue of `[[Q - A, -Q], [-Q, Q + B]]`; the pair is
/// admissible iff this certificate is at least `-1e-10`.
pub fn check_block_inequality(a: &DMatrix<f64>, b: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    let neg_q = -q;
    let block = block2(&(q - a), &neg_q, &neg_q, &(q + b));
    symmetric_eigen_range(&block).0
}

#[derive(Debug, Clone)]
pub struct AdmissiblePair {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub certificate: f64,
}

fn symmetric_random(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<f64> {
    let raw = DMatrix::from_fn(n, n, |_, _| rng.random_range(-scale..scale));
    (&raw + raw.transpose()) * 0.5
}

fn unit_direction(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0f64));
        let norm = v.norm();
        if norm > 1e-3 {
            return v / norm;
        }
    }
}

/// Smallest shift `t` making `A = Q - tI`, `B = Q + tI` admissible; from the
/// per-eigendirection condition `t^2 + 2 q_i t - q_i^2 >= 0`.
pub fn shifted_identity_t_min(q: &DMatrix<f64>) -> f64 {
    let eig = q.clone().symmetric_eigen();
    let mut t = 0.0f64;
    for qi in eig.eigenvalues.iter() {
        let need = if *qi >= 0.0 {
            (2.0f64.sqrt() - 1.0) * qi
        } else {
            (2.0f64.sqrt() + 1.0) * qi.abs()
        };
        t = t.max(need);
    }
    t
}

/// The trace-extremal admissible pair: per eigendirection of `Q`,
/// `(a, b) = (2q, -2q)` where `q <= 0` (reaching `a - b = 4q`) and `(0, 0)`
/// where `q > 0` (where `a - b <= 0` is forced).
pub fn extremal_pair(q: &DMatrix<f64>) -> AdmissiblePair {
    let eig = q.clone().symmetric_eigen();
    let n = q.nrows();
    let mut da = DMatrix::zeros(n, n);
    let mut db = DMatrix::zeros(n, n);
    for k in 0..n {
        let qk = eig.eigenvalues[k];
        if qk <= 0.0 {
            da[(k, k)] = 2.0 * qk;
            db[(k, k)] = -2.0 * qk;
        }
    }
    let v = &eig.eigenvectors;
    let a = v * da * v.transpose();
    let b = v * db * v.transpose();
    let certificate = check_block_inequality(&a, &b, q);
    AdmissiblePair { a, b, certificate }
}

fn generate_pair(
    strategy: usize,
    q: &DMatrix<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<(AdmissiblePair, usize)> {
    let n = q.nrows();
    let rho = symmetric_eigen_range(q).0.abs().max(symmetric_eigen_range(q).1.abs());
    match strategy % 3 {
        // B arbitrary bounded, A = B + R with R <= 0, then shift both by the
        // certificate defect so the pair lands on (or just inside) the
        // boundary of the admissible set.
        0 => {
            let b0 = symmetric_random(rng, n, rho.max(1.0));
            let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0f64));
            let a0 = &b0 - &g * g.transpose();
            let cert0 = check_block_inequality(&a0, &b0, q);
            let slack = if rng.random_range(0.0..1.0f64) < 0.5 {
                0.0
            } else {
                rng.random_range(0.0..0.5 * rho.max(1.0))
            };
            let delta = (-cert0).max(0.0) + slack;
            let eye = DMatrix::identity(n, n);
            let a = a0 - &eye * delta;
            let b = b0 + &eye * delta;
            let certificate = check_block_inequality(&a, &b, q);
            Ok((AdmissiblePair { a, b, certificate }, 1))
        }
        // Identity shifts along the test directions; t = t_min sits on the
        // boundary.
        1 => {
            let t_min = shifted_identity_t_min(q);
            let extra = if rng.random_range(0.0..1.0f64) < 0.34 {
                0.0
            } else {
                rng.random_range(0.0..2.0 * rho.max(1.0))
            };
            let t = t_min + extra;
            let eye = DMatrix::identity(n, n);
            let a = q - &eye * t;
            let b = q + &eye * t;
            let certificate = check_block_inequality(&a, &b, q);
            Ok((AdmissiblePair { a, b, certificate }, 1))
        }
        // Rejection sampling: random symmetric perturbations of the corner
        // blocks Q - A and Q + B, independently scaled.
        _ => {
            let scale = rho.max(1.0);
            for attempt in 1..=100usize {
                let t1: f64 = rng.random_range(0.0..3.0 * scale);
                let t2: f64 = rng.random_range(0.0..3.0 * scale);
                let eye = DMatrix::identity(n, n);
                let a = q - &eye * t1 + symmetric_random(rng, n, 0.4 * scale);
                let b = -q + &eye * t2 + symmetric_random(rng, n, 0.4 * scale);
                let certificate = check_block_inequality(&a, &b, q);
                if certificate >= -CERTIFICATE_TOL {
                    return Ok((AdmissiblePair { a, b, certificate }, attempt));
                }
            }
            Err(Error::SamplerStarvation {
                requested: 1,
                accepted: 0,
                attempts: 100,
            })
        }
    }
}

/// Samples `count` admissible pairs against `Q`, cycling the three
/// generation strategies so each contributes at least a quarter.
pub fn sample_admissible_pairs(
    q: &DMatrix<f64>,
    count: usize,
    seed: u64,
) -> Result<Vec<AdmissiblePair>> {
    let results: Result<Vec<(AdmissiblePair, usize)>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, stream::PAIRS, i as u64);
            generate_pair(i, q, &mut rng)
        })
        .collect();
    let pairs = results?;
    Ok(pairs.into_iter().map(|(p, _)| p).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaViolation {
    pub pair_index: usize,
    pub kind: &'static str,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub checked: usize,
    /// Pairs rejected by the admissibility screen before the lemma check.
    pub excluded_inadmissible: usize,
    pub violations: Vec<LemmaViolation>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// For pairs sampled with `eps = 0` (so `Q = P`): `A <= B` and
/// `Trace(A - B) <= 2 phi''`.
pub fn verify_lemma_31(pairs: &[AdmissiblePair], hess: &TwoPointHessian) -> Result<LemmaReport> {
    if hess.epsilon != 0.0 {
        return Err(Error::Config(
            "first trace lemma applies to eps = 0 sampling".into(),
        ));
    }
    verify_lemma_32(pairs, hess)
}

/// For pairs admissible against `Q = P + 2 eps P^2`: `A <= B` and
/// `Trace(A - B) <= 2 phi'' + 8 eps |P u|^2`.
pub fn verify_lemma_32(pairs: &[AdmissiblePair], hess: &TwoPointHessian) -> Result<LemmaReport> {
    let bound = hess.trace_bound();
    let mut checked = 0usize;
    let mut excluded = 0usize;
    let mut violations = Vec::new();
    for (idx, pair) in pairs.iter().enumerate() {
        let cert = check_block_inequality(&pair.a, &pair.b, &hess.q_matrix);
        if cert < -CERTIFICATE_TOL {
            excluded += 1;
            continue;
        }
        checked += 1;
        let diff = &pair.a - &pair.b;
        let (_, max_eig) = symmetric_eigen_range(&diff);
        if max_eig > CERTIFICATE_TOL {
            violations.push(LemmaViolation {
                pair_index: idx,
                kind: "order",
                value: max_eig,
                bound: 0.0,
            });
        }
        let trace = diff.trace();
        if trace > bound + INEQUALITY_TOL {
            violations.push(LemmaViolation {
                pair_index: idx,
                kind: "trace",
                value: trace,
                bound,
            });
        }
    }
    Ok(LemmaReport {
        checked,
        excluded_inadmissible: excluded,
        violations,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceBoundReport {
    /// Smallest eigenvalue of `[[I, C], [C, I]]` for `C = I - 2 u u^T`.
    pub c_block_min_eig: f64,
    pub trace_diff: f64,
    /// `2 Trace((I - C) Q) = 4 u^T Q u`.
    pub bound: f64,
    pub holds: bool,
}

/// The reflection-choice trace bound: for admissible `(A, B)` and
/// `C = I - 2 u u^T`, the block `[[I, C], [C, I]]` is positive semidefinite
/// and `Trace(A - B) <= 4 u^T Q u`.
pub fn trace_bound_via_c(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    u: &DVector<f64>,
) -> Result<TraceBoundReport> {
    if (u.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Config("direction must be a unit vector".into()));
    }
    let cert = check_block_inequality(a, b, q);
    if cert < -CERTIFICATE_TOL {
        return Err(Error::Config(format!(
            "pair is not admissible for Q (certificate {cert:.3e})"
        )));
    }
    let n = q.nrows();
    let c = DMatrix::identity(n, n) - (u * u.transpose()) * 2.0;
    let eye = DMatrix::identity(n, n);
    let c_block = block2(&eye, &c, &c, &eye);
    let c_block_min_eig = symmetric_eigen_range(&c_block).0;
    let trace_diff = (a - b).trace();
    let bound = 4.0 * (u.transpose() * q * u)[(0, 0)];
    Ok(TraceBoundReport {
        c_block_min_eig,
        trace_diff,
        bound,
        holds: c_block_min_eig >= -CERTIFICATE_TOL && trace_diff <= bound + INEQUALITY_TOL,
    })
}

// ---------------------------------------------------------------------------
// lemma suite over random jets
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct LemmaSuiteConfig {
    pub samples: usize,
    pub epsilons: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteViolation {
    pub index: usize,
    pub epsilon: f64,
    pub kind: &'static str,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SharpnessWitness {
    pub phi_second: f64,
    pub q_scalar: f64,
    pub trace_diff: f64,
    pub bound: f64,
    pub certificate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaSuiteReport {
    pub samples: usize,
    pub violations: Vec<SuiteViolation>,
    /// The 1-d extremal pair at concave curvature, where the trace bound is
    /// attained exactly (it is unreachable for convex jets, where the
    /// admissible set forces `a - b <= 0`).
    pub sharpness: SharpnessWitness,
}

impl LemmaSuiteReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Materializes the deterministic jet + pair of suite item `index`. The jet
/// draw does not consume epsilon, so two suites sharing a seed share jets —
/// and share pairs wherever their epsilon assignments agree.
pub fn lemma_suite_sample(
    cfg: &LemmaSuiteConfig,
    index: usize,
) -> Result<(TwoPointHessian, AdmissiblePair)> {
    let mut rng = rng_for(cfg.seed, stream::LEMMA_JETS, index as u64);
    let dim = rng.random_range(1..=4usize);
    let s = rng.random_range(0.2..3.0f64);
    let phi_prime = rng.random_range(-3.0..3.0f64);
    let phi_second = rng.random_range(-3.0..3.0f64);
    let direction = unit_direction(&mut rng, dim);
    let epsilon = cfg.epsilons[index % cfg.epsilons.len()];
    let hess = build_p(dim, s, phi_prime, phi_second, direction)?.with_epsilon(epsilon)?;
    let (pair, _) = generate_pair(index, &hess.q_matrix, &mut rng)?;
    Ok((hess, pair))
}

/// Samples random jets and admissible pairs and checks both lemma
/// conclusions on every pair.
pub fn run_lemma_suite(cfg: &LemmaSuiteConfig) -> Result<LemmaSuiteReport> {
    if cfg.epsilons.is_empty() {
        return Err(Error::Config("lemma suite needs at least one epsilon".into()));
    }
    let per_index: Result<Vec<Vec<SuiteViolation>>> = (0..cfg.samples)
        .into_par_iter()
        .map(|index| {
            let (hess, pair) = lemma_suite_sample(cfg, index)?;
            let mut out = Vec::new();
            let diff = &pair.a - &pair.b;
            let (_, max_eig) = symmetric_eigen_range(&diff);
            if max_eig > CERTIFICATE_TOL {
                out.push(SuiteViolation {
                    index,
                    epsilon: hess.epsilon,
                    kind: "order",
                    value: max_eig,
                    bound: 0.0,
                });
            }
            let bound = hess.trace_bound();
            let trace = diff.trace();
            if trace > bound + INEQUALITY_TOL {
                out.push(SuiteViolation {
                    index,
                    epsilon: hess.epsilon,
                    kind: "trace",
                    value: trace,
                    bound,
                });
            }
            Ok(out)
        })
        .collect();
    let violations: Vec<SuiteViolation> = per_index?.into_iter().flatten().collect();

    // 1-d sharpness witness: phi'' = -2, eps = 0 gives Q = -1 and the
    // extremal pair (2Q, -2Q) with trace difference exactly 2 phi''.
    let hess = build_p(1, 1.0, 0.5, -2.0, DVector::from_vec(vec![1.0]))?;
    let pair = extremal_pair(&hess.q_matrix);
    let sharpness = SharpnessWitness {
        phi_second: hess.phi_second,
        q_scalar: hess.q_matrix[(0, 0)],
        trace_diff: (&pair.a - &pair.b).trace(),
        bound: hess.trace_bound(),
        certificate: pair.certificate,
    };
    Ok(LemmaSuiteReport {
        samples: cfg.samples,
        violations,
        sharpness,
    })
}

// ---------------------------------------------------------------------------
// structure condition
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum OperatorFamily {
    /// `F = -lambda Trace M + <b(x), p> + c z` with `b(x) = B cos(x1) e1`.
    Drift {
        lambda: f64,
        drift_bound: f64,
        zeroth: f64,
    },
    /// `F = -Trace(A(|p|) M) + c z`.
    Quasi {
        profile: DiffusionProfile,
        zeroth: f64,
    },
}

/// A `(F, f, q)` entry of the shipped pairing table. The remainder is
/// `q(s, phi, phi', phi'') = 2 lambda_bar(|phi'|) (phi'')^2` with
/// `lambda_bar` the largest diffusion eigenvalue at gradient norm `|phi'|`;
/// it dominates the `8 eps |P u|^2` term of the trace lemma. `slope_range`
/// is the jet domain the pairing is declared (and verified) on.
#[derive(Debug, Clone)]
pub struct Pairing {
    pub name: String,
    pub f_oned: OneDimOperator,
    pub slope_range: (f64, f64),
    pub dims: Vec<usize>,
    family: OperatorFamily,
}

impl Pairing {
    pub fn example1(lambda: f64, drift_bound: f64, zeroth: f64) -> Result<Pairing> {
        Ok(Pairing {
            name: format!("example1(lambda={lambda},B={drift_bound},c={zeroth})"),
            f_oned: OneDimOperator::linear(lambda, drift_bound, zeroth)?,
            slope_range: (0.0, 3.0),
            dims: vec![1, 2, 3, 4],
            family: OperatorFamily::Drift {
                lambda,
                drift_bound,
                zeroth,
            },
        })
    }

    pub fn laplace(zeroth: f64) -> Result<Pairing> {
        Ok(Pairing {
            name: format!("laplace(c={zeroth})"),
            f_oned: OneDimOperator::quasi(OneDimProfile::Laplace, zeroth)?,
            slope_range: (0.0, 3.0),
            dims: vec![1, 2, 3, 4],
            family: OperatorFamily::Quasi {
                profile: DiffusionProfile::Laplace,
                zeroth,
            },
        })
    }

    pub fn p_laplace(exponent: f64, zeroth: f64) -> Result<Pairing> {
        Ok(Pairing {
            name: format!("p_laplace(q={exponent},c={zeroth})"),
            f_oned: OneDimOperator::quasi(OneDimProfile::PLaplace { exponent }, zeroth)?,
            slope_range: (0.0, 3.0),
            dims: vec![1, 2, 3, 4],
            family: OperatorFamily::Quasi {
                profile: DiffusionProfile::PLaplace { exponent },
                zeroth,
            },
        })
    }

    /// Pairs the true minimal-surface diffusion with the one-dimensional
    /// weight `(1 + r)^{-3/2}` as printed in the source material. That
    /// weight only dominates the diffusion's smallest eigenvalue
    /// `(1 + r^2)^{-3/2}` for `r <= 1`, so the pairing is declared on slopes
    /// in `[0, 1]`; beyond it the structure inequality genuinely fails (see
    /// the falsification test).
    pub fn minimal_surface_paper(zeroth: f64) -> Result<Pairing> {
        Ok(Pairing {
            name: format!("minimal_surface_paper(c={zeroth})"),
            f_oned: OneDimOperator::quasi(OneDimProfile::MinimalSurfacePaper, zeroth)?,
            slope_range: (0.0, 1.0),
            dims: vec![1, 2, 3, 4],
            family: OperatorFamily::Quasi {
                profile: DiffusionProfile::MinimalSurface,
                zeroth,
            },
        })
    }

    pub fn minimal_surface_std(zeroth: f64) -> Result<Pairing> {
        Ok(Pairing {
            name: format!("minimal_surface_std(c={zeroth})"),
            f_oned: OneDimOperator::quasi(OneDimProfile::MinimalSurfaceStd, zeroth)?,
            slope_range: (0.0, 3.0),
            dims: vec![1, 2, 3, 4],
            family: OperatorFamily::Quasi {
                profile: DiffusionProfile::MinimalSurface,
                zeroth,
            },
        })
    }

    /// Swaps in a different one-dimensional operator (falsification tool:
    /// mismatched pairings must be caught by the checker).
    pub fn with_oned(mut self, f: OneDimOperator, label: &str) -> Pairing {
        self.f_oned = f;
        self.name = format!("{}*{label}", self.name);
        self
    }

    pub fn with_slope_range(mut self, range: (f64, f64)) -> Pairing {
        self.slope_range = range;
        self
    }

    /// Largest diffusion eigenvalue at gradient norm `r`.
    pub fn lambda_bar(&self, r: f64) -> f64 {
        match &self.family {
            OperatorFamily::Drift { lambda, .. } => *lambda,
            OperatorFamily::Quasi { profile, .. } => profile.max_eigenvalue(r),
        }
    }

    /// The shipped remainder `q = 2 lambda_bar(|phi'|) (phi'')^2`.
    pub fn remainder_q(&self, _s: f64, _phi: f64, dphi: f64, d2phi: f64) -> f64 {
        2.0 * self.lambda_bar(dphi.abs()) * d2phi * d2phi
    }

    pub fn operator_for_dim(&self, dim: usize) -> Result<EllipticOperator> {
        match &self.family {
            OperatorFamily::Drift {
                lambda,
                drift_bound,
                zeroth,
            } => {
                let mut drift = vec![Expr::Mul(
                    Box::new(Expr::Const(*drift_bound)),
                    Box::new(Expr::Cos(Box::new(Expr::Var(0)))),
                )];
                drift.resize(dim, Expr::zero());
                EllipticOperator::linear_drift(*lambda, drift, *drift_bound, *zeroth)
            }
            OperatorFamily::Quasi { profile, zeroth } => {
                EllipticOperator::quasilinear(*profile, None, *zeroth)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureConfig {
    pub samples: usize,
    pub seed: u64,
    pub epsilons: Vec<f64>,
    pub s_range: (f64, f64),
    pub curvature_range: (f64, f64),
    pub tolerance: f64,
}

impl Default for StructureConfig {
    fn default() -> Self {
        StructureConfig {
            samples: 10_000,
            seed: 0,
            epsilons: vec![0.01, 0.1, 0.5, 1.0],
            s_range: (0.2, 2.5),
            curvature_range: (-3.0, 3.0),
            tolerance: INEQUALITY_TOL,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureViolation {
    pub index: usize,
    pub dim: usize,
    pub epsilon: f64,
    pub s: f64,
    pub phi: f64,
    pub dphi: f64,
    pub d2phi: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureReport {
    pub pairing: String,
    pub samples: usize,
    pub worst_margin: f64,
    pub violations: Vec<StructureViolation>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples doubled-variable states and admissible pairs and checks the
/// structure inequality
/// `F(y, z, p, B) - F(x, w, p, A) <= -2 f(s, phi, phi', phi'') + eps q(...)`
/// with `p = phi' u`, `w - z = 2 phi >= 0`.
pub fn check_structure_condition(
    pairing: &Pairing,
    cfg: &StructureConfig,
) -> Result<StructureReport> {
    if cfg.epsilons.is_empty() {
        return Err(Error::Config("structure check needs at least one epsilon".into()));
    }
    let ops: Vec<(usize, EllipticOperator)> = pairing
        .dims
        .iter()
        .map(|d| pairing.operator_for_dim(*d).map(|op| (*d, op)))
        .collect::<Result<_>>()?;

    let per_index: Result<Vec<(f64, Option<StructureViolation>)>> = (0..cfg.samples)
        .into_par_iter()
        .map(|index| {
            let mut rng = rng_for(cfg.seed, stream::STRUCTURE, index as u64);
            let (dim, op) = &ops[rng.random_range(0..ops.len())];
            let dim = *dim;
            let s = rng.random_range(cfg.s_range.0..cfg.s_range.1);
            let direction = unit_direction(&mut rng, dim);
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
            let y: Vec<f64> = (0..dim)
                .map(|k| x[k] - 2.0 * s * direction[k])
                .collect();
            let z = rng.random_range(-1.0..1.0f64);
            let phi = rng.random_range(0.0..1.0f64);
            let w = z + 2.0 * phi;
            let slope_mag = rng.random_range(pairing.slope_range.0..pairing.slope_range.1);
            let dphi = if rng.random_range(0.0..1.0f64) < 0.5 {
                slope_mag
            } else {
                -slope_mag
            };
            let d2phi = rng.random_range(cfg.curvature_range.0..cfg.curvature_range.1);
            let epsilon = cfg.epsilons[index % cfg.epsilons.len()];
            let hess =
                build_p(dim, s, dphi, d2phi, direction.clone())?.with_epsilon(epsilon)?;
            let (pair, _) = generate_pair(index, &hess.q_matrix, &mut rng)?;
            let p_vec = &direction * dphi;

            let f_at_y = op.eval(&y, z, &p_vec, &pair.b)?;
            let f_at_x = op.eval(&x, w, &p_vec, &pair.a)?;
            let delta = f_at_y - f_at_x;
            let rhs = -2.0 * eval_f(&pairing.f_oned, s, phi, dphi, d2phi)?
                + epsilon * pairing.remainder_q(s, phi, dphi, d2phi);
            let margin = delta - rhs;
            let violation = (margin > cfg.tolerance).then(|| StructureViolation {
                index,
                dim,
                epsilon,
                s,
                phi,
                dphi,
                d2phi,
                margin,
            });
            Ok((margin, violation))
        })
        .collect();
    let rows = per_index?;
    let worst_margin = rows
        .iter()
        .map(|(m, _)| *m)
        .fold(f64::NEG_INFINITY, f64::max);
    let violations = rows.into_iter().filter_map(|(_, v)| v).collect();
    Ok(StructureReport {
        pairing: pairing.name.clone(),
        samples: cfg.samples,
        worst_margin,
        violations,
    })
}
