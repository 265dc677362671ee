//! One-dimensional operators `f(s, phi, phi', phi'')`, closed-form
//! supersolutions `zeta`, the discrete viscosity-subsolution check for a
//! modulus curve, and the pointwise comparison `omega <= zeta`.
//!
//! The catalog has two families. The drift family
//! `f(phi) = -lambda phi'' - B |phi'| + c phi` admits the exact increasing
//! solutions `zeta(s) = mu^2 (e^{a1 s} - e^{a2 s})` with `a1 > 0 > a2` the
//! roots of `-lambda a^2 - B a + c = 0`. The quasilinear family
//! `f(phi) = -lambda(|phi'|) phi'' + c phi` is handled with a
//! downward-opening parabola supersolution. The minimal-surface profile
//! ships in two forms: `minimal_surface_paper` with weight
//! `(1 + |phi'|)^{-3/2}` as printed in the source material, and
//! `minimal_surface_std` with the conventional `(1 + |phi'|^2)^{-3/2}`.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::moc::ModulusCurve;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum OneDimProfile {
    Laplace,
    PLaplace { exponent: f64 },
    MinimalSurfacePaper,
    MinimalSurfaceStd,
}

impl OneDimProfile {
    /// Diffusion weight `lambda(r)` at slope magnitude `r`.
    pub fn weight(&self, r: f64) -> f64 {
        match *self {
            OneDimProfile::Laplace => 1.0,
            OneDimProfile::PLaplace { exponent } => r.powf(exponent - 2.0),
            OneDimProfile::MinimalSurfacePaper => (1.0 + r).powf(-1.5),
            OneDimProfile::MinimalSurfaceStd => (1.0 + r * r).powf(-1.5),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OneDimOperator {
    /// `f = -lambda phi'' - B |phi'| + c phi`.
    LinearDrift1D {
        lambda: f64,
        drift_bound: f64,
        zeroth: f64,
    },
    /// `f = -lambda(|phi'|) phi'' + c phi`.
    QuasiDiffusion1D {
        profile: OneDimProfile,
        zeroth: f64,
    },
}

impl OneDimOperator {
    pub fn linear(lambda: f64, drift_bound: f64, zeroth: f64) -> Result<Self> {
        if lambda <= 0.0 || zeroth <= 0.0 || drift_bound < 0.0 {
            return Err(Error::Config(format!(
                "LinearDrift1D needs lambda > 0, c > 0, B >= 0 (got {lambda}, {zeroth}, {drift_bound})"
            )));
        }
        Ok(OneDimOperator::LinearDrift1D {
            lambda,
            drift_bound,
            zeroth,
        })
    }

    pub fn quasi(profile: OneDimProfile, zeroth: f64) -> Result<Self> {
        if zeroth <= 0.0 {
            return Err(Error::Config(format!(
                "QuasiDiffusion1D needs c > 0 (got {zeroth})"
            )));
        }
        Ok(OneDimOperator::QuasiDiffusion1D { profile, zeroth })
    }

    pub fn zeroth(&self) -> f64 {
        match self {
            OneDimOperator::LinearDrift1D { zeroth, .. }
            | OneDimOperator::QuasiDiffusion1D { zeroth, .. } => *zeroth,
        }
    }
}

/// Evaluates `f(s, phi, phi', phi'')`. The p-Laplace profile below exponent 2
/// has an unbounded weight at zero slope; the product is taken as 0 when the
/// curvature vanishes and reported as singular otherwise.
pub fn eval_f(f: &OneDimOperator, s: f64, phi: f64, dphi: f64, d2phi: f64) -> Result<f64> {
    if s <= 0.0 {
        return Err(Error::Config(format!(
            "one-dimensional operators act on s > 0 (got {s})"
        )));
    }
    match f {
        OneDimOperator::LinearDrift1D {
            lambda,
            drift_bound,
            zeroth,
        } => Ok(-lambda * d2phi - drift_bound * dphi.abs() + zeroth * phi),
        OneDimOperator::QuasiDiffusion1D { profile, zeroth } => {
            let r = dphi.abs();
            let diffusion = match profile {
                OneDimProfile::PLaplace { exponent } if *exponent < 2.0 && r == 0.0 => {
                    if d2phi == 0.0 {
                        0.0
                    } else {
                        return Err(Error::SingularDiffusion {
                            exponent: *exponent,
                        });
                    }
                }
                _ => profile.weight(r) * d2phi,
            };
            Ok(-diffusion + zeroth * phi)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Supersolution {
    /// `zeta(s) = mu^2 (e^{alpha1 s} - e^{alpha2 s})`, increasing since
    /// `alpha1 > 0 > alpha2`.
    ExponentialGap {
        mu_sq: f64,
        alpha1: f64,
        alpha2: f64,
    },
    /// `zeta(s) = -(4a/D^2)(s - D/2)^2 + a`, the downward parabola with apex
    /// `a` at `D/2`.
    Parabola { height: f64, diameter: f64 },
}

impl Supersolution {
    pub fn value(&self, s: f64) -> f64 {
        match *self {
            Supersolution::ExponentialGap {
                mu_sq,
                alpha1,
                alpha2,
            } => mu_sq * ((alpha1 * s).exp() - (alpha2 * s).exp()),
            Supersolution::Parabola { height, diameter } => {
                -(4.0 * height / (diameter * diameter)) * (s - diameter / 2.0).powi(2) + height
            }
        }
    }

    pub fn d1(&self, s: f64) -> f64 {
        match *self {
            Supersolution::ExponentialGap {
                mu_sq,
                alpha1,
                alpha2,
            } => mu_sq * (alpha1 * (alpha1 * s).exp() - alpha2 * (alpha2 * s).exp()),
            Supersolution::Parabola { height, diameter } => {
                -(8.0 * height / (diameter * diameter)) * (s - diameter / 2.0)
            }
        }
    }

    pub fn d2(&self, s: f64) -> f64 {
        match *self {
            Supersolution::ExponentialGap {
                mu_sq,
                alpha1,
                alpha2,
            } => mu_sq * (alpha1 * alpha1 * (alpha1 * s).exp() - alpha2 * alpha2 * (alpha2 * s).exp()),
            Supersolution::Parabola { height, diameter } => {
                -8.0 * height / (diameter * diameter)
            }
        }
    }

    pub fn slope_at_zero(&self) -> f64 {
        self.d1(0.0)
    }

    /// Exact supremum over `[lo, hi]` from the closed form.
    pub fn sup_on(&self, lo: f64, hi: f64) -> f64 {
        match *self {
            // increasing
            Supersolution::ExponentialGap { .. } => self.value(hi),
            Supersolution::Parabola { diameter, .. } => {
                let apex = diameter / 2.0;
                if lo <= apex && apex <= hi {
                    self.value(apex)
                } else {
                    self.value(lo).max(self.value(hi))
                }
            }
        }
    }

    /// CSV sampling with columns `s,zeta,dzeta,d2zeta`.
    pub fn to_csv(&self, s_lo: f64, s_hi: f64, count: usize) -> String {
        let mut out = String::from("s,zeta,dzeta,d2zeta\n");
        let step = (s_hi - s_lo) / (count.max(2) - 1) as f64;
        for k in 0..count.max(2) {
            let s = s_lo + k as f64 * step;
            let _ = writeln!(out, "{},{},{},{}", s, self.value(s), self.d1(s), self.d2(s));
        }
        out
    }

    pub fn write_csv(&self, path: &Path, s_lo: f64, s_hi: f64, count: usize) -> Result<()> {
        std::fs::write(path, self.to_csv(s_lo, s_hi, count))?;
        Ok(())
    }
}

/// Which endpoint constraint pins `mu^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum ModulusCase {
    /// Repeating region of diameter `D`: `zeta(D/2) >= |u|_0`.
    Periodic { diameter: f64 },
    /// Uniformly vanishing: `zeta(s_eps) >= |u|_0 / 2 + eps`.
    Vanishing { s_eps: f64, eps: f64 },
}

/// Roots `alpha1 > 0 > alpha2` of `-lambda a^2 - B a + c = 0`.
pub fn exponential_roots(lambda: f64, drift_bound: f64, zeroth: f64) -> (f64, f64) {
    let disc = (drift_bound * drift_bound + 4.0 * lambda * zeroth).sqrt();
    (
        (-drift_bound + disc) / (2.0 * lambda),
        (-drift_bound - disc) / (2.0 * lambda),
    )
}

/// Builds the exponential-gap supersolution for the drift operator, with the
/// minimal `mu^2` achieving the endpoint constraint with equality.
pub fn make_exponential_supersolution(
    lambda: f64,
    drift_bound: f64,
    zeroth: f64,
    u_sup: f64,
    case: ModulusCase,
) -> Result<Supersolution> {
    if lambda <= 0.0 || zeroth <= 0.0 || drift_bound < 0.0 {
        return Err(Error::Config(
            "exponential supersolution needs lambda > 0, c > 0, B >= 0".into(),
        ));
    }
    if u_sup < 0.0 {
        return Err(Error::Config(format!("sup norm must be nonnegative: {u_sup}")));
    }
    let (alpha1, alpha2) = exponential_roots(lambda, drift_bound, zeroth);
    let (endpoint, target) = match case {
        ModulusCase::Periodic { diameter } => {
            if diameter <= 0.0 {
                return Err(Error::Config(format!("diameter must be positive: {diameter}")));
            }
            (diameter / 2.0, u_sup)
        }
        ModulusCase::Vanishing { s_eps, eps } => {
            if s_eps <= 0.0 || eps <= 0.0 {
                return Err(Error::Config(format!(
                    "vanishing case needs s_eps > 0 and eps > 0 (got {s_eps}, {eps})"
                )));
            }
            (s_eps, u_sup / 2.0 + eps)
        }
    };
    let gap = (alpha1 * endpoint).exp() - (alpha2 * endpoint).exp();
    Ok(Supersolution::ExponentialGap {
        mu_sq: target / gap,
        alpha1,
        alpha2,
    })
}

/// Downward parabola through `(0, 0)` and `(D, 0)` with apex `a` at `D/2`;
/// the caller supplies `a >= |u|_0`.
pub fn make_parabola_supersolution(height: f64, diameter: f64) -> Result<Supersolution> {
    if height <= 0.0 || diameter <= 0.0 {
        return Err(Error::Config(format!(
            "parabola needs a > 0 and D > 0 (got {height}, {diameter})"
        )));
    }
    Ok(Supersolution::Parabola { height, diameter })
}

#[derive(Debug, Clone, Serialize)]
pub struct SupersolutionReport {
    pub holds: bool,
    pub min_residual: f64,
    pub argmin_s: f64,
}

/// Evaluates `f(s, zeta, zeta', zeta'')` on `s_grid` from the closed-form
/// derivatives; holds iff the minimum is at least `-tol`.
pub fn check_supersolution(
    f: &OneDimOperator,
    zeta: &Supersolution,
    s_grid: &[f64],
    tol: f64,
) -> Result<SupersolutionReport> {
    let mut min_residual = f64::INFINITY;
    let mut argmin_s = f64::NAN;
    for &s in s_grid {
        let v = eval_f(f, s, zeta.value(s), zeta.d1(s), zeta.d2(s))?;
        if v < min_residual {
            min_residual = v;
            argmin_s = s;
        }
    }
    Ok(SupersolutionReport {
        holds: min_residual >= -tol,
        min_residual,
        argmin_s,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SubsolutionViolation {
    pub s: f64,
    pub slope: f64,
    pub curvature: f64,
    pub f_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubsolutionReport {
    pub bins_tested: usize,
    pub bins_skipped_convex_kink: usize,
    pub violations: Vec<SubsolutionViolation>,
}

impl SubsolutionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

const KINK_SLOPE_TOL: f64 = 1e-9;

/// Discrete check that a modulus curve is a viscosity subsolution of
/// `f = 0`: at each interior bin the one-sided slopes bracket the test
/// slopes, and the centered second difference (floored at `curvature_floor`,
/// which bounds what bin noise may claim at a concave kink) is the binding
/// curvature, since every catalog `f` is non-increasing in the curvature
/// argument. Bins forming a convex kink have an empty discrete superjet and
/// are skipped.
pub fn check_viscosity_subsolution(
    f: &OneDimOperator,
    omega: &ModulusCurve,
    slope_samples: usize,
    curvature_floor: f64,
    tol: f64,
) -> Result<SubsolutionReport> {
    if curvature_floor >= 0.0 {
        return Err(Error::Config(format!(
            "curvature floor must be negative: {curvature_floor}"
        )));
    }
    let bins = &omega.bins;
    let w = omega.bin_width;
    let consecutive = |a: usize, b: usize| (bins[b].s - bins[a].s - w).abs() <= 1e-9 * w.max(1.0);
    let mut triples = 0usize;
    let mut tested = 0usize;
    let mut skipped = 0usize;
    let mut violations = Vec::new();
    for k in 1..bins.len().saturating_sub(1) {
        if !(consecutive(k - 1, k) && consecutive(k, k + 1)) {
            continue;
        }
        triples += 1;
        let d_plus = (bins[k + 1].omega - bins[k].omega) / w;
        let d_minus = (bins[k].omega - bins[k - 1].omega) / w;
        if d_plus > d_minus + KINK_SLOPE_TOL {
            skipped += 1;
            continue;
        }
        tested += 1;
        let d2 = (bins[k + 1].omega - 2.0 * bins[k].omega + bins[k - 1].omega) / (w * w);
        let x = d2.max(curvature_floor);
        let (lo, hi) = (d_plus.min(d_minus), d_plus.max(d_minus));
        let m = slope_samples.max(1);
        let mut worst: Option<SubsolutionViolation> = None;
        for j in 0..m {
            let t = if m == 1 { 0.5 } else { j as f64 / (m - 1) as f64 };
            let p = lo + t * (hi - lo);
            let value = eval_f(f, bins[k].s, bins[k].omega, p, x)?;
            if value > tol && worst.as_ref().map(|w| value > w.f_value).unwrap_or(true) {
                worst = Some(SubsolutionViolation {
                    s: bins[k].s,
                    slope: p,
                    curvature: x,
                    f_value: value,
                });
            }
        }
        if let Some(v) = worst {
            violations.push(v);
        }
    }
    if triples == 0 {
        return Err(Error::Config(
            "subsolution check needs at least 3 consecutive bins".into(),
        ));
    }
    Ok(SubsolutionReport {
        bins_tested: tested,
        bins_skipped_convex_kink: skipped,
        violations,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareReport {
    pub holds: bool,
    /// Largest value of `omega_k - zeta(s_k)` on the interval.
    pub max_violation: f64,
    pub argmax_s: f64,
    pub bins_compared: usize,
    pub interval: (f64, f64),
}

/// Pointwise check `omega_k <= zeta(s_k) + tol` over bins inside `interval`.
pub fn compare(
    omega: &ModulusCurve,
    zeta: &Supersolution,
    interval: (f64, f64),
    tol: f64,
) -> CompareReport {
    let mut max_violation = f64::NEG_INFINITY;
    let mut argmax_s = f64::NAN;
    let mut bins_compared = 0usize;
    for b in omega
        .bins
        .iter()
        .filter(|b| b.s >= interval.0 && b.s <= interval.1)
    {
        let gap = b.omega - zeta.value(b.s);
        bins_compared += 1;
        if gap > max_violation {
            max_violation = gap;
            argmax_s = b.s;
        }
    }
    CompareReport {
        holds: bins_compared > 0 && max_violation <= tol,
        max_violation,
        argmax_s,
        bins_compared,
        interval,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShrinkStep {
    pub k: usize,
    pub mu_sq: f64,
    /// Sup of the k-th supersolution over the fixed base interval.
    pub sup_zeta_base: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShrinkReport {
    pub steps: Vec<ShrinkStep>,
    pub strictly_decreasing: bool,
    pub base_interval: (f64, f64),
}

/// Grows the repeating region (or the vanishing interval) by factors
/// `k = 1..=k_max`; the endpoint constraint then admits a smaller `mu^2(k)`
/// and the supersolutions shrink on the fixed base interval, the numerical
/// shadow of `omega = 0`.
pub fn shrink_mu_iteration(
    lambda: f64,
    drift_bound: f64,
    zeroth: f64,
    u_sup: f64,
    case: ModulusCase,
    k_max: usize,
) -> Result<ShrinkReport> {
    if k_max < 2 {
        return Err(Error::Config(format!(
            "shrink iteration needs at least two growth factors, got {k_max}"
        )));
    }
    let (alpha1, alpha2) = exponential_roots(lambda, drift_bound, zeroth);
    let (base_end, target) = match case {
        ModulusCase::Periodic { diameter } => (diameter / 2.0, u_sup),
        ModulusCase::Vanishing { s_eps, eps } => (s_eps, u_sup / 2.0 + eps),
    };
    let mut steps = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let endpoint = base_end * k as f64;
        let gap = (alpha1 * endpoint).exp() - (alpha2 * endpoint).exp();
        let mu_sq = target / gap;
        let zeta = Supersolution::ExponentialGap {
            mu_sq,
            alpha1,
            alpha2,
        };
        steps.push(ShrinkStep {
            k,
            mu_sq,
            sup_zeta_base: zeta.sup_on(0.0, base_end),
        });
    }
    let strictly_decreasing = steps.windows(2).all(|p| p[1].mu_sq < p[0].mu_sq)
        && steps.windows(2).all(|p| p[1].sup_zeta_base < p[0].sup_zeta_base);
    Ok(ShrinkReport {
        steps,
        strictly_decreasing,
        base_interval: (0.0, base_end),
    })
}

/// Smallest bin center `s` past which every bin satisfies
/// `omega <= |u|_0 / 2 + eps`; the empirical `s(eps)` of the uniformly
/// vanishing case.
pub fn s_epsilon(omega: &ModulusCurve, eps: f64) -> Option<f64> {
    let target = omega.sup_u / 2.0 + eps;
    let mut candidate = None;
    for b in omega.bins.iter().rev() {
        if b.omega <= target {
            candidate = Some(b.s);
        } else {
            break;
        }
    }
    candidate
}
