//! Turns a verified supersolution comparison into oscillation, Lipschitz,
//! and Hölder bounds, and validates them against the solved field.
//!
//! Bounds are refused without a holding comparison report: the comparison
//! `omega <= zeta` is the hypothesis that makes any of them meaningful.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::oned::{CompareReport, Supersolution};

/// A supersolution candidate: a closed-form spec or tabulated `(s, zeta)`
/// samples (ascending in `s`).
#[derive(Debug, Clone)]
pub enum ZetaCandidate {
    Closed(Supersolution),
    Tabulated(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub alpha: f64,
    pub coefficient: f64,
    /// RMS log-log fit residual; absent when read off a closed form.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundProvenance {
    pub zeta: String,
    pub interval: (f64, f64),
    pub comparison: CompareReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradientBoundReport {
    /// Case A: `|u(x) - u(y)| <= 2 sup zeta` for pair separations inside the
    /// validated interval.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oscillation_bound: Option<f64>,
    /// Case B: difference quotients are bounded by `zeta'(0)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lipschitz_bound: Option<f64>,
    /// Case C: `zeta(s) ~ a s^alpha` near zero gives Hölder continuity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holder: Option<HolderEstimate>,
    pub provenance: BoundProvenance,
}

const HOLDER_FIT_POINTS: usize = 5;
const HOLDER_FIT_RESIDUAL_MAX: f64 = 0.05;

/// Derives the case A/B/C bounds from a supersolution whose comparison
/// against the modulus holds on `interval`.
pub fn derive_bounds(
    zeta: &ZetaCandidate,
    interval: (f64, f64),
    comparison: &CompareReport,
) -> Result<GradientBoundReport> {
    if !comparison.holds {
        return Err(Error::ComparisonNotEstablished);
    }
    if !(interval.0 >= 0.0 && interval.1 > interval.0) {
        return Err(Error::Config(format!("bad interval {interval:?}")));
    }
    let (oscillation_bound, lipschitz_bound, holder, label) = match zeta {
        ZetaCandidate::Closed(spec) => {
            let sup = spec.sup_on(interval.0, interval.1);
            let slope0 = spec.slope_at_zero();
            // both closed forms vanish at 0 with a finite derivative
            let lip = Some(slope0);
            let holder = (slope0 > 0.0).then_some(HolderEstimate {
                alpha: 1.0,
                coefficient: slope0,
                fit_residual: None,
            });
            (
                Some(2.0 * sup),
                lip,
                holder,
                format!("{spec:?}"),
            )
        }
        ZetaCandidate::Tabulated(points) => {
            if points.len() < HOLDER_FIT_POINTS {
                return Err(Error::Config(format!(
                    "tabulated zeta needs at least {HOLDER_FIT_POINTS} samples"
                )));
            }
            let sup = points
                .iter()
                .filter(|(s, _)| *s >= interval.0 && *s <= interval.1)
                .fold(f64::NEG_INFINITY, |m, (_, v)| m.max(*v));
            if sup == f64::NEG_INFINITY {
                return Err(Error::Config(
                    "tabulated zeta has no samples inside the interval".into(),
                ));
            }
            // log-log least squares over the smallest samples
            let holder = fit_holder(points);
            (Some(2.0 * sup), None, holder, "tabulated".to_string())
        }
    };
    Ok(GradientBoundReport {
        oscillation_bound,
        lipschitz_bound,
        holder,
        provenance: BoundProvenance {
            zeta: label,
            interval,
            comparison: comparison.clone(),
        },
    })
}

fn fit_holder(points: &[(f64, f64)]) -> Option<HolderEstimate> {
    let mut sorted: Vec<(f64, f64)> = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let small: Vec<(f64, f64)> = sorted
        .into_iter()
        .filter(|(s, v)| *s > 0.0 && *v > 0.0)
        .take(HOLDER_FIT_POINTS)
        .collect();
    if small.len() < HOLDER_FIT_POINTS {
        return None;
    }
    let xs: Vec<f64> = small.iter().map(|(s, _)| s.ln()).collect();
    let ys: Vec<f64> = small.iter().map(|(_, v)| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let rms = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (alpha * x + intercept)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    if !(0.0 < alpha && alpha <= 1.0 + 1e-9 && rms < HOLDER_FIT_RESIDUAL_MAX) {
        return None;
    }
    Some(HolderEstimate {
        alpha: alpha.min(1.0),
        coefficient: intercept.exp(),
        fit_residual: Some(rms),
    })
}

/// Largest nearest-neighbor difference quotient `|du| / h`; the empirical
/// side of the small-separation limit, which wider stencils would
/// underestimate by measuring secants.
pub fn empirical_lipschitz(field: &ScalarField) -> f64 {
    let grid = field.grid();
    let u = field.values();
    let h = grid.spacing();
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let mut worst = 0.0f64;
            for axis in 0..grid.dim() {
                if let Some(j) = grid.neighbor(idx, axis, 1) {
                    worst = worst.max((u[j] - u[idx]).abs() / h);
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub empirical: f64,
    pub bound: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundVerdict {
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oscillation: Option<BoundCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<BoundCheck>,
}

/// Checks the emitted bounds against the field: pair oscillation inside the
/// interval's separation range, and nearest-neighbor quotients against the
/// Lipschitz bound.
pub fn verify_bound(field: &ScalarField, report: &GradientBoundReport, tol: f64) -> BoundVerdict {
    let grid = field.grid();
    let u = field.values();
    let interval = report.provenance.interval;
    let oscillation = report.oscillation_bound.map(|bound| {
        let worst = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let mut best = (f64::NEG_INFINITY, None);
                for j in (i + 1)..grid.len() {
                    let s = grid.distance(i, j) * 0.5;
                    if s < interval.0 || s > interval.1 {
                        continue;
                    }
                    let osc = (u[i] - u[j]).abs();
                    if osc > best.0 {
                        best = (osc, Some((i, j)));
                    }
                }
                best
            })
            .reduce(
                || (f64::NEG_INFINITY, None),
                |a, b| if b.0 > a.0 { b } else { a },
            );
        let empirical = worst.0.max(0.0);
        BoundCheck {
            empirical,
            bound,
            passed: empirical <= bound + tol,
            witness: if empirical <= bound + tol { None } else { worst.1 },
        }
    });
    let lipschitz = report.lipschitz_bound.map(|bound| {
        let empirical = empirical_lipschitz(field);
        let mut witness = None;
        if empirical > bound + tol {
            'outer: for idx in 0..grid.len() {
                for axis in 0..grid.dim() {
                    if let Some(j) = grid.neighbor(idx, axis, 1) {
                        if (u[j] - u[idx]).abs() / grid.spacing() >= empirical - 1e-15 {
                            witness = Some((idx, j));
                            break 'outer;
                        }
                    }
                }
            }
        }
        BoundCheck {
            empirical,
            bound,
            passed: empirical <= bound + tol,
            witness,
        }
    });
    let passed = oscillation.as_ref().map(|c| c.passed).unwrap_or(true)
        && lipschitz.as_ref().map(|c| c.passed).unwrap_or(true);
    BoundVerdict {
        passed,
        oscillation,
        lipschitz,
    }
}
