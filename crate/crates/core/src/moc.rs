//! Two-point modulus of continuity of a scalar field.
//!
//! `omega(s) = sup { (u(x) - u(y))/2 : |x - y| = 2s }` is computed by brute
//! force over all unordered grid pairs, binned in `s` because exact distance
//! spheres are measure-zero on a grid. Empty bins are absent, never zero.
//! On truncated grids every point is additionally paired against a virtual
//! zero value at any `s` with `2s >= dist(x, clamp ring)`, modeling pairs
//! that reach into the vanishing far field, where `omega(s) -> |u|_0 / 2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Domain, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Periodic,
    Truncated,
    /// Curves assembled from tabulated samples rather than a grid.
    Synthetic,
}

impl From<Domain> for DomainKind {
    fn from(d: Domain) -> Self {
        match d {
            Domain::Periodic { .. } => DomainKind::Periodic,
            Domain::Truncated { .. } => DomainKind::Truncated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusBin {
    /// Bin center.
    pub s: f64,
    pub omega: f64,
    /// Number of contributing pairs (virtual far-field pairs included).
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusCurve {
    /// Nonempty bins in ascending `s`.
    pub bins: Vec<ModulusBin>,
    pub bin_width: f64,
    pub domain: DomainKind,
    /// Sup norm of the source field.
    pub sup_u: f64,
}

impl ModulusCurve {
    /// Builds a synthetic curve from equally spaced samples (testing and
    /// tabulated-data checks).
    pub fn from_samples(s: &[f64], omega: &[f64], sup_u: f64) -> Result<Self> {
        if s.len() != omega.len() || s.len() < 2 {
            return Err(Error::Config(
                "synthetic curve needs at least two equally spaced samples".into(),
            ));
        }
        let w = s[1] - s[0];
        if w <= 0.0 {
            return Err(Error::Config("sample spacing must be positive".into()));
        }
        for k in 1..s.len() {
            if ((s[k] - s[k - 1]) - w).abs() > 1e-9 * w.max(1.0) {
                return Err(Error::Config("samples must be equally spaced".into()));
            }
        }
        Ok(ModulusCurve {
            bins: s
                .iter()
                .zip(omega)
                .map(|(s, o)| ModulusBin {
                    s: *s,
                    omega: *o,
                    pairs: 1,
                })
                .collect(),
            bin_width: w,
            domain: DomainKind::Synthetic,
            sup_u,
        })
    }

    /// Piecewise-linear interpolation over bin centers, clamped at the ends.
    pub fn interpolate(&self, s: f64) -> Option<f64> {
        let bins = &self.bins;
        if bins.is_empty() {
            return None;
        }
        if s <= bins[0].s {
            return Some(bins[0].omega);
        }
        if s >= bins[bins.len() - 1].s {
            return Some(bins[bins.len() - 1].omega);
        }
        let j = bins.partition_point(|b| b.s < s);
        let (a, b) = (&bins[j - 1], &bins[j]);
        let t = (s - a.s) / (b.s - a.s);
        Some(a.omega + t * (b.omega - a.omega))
    }

    /// Value of the bin whose interval contains `s`, if that bin is present.
    pub fn value_in_bin_of(&self, s: f64) -> Option<f64> {
        let k = (s / self.bin_width).floor();
        let center = (k + 0.5) * self.bin_width;
        self.bins
            .iter()
            .find(|b| (b.s - center).abs() <= 1e-9 * self.bin_width)
            .map(|b| b.omega)
    }

    pub fn max_omega(&self) -> f64 {
        self.bins.iter().fold(0.0f64, |m, b| m.max(b.omega))
    }

    /// CSV with columns `s,omega,bin_count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,omega,bin_count\n");
        for b in &self.bins {
            let _ = writeln!(out, "{},{},{}", b.s, b.omega, b.pairs);
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: &Path, bin_width: f64, domain: DomainKind, sup_u: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "s,omega,bin_count" => {}
            other => {
                return Err(Error::Config(format!(
                    "{}: unexpected modulus CSV header {:?}",
                    path.display(),
                    other
                )))
            }
        }
        let mut bins = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Config(format!(
                    "{}: modulus CSV rows need 3 columns",
                    path.display()
                )));
            }
            bins.push(ModulusBin {
                s: cols[0].trim().parse().map_err(|_| {
                    Error::Config(format!("{}: bad s `{}`", path.display(), cols[0]))
                })?,
                omega: cols[1].trim().parse().map_err(|_| {
                    Error::Config(format!("{}: bad omega `{}`", path.display(), cols[1]))
                })?,
                pairs: cols[2].trim().parse().map_err(|_| {
                    Error::Config(format!("{}: bad count `{}`", path.display(), cols[2]))
                })?,
            });
        }
        Ok(ModulusCurve {
            bins,
            bin_width,
            domain,
            sup_u,
        })
    }
}

/// Brute-force two-point modulus, binned with width `bin_width` (which must
/// be at least the grid spacing, or bins could be spuriously empty).
pub fn compute_modulus(field: &ScalarField, bin_width: f64) -> Result<ModulusCurve> {
    let grid = field.grid();
    let h = grid.spacing();
    if bin_width < h * (1.0 - 1e-12) {
        return Err(Error::Config(format!(
            "bin width {bin_width} is below the grid spacing {h}"
        )));
    }
    let s_max = grid.max_pair_distance() * 0.5;
    let nbins = (s_max / bin_width).ceil() as usize;
    let nbins = nbins.max(1);
    let len = grid.len();
    let u = field.values();

    let (maxes, counts) = (0..len)
        .into_par_iter()
        .fold(
            || (vec![f64::NEG_INFINITY; nbins], vec![0usize; nbins]),
            |(mut maxes, mut counts), i| {
                for j in (i + 1)..len {
                    let s = grid.distance(i, j) * 0.5;
                    let k = ((s / bin_width) as usize).min(nbins - 1);
                    let contrib = (u[i] - u[j]).abs() * 0.5;
                    if contrib > maxes[k] {
                        maxes[k] = contrib;
                    }
                    counts[k] += 1;
                }
                // virtual zero-value pairs reaching past the clamp ring
                if let Some(d_ring) = grid.distance_to_boundary(i) {
                    let contrib = u[i].abs() * 0.5;
                    let k0 = ((d_ring / (2.0 * bin_width) - 0.5).ceil()).max(0.0) as usize;
                    for k in k0..nbins {
                        if contrib > maxes[k] {
                            maxes[k] = contrib;
                        }
                        counts[k] += 1;
                    }
                }
                (maxes, counts)
            },
        )
        .reduce(
            || (vec![f64::NEG_INFINITY; nbins], vec![0usize; nbins]),
            |(mut ma, mut ca), (mb, cb)| {
                for k in 0..nbins {
                    if mb[k] > ma[k] {
                        ma[k] = mb[k];
                    }
                    ca[k] += cb[k];
                }
                (ma, ca)
            },
        );

    let bins = (0..nbins)
        .filter(|k| counts[*k] > 0)
        .map(|k| ModulusBin {
            s: (k as f64 + 0.5) * bin_width,
            omega: maxes[k],
            pairs: counts[k],
        })
        .collect();
    Ok(ModulusCurve {
        bins,
        bin_width,
        domain: grid.spec().domain.into(),
        sup_u: field.sup_norm(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PairWitness {
    pub i: usize,
    pub j: usize,
    pub s: f64,
    pub half_difference: f64,
    pub candidate_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IsModulusReport {
    pub holds: bool,
    /// Largest value of `|u(x)-u(y)| - 2 candidate(s)` over all pairs.
    pub worst_margin: f64,
    pub worst_pair: Option<PairWitness>,
}

/// Checks `|u(x) - u(y)| <= 2 candidate(|x-y|/2) + 1e-12` over all grid
/// pairs, reporting the worst pair.
pub fn is_modulus<F>(candidate: F, field: &ScalarField) -> IsModulusReport
where
    F: Fn(f64) -> f64 + Sync,
{
    let grid = field.grid();
    let u = field.values();
    let len = grid.len();
    let worst = (0..len)
        .into_par_iter()
        .map(|i| {
            let mut best: Option<PairWitness> = None;
            let mut best_margin = f64::NEG_INFINITY;
            for j in (i + 1)..len {
                let s = grid.distance(i, j) * 0.5;
                let half = (u[i] - u[j]).abs() * 0.5;
                let cand = candidate(s);
                let margin = 2.0 * half - 2.0 * cand;
                if margin > best_margin {
                    best_margin = margin;
                    best = Some(PairWitness {
                        i,
                        j,
                        s,
                        half_difference: half,
                        candidate_value: cand,
                    });
                }
            }
            (best_margin, best)
        })
        .reduce(
            || (f64::NEG_INFINITY, None),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && pair_key(&b.1) < pair_key(&a.1)) {
                    b
                } else {
                    a
                }
            },
        );
    let holds = worst.0 <= 1e-12;
    IsModulusReport {
        holds,
        worst_margin: worst.0,
        worst_pair: worst.1,
    }
}

fn pair_key(w: &Option<PairWitness>) -> (usize, usize) {
    w.as_ref().map(|w| (w.i, w.j)).unwrap_or((usize::MAX, usize::MAX))
}

/// Nondecreasing envelope `max_{sigma <= s} omega(sigma)`; idempotent.
pub fn running_envelope(curve: &ModulusCurve) -> ModulusCurve {
    let mut out = curve.clone();
    let mut running = f64::NEG_INFINITY;
    for b in &mut out.bins {
        running = running.max(b.omega);
        b.omega = running;
    }
    out
}
