//! Comparisons between lattice spectra and the model band set: distances to
//! `Sigma`, power-law rate fits, Liouville counting predictions, and the exact
//! spectrum of the round sphere.

use std::f64::consts::PI;

use serde::Serialize;

use crate::eigensolve::{count_in, eigs_window, EigenOptions, EigenWindow};
use crate::error::{Error, Result};
use crate::geometry::{SampledField, SphereConfig, TorusConfig};
use crate::lattice::LatticeOperator;
use crate::model_spectrum::{default_energy_cap, landau_levels, sigma_bands, SigmaSet};

/// Distances of computed eigenvalues to the band set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterReport {
    pub p: u32,
    pub window: (f64, f64),
    pub per_eig_dist: Vec<(f64, f64)>,
    pub max_dist: f64,
}

impl ClusterReport {
    /// `max_dist * p^{1/4}`.
    pub fn witness(&self) -> f64 {
        self.max_dist * (self.p as f64).powf(0.25)
    }
}

pub fn distance_to_sigma(p: u32, window: (f64, f64), eigs: &[f64], sigma: &SigmaSet) -> Result<ClusterReport> {
    if let Some(&value) = eigs.iter().find(|&&e| e > sigma.energy_cap()) {
        return Err(Error::EnergyCapExceeded {
            value,
            cap: sigma.energy_cap(),
        });
    }
    let per_eig_dist: Vec<(f64, f64)> = eigs.iter().map(|&e| (e, sigma.distance(e))).collect();
    let max_dist = per_eig_dist.iter().map(|d| d.1).fold(0.0, f64::max);
    Ok(ClusterReport {
        p,
        window,
        per_eig_dist,
        max_dist,
    })
}

/// Smallest constant `C` with `max_dist <= C p^{-1/4}` over all reports.
pub fn clustering_constant(reports: &[ClusterReport]) -> f64 {
    reports.iter().map(ClusterReport::witness).fold(0.0, f64::max)
}

/// True when `max_dist` does not increase along the reports sorted by `p`.
pub fn is_non_increasing(reports: &[ClusterReport]) -> bool {
    let mut sorted: Vec<&ClusterReport> = reports.iter().collect();
    sorted.sort_by_key(|r| r.p);
    sorted.windows(2).all(|w| w[1].max_dist <= w[0].max_dist)
}

/// For every band meeting the window, the distance from the band to the
/// nearest computed eigenvalue.
pub fn band_proximity(sigma: &SigmaSet, window: (f64, f64), eigs: &[f64]) -> Vec<(Vec<usize>, f64)> {
    sigma
        .bands_meeting(window.0, window.1)
        .map(|b| {
            let d = eigs
                .iter()
                .map(|&e| {
                    if e < b.alpha {
                        b.alpha - e
                    } else if e > b.beta {
                        e - b.beta
                    } else {
                        0.0
                    }
                })
                .fold(f64::INFINITY, f64::min);
            (b.k.clone(), d)
        })
        .collect()
}

/// Log-log least squares `log y = slope log p + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn rate_fit(points: &[(f64, f64)]) -> Result<RateFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(p, y)| p > 0.0 && y >= 1e-12)
        .map(|&(p, y)| (p.ln(), y.ln()))
        .collect();
    if usable.len() < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            got: usable.len(),
        });
    }
    let (slope, intercept, r_squared) = linear_fit(&usable);
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Ordinary least squares `y = slope x + intercept` with `R^2`.
pub(crate) fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r_squared)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DemaillyComparison {
    pub predicted: f64,
    pub count: usize,
    pub relative_error: f64,
}

/// `(p / 2 pi)^n sum_{k, mu} mu_B({x : Lambda_{k,mu}(x) in window})` by
/// indicator quadrature over the sampled field.
pub fn liouville_prediction(field: &SampledField, p: u32, window: (f64, f64)) -> f64 {
    let Some(first) = field.points.first() else {
        return 0.0;
    };
    let n = first.sample.n() as i32;
    let b0 = field
        .points
        .iter()
        .map(|pt| pt.sample.frequencies()[0])
        .fold(f64::INFINITY, f64::min);
    let ground = field
        .points
        .iter()
        .map(|pt| pt.sample.ground_level())
        .fold(f64::INFINITY, f64::min);
    let k_max = ((window.1 - ground) / (2.0 * b0)).max(0.0).ceil() as usize;
    let mass: f64 = field
        .points
        .iter()
        .map(|pt| {
            let levels = landau_levels(pt.sample.frequencies(), pt.sample.v_eigs(), k_max);
            let hits = levels
                .iter()
                .filter(|l| l.energy > window.0 && l.energy < window.1)
                .count();
            hits as f64 * pt.weight
        })
        .sum();
    (p as f64 / (2.0 * PI)).powi(n) * mass
}

/// Compares an eigenvalue count with the Liouville prediction. Both window
/// endpoints must avoid the band set.
pub fn demailly_compare(
    field: &SampledField,
    sigma: &SigmaSet,
    p: u32,
    window: (f64, f64),
    count: usize,
) -> Result<DemaillyComparison> {
    for end in [window.0, window.1] {
        if end < sigma.energy_cap() && !sigma.avoids(end) {
            return Err(Error::InvalidInput(format!(
                "window endpoint {end} lies inside the band set"
            )));
        }
    }
    let predicted = liouville_prediction(field, p, window);
    let relative_error = if predicted > 0.0 {
        (count as f64 - predicted).abs() / predicted
    } else if count == 0 {
        0.0
    } else {
        return Err(Error::EmptyPrediction { count });
    };
    Ok(DemaillyComparison {
        predicted,
        count,
        relative_error,
    })
}

/// One exact level of `H_p` on the round sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereLevel {
    pub k: usize,
    pub nu: f64,
    pub multiplicity: usize,
    /// `nu_{p,k} - (2k+1) a`, the shift of the level from its Landau level.
    pub level_offset: f64,
    /// Distance of `nu_{p,k}` to the sphere band set `{(2j+1) a}`.
    pub dist: f64,
}

pub fn sphere_exact(config: &SphereConfig, p: u32, k_max: usize) -> Vec<SphereLevel> {
    let r2 = config.r_squared();
    let a = config.frequency();
    let p = p as f64;
    (0..=k_max)
        .map(|k| {
            let kf = k as f64;
            let landau = (2.0 * kf + 1.0) * a;
            let level_offset = kf * (kf + 1.0) / (r2 * p);
            let nu = landau + level_offset;
            // levels of Sigma are odd multiples of a
            let j = ((nu / a - 1.0) / 2.0).round().max(0.0);
            let dist = (nu - (2.0 * j + 1.0) * a).abs();
            SphereLevel {
                k,
                nu,
                multiplicity: p as usize + 2 * k + 1,
                level_offset,
                dist,
            }
        })
        .collect()
}

/// Sphere eigenvalues up to order `k_max`, repeated by multiplicity.
pub fn sphere_spectrum(config: &SphereConfig, p: u32, k_max: usize) -> Vec<f64> {
    sphere_exact(config, p, k_max)
        .iter()
        .flat_map(|l| std::iter::repeat(l.nu).take(l.multiplicity))
        .collect()
}

/// Resolution of the field sample grid used for band sets and Liouville masses.
pub const DEFAULT_FIELD_RESOLUTION: usize = 128;

/// Band set of a torus configuration from a cell-centred field grid.
pub fn torus_sigma(config: &TorusConfig, resolution: usize, energy_cap: Option<f64>) -> Result<SigmaSet> {
    let samples = config.field_grid(resolution)?.samples();
    let cap = energy_cap.unwrap_or_else(|| default_energy_cap(&samples));
    let b0 = samples
        .iter()
        .map(|s| s.frequencies()[0])
        .fold(f64::INFINITY, f64::min);
    let ground = samples
        .iter()
        .map(|s| s.ground_level())
        .fold(f64::INFINITY, f64::min);
    let k_max = ((cap - ground) / (2.0 * b0)).max(0.0).ceil() as usize;
    sigma_bands(&samples, k_max, cap)
}

/// Lattice eigenvalues in a window and their distances to `Sigma`.
#[derive(Debug, Clone)]
pub struct ClusterRun {
    pub n_grid: usize,
    pub report: ClusterReport,
    pub window: EigenWindow,
}

pub fn cluster_run(
    config: &TorusConfig,
    sigma: &SigmaSet,
    p: u32,
    n_grid: usize,
    window: (f64, f64),
    opts: &EigenOptions,
) -> Result<ClusterRun> {
    let op = LatticeOperator::assemble(config, p, n_grid)?;
    let ew = eigs_window(&op, window.0, window.1, opts)?;
    let report = distance_to_sigma(p, window, &ew.values, sigma)?;
    Ok(ClusterRun {
        n_grid,
        report,
        window: ew,
    })
}

/// Inertia count in the window against the Liouville prediction.
pub fn demailly_run(
    config: &TorusConfig,
    sigma: &SigmaSet,
    p: u32,
    n_grid: usize,
    window: (f64, f64),
    resolution: usize,
) -> Result<DemaillyComparison> {
    let op = LatticeOperator::assemble(config, p, n_grid)?;
    let count = count_in(&op, window.0, window.1)?;
    let field = config.field_grid(resolution)?;
    demailly_compare(&field, sigma, p, window, count)
}

/// Row of a `p`-sweep report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: u32,
    pub n_grid: usize,
    pub max_dist: Option<f64>,
    pub predicted: Option<f64>,
    pub count: Option<usize>,
    pub relative_error: Option<f64>,
}
