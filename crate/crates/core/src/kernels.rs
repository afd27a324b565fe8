//! Spectral projector kernels on the lattice: assembly from eigenvectors,
//! off-diagonal decay fits, and near-diagonal comparison with the model
//! Landau-level kernels in rescaled coordinates `W = sqrt(p) Z`.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::analysis::{liouville_prediction, linear_fit, torus_sigma, DEFAULT_FIELD_RESOLUTION};
use crate::eigensolve::{eigs_window, EigenOptions, EigenWindow};
use crate::error::{Error, Result};
use crate::geometry::TorusConfig;
use crate::lattice::LatticeOperator;
use crate::linalg::C64;
use crate::model_spectrum::window_model_kernel;

/// Rows `P(x, .)` of the projector kernel for selected base points `x`, with
/// the density normalization `P(x, x') = N^2 sum_i v_i(x) conj(v_i(x'))`.
#[derive(Debug, Clone)]
pub struct KernelGrid {
    pub p: u32,
    pub window: (f64, f64),
    pub n_grid: usize,
    pub count: usize,
    pub base_points: Vec<usize>,
    pub rows: Vec<Vec<C64>>,
    /// `P(x, x)` at every grid point.
    pub diagonal: Vec<f64>,
}

pub fn projector_kernel(ew: &EigenWindow, p: u32, n_grid: usize, base_points: &[usize]) -> Result<KernelGrid> {
    if ew.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let dim = n_grid * n_grid;
    if ew.vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::InvalidInput(format!("eigenvectors do not live on an {n_grid}x{n_grid} grid")));
    }
    if let Some(&b) = base_points.iter().find(|&&b| b >= dim) {
        return Err(Error::InvalidInput(format!("base point {b} outside the grid")));
    }
    let density = dim as f64;
    let rows = base_points
        .iter()
        .map(|&x| {
            let mut row = vec![C64::new(0.0, 0.0); dim];
            for v in &ew.vectors {
                let vx = v[x] * density;
                for (r, w) in row.iter_mut().zip(v) {
                    *r += vx * w.conj();
                }
            }
            row
        })
        .collect();
    let mut diagonal = vec![0.0; dim];
    for v in &ew.vectors {
        for (d, w) in diagonal.iter_mut().zip(v) {
            *d += density * w.norm_sqr();
        }
    }
    Ok(KernelGrid {
        p,
        window: ew.interval,
        n_grid,
        count: ew.len(),
        base_points: base_points.to_vec(),
        rows,
        diagonal,
    })
}

impl KernelGrid {
    pub fn value(&self, base_index: usize, target: usize) -> C64 {
        self.rows[base_index][target]
    }

    /// `N^-2 sum_x P(x, x)`.
    pub fn trace(&self) -> f64 {
        self.diagonal.iter().sum::<f64>() / self.diagonal.len() as f64
    }

    /// `max |P(x, x') - conj(P(x', x))|` over pairs of base points.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, &x) in self.base_points.iter().enumerate() {
            for (j, &y) in self.base_points.iter().enumerate() {
                worst = worst.max((self.rows[i][y] - self.rows[j][x].conj()).norm());
            }
        }
        worst
    }

    /// `max |N^-2 sum_w P(x, w) P(w, x') - P(x, x')|` over pairs of base points.
    pub fn idempotency_defect(&self) -> f64 {
        let dim = self.diagonal.len() as f64;
        let mut worst: f64 = 0.0;
        for (i, ri) in self.rows.iter().enumerate() {
            for (j, &y) in self.base_points.iter().enumerate() {
                let rj = &self.rows[j];
                let composed: C64 = ri.iter().zip(rj).map(|(a, b)| a * b.conj()).sum::<C64>() / dim;
                worst = worst.max((composed - self.rows[i][y]).norm());
            }
        }
        worst
    }

    /// Minimal-image displacement `x' - x` on the unit torus.
    pub fn displacement(&self, from: usize, to: usize) -> [f64; 2] {
        torus_displacement(self.n_grid, from, to)
    }
}

pub fn torus_displacement(n: usize, from: usize, to: usize) -> [f64; 2] {
    let wrap = |d: isize| {
        let n = n as isize;
        let r = d.rem_euclid(n);
        (if r > n / 2 { r - n } else { r }) as f64 / n as f64
    };
    [
        wrap((to / n) as isize - (from / n) as isize),
        wrap((to % n) as isize - (from % n) as isize),
    ]
}

pub fn torus_distance(n: usize, from: usize, to: usize) -> f64 {
    let d = torus_displacement(n, from, to);
    d[0].hypot(d[1])
}

/// Exponential envelope fit `|P| ~ C exp(-c sqrt(p) d)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub c_hat: f64,
    pub amplitude: f64,
    pub r_squared: f64,
    /// `(d, max |P|)` per distance bin that survived the noise floor.
    pub bins: Vec<(f64, f64)>,
}

/// Noise floor relative to `max |P|`.
pub const DECAY_NOISE_FLOOR: f64 = 1e-13;

pub fn decay_fit(kg: &KernelGrid, base_index: usize, p: u32) -> Result<DecayFit> {
    let x = kg.base_points[base_index];
    let row = &kg.rows[base_index];
    let n = kg.n_grid;
    let peak = row.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let floor = DECAY_NOISE_FLOOR * peak;
    let mut envelope: Vec<Option<(f64, f64)>> = vec![None; n];
    for (t, v) in row.iter().enumerate() {
        let m = v.norm();
        if m < floor || m == 0.0 {
            continue;
        }
        let d = torus_distance(n, x, t);
        let bin = (d * n as f64).floor() as usize;
        let slot = &mut envelope[bin];
        if slot.map_or(true, |(_, best)| m > best) {
            *slot = Some((d, m));
        }
    }
    let bins: Vec<(f64, f64)> = envelope.into_iter().flatten().collect();
    if bins.len() < 5 {
        return Err(Error::InsufficientRange { bins: bins.len() });
    }
    let sp = (p as f64).sqrt();
    let pts: Vec<(f64, f64)> = bins.iter().map(|&(d, m)| (sp * d, m.ln())).collect();
    let (slope, intercept, r_squared) = linear_fit(&pts);
    Ok(DecayFit {
        c_hat: -slope,
        amplitude: intercept.exp(),
        r_squared,
        bins,
    })
}

/// Nodes sampled around `x0` for the near-diagonal comparison, with their
/// rescaled minimal-image coordinates `W = sqrt(p) (x - x0)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NearDiagonalSamples {
    pub x0: usize,
    pub nodes: Vec<usize>,
    pub w: Vec<[f64; 2]>,
    /// Largest distance, in `W` units, between a requested point and its node.
    pub max_snap: f64,
}

/// Requested points `W` on a square lattice of the given spacing inside the
/// disc `|W| <= w_max`, snapped to the nearest grid node (duplicates dropped).
/// The first node is `x0` itself.
pub fn near_diagonal_samples(n_grid: usize, p: u32, x0: usize, w_max: f64, spacing: f64) -> NearDiagonalSamples {
    let sp = (p as f64).sqrt();
    let nf = n_grid as f64;
    let (i0, j0) = ((x0 / n_grid) as isize, (x0 % n_grid) as isize);
    let steps = (w_max / spacing).floor() as isize;
    let mut nodes = vec![x0];
    let mut max_snap: f64 = 0.0;
    for a in -steps..=steps {
        for b in -steps..=steps {
            let w = [a as f64 * spacing, b as f64 * spacing];
            if w[0].hypot(w[1]) > w_max + 1e-12 {
                continue;
            }
            let di = (w[0] / sp * nf).round();
            let dj = (w[1] / sp * nf).round();
            let snap = ((di / nf * sp - w[0]).powi(2) + (dj / nf * sp - w[1]).powi(2)).sqrt();
            max_snap = max_snap.max(snap);
            let n = n_grid as isize;
            let node = ((i0 + di as isize).rem_euclid(n) * n + (j0 + dj as isize).rem_euclid(n)) as usize;
            if !nodes.contains(&node) {
                nodes.push(node);
            }
        }
    }
    let w = nodes
        .iter()
        .map(|&s| {
            let z = torus_displacement(n_grid, x0, s);
            [sp * z[0], sp * z[1]]
        })
        .collect();
    NearDiagonalSamples {
        x0,
        nodes,
        w,
        max_snap,
    }
}

/// Frozen model at `x0`: field frequency, potential value and energy window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelPoint {
    pub a: f64,
    pub v: f64,
    pub window: (f64, f64),
}

impl ModelPoint {
    pub fn kernel(&self, w: [f64; 2], wp: [f64; 2]) -> C64 {
        window_model_kernel(&[self.a], self.v, self.window, &w, &wp)
    }

    /// `sup |F_0| = |F_0(0, 0)|`.
    pub fn peak(&self) -> f64 {
        self.kernel([0.0, 0.0], [0.0, 0.0]).norm()
    }
}

/// Gauge function `chi` with `A_Landau - A_sym = d chi` near `x0` for the
/// constant field `b`; lattice and model kernels differ by
/// `exp(i p chi(Z)) ... exp(-i p chi(Z'))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LandauToSymmetric {
    pub b: f64,
    pub x0: [f64; 2],
}

impl LandauToSymmetric {
    pub fn chi(&self, z: [f64; 2]) -> f64 {
        self.b * (0.5 * z[0] * z[1] + self.x0[0] * z[1])
    }
}

/// Radius of the chart around `x0` used for the phase-corrected comparison.
pub const PHASE_CHART_RADIUS: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NearDiagonalReport {
    pub p: u32,
    pub n_grid: usize,
    /// `p^-1 P(x0, x0)`.
    pub diagonal: f64,
    pub model_diagonal: f64,
    /// `sup | p^-1 |P(x, x')| - |F_0(W, W')| | / sup |F_0|` over sample pairs.
    pub sup_rel_error: f64,
    /// Same with complex values after the gauge correction, over pairs inside
    /// the chart; `None` without a gauge or when the chart meets the seam.
    pub phase_sup_rel_error: Option<f64>,
    pub samples: usize,
    pub max_snap: f64,
    pub counted: usize,
    pub predicted: f64,
}

/// Compares `p^-1 P` with the model kernel on all pairs of sample nodes.
/// `kg` must have the sample nodes as its base points, in order.
pub fn near_diagonal_compare(
    kg: &KernelGrid,
    samples: &NearDiagonalSamples,
    model: &ModelPoint,
    gauge: Option<&LandauToSymmetric>,
    predicted: f64,
) -> Result<NearDiagonalReport> {
    if kg.base_points != samples.nodes {
        return Err(Error::InvalidInput("kernel base points must be the sample nodes".into()));
    }
    if (kg.count as f64 - predicted).abs() > 0.1 * predicted {
        return Err(Error::WindowBandMismatch {
            counted: kg.count,
            predicted,
        });
    }
    let p = kg.p as f64;
    let sp = p.sqrt();
    let peak = model.peak();
    let origin = [0.0, 0.0];

    let mut sup: f64 = 0.0;
    for (i, &xi) in samples.nodes.iter().enumerate() {
        for &x in &samples.nodes {
            let lattice = kg.rows[i][x].norm() / p;
            let d = kg.displacement(xi, x);
            let model_mod = model.kernel(origin, [sp * d[0], sp * d[1]]).norm();
            sup = sup.max((lattice - model_mod).abs());
        }
    }

    let phase_sup = gauge.and_then(|g| {
        let x0 = g.x0;
        if x0.iter().any(|&c| c - PHASE_CHART_RADIUS < 0.0 || c + PHASE_CHART_RADIUS >= 1.0) {
            return None;
        }
        let inside: Vec<usize> = (0..samples.nodes.len())
            .filter(|&k| {
                let w = samples.w[k];
                w[0].hypot(w[1]) / sp <= PHASE_CHART_RADIUS
            })
            .collect();
        let mut worst: f64 = 0.0;
        for &i in &inside {
            let zi = [samples.w[i][0] / sp, samples.w[i][1] / sp];
            for &j in &inside {
                let zj = [samples.w[j][0] / sp, samples.w[j][1] / sp];
                let lattice = kg.rows[i][samples.nodes[j]] / p;
                let corrected = lattice * C64::from_polar(1.0, p * (g.chi(zj) - g.chi(zi)));
                let f0 = model.kernel(samples.w[i], samples.w[j]);
                worst = worst.max((corrected - f0).norm());
            }
        }
        Some(worst / peak)
    });

    Ok(NearDiagonalReport {
        p: kg.p,
        n_grid: kg.n_grid,
        diagonal: kg.rows[0][samples.x0].re / p,
        model_diagonal: peak,
        sup_rel_error: sup / peak,
        phase_sup_rel_error: phase_sup,
        samples: samples.nodes.len(),
        max_snap: samples.max_snap,
        counted: kg.count,
        predicted,
    })
}

/// `(d, |P|, arg P)` for every target of one kernel row.
pub fn write_kernel_slice_csv(kg: &KernelGrid, base_index: usize, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["d", "abs", "arg"])?;
    let x = kg.base_points[base_index];
    for (t, v) in kg.rows[base_index].iter().enumerate() {
        out.write_record([
            format!("{:.10e}", torus_distance(kg.n_grid, x, t)),
            format!("{:.10e}", v.norm()),
            format!("{:.10e}", v.arg()),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Whitespace columns `sqrt(p) d   log|P|   fitted` for plotting the envelope.
pub fn write_decay_gnuplot(fit: &DecayFit, p: u32, mut w: impl Write) -> Result<()> {
    let sp = (p as f64).sqrt();
    writeln!(w, "# sqrt(p)*d  log|P|  fit   (c_hat = {:.6}, r^2 = {:.6})", fit.c_hat, fit.r_squared)?;
    for &(d, m) in &fit.bins {
        let fitted = fit.amplitude.ln() - fit.c_hat * sp * d;
        writeln!(w, "{:.8e} {:.8e} {:.8e}", sp * d, m.ln(), fitted)?;
    }
    Ok(())
}

/// Eigen window of `H_p` for the lowest merged component of the band set.
pub fn ground_band_window(config: &TorusConfig) -> Result<(f64, f64)> {
    torus_sigma(config, DEFAULT_FIELD_RESOLUTION, None)?.component_window(0)
}

/// Solved window problem: operator and eigenpairs.
pub struct BandSolve {
    pub op: LatticeOperator,
    pub window: EigenWindow,
}

pub fn solve_band(
    config: &TorusConfig,
    p: u32,
    n_grid: usize,
    window: (f64, f64),
    opts: &EigenOptions,
) -> Result<BandSolve> {
    let op = LatticeOperator::assemble(config, p, n_grid)?;
    let window = eigs_window(&op, window.0, window.1, opts)?;
    Ok(BandSolve { op, window })
}

/// Decay fit of the kernel row at the grid centre.
pub fn decay_run(
    config: &TorusConfig,
    p: u32,
    n_grid: usize,
    window: (f64, f64),
    opts: &EigenOptions,
) -> Result<(KernelGrid, DecayFit)> {
    let solved = solve_band(config, p, n_grid, window, opts)?;
    let centre = solved.op.site(n_grid / 2, n_grid / 2);
    let kg = projector_kernel(&solved.window, p, n_grid, &[centre])?;
    let fit = decay_fit(&kg, 0, p)?;
    Ok((kg, fit))
}

/// Near-diagonal comparison of the window kernel at the grid centre.
pub fn near_diagonal_run(
    config: &TorusConfig,
    p: u32,
    n_grid: usize,
    window: (f64, f64),
    opts: &EigenOptions,
    w_max: f64,
    spacing: f64,
) -> Result<NearDiagonalReport> {
    let solved = solve_band(config, p, n_grid, window, opts)?;
    let op = &solved.op;
    let x0 = op.site(n_grid / 2, n_grid / 2);
    let coords = op.site_coords(x0);
    let samples = near_diagonal_samples(n_grid, p, x0, w_max, spacing);
    let kg = projector_kernel(&solved.window, p, n_grid, &samples.nodes)?;
    let model = ModelPoint {
        a: config.field(coords[0], coords[1]),
        v: config.potential(coords[0], coords[1]),
        window: solved.window.interval,
    };
    let gauge = (config.epsilon() == 0.0 || config.profile().sup_norm() == 0.0).then_some(LandauToSymmetric {
        b: config.field(coords[0], coords[1]),
        x0: coords,
    });
    let field = config.field_grid(DEFAULT_FIELD_RESOLUTION)?;
    let predicted = liouville_prediction(&field, p, solved.window.interval);
    near_diagonal_compare(&kg, &samples, &model, gauge.as_ref(), predicted)
}

/// `a / 2 pi`, the model diagonal of the lowest Landau level on a surface.
pub fn bergman_diagonal(a: f64) -> f64 {
    a / (2.0 * PI)
}
