//! Exact spectral data of the constant-coefficient model operator obtained by
//! freezing the field at a point: frequencies of the magnetic matrix, Landau
//! levels, the band set they sweep out over a manifold, the model counting
//! function, and the projector kernels onto individual Landau levels.
//!
//! Coordinates on the tangent space are paired as `z_k = Z_{2k} + i Z_{2k+1}`
//! (zero-based) in a frame where the field matrix is block diagonal.

use std::f64::consts::PI;

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dense, C64};

pub const DEFAULT_FREQUENCY_FLOOR: f64 = 1e-8;

/// The magnetic 2-form matrix and the potential eigenvalues at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    b_matrix: Vec<f64>,
    dim: usize,
    v_eigs: Vec<f64>,
    freqs: Vec<f64>,
}

impl FieldSample {
    /// `b_matrix` is row-major `2n x 2n`; `v_eigs` is sorted on construction.
    pub fn new(b_matrix: Vec<f64>, mut v_eigs: Vec<f64>, floor: f64) -> Result<Self> {
        let dim = (b_matrix.len() as f64).sqrt().round() as usize;
        if dim * dim != b_matrix.len() || dim == 0 || dim % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "field matrix must be 2n x 2n, got {} entries",
                b_matrix.len()
            )));
        }
        if v_eigs.is_empty() || v_eigs.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("potential needs at least one finite eigenvalue".into()));
        }
        v_eigs.sort_by(f64::total_cmp);
        let freqs = frequencies(&b_matrix, floor)?;
        Ok(Self {
            b_matrix,
            dim,
            v_eigs,
            freqs,
        })
    }

    /// Surface case (`n = 1`): field `b dx ^ dy` and a scalar potential.
    pub fn surface(b: f64, v: f64) -> Result<Self> {
        Self::new(vec![0.0, b, -b, 0.0], vec![v], DEFAULT_FREQUENCY_FLOOR)
    }

    pub fn b_matrix(&self) -> &[f64] {
        &self.b_matrix
    }

    /// Half the real dimension of the tangent space.
    pub fn n(&self) -> usize {
        self.dim / 2
    }

    pub fn v_eigs(&self) -> &[f64] {
        &self.v_eigs
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.freqs
    }

    /// `tau = sum_j a_j`.
    pub fn tau(&self) -> f64 {
        self.freqs.iter().sum()
    }

    /// Lowest model eigenvalue `sum_j a_j + min_mu V_mu`.
    pub fn ground_level(&self) -> f64 {
        self.tau() + self.v_eigs[0]
    }
}

/// Frequencies `a_1 <= ... <= a_n` of a real skew-symmetric `2n x 2n` matrix,
/// i.e. its spectrum is `{+- i a_j}`.
///
/// The squared frequencies are the eigenvalues of `B^T B = -B^2`, which come in
/// equal pairs.
pub fn frequencies(b_matrix: &[f64], floor: f64) -> Result<Vec<f64>> {
    let dim = (b_matrix.len() as f64).sqrt().round() as usize;
    if dim * dim != b_matrix.len() || dim % 2 != 0 || dim == 0 {
        return Err(Error::InvalidInput("field matrix must be 2n x 2n".into()));
    }
    let scale = b_matrix.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let defect = (0..dim)
        .flat_map(|i| (0..dim).map(move |j| (i, j)))
        .map(|(i, j)| (b_matrix[i * dim + j] + b_matrix[j * dim + i]).abs())
        .fold(0.0, f64::max);
    if defect > 1e-12 * scale {
        return Err(Error::NotSkewSymmetric { defect, scale });
    }

    let freqs = if dim == 2 {
        vec![b_matrix[1].abs()]
    } else {
        let gram = Mat::from_fn(dim, dim, |i, j| {
            (0..dim)
                .map(|k| b_matrix[k * dim + i] * b_matrix[k * dim + j])
                .sum::<f64>()
        });
        let squares = dense::eigvalsh_real(gram.as_ref())?;
        squares
            .chunks(2)
            .map(|pair| (0.5 * (pair[0] + pair[1])).max(0.0).sqrt())
            .collect()
    };

    let smallest = freqs[0];
    if !(smallest >= floor) {
        return Err(Error::DegenerateField { smallest, floor });
    }
    Ok(freqs)
}

/// A model eigenvalue `Lambda_{k,mu}` with its multi-index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandauLevel {
    pub k: Vec<usize>,
    pub mu: usize,
    pub energy: f64,
}

impl LandauLevel {
    pub fn order(&self) -> usize {
        self.k.iter().sum()
    }
}

/// `Lambda_{k,mu} = sum_j (2 k_j + 1) a_j + V_mu` for every `|k|_inf <= k_max`,
/// sorted by energy (ties by multi-index, then `mu`).
pub fn landau_levels(a: &[f64], v_eigs: &[f64], k_max: usize) -> Vec<LandauLevel> {
    let mut out = Vec::new();
    for k in multi_indices(a.len(), k_max) {
        let base = level_energy(a, &k);
        for (mu, &v) in v_eigs.iter().enumerate() {
            out.push(LandauLevel {
                k: k.clone(),
                mu,
                energy: base + v,
            });
        }
    }
    out.sort_by(|x, y| {
        x.energy
            .total_cmp(&y.energy)
            .then_with(|| x.k.cmp(&y.k))
            .then(x.mu.cmp(&y.mu))
    });
    out
}

fn level_energy(a: &[f64], k: &[usize]) -> f64 {
    a.iter()
        .zip(k)
        .map(|(&aj, &kj)| (2 * kj + 1) as f64 * aj)
        .sum()
}

/// All multi-indices in `{0..=k_max}^n`, lexicographic.
fn multi_indices(n: usize, k_max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::with_capacity(n)];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=k_max).map(move |kj| {
                    let mut next = prefix.clone();
                    next.push(kj);
                    next
                })
            })
            .collect();
    }
    out
}

/// `N(x, lambda) = #{(k, mu) : Lambda_{k,mu}(x) <= lambda}`.
pub fn model_counting(sample: &FieldSample, lambda: f64) -> usize {
    let a = sample.frequencies();
    sample
        .v_eigs()
        .iter()
        .map(|&v| count_below(a, lambda - v - a.iter().sum::<f64>()))
        .sum()
}

// number of k in Z_+^n with sum_j 2 k_j a_j <= budget
fn count_below(a: &[f64], budget: f64) -> usize {
    if budget < 0.0 {
        return 0;
    }
    match a.split_first() {
        None => 1,
        Some((&first, rest)) => {
            let mut total = 0;
            let mut k = 0usize;
            loop {
                let left = budget - 2.0 * first * k as f64;
                if left < 0.0 {
                    break;
                }
                total += count_below(rest, left);
                k += 1;
            }
            total
        }
    }
}

/// One band `[alpha, beta]`: the range of `Lambda_{k,mu}` over the sampled points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Band {
    pub k: Vec<usize>,
    pub mu: usize,
    pub alpha: f64,
    pub beta: f64,
}

impl Band {
    pub fn order(&self) -> usize {
        self.k.iter().sum()
    }

    pub fn meets(&self, lo: f64, hi: f64) -> bool {
        self.beta > lo && self.alpha < hi
    }
}

/// The band set truncated at an energy cap: raw per-`(k, mu)` bands, their
/// merged closed components, and the open gaps between them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaSet {
    bands: Vec<Band>,
    components: Vec<(f64, f64)>,
    gaps: Vec<(f64, f64)>,
    energy_cap: f64,
}

impl SigmaSet {
    /// Builds the set from raw bands; bands starting above the cap are dropped.
    pub fn from_bands(bands: Vec<Band>, energy_cap: f64) -> Result<Self> {
        if let Some(b) = bands.iter().find(|b| !(b.alpha <= b.beta)) {
            return Err(Error::InvalidInput(format!(
                "band alpha {} exceeds beta {}",
                b.alpha, b.beta
            )));
        }
        let mut bands: Vec<Band> = bands.into_iter().filter(|b| b.alpha <= energy_cap).collect();
        if bands.is_empty() {
            return Err(Error::InvalidInput("no band starts below the energy cap".into()));
        }
        bands.sort_by(|x, y| x.alpha.total_cmp(&y.alpha).then_with(|| x.k.cmp(&y.k)).then(x.mu.cmp(&y.mu)));

        let mut components: Vec<(f64, f64)> = Vec::new();
        for b in &bands {
            let hi = b.beta.min(energy_cap);
            match components.last_mut() {
                Some(last) if b.alpha <= last.1 => last.1 = last.1.max(hi),
                _ => components.push((b.alpha, hi)),
            }
        }
        let mut gaps: Vec<(f64, f64)> = components
            .windows(2)
            .map(|w| (w[0].1, w[1].0))
            .collect();
        let top = components.last().unwrap().1;
        if top < energy_cap {
            gaps.push((top, energy_cap));
        }
        Ok(Self {
            bands,
            components,
            gaps,
            energy_cap,
        })
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn components(&self) -> &[(f64, f64)] {
        &self.components
    }

    pub fn gaps(&self) -> &[(f64, f64)] {
        &self.gaps
    }

    pub fn energy_cap(&self) -> f64 {
        self.energy_cap
    }

    /// `Lambda_0 = inf Sigma`.
    pub fn ground(&self) -> f64 {
        self.components[0].0
    }

    /// Euclidean distance from `lambda` to the union of bands.
    pub fn distance(&self, lambda: f64) -> f64 {
        self.components
            .iter()
            .map(|&(lo, hi)| {
                if lambda < lo {
                    lo - lambda
                } else if lambda > hi {
                    lambda - hi
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// True when `lambda` is below the cap and outside every closed band.
    pub fn avoids(&self, lambda: f64) -> bool {
        lambda < self.energy_cap && self.distance(lambda) > 0.0
    }

    /// `kappa(I) = max |k|` over bands meeting the open interval `(lo, hi)`.
    pub fn kappa_of(&self, lo: f64, hi: f64) -> Option<usize> {
        self.bands
            .iter()
            .filter(|b| b.meets(lo, hi))
            .map(Band::order)
            .max()
    }

    /// Bands whose range meets `(lo, hi)`.
    pub fn bands_meeting(&self, lo: f64, hi: f64) -> impl Iterator<Item = &Band> {
        self.bands.iter().filter(move |b| b.meets(lo, hi))
    }

    /// Window isolating merged component `index`: from the middle of the gap
    /// below (or, for the lowest component, as far below it as half the gap
    /// above) to the middle of the gap above.
    pub fn component_window(&self, index: usize) -> Result<(f64, f64)> {
        let comp = *self.components.get(index).ok_or_else(|| {
            Error::InvalidInput(format!(
                "band index {index} out of range ({} components below the cap)",
                self.components.len()
            ))
        })?;
        let above = self
            .gaps
            .iter()
            .find(|g| g.0 == comp.1)
            .copied()
            .ok_or_else(|| {
                Error::InvalidInput(format!("component {index} has no gap above it below the cap"))
            })?;
        let hi = 0.5 * (above.0 + above.1);
        let lo = if index == 0 {
            comp.0 - 0.5 * (above.1 - above.0)
        } else {
            let below = self.gaps.iter().find(|g| g.1 == comp.0).copied().unwrap();
            0.5 * (below.0 + below.1)
        };
        Ok((lo, hi))
    }
}

/// Default cap `5 max(Lambda_0, n b_0)` over the samples.
pub fn default_energy_cap(samples: &[FieldSample]) -> f64 {
    let ground = samples
        .iter()
        .map(FieldSample::ground_level)
        .fold(f64::INFINITY, f64::min);
    let b0 = samples
        .iter()
        .map(|s| s.frequencies()[0])
        .fold(f64::INFINITY, f64::min);
    let n = samples.first().map_or(1, FieldSample::n) as f64;
    5.0 * ground.max(n * b0)
}

/// Band set `Sigma` from field samples: each band is the min/max over samples
/// of `Lambda_{k,mu}`, for `|k|_inf <= k_max`.
pub fn sigma_bands(samples: &[FieldSample], k_max: usize, energy_cap: f64) -> Result<SigmaSet> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidInput("sigma_bands needs at least one sample".into()))?;
    let n = first.n();
    let r = first.v_eigs().len();
    if samples.iter().any(|s| s.n() != n || s.v_eigs().len() != r) {
        return Err(Error::InvalidInput("samples disagree on n or rank".into()));
    }
    let max_ground = samples
        .iter()
        .map(FieldSample::ground_level)
        .fold(f64::NEG_INFINITY, f64::max);
    if !(energy_cap > max_ground) {
        return Err(Error::InvalidInput(format!(
            "energy cap {energy_cap} must exceed the largest sampled ground level {max_ground}"
        )));
    }

    let indices = multi_indices(n, k_max);
    let mut lo = vec![f64::INFINITY; indices.len() * r];
    let mut hi = vec![f64::NEG_INFINITY; indices.len() * r];
    for s in samples {
        for (ki, k) in indices.iter().enumerate() {
            let base = level_energy(s.frequencies(), k);
            for (mu, v) in s.v_eigs().iter().enumerate() {
                let e = base + v;
                let slot = ki * r + mu;
                lo[slot] = lo[slot].min(e);
                hi[slot] = hi[slot].max(e);
            }
        }
    }
    let bands = indices
        .iter()
        .enumerate()
        .flat_map(|(ki, k)| {
            let (lo, hi) = (&lo, &hi);
            (0..r).map(move |mu| Band {
                k: k.clone(),
                mu,
                alpha: lo[ki * r + mu],
                beta: hi[ki * r + mu],
            })
        })
        .collect();
    SigmaSet::from_bands(bands, energy_cap)
}

/// Laguerre polynomial `L_k(x)` by the three-term recurrence.
pub fn laguerre(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 - x);
    match k {
        0 => return 1.0,
        1 => return cur,
        _ => {}
    }
    for j in 1..k {
        let next = ((2 * j + 1) as f64 - x) * cur - j as f64 * prev;
        prev = cur;
        cur = next / (j + 1) as f64;
    }
    cur
}

fn mode_pairs<'a>(z: &'a [f64], zp: &'a [f64]) -> impl Iterator<Item = (C64, C64)> + 'a {
    z.chunks(2)
        .zip(zp.chunks(2))
        .map(|(u, w)| (C64::new(u[0], u[1]), C64::new(w[0], w[1])))
}

fn check_point_dims(a: &[f64], z: &[f64], zp: &[f64]) {
    assert_eq!(z.len(), 2 * a.len(), "point dimension must be 2n");
    assert_eq!(zp.len(), 2 * a.len(), "point dimension must be 2n");
}

/// Bergman kernel of the lowest Landau level,
/// `(2 pi)^-n prod a_j exp(-1/4 sum a_k (|z_k|^2 + |z'_k|^2 - 2 z_k conj(z'_k)))`.
pub fn bergman_kernel(a: &[f64], z: &[f64], zp: &[f64]) -> C64 {
    check_point_dims(a, z, zp);
    let mut exponent = C64::new(0.0, 0.0);
    for (&ak, (zk, wk)) in a.iter().zip(mode_pairs(z, zp)) {
        exponent -= 0.25 * ak * (zk.norm_sqr() + wk.norm_sqr() - 2.0 * zk * wk.conj());
    }
    let prefactor: f64 = a.iter().product::<f64>() / (2.0 * PI).powi(a.len() as i32);
    prefactor * exponent.exp()
}

/// Kernel of the projection onto Landau level `k` of the model operator with
/// `V = 0`; per symplectic mode
/// `(a / 2 pi) L_k(a |z - z'|^2 / 2) exp(-a/4 (|z|^2 + |z'|^2 - 2 z conj(z')))`.
pub fn landau_level_kernel(a: &[f64], k: &[usize], z: &[f64], zp: &[f64]) -> C64 {
    check_point_dims(a, z, zp);
    assert_eq!(k.len(), a.len(), "multi-index length must be n");
    let mut value = C64::new(1.0, 0.0);
    for ((&ak, &kk), (zk, wk)) in a.iter().zip(k).zip(mode_pairs(z, zp)) {
        let gauss = (-0.25 * ak * (zk.norm_sqr() + wk.norm_sqr() - 2.0 * zk * wk.conj())).exp();
        let radial = laguerre(kk, 0.5 * ak * (zk - wk).norm_sqr());
        value *= ak / (2.0 * PI) * radial * gauss;
    }
    value
}

/// Kernel of the model spectral projection onto the window `(lo, hi)`
/// for a scalar potential value `v`: the sum of the Landau-level kernels whose
/// level `Lambda_k + v` falls inside the window.
pub fn window_model_kernel(a: &[f64], v: f64, window: (f64, f64), z: &[f64], zp: &[f64]) -> C64 {
    levels_in_window(a, v, window)
        .iter()
        .map(|k| landau_level_kernel(a, k, z, zp))
        .sum()
}

/// Multi-indices `k` with `Lambda_k + v` inside the open window.
pub fn levels_in_window(a: &[f64], v: f64, window: (f64, f64)) -> Vec<Vec<usize>> {
    let b0 = a.iter().copied().fold(f64::INFINITY, f64::min);
    let k_max = ((window.1 - v - a.iter().sum::<f64>()) / (2.0 * b0)).max(0.0).floor() as usize;
    multi_indices(a.len(), k_max)
        .into_iter()
        .filter(|k| {
            let e = level_energy(a, k) + v;
            e > window.0 && e < window.1
        })
        .collect()
}
