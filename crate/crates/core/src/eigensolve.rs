//! Windowed Hermitian eigensolver.
//!
//! Small problems go to a dense decomposition. Larger ones run block Lanczos
//! with full reorthogonalization, on `(H - sigma)^{-1}` at the window centre or
//! on `H` itself when the window sits at the bottom of the spectrum. Converged
//! pairs are locked and the iteration restarts until the number found matches
//! an independent Sylvester-inertia count. A final Rayleigh-Ritz step with `H`
//! on the locked space produces the returned pairs and their residuals.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeOperator;
use crate::linalg::{dense, dot, norm2, reverse_cuthill_mckee, BandLdl, CsrMatrix, C64};

/// Anything exposing a sparse Hermitian matrix and a low-bandwidth ordering.
pub trait HermitianOperator {
    fn matrix(&self) -> &CsrMatrix;

    /// `perm[new] = old`, used for the banded factorizations.
    fn band_ordering(&self) -> Vec<usize> {
        reverse_cuthill_mckee(self.matrix())
    }
}

impl HermitianOperator for CsrMatrix {
    fn matrix(&self) -> &CsrMatrix {
        self
    }
}

impl HermitianOperator for LatticeOperator {
    fn matrix(&self) -> &CsrMatrix {
        LatticeOperator::matrix(self)
    }

    fn band_ordering(&self) -> Vec<usize> {
        LatticeOperator::band_ordering(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Auto,
    Dense,
    Lanczos,
}

/// Path actually taken by a solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolvePath {
    Dense,
    ShiftInvert { shift: f64 },
    Plain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Residual tolerance relative to the Gershgorin norm of `H`.
    pub rel_tol: f64,
    pub method: Method,
    pub seed: u64,
    pub dense_threshold: usize,
    pub max_block: usize,
    pub max_restarts: usize,
    /// Upper bound on the memory held by one Krylov basis.
    pub basis_bytes: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            method: Method::Auto,
            seed: 0,
            dense_threshold: 2000,
            max_block: 32,
            max_restarts: 40,
            basis_bytes: 256 << 20,
        }
    }
}

/// All eigenpairs in an open interval. Vectors are unit vectors in the
/// Euclidean inner product on `C^dim`.
#[derive(Debug, Clone)]
pub struct EigenWindow {
    pub interval: (f64, f64),
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
    pub residuals: Vec<f64>,
    pub tol: f64,
    pub path: SolvePath,
}

impl EigenWindow {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// `max |V* V - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, u) in self.vectors.iter().enumerate() {
            for (j, v) in self.vectors.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(u, v) - target).norm());
            }
        }
        worst
    }
}

/// Counts eigenvalues below a shift from the inertia of `H - shift`.
struct InertiaCounter<'a> {
    a: &'a CsrMatrix,
    perm: Vec<usize>,
    nudge: f64,
    pivot_tol: f64,
}

impl<'a> InertiaCounter<'a> {
    fn new(a: &'a CsrMatrix, perm: Vec<usize>, norm: f64) -> Self {
        Self {
            a,
            perm,
            nudge: 1e-11 * norm,
            pivot_tol: f64::EPSILON * norm,
        }
    }

    fn below(&self, shift: f64) -> Result<usize> {
        let mut last_row = 0;
        for s in [shift, shift + self.nudge, shift - self.nudge] {
            match BandLdl::factor(self.a, s, &self.perm, self.pivot_tol) {
                Ok(f) => return Ok(f.negative_count()),
                Err(e) => last_row = e.row,
            }
        }
        Err(Error::ShiftSingular { shift, row: last_row })
    }
}

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if lo < hi {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("window ({lo}, {hi}) is empty")))
    }
}

/// Number of eigenvalues in `(lo, hi)` from two shifted factorizations.
pub fn count_in<O: HermitianOperator + ?Sized>(op: &O, lo: f64, hi: f64) -> Result<usize> {
    check_interval(lo, hi)?;
    let a = op.matrix();
    let counter = InertiaCounter::new(a, op.band_ordering(), a.gershgorin_norm());
    Ok(counter.below(hi)? - counter.below(lo)?)
}

/// Eigenvalues below `shift`.
pub fn count_below<O: HermitianOperator + ?Sized>(op: &O, shift: f64) -> Result<usize> {
    let a = op.matrix();
    InertiaCounter::new(a, op.band_ordering(), a.gershgorin_norm()).below(shift)
}

/// Every eigenpair with eigenvalue in `(lo, hi)`.
pub fn eigs_window<O: HermitianOperator + ?Sized>(
    op: &O,
    lo: f64,
    hi: f64,
    opts: &EigenOptions,
) -> Result<EigenWindow> {
    check_interval(lo, hi)?;
    let a = op.matrix();
    let n = a.dim();
    let norm = a.gershgorin_norm().max(f64::MIN_POSITIVE);
    let tol = opts.rel_tol * norm;
    let counter = InertiaCounter::new(a, op.band_ordering(), norm);

    let mut below = [0usize; 4];
    for (slot, s) in below.iter_mut().zip([lo - tol, lo + tol, hi - tol, hi + tol]) {
        *slot = counter.below(s)?;
    }
    if below[0] != below[1] {
        return Err(Error::WindowBoundaryHit { endpoint: lo, tol });
    }
    if below[2] != below[3] {
        return Err(Error::WindowBoundaryHit { endpoint: hi, tol });
    }
    let count = below[2] - below[1];
    log::debug!("window ({lo:.6}, {hi:.6}): {count} eigenvalues by inertia, dim {n}");

    let use_dense = match opts.method {
        Method::Dense => true,
        Method::Lanczos => false,
        Method::Auto => n <= opts.dense_threshold,
    };
    if count == 0 {
        return Ok(EigenWindow {
            interval: (lo, hi),
            values: Vec::new(),
            vectors: Vec::new(),
            residuals: Vec::new(),
            tol,
            path: if use_dense { SolvePath::Dense } else { SolvePath::Plain },
        });
    }

    let (vectors, path) = if use_dense {
        (dense_window(a, lo, hi)?, SolvePath::Dense)
    } else {
        let (lower, _) = a.gershgorin_interval();
        let centre = 0.5 * (lo + hi);
        let transform = if centre > lower {
            Transform::shift_invert(a, &counter.perm, centre, hi - lo, norm)?
        } else {
            Transform::Plain
        };
        let path = transform.path();
        let locked = LanczosRun {
            a,
            transform,
            lo,
            hi,
            tol,
            opts,
        }
        .run(count)?;
        (locked, path)
    };

    let window = rayleigh_ritz(a, &vectors, lo, hi, tol, path)?;
    if window.len() != count {
        return Err(Error::NoConvergence {
            wanted: count,
            converged: window.len(),
            iterations: 0,
            worst_residual: window.max_residual(),
        });
    }
    if window.max_residual() > tol {
        return Err(Error::NoConvergence {
            wanted: count,
            converged: window.residuals.iter().filter(|&&r| r <= tol).count(),
            iterations: 0,
            worst_residual: window.max_residual(),
        });
    }
    Ok(window)
}

fn dense_window(a: &CsrMatrix, lo: f64, hi: f64) -> Result<Vec<Vec<C64>>> {
    let n = a.dim();
    let (values, u) = dense::eigh(dense::mat_from_row_major(n, &a.to_dense()).as_ref())?;
    Ok(values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > lo && v < hi)
        .map(|(k, _)| (0..n).map(|i| u[(i, k)]).collect())
        .collect())
}

/// Rayleigh-Ritz of `H` on the span of orthonormal `basis`, keeping the Ritz
/// pairs inside the window.
fn rayleigh_ritz(
    a: &CsrMatrix,
    basis: &[Vec<C64>],
    lo: f64,
    hi: f64,
    tol: f64,
    path: SolvePath,
) -> Result<EigenWindow> {
    let k = basis.len();
    let hv: Vec<Vec<C64>> = basis.iter().map(|v| a.matvec(v)).collect();
    let g = Mat::from_fn(k, k, |i, j| {
        let x = dot(&basis[i], &hv[j]);
        let y = dot(&basis[j], &hv[i]).conj();
        0.5 * (x + y)
    });
    let (theta, y) = dense::eigh(g.as_ref())?;
    let mut out = EigenWindow {
        interval: (lo, hi),
        values: Vec::new(),
        vectors: Vec::new(),
        residuals: Vec::new(),
        tol,
        path,
    };
    for (c, &t) in theta.iter().enumerate() {
        if !(t > lo && t < hi) {
            continue;
        }
        let n = a.dim();
        let mut v = vec![C64::new(0.0, 0.0); n];
        for (r, b) in basis.iter().enumerate() {
            let coef = y[(r, c)];
            for (x, bi) in v.iter_mut().zip(b) {
                *x += coef * bi;
            }
        }
        let scale = 1.0 / norm2(&v);
        fix_phase(&mut v, scale);
        let hv_fixed = a.matvec(&v);
        let residual = hv_fixed
            .iter()
            .zip(&v)
            .map(|(hx, x)| (hx - t * x).norm_sqr())
            .sum::<f64>()
            .sqrt();
        out.values.push(t);
        out.vectors.push(v);
        out.residuals.push(residual);
    }
    Ok(out)
}

/// Scales by `scale` and rotates so the largest-modulus entry (first on ties)
/// is real and positive.
fn fix_phase(v: &mut [C64], scale: f64) {
    let mut best = 0;
    let mut best_mod = -1.0;
    for (i, x) in v.iter().enumerate() {
        let m = x.norm();
        if m > best_mod {
            best_mod = m;
            best = i;
        }
    }
    let rot = if best_mod > 0.0 {
        v[best].conj() / best_mod * scale
    } else {
        C64::new(scale, 0.0)
    };
    for x in v.iter_mut() {
        *x *= rot;
    }
}

enum Transform {
    Plain,
    ShiftInvert {
        ldl: BandLdl,
        /// Upper bound on `||H - shift||`.
        span: f64,
    },
}

impl Transform {
    fn shift_invert(a: &CsrMatrix, perm: &[usize], centre: f64, width: f64, norm: f64) -> Result<Self> {
        let (lower, upper) = a.gershgorin_interval();
        let pivot_tol = f64::EPSILON * norm;
        let mut row = 0;
        for k in 0..4 {
            let shift = centre + 1e-6 * width * k as f64;
            match BandLdl::factor(a, shift, perm, pivot_tol) {
                Ok(ldl) => {
                    let span = (upper - shift).abs().max((shift - lower).abs());
                    return Ok(Self::ShiftInvert { ldl, span });
                }
                Err(e) => row = e.row,
            }
        }
        Err(Error::ShiftSingular { shift: centre, row })
    }

    fn path(&self) -> SolvePath {
        match self {
            Self::Plain => SolvePath::Plain,
            Self::ShiftInvert { ldl, .. } => SolvePath::ShiftInvert { shift: ldl.shift() },
        }
    }

    fn apply(&self, a: &CsrMatrix, x: &[C64], y: &mut [C64]) {
        match self {
            Self::Plain => a.matvec_into(x, y),
            Self::ShiftInvert { ldl, .. } => {
                y.copy_from_slice(x);
                ldl.solve_in_place(y);
            }
        }
    }

    /// Eigenvalue of `H` for a Ritz value of the transformed operator.
    fn energy(&self, theta: f64) -> f64 {
        match self {
            Self::Plain => theta,
            Self::ShiftInvert { ldl, .. } => ldl.shift() + 1.0 / theta,
        }
    }

    /// Bound on `||H v - lambda v||` from the transformed residual `rho`.
    fn residual_bound(&self, theta: f64, rho: f64) -> f64 {
        match self {
            Self::Plain => rho,
            Self::ShiftInvert { span, .. } => span * rho / theta.abs(),
        }
    }
}

struct LanczosRun<'a> {
    a: &'a CsrMatrix,
    transform: Transform,
    lo: f64,
    hi: f64,
    tol: f64,
    opts: &'a EigenOptions,
}

struct Candidate {
    energy: f64,
    bound: f64,
    coeffs: Vec<C64>,
    vector: Option<Vec<C64>>,
}

impl LanczosRun<'_> {
    fn run(&self, count: usize) -> Result<Vec<Vec<C64>>> {
        let n = self.a.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
        let mut locked: Vec<Vec<C64>> = Vec::new();
        let mut carry: Vec<Vec<C64>> = Vec::new();
        let budget = (self.opts.basis_bytes / (16 * n.max(1))).max(8);
        let mut steps = 0;
        let mut worst = f64::INFINITY;

        for restart in 0..=self.opts.max_restarts {
            if locked.len() >= count {
                break;
            }
            let needed = count - locked.len();
            let block = (needed + 2).min(self.opts.max_block).max(1);
            let max_basis = budget
                .min(n - locked.len())
                .min((3 * needed + 8 * block).max(200));
            if max_basis <= block {
                break;
            }

            let mut q: Vec<Vec<C64>> = Vec::with_capacity(max_basis);
            for v in carry.drain(..) {
                push_orthonormal(&mut q, &locked, v);
            }
            let mut attempts = 0;
            while q.len() < block && attempts < 4 * block {
                push_orthonormal(&mut q, &locked, random_vector(&mut rng, n));
                attempts += 1;
            }
            let block = q.len();
            if block == 0 {
                break;
            }

            // h[c] holds the coefficients of T q_c in the basis; lost[c] is the
            // norm of the part of T q_c left out once the basis is full
            let mut h: Vec<Vec<C64>> = Vec::new();
            let mut lost: Vec<f64> = Vec::new();
            let check_every = block.max(8);
            let mut w = vec![C64::new(0.0, 0.0); n];
            let found = loop {
                let c = h.len();
                let done = c == q.len();
                if c > 0 && (c % check_every == 0 || done) {
                    let mut found = self.ritz(&q, &h, &lost);
                    if found.len() >= needed {
                        self.verify(&q, &mut found);
                    }
                    let converged = found.iter().filter(|f| f.bound <= self.tol).count();
                    worst = found.iter().map(|f| f.bound).fold(0.0, f64::max);
                    if converged >= needed || done {
                        break found;
                    }
                }
                self.transform.apply(self.a, &q[c], &mut w);
                steps += 1;
                let original = norm2(&w);
                let mut coeffs = vec![C64::new(0.0, 0.0); q.len()];
                for _ in 0..2 {
                    for l in &locked {
                        axpy_out(&mut w, l);
                    }
                    for (k, b) in q.iter().enumerate() {
                        coeffs[k] += axpy_out(&mut w, b);
                    }
                }
                let eta = norm2(&w);
                if q.len() >= max_basis {
                    lost.push(eta);
                } else if eta > 1e-10 * original {
                    for x in w.iter_mut() {
                        *x /= eta;
                    }
                    q.push(w.clone());
                    coeffs.push(C64::new(eta, 0.0));
                    lost.push(0.0);
                } else {
                    // invariant subspace; continue from a fresh direction
                    push_orthonormal(&mut q, &locked, random_vector(&mut rng, n));
                    coeffs.push(C64::new(0.0, 0.0));
                    lost.push(eta);
                }
                h.push(coeffs);
            };

            let mut converged: Vec<&Candidate> = found.iter().filter(|f| f.bound <= self.tol).collect();
            converged.sort_by(|x, y| x.energy.total_cmp(&y.energy));
            let before = locked.len();
            for cand in converged {
                let v = cand.vector.clone().unwrap_or_else(|| combine(&q, &cand.coeffs));
                push_orthonormal(&mut locked, &[], v);
            }
            log::debug!(
                "restart {restart}: basis {} locked {} (+{}) of {count}",
                q.len(),
                locked.len(),
                locked.len() - before
            );
            let mut pending: Vec<&Candidate> = found.iter().filter(|f| f.bound > self.tol).collect();
            pending.sort_by(|x, y| x.bound.total_cmp(&y.bound));
            carry = pending
                .into_iter()
                .take(block)
                .map(|cand| combine(&q, &cand.coeffs))
                .collect();
        }

        if locked.len() < count {
            return Err(Error::NoConvergence {
                wanted: count,
                converged: locked.len(),
                iterations: steps,
                worst_residual: worst,
            });
        }
        Ok(locked)
    }

    /// Replaces loose a-priori bounds by the explicit residual
    /// `||H v - (v* H v) v||` of the normalized Ritz vector.
    fn verify(&self, q: &[Vec<C64>], found: &mut [Candidate]) {
        for cand in found.iter_mut().filter(|f| f.bound > self.tol) {
            let mut v = combine(q, &cand.coeffs);
            let scale = 1.0 / norm2(&v);
            v.iter_mut().for_each(|x| *x *= scale);
            let hv = self.a.matvec(&v);
            let rq = dot(&v, &hv).re;
            let r = hv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - rq * b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if r < cand.bound {
                cand.bound = r;
                cand.energy = rq;
                cand.vector = Some(v);
            }
        }
    }

    /// Ritz pairs of the processed part of the basis whose energies fall in
    /// the window.
    fn ritz(&self, q: &[Vec<C64>], h: &[Vec<C64>], lost: &[f64]) -> Vec<Candidate> {
        let c = h.len();
        let m = Mat::from_fn(c, c, |i, j| {
            let x = h[j].get(i).copied().unwrap_or_default();
            let y = h[i].get(j).copied().unwrap_or_default().conj();
            0.5 * (x + y)
        });
        let Ok((theta, y)) = dense::eigh(m.as_ref()) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for (k, &t) in theta.iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            let energy = self.transform.energy(t);
            if !(energy > self.lo && energy < self.hi) {
                continue;
            }
            let mut rho2 = 0.0;
            for row in c..q.len() {
                let mut s = C64::new(0.0, 0.0);
                for (j, col) in h.iter().enumerate() {
                    if let Some(v) = col.get(row) {
                        s += v * y[(j, k)];
                    }
                }
                rho2 += s.norm_sqr();
            }
            let dropped: f64 = lost.iter().enumerate().map(|(j, l)| l * y[(j, k)].norm()).sum();
            out.push(Candidate {
                energy,
                bound: self.transform.residual_bound(t, rho2.sqrt() + dropped),
                coeffs: (0..c).map(|j| y[(j, k)]).collect(),
                vector: None,
            });
        }
        out
    }
}

/// Removes the component of `w` along unit vector `b`; returns that component.
fn axpy_out(w: &mut [C64], b: &[C64]) -> C64 {
    let c = dot(b, w);
    for (x, y) in w.iter_mut().zip(b) {
        *x -= c * y;
    }
    c
}

/// Orthonormalizes `v` against `fixed` and `basis` (twice) and appends it
/// unless it is numerically dependent.
fn push_orthonormal(basis: &mut Vec<Vec<C64>>, fixed: &[Vec<C64>], mut v: Vec<C64>) {
    let original = norm2(&v);
    if original == 0.0 {
        return;
    }
    for _ in 0..2 {
        for b in fixed.iter().chain(basis.iter()) {
            axpy_out(&mut v, b);
        }
    }
    let r = norm2(&v);
    if r > 1e-8 * original {
        for x in v.iter_mut() {
            *x /= r;
        }
        basis.push(v);
    }
}

fn combine(q: &[Vec<C64>], coeffs: &[C64]) -> Vec<C64> {
    let n = q[0].len();
    let mut v = vec![C64::new(0.0, 0.0); n];
    for (b, &c) in q.iter().zip(coeffs) {
        for (x, y) in v.iter_mut().zip(b) {
            *x += c * y;
        }
    }
    v
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(n: usize, seed: u64) -> CsrMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, C64::new(rng.gen_range(-1.0..1.0), 0.0)));
            for j in (i + 1)..n {
                let v = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) / (n as f64).sqrt();
                t.push((i, j, v));
                t.push((j, i, v.conj()));
            }
        }
        CsrMatrix::from_triplets(n, &t)
    }

    #[test]
    fn diagonal_window() {
        let d: Vec<f64> = (1..=10).map(|v| v as f64).collect();
        let a = CsrMatrix::from_diagonal(&d);
        assert_eq!(count_in(&a, 2.5, 5.5).unwrap(), 3);
        for method in [Method::Dense, Method::Lanczos] {
            let opts = EigenOptions {
                method,
                ..Default::default()
            };
            let ew = eigs_window(&a, 2.5, 5.5, &opts).unwrap();
            assert_eq!(ew.values.len(), 3);
            for (k, (v, vec)) in ew.values.iter().zip(&ew.vectors).enumerate() {
                assert!((v - (k + 3) as f64).abs() < 1e-12);
                assert!((vec[k + 2] - C64::new(1.0, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn boundary_hit_is_reported() {
        let a = CsrMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            eigs_window(&a, 2.0, 2.5, &EigenOptions::default()),
            Err(Error::WindowBoundaryHit { endpoint, .. }) if endpoint == 2.0
        ));
    }

    #[test]
    fn lanczos_matches_dense_on_random_matrix() {
        let n = 500;
        let a = random_hermitian(n, 17);
        let all = dense::eigvalsh(n, &a.to_dense()).unwrap();
        let (lo, hi) = (0.5 * (all[200] + all[201]), 0.5 * (all[240] + all[241]));
        let opts = EigenOptions {
            method: Method::Lanczos,
            seed: 3,
            ..Default::default()
        };
        let ew = eigs_window(&a, lo, hi, &opts).unwrap();
        assert_eq!(ew.len(), 40);
        assert_eq!(count_in(&a, lo, hi).unwrap(), 40);
        for (x, y) in ew.values.iter().zip(&all[201..241]) {
            assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
        assert!(ew.orthonormality_defect() < 1e-8);
        assert!(ew.max_residual() <= ew.tol);
    }

    #[test]
    fn plain_path_for_bottom_window() {
        let n = 300;
        let a = random_hermitian(n, 4);
        let all = dense::eigvalsh(n, &a.to_dense()).unwrap();
        let (lower, _) = a.gershgorin_interval();
        let hi = 0.5 * (all[5] + all[6]);
        let lo = 2.0 * lower - hi;
        let opts = EigenOptions {
            method: Method::Lanczos,
            ..Default::default()
        };
        let ew = eigs_window(&a, lo, hi, &opts).unwrap();
        assert_eq!(ew.path, SolvePath::Plain);
        for (x, y) in ew.values.iter().zip(&all[..6]) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn repeated_eigenvalue_is_found_with_full_multiplicity() {
        let mut d: Vec<f64> = (0..400).map(|i| 10.0 + i as f64 * 0.01).collect();
        for v in d.iter_mut().take(12) {
            *v = 3.0;
        }
        let a = CsrMatrix::from_diagonal(&d);
        let opts = EigenOptions {
            method: Method::Lanczos,
            max_block: 4,
            ..Default::default()
        };
        let ew = eigs_window(&a, 2.0, 5.0, &opts).unwrap();
        assert_eq!(ew.len(), 12);
        assert!(ew.orthonormality_defect() < 1e-8);
    }

    #[test]
    fn solves_are_deterministic() {
        let a = random_hermitian(200, 8);
        let opts = EigenOptions {
            method: Method::Lanczos,
            seed: 42,
            ..Default::default()
        };
        let x = eigs_window(&a, -0.2, 0.2, &opts).unwrap();
        let y = eigs_window(&a, -0.2, 0.2, &opts).unwrap();
        assert_eq!(x.values, y.values);
    }

    #[test]
    fn phase_convention() {
        let a = random_hermitian(60, 1);
        let ew = eigs_window(&a, -0.5, 0.5, &EigenOptions::default()).unwrap();
        for v in &ew.vectors {
            let k = (0..v.len())
                .max_by(|&i, &j| v[i].norm().total_cmp(&v[j].norm()))
                .unwrap();
            assert!(v[k].im.abs() < 1e-14 && v[k].re > 0.0);
        }
    }

    #[test]
    fn empty_window_below_spectrum() {
        let a = CsrMatrix::from_diagonal(&[1.0, 2.0]);
        assert_eq!(count_in(&a, -5.0, 0.5).unwrap(), 0);
        assert!(eigs_window(&a, -5.0, 0.5, &EigenOptions::default()).unwrap().is_empty());
    }
}
