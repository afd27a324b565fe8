//! Peierls discretization of `H_p = p^{-1} Delta + V` on an `N x N` periodic
//! grid of the unit torus.
//!
//! Sites `(i, j)` sit at `(i / N, j / N)` and are numbered `s = i * N + j`.
//! A link phase `u_{s->t}` is the parallel transport `exp(-i p int_s^t A)` of the
//! Landau gauge `A = (0, A_y)`; the periodicity defect of that gauge in `x` is
//! absorbed on the seam links `(N - 1, j) -> (0, j)`. The counter-clockwise
//! product around every cell then has argument `-p Phi_cell` exactly.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::TorusConfig;
use crate::linalg::{CsrMatrix, C64};

/// Unit phases on the `+x` and `+y` links leaving each site.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkField {
    n: usize,
    phases_x: Vec<C64>,
    phases_y: Vec<C64>,
}

impl LinkField {
    pub fn trivial(n: usize) -> Self {
        let one = C64::new(1.0, 0.0);
        Self {
            n,
            phases_x: vec![one; n * n],
            phases_y: vec![one; n * n],
        }
    }

    pub fn landau_gauge(config: &TorusConfig, p: u32, n: usize) -> Self {
        let pf = p as f64;
        let h = 1.0 / n as f64;
        let mut links = Self::trivial(n);
        for i in 0..n {
            let x = i as f64 * h;
            for j in 0..n {
                let (y0, y1) = (j as f64 * h, (j + 1) as f64 * h);
                links.phases_y[i * n + j] = C64::from_polar(1.0, -pf * config.vertical_line_integral(x, y0, y1));
            }
        }
        for j in 0..n {
            let g = pf * config.seam_primitive(j as f64 * h);
            links.phases_x[(n - 1) * n + j] = C64::from_polar(1.0, g);
        }
        links
    }

    pub fn from_phases(n: usize, phases_x: Vec<C64>, phases_y: Vec<C64>) -> Result<Self> {
        if phases_x.len() != n * n || phases_y.len() != n * n {
            return Err(Error::InvalidInput("link arrays must hold N^2 phases each".into()));
        }
        Ok(Self { n, phases_x, phases_y })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Transport along `(i, j) -> (i + 1, j)`.
    pub fn x_link(&self, i: usize, j: usize) -> C64 {
        self.phases_x[i * self.n + j]
    }

    /// Transport along `(i, j) -> (i, j + 1)`.
    pub fn y_link(&self, i: usize, j: usize) -> C64 {
        self.phases_y[i * self.n + j]
    }

    pub fn max_modulus_defect(&self) -> f64 {
        self.phases_x
            .iter()
            .chain(&self.phases_y)
            .map(|u| (u.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Counter-clockwise product around cell `(i, j)`.
    pub fn plaquette(&self, i: usize, j: usize) -> C64 {
        let n = self.n;
        let (i1, j1) = ((i + 1) % n, (j + 1) % n);
        self.x_link(i, j) * self.y_link(i1, j) * self.x_link(i, j1).conj() * self.y_link(i, j).conj()
    }

    /// Links seen after relabelling sites `s -> s - (di, dj)`.
    fn shifted(&self, di: usize, dj: usize) -> Self {
        let n = self.n;
        let src = |i: usize, j: usize| ((i + di) % n) * n + (j + dj) % n;
        let mut out = Self::trivial(n);
        for i in 0..n {
            for j in 0..n {
                out.phases_x[i * n + j] = self.phases_x[src(i, j)];
                out.phases_y[i * n + j] = self.phases_y[src(i, j)];
            }
        }
        out
    }

    fn gauged(&self, site_phases: &[C64]) -> Self {
        let n = self.n;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                let s = i * n + j;
                let tx = ((i + 1) % n) * n + j;
                let ty = i * n + (j + 1) % n;
                out.phases_x[s] = site_phases[s].conj() * self.phases_x[s] * site_phases[tx];
                out.phases_y[s] = site_phases[s].conj() * self.phases_y[s] * site_phases[ty];
            }
        }
        out
    }
}

/// Grid size `max(32, ceil(8 sqrt(p)))`: at least eight nodes per magnetic length.
pub fn default_grid(p: u32) -> usize {
    32usize.max((8.0 * (p as f64).sqrt()).ceil() as usize)
}

/// Grid size `max(32, ceil(factor * p))`, which shrinks the flux per plaquette
/// like `1 / p` so discretization error decays along a `p`-sweep.
pub fn convergent_grid(p: u32, factor: f64) -> usize {
    32usize.max((factor * p as f64).ceil() as usize)
}

/// Sparse Hermitian lattice operator with its links and potential samples.
#[derive(Debug, Clone)]
pub struct LatticeOperator {
    matrix: CsrMatrix,
    p: u32,
    n: usize,
    links: LinkField,
    potential: Vec<f64>,
    config: Option<TorusConfig>,
}

impl LatticeOperator {
    pub fn assemble(config: &TorusConfig, p: u32, n: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidInput("tensor power p must be >= 1".into()));
        }
        if n < 8 {
            return Err(Error::InvalidInput(format!("grid size N = {n} must be >= 8")));
        }
        let h = 1.0 / n as f64;
        let mut max_flux: f64 = 0.0;
        for i in 0..n {
            let (x0, x1) = (i as f64 * h, (i + 1) as f64 * h);
            for j in 0..n {
                let (y0, y1) = (j as f64 * h, (j + 1) as f64 * h);
                max_flux = max_flux.max(config.rectangle_flux(x0, x1, y0, y1).abs());
            }
        }
        let phase = p as f64 * max_flux;
        if phase >= PI {
            return Err(Error::FluxAliased { phase });
        }
        let links = LinkField::landau_gauge(config, p, n);
        let potential = (0..n * n)
            .map(|s| config.potential((s / n) as f64 * h, (s % n) as f64 * h))
            .collect();
        let mut op = Self::from_links(links, potential, p)?;
        op.config = Some(config.clone());
        Ok(op)
    }

    /// Zero field: unit links and `V = 0`.
    pub fn zero_field(p: u32, n: usize) -> Result<Self> {
        Self::from_links(LinkField::trivial(n), vec![0.0; n * n], p)
    }

    pub fn from_links(links: LinkField, potential: Vec<f64>, p: u32) -> Result<Self> {
        let n = links.n;
        if p == 0 || potential.len() != n * n || n < 3 {
            return Err(Error::InvalidInput("inconsistent lattice operator data".into()));
        }
        let hop = (n * n) as f64 / p as f64;
        let mut t = Vec::with_capacity(5 * n * n);
        for i in 0..n {
            for j in 0..n {
                let s = i * n + j;
                t.push((s, s, C64::new(4.0 * hop + potential[s], 0.0)));
                let tx = ((i + 1) % n) * n + j;
                let ty = i * n + (j + 1) % n;
                let ux = -hop * links.x_link(i, j);
                let uy = -hop * links.y_link(i, j);
                t.push((s, tx, ux));
                t.push((tx, s, ux.conj()));
                t.push((s, ty, uy));
                t.push((ty, s, uy.conj()));
            }
        }
        Ok(Self {
            matrix: CsrMatrix::from_triplets(n * n, &t),
            p,
            n,
            links,
            potential,
            config: None,
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn grid_size(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    pub fn links(&self) -> &LinkField {
        &self.links
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn config(&self) -> Option<&TorusConfig> {
        self.config.as_ref()
    }

    pub fn site(&self, i: usize, j: usize) -> usize {
        (i % self.n) * self.n + j % self.n
    }

    pub fn site_coords(&self, s: usize) -> [f64; 2] {
        let h = 1.0 / self.n as f64;
        [(s / self.n) as f64 * h, (s % self.n) as f64 * h]
    }

    /// Column order interleaving `0, N-1, 1, N-2, ...` so that the seam
    /// neighbours stay adjacent; bandwidth `2N`. `perm[new] = old`.
    pub fn band_ordering(&self) -> Vec<usize> {
        let n = self.n;
        let column = |q: usize| if q % 2 == 0 { q / 2 } else { n - 1 - q / 2 };
        (0..n * n).map(|new| column(new / n) * n + new % n).collect()
    }

    /// `H' = U* H U` with `U = diag(site_phases)`.
    pub fn gauge_transform(&self, site_phases: &[C64]) -> Result<Self> {
        if site_phases.len() != self.dim() {
            return Err(Error::InvalidInput("one phase per site required".into()));
        }
        if let Some((site, deviation)) = site_phases
            .iter()
            .map(|u| (u.norm() - 1.0).abs())
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
        {
            if deviation > 1e-12 {
                return Err(Error::NonUnitaryPhases { deviation, site });
            }
        }
        Ok(Self {
            matrix: self
                .matrix
                .map_entries(|i, j, v| site_phases[i].conj() * v * site_phases[j]),
            p: self.p,
            n: self.n,
            links: self.links.gauged(site_phases),
            potential: self.potential.clone(),
            config: self.config.clone(),
        })
    }

    /// Operator seen from the grid translated by `(di, dj)` sites:
    /// `(T psi)(i, j) = psi(i + di, j + dj)`.
    pub fn translate(&self, di: usize, dj: usize) -> Self {
        let n = self.n;
        let potential = (0..n * n)
            .map(|s| self.potential[self.site(s / n + di, s % n + dj)])
            .collect();
        let mut op = Self::from_links(self.links.shifted(di % n, dj % n), potential, self.p)
            .expect("shifted data has the same shape");
        op.config = self.config.clone();
        op
    }

    /// Coordinate text export: MatrixMarket header, then one-based
    /// `row col re im` lines.
    pub fn write_matrix_market(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate complex general")?;
        writeln!(w, "% p = {} N = {}", self.p, self.n)?;
        writeln!(w, "{} {} {}", self.dim(), self.dim(), self.matrix.nnz())?;
        for (i, j, v) in self.matrix.triplets() {
            writeln!(w, "{} {} {:.17e} {:.17e}", i + 1, j + 1, v.re, v.im)?;
        }
        Ok(())
    }
}

/// Site phases `phi` with `gauge(a, phi) = b` on a spanning tree of links,
/// found by breadth-first search from site 0. Exists on every link iff `a` and
/// `b` have the same plaquettes and the same holonomies around both cycles.
pub fn relative_gauge(a: &LinkField, b: &LinkField) -> Vec<C64> {
    let n = a.n;
    let mut phi = vec![C64::new(0.0, 0.0); n * n];
    let mut seen = vec![false; n * n];
    phi[0] = C64::new(1.0, 0.0);
    seen[0] = true;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let (i, j) = (s / n, s % n);
        // b_{s->t} = conj(phi_s) a_{s->t} phi_t for each edge direction
        let forward = [
            (((i + 1) % n) * n + j, a.x_link(i, j), b.x_link(i, j)),
            (i * n + (j + 1) % n, a.y_link(i, j), b.y_link(i, j)),
        ];
        let ib = (i + n - 1) % n;
        let jb = (j + n - 1) % n;
        let backward = [
            (ib * n + j, a.x_link(ib, j).conj(), b.x_link(ib, j).conj()),
            (i * n + jb, a.y_link(i, jb).conj(), b.y_link(i, jb).conj()),
        ];
        for (t, ua, ub) in forward.into_iter().chain(backward) {
            if !seen[t] {
                phi[t] = phi[s] * ub / ua;
                seen[t] = true;
                queue.push_back(t);
            }
        }
    }
    phi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Potential, Profile};
    use crate::linalg::dense::eigvalsh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_phases(n: usize, seed: u64) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| C64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI))).collect()
    }

    fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
        let scale = a.iter().map(|v| v.abs()).fold(1.0, f64::max);
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
    }

    #[test]
    fn assembly_is_exactly_hermitian_and_five_point() {
        let cfg = TorusConfig::new(2, 0.3, Profile::CosXCosY, Potential::Renormalized).unwrap();
        let op = LatticeOperator::assemble(&cfg, 3, 16).unwrap();
        assert_eq!(op.matrix().hermitian_defect(), 0.0);
        assert!(op.matrix().max_row_nnz() <= 5);
        assert!(op.links().max_modulus_defect() < 1e-14);
    }

    #[test]
    fn plaquettes_carry_exact_flux() {
        let cfg = TorusConfig::new(1, 0.4, Profile::CosXCosY, Potential::Zero).unwrap();
        let (p, n) = (5, 24);
        let links = LinkField::landau_gauge(&cfg, p, n);
        let h = 1.0 / n as f64;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                let flux = cfg.rectangle_flux(i as f64 * h, (i + 1) as f64 * h, j as f64 * h, (j + 1) as f64 * h);
                total += p as f64 * flux;
                let defect = (links.plaquette(i, j) * C64::from_polar(1.0, p as f64 * flux) - 1.0).norm();
                assert!(defect < 1e-12, "cell ({i},{j}) defect {defect}");
            }
        }
        assert!((total - 2.0 * PI * p as f64).abs() < 1e-10);
    }

    #[test]
    fn aliased_flux_is_rejected() {
        let cfg = TorusConfig::constant(1);
        assert!(matches!(
            LatticeOperator::assemble(&cfg, 64, 8),
            Err(Error::FluxAliased { .. })
        ));
    }

    #[test]
    fn zero_field_matches_cosine_closed_form() {
        let (p, n) = (3, 12);
        let op = LatticeOperator::zero_field(p, n).unwrap();
        let evals = eigvalsh(op.dim(), &op.matrix().to_dense()).unwrap();
        let scale = (n * n) as f64 / p as f64;
        let mut exact: Vec<f64> = (0..n)
            .flat_map(|j| (0..n).map(move |l| (j, l)))
            .map(|(j, l)| {
                let (tj, tl) = (2.0 * PI * j as f64 / n as f64, 2.0 * PI * l as f64 / n as f64);
                scale * (4.0 - 2.0 * tj.cos() - 2.0 * tl.cos())
            })
            .collect();
        exact.sort_by(f64::total_cmp);
        for (a, b) in evals.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        assert!(evals[0].abs() < 1e-9);
    }

    #[test]
    fn identity_and_global_phases_leave_matrix_unchanged() {
        let op = LatticeOperator::assemble(&TorusConfig::constant(1), 4, 16).unwrap();
        let ones = vec![C64::new(1.0, 0.0); op.dim()];
        assert_eq!(op.gauge_transform(&ones).unwrap().matrix().to_dense(), op.matrix().to_dense());
        let global = vec![C64::from_polar(1.0, 0.7); op.dim()];
        let g = op.gauge_transform(&global).unwrap();
        let diff = g
            .matrix()
            .to_dense()
            .iter()
            .zip(op.matrix().to_dense())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12 * op.matrix().max_abs());
    }

    #[test]
    fn non_unitary_phases_are_rejected() {
        let op = LatticeOperator::zero_field(1, 8).unwrap();
        let mut phases = vec![C64::new(1.0, 0.0); 64];
        phases[5] = C64::new(1.0 + 1e-9, 0.0);
        assert!(matches!(
            op.gauge_transform(&phases),
            Err(Error::NonUnitaryPhases { site: 5, .. })
        ));
    }

    #[test]
    fn spectrum_is_gauge_invariant() {
        let op = LatticeOperator::assemble(&TorusConfig::constant(1), 4, 32).unwrap();
        let base = eigvalsh(op.dim(), &op.matrix().to_dense()).unwrap();
        let g = op.gauge_transform(&random_phases(op.dim(), 99)).unwrap();
        let gauged = eigvalsh(g.dim(), &g.matrix().to_dense()).unwrap();
        assert!(max_rel_diff(&base, &gauged) < 1e-10);
    }

    #[test]
    fn gauge_transformed_links_match_matrix() {
        let op = LatticeOperator::assemble(&TorusConfig::constant(1), 2, 10).unwrap();
        let g = op.gauge_transform(&random_phases(op.dim(), 5)).unwrap();
        let rebuilt = LatticeOperator::from_links(g.links().clone(), g.potential().to_vec(), 2).unwrap();
        let diff = rebuilt
            .matrix()
            .to_dense()
            .iter()
            .zip(g.matrix().to_dense())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12 * op.matrix().max_abs());
    }

    #[test]
    fn spectrum_bounded_below_by_potential() {
        let cfg = TorusConfig::new(1, 0.2, Profile::CosX, Potential::Renormalized).unwrap();
        let op = LatticeOperator::assemble(&cfg, 2, 12).unwrap();
        let evals = eigvalsh(op.dim(), &op.matrix().to_dense()).unwrap();
        let v_min = op.potential().iter().copied().fold(f64::INFINITY, f64::min);
        assert!(evals[0] >= v_min - 1e-9);
    }

    #[test]
    fn band_ordering_bandwidth() {
        let op = LatticeOperator::assemble(&TorusConfig::constant(1), 2, 16).unwrap();
        let perm = op.band_ordering();
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..256).collect::<Vec<_>>());
        assert!(op.matrix().bandwidth_under(&perm) <= 32);
    }

    fn translation_is_gauge(p: u32, n: usize, di: usize, dj: usize) {
        let op = LatticeOperator::assemble(&TorusConfig::constant(1), p, n).unwrap();
        let moved = op.translate(di, dj);
        let phi = relative_gauge(op.links(), moved.links());
        let g = op.gauge_transform(&phi).unwrap();
        let diff = g
            .matrix()
            .triplets()
            .map(|(i, j, v)| (v - moved.matrix().get(i, j)).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-10 * op.matrix().max_abs(), "shift ({di},{dj}): {diff}");
        let a = eigvalsh(op.dim(), &op.matrix().to_dense()).unwrap();
        let b = eigvalsh(moved.dim(), &moved.matrix().to_dense()).unwrap();
        assert!(max_rel_diff(&a, &b) < 1e-10);
    }

    #[test]
    fn translation_covariance_constant_field() {
        // one-site shifts preserve both holonomies when N divides p m
        translation_is_gauge(32, 32, 1, 0);
        translation_is_gauge(32, 32, 0, 1);
        translation_is_gauge(4, 32, 8, 8);
    }

    #[test]
    fn matrix_market_export() {
        let op = LatticeOperator::zero_field(1, 8).unwrap();
        let mut buf = Vec::new();
        op.write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines().filter(|l| !l.starts_with('%'));
        assert_eq!(lines.next().unwrap(), "64 64 320");
        assert_eq!(lines.count(), 320);
    }
}
