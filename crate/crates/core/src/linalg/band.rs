//! Banded `L D L*` factorization of shifted Hermitian matrices.
//!
//! No pivoting is performed: the factorization exists whenever every leading
//! principal minor of the permuted `A - shift I` is nonsingular, and the signs of
//! `D` then give the inertia (Sylvester's law). A pivot below the caller's
//! threshold is reported as the row where it occurred so the caller can move the
//! shift and retry.

use super::sparse::{invert_permutation, CsrMatrix};
use super::C64;

#[derive(Debug, Clone)]
pub struct BandLdl {
    n: usize,
    bw: usize,
    shift: f64,
    perm: Vec<usize>,
    // row i holds L[i][m] at index i*bw + (m + bw - i) for m in [i - bw, i),
    // real and imaginary parts stored separately
    lower_re: Vec<f64>,
    lower_im: Vec<f64>,
    diag: Vec<f64>,
}

/// Row index (in the permuted ordering) of a pivot with `|d| < pivot_tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PivotBreakdown {
    pub row: usize,
    pub pivot: f64,
}

const LANES: usize = 8;

/// `sum_m (ar + i ai)_m * conj((br + i bi)_m)` (or without the conjugate).
#[inline]
fn cdot(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64], conj: bool) -> (f64, f64) {
    let sign = if conj { -1.0 } else { 1.0 };
    let mut re = [0.0; LANES];
    let mut im = [0.0; LANES];
    let split = ar.len() - ar.len() % LANES;
    for (((xr, xi), yr), yi) in ar[..split]
        .chunks_exact(LANES)
        .zip(ai[..split].chunks_exact(LANES))
        .zip(br[..split].chunks_exact(LANES))
        .zip(bi[..split].chunks_exact(LANES))
    {
        for l in 0..LANES {
            let (yil, yrl) = (sign * yi[l], yr[l]);
            re[l] += xr[l] * yrl - xi[l] * yil;
            im[l] += xr[l] * yil + xi[l] * yrl;
        }
    }
    let mut sr: f64 = re.iter().sum();
    let mut si: f64 = im.iter().sum();
    for m in split..ar.len() {
        let yil = sign * bi[m];
        sr += ar[m] * br[m] - ai[m] * yil;
        si += ar[m] * yil + ai[m] * br[m];
    }
    (sr, si)
}

impl BandLdl {
    /// Factors `P (A - shift I) P^T = L D L*` where `perm[new] = old`.
    pub fn factor(
        a: &CsrMatrix,
        shift: f64,
        perm: &[usize],
        pivot_tol: f64,
    ) -> Result<Self, PivotBreakdown> {
        let n = a.dim();
        assert_eq!(perm.len(), n);
        let inv = invert_permutation(perm);
        let bw = a.bandwidth_under(perm).max(1);

        let mut lower_re = vec![0.0; n * bw];
        let mut lower_im = vec![0.0; n * bw];
        let mut diag = vec![0.0; n];
        for (new_i, &old_i) in perm.iter().enumerate() {
            for (old_j, v) in a.row(old_i) {
                let new_j = inv[old_j];
                if new_j < new_i {
                    let at = new_i * bw + (new_j + bw - new_i);
                    lower_re[at] = v.re;
                    lower_im[at] = v.im;
                } else if new_j == new_i {
                    diag[new_i] = v.re - shift;
                }
            }
        }

        // w[m] = L[i][m] * d[m] for the row being built
        let mut w_re = vec![0.0; bw];
        let mut w_im = vec![0.0; bw];
        for i in 0..n {
            let first = i.saturating_sub(bw);
            let row_base = i * bw + bw - i;
            for k in first..i {
                let k_base = k * bw + bw - k;
                let (mut sr, mut si) = (lower_re[row_base + k], lower_im[row_base + k]);
                if k > first {
                    let wr = first + bw - i..k + bw - i;
                    let lk = k_base + first..k_base + k;
                    let (ar, ai) = cdot(
                        &w_re[wr.clone()],
                        &w_im[wr],
                        &lower_re[lk.clone()],
                        &lower_im[lk],
                        true,
                    );
                    sr -= ar;
                    si -= ai;
                }
                let dk = diag[k];
                lower_re[row_base + k] = sr / dk;
                lower_im[row_base + k] = si / dk;
                w_re[k + bw - i] = sr;
                w_im[k + bw - i] = si;
            }
            let mut d = diag[i];
            for m in first..i {
                let (lr, li) = (lower_re[row_base + m], lower_im[row_base + m]);
                d -= (lr * lr + li * li) * diag[m];
            }
            if !(d.abs() >= pivot_tol) {
                return Err(PivotBreakdown { row: i, pivot: d });
            }
            diag[i] = d;
        }

        Ok(Self {
            n,
            bw,
            shift,
            perm: perm.to_vec(),
            lower_re,
            lower_im,
            diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn pivots(&self) -> &[f64] {
        &self.diag
    }

    /// Number of eigenvalues of `A` strictly below the shift.
    pub fn negative_count(&self) -> usize {
        self.diag.iter().filter(|&&d| d < 0.0).count()
    }

    pub fn min_abs_pivot(&self) -> f64 {
        self.diag.iter().map(|d| d.abs()).fold(f64::INFINITY, f64::min)
    }

    /// Solves `(A - shift I) x = b` in place.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.n;
        let bw = self.bw;
        let mut yr: Vec<f64> = self.perm.iter().map(|&old| b[old].re).collect();
        let mut yi: Vec<f64> = self.perm.iter().map(|&old| b[old].im).collect();
        for i in 0..n {
            let first = i.saturating_sub(bw);
            let base = i * bw + bw - i;
            let l = base + first..base + i;
            let (ar, ai) = cdot(
                &self.lower_re[l.clone()],
                &self.lower_im[l],
                &yr[first..i],
                &yi[first..i],
                false,
            );
            yr[i] -= ar;
            yi[i] -= ai;
        }
        for ((r, im), &d) in yr.iter_mut().zip(yi.iter_mut()).zip(&self.diag) {
            *r /= d;
            *im /= d;
        }
        for i in (0..n).rev() {
            let (xr, xi) = (yr[i], yi[i]);
            let first = i.saturating_sub(bw);
            let base = i * bw + bw - i;
            let lr = &self.lower_re[base + first..base + i];
            let li = &self.lower_im[base + first..base + i];
            // y[m] -= conj(L[i][m]) * x
            for (((ym_r, ym_i), &a), &c) in yr[first..i]
                .iter_mut()
                .zip(yi[first..i].iter_mut())
                .zip(lr)
                .zip(li)
            {
                *ym_r -= a * xr + c * xi;
                *ym_i -= a * xi - c * xr;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = C64::new(yr[new], yi[new]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sparse::reverse_cuthill_mckee;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_banded_hermitian(n: usize, bw: usize, seed: u64) -> CsrMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, C64::new(rng.gen_range(-2.0..2.0), 0.0)));
            for j in (i + 1)..(i + 1 + bw).min(n) {
                let v = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                t.push((i, j, v));
                t.push((j, i, v.conj()));
            }
        }
        CsrMatrix::from_triplets(n, &t)
    }

    #[test]
    fn solve_reproduces_right_hand_side() {
        let a = random_banded_hermitian(60, 4, 3);
        let perm: Vec<usize> = (0..60).collect();
        let f = BandLdl::factor(&a, 0.37, &perm, 1e-14).unwrap();
        let x: Vec<C64> = (0..60).map(|i| C64::new(i as f64, 1.0)).collect();
        let mut b = a.matvec(&x);
        for (bi, xi) in b.iter_mut().zip(&x) {
            *bi -= xi * 0.37;
        }
        f.solve_in_place(&mut b);
        let err = b.iter().zip(&x).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "solve error {err}");
    }

    #[test]
    fn inertia_matches_dense_eigenvalues() {
        let n = 50;
        let a = random_banded_hermitian(n, 3, 11);
        let evals = crate::linalg::dense::eigvalsh(n, &a.to_dense()).unwrap();
        let perm = reverse_cuthill_mckee(&a);
        for shift in [-3.0, -0.5, 0.1, 1.7, 4.0] {
            let f = BandLdl::factor(&a, shift, &perm, 1e-14).unwrap();
            let expected = evals.iter().filter(|&&e| e < shift).count();
            assert_eq!(f.negative_count(), expected, "shift {shift}");
        }
    }

    #[test]
    fn exact_singular_shift_is_reported() {
        let a = CsrMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let perm = vec![0, 1, 2];
        let err = BandLdl::factor(&a, 2.0, &perm, 1e-12).unwrap_err();
        assert_eq!(err.row, 1);
    }
}
