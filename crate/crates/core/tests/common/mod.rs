#![allow(dead_code)]

use std::io::Write;

use landau_spectra::linalg::{CsrMatrix, C64};

/// Writes straight to the process stderr so the line survives output capture.
pub fn report(criterion: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr();
    let _ = writeln!(err, "[{verdict}] {criterion}: {detail}");
}

/// Composite trapezoid over the square `[-l, l]^2` with step `h`.
pub fn box_integral(l: f64, h: f64, f: impl Fn([f64; 2]) -> C64) -> C64 {
    let m = (2.0 * l / h).round() as i64;
    let mut sum = C64::new(0.0, 0.0);
    for i in 0..=m {
        for j in 0..=m {
            let w = if i == 0 || i == m { 0.5 } else { 1.0 } * if j == 0 || j == m { 0.5 } else { 1.0 };
            sum += w * f([-l + i as f64 * h, -l + j as f64 * h]);
        }
    }
    sum * h * h
}

/// Eighth-order central second difference weights, offsets 0..=4.
const D2: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];

/// Model operator `-(d - i alpha)^2` with `alpha = (a/2)(x dy - y dx)` on the
/// box `[-l, l]^2` with Dirichlet truncation. Along a line of fixed `y` the
/// x-component of `alpha` is the constant `-a y / 2`, so
/// `nabla_x^2 = e^{i c x} d_x^2 e^{-i c x}`; likewise in `y`. Returns the matrix
/// and node coordinates (index `i * m + j`, `i` along x).
pub fn model_box_operator(a: f64, l: f64, h: f64) -> (CsrMatrix, Vec<[f64; 2]>) {
    let m = (2.0 * l / h).round() as usize + 1;
    let coord = |i: usize| -l + i as f64 * h;
    let mut trip = Vec::new();
    let mut nodes = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            nodes.push([coord(i), coord(j)]);
            let s = i * m + j;
            let (x, y) = (coord(i), coord(j));
            let cx = -0.5 * a * y;
            let cy = 0.5 * a * x;
            trip.push((s, s, C64::new(-2.0 * D2[0] / (h * h), 0.0)));
            for (k, &c) in D2.iter().enumerate().skip(1) {
                for sgn in [-1i64, 1] {
                    let off = sgn * k as i64;
                    let ii = i as i64 + off;
                    if ii >= 0 && (ii as usize) < m {
                        // e^{i cx x} * e^{-i cx x'} with x' - x = off h
                        let phase = C64::from_polar(1.0, -cx * off as f64 * h);
                        trip.push((s, ii as usize * m + j, -c / (h * h) * phase));
                    }
                    let jj = j as i64 + off;
                    if jj >= 0 && (jj as usize) < m {
                        let phase = C64::from_polar(1.0, -cy * off as f64 * h);
                        trip.push((s, i * m + jj as usize, -c / (h * h) * phase));
                    }
                }
            }
        }
    }
    (CsrMatrix::from_triplets(m * m, &trip), nodes)
}
