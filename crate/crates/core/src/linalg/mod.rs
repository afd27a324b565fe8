//! Numerical kernels shared by the lattice and eigensolver modules.

pub mod band;
pub mod dense;
pub mod sparse;

pub use num_complex::Complex64 as C64;

pub use band::{BandLdl, PivotBreakdown};
pub use sparse::{reverse_cuthill_mckee, CsrMatrix};

/// `sum conj(a_i) b_i`
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm2(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
