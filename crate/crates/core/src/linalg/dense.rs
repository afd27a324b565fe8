//! Dense Hermitian eigendecomposition, backed by `faer` (sequential mode so
//! results are bit-reproducible).

use faer::{Mat, MatRef, Side};

use super::C64;
use crate::error::{Error, Result};

fn sequential() {
    faer::set_global_parallelism(faer::Par::Seq);
}

pub fn mat_from_row_major(n: usize, data: &[C64]) -> Mat<C64> {
    assert_eq!(data.len(), n * n);
    Mat::from_fn(n, n, |i, j| data[i * n + j])
}

/// Eigenvalues (ascending) and column eigenvectors of a Hermitian matrix.
pub fn eigh(a: MatRef<'_, C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    sequential();
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Dense(format!("{e:?}")))?;
    let values = evd.S().column_vector().iter().map(|v| v.re).collect();
    Ok((values, evd.U().to_owned()))
}

/// Eigenvalues (ascending) of a dense row-major Hermitian matrix.
pub fn eigvalsh(n: usize, data: &[C64]) -> Result<Vec<f64>> {
    sequential();
    mat_from_row_major(n, data)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Dense(format!("{e:?}")))
}

/// Eigenvalues (ascending) of a real symmetric matrix.
pub fn eigvalsh_real(a: MatRef<'_, f64>) -> Result<Vec<f64>> {
    sequential();
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Dense(format!("{e:?}")))
}

/// Singular values (descending) of a real matrix.
pub fn singular_values_real(a: MatRef<'_, f64>) -> Result<Vec<f64>> {
    sequential();
    a.singular_values()
        .map_err(|e| Error::Dense(format!("{e:?}")))
}
