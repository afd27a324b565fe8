//! Exponential envelope of the band-0 projector kernel, written as gnuplot columns.

use landau_spectra::eigensolve::EigenOptions;
use landau_spectra::geometry::TorusConfig;
use landau_spectra::kernels::{decay_run, ground_band_window, write_decay_gnuplot};
use landau_spectra::lattice::default_grid;

fn main() -> landau_spectra::Result<()> {
    let cfg = TorusConfig::constant(1);
    let window = ground_band_window(&cfg)?;
    let opts = EigenOptions {
        rel_tol: 1e-11,
        ..EigenOptions::default()
    };
    let p = 16;
    let (kg, fit) = decay_run(&cfg, p, default_grid(p), window, &opts)?;
    eprintln!(
        "p = {p}, N = {}, {} eigenpairs: c_hat = {:.4}, amplitude = {:.4}, r^2 = {:.4}",
        kg.n_grid, kg.count, fit.c_hat, fit.amplitude, fit.r_squared
    );
    write_decay_gnuplot(&fit, p, std::io::stdout().lock())
}
