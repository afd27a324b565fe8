//! Rescaled band-0 kernel near the grid centre against the Bergman kernel.

use landau_spectra::eigensolve::EigenOptions;
use landau_spectra::geometry::TorusConfig;
use landau_spectra::kernels::{ground_band_window, near_diagonal_run};
use landau_spectra::lattice::convergent_grid;

fn main() -> landau_spectra::Result<()> {
    let cfg = TorusConfig::constant(1);
    let window = ground_band_window(&cfg)?;
    let opts = EigenOptions {
        rel_tol: 1e-11,
        ..EigenOptions::default()
    };
    for p in [4, 16] {
        let r = near_diagonal_run(&cfg, p, convergent_grid(p, 2.0), window, &opts, 4.0, 0.5)?;
        println!(
            "p = {:>3}  N = {:>3}  p^-1 P(x0,x0) = {:.6} (model {:.6})  sup rel. error {:.3e}  phase-corrected {:.3e}  samples {}",
            r.p,
            r.n_grid,
            r.diagonal,
            r.model_diagonal,
            r.sup_rel_error,
            r.phase_sup_rel_error.unwrap_or(f64::NAN),
            r.samples
        );
    }
    Ok(())
}
