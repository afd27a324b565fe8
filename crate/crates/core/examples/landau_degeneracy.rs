//! Lowest Landau level on the lattice torus: `p m` eigenvalues near `2 pi`.

use std::f64::consts::PI;

use landau_spectra::eigensolve::{count_in, eigs_window, EigenOptions};
use landau_spectra::geometry::TorusConfig;
use landau_spectra::lattice::LatticeOperator;

fn main() -> landau_spectra::Result<()> {
    let (p, n) = (8, 64);
    let op = LatticeOperator::assemble(&TorusConfig::constant(1), p, n)?;
    let ew = eigs_window(&op, -1.0, 5.0 * PI, &EigenOptions::default())?;
    println!("p = {p}, N = {n}: {} eigenvalues below 5 pi ({:?})", ew.len(), ew.path);
    for (v, r) in ew.values.iter().zip(&ew.residuals) {
        println!("  {v:.8}   rel. to 2 pi: {:+.3e}   residual {r:.1e}", v / (2.0 * PI) - 1.0);
    }
    println!("inertia count in (pi, 4 pi): {}", count_in(&op, PI, 4.0 * PI)?);
    Ok(())
}
