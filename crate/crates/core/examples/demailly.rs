//! Eigenvalue counts in the lowest band against the Liouville prediction.

use landau_spectra::analysis::{demailly_run, torus_sigma, DEFAULT_FIELD_RESOLUTION};
use landau_spectra::geometry::{Potential, Profile, TorusConfig};
use landau_spectra::lattice::default_grid;

fn main() -> landau_spectra::Result<()> {
    let cfg = TorusConfig::new(1, 0.1, Profile::CosX, Potential::Zero)?;
    let sigma = torus_sigma(&cfg, DEFAULT_FIELD_RESOLUTION, None)?;
    let window = sigma.component_window(0)?;
    println!("window ({:.4}, {:.4})", window.0, window.1);
    for p in [8, 16, 32] {
        let n = default_grid(p);
        let d = demailly_run(&cfg, &sigma, p, n, window, DEFAULT_FIELD_RESOLUTION)?;
        println!("p = {p:>3}  N = {n:>3}  count {:>4}  predicted {:>10.4}  rel. error {:.2e}", d.count, d.predicted, d.relative_error);
    }
    Ok(())
}
