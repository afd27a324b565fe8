//! Band set and gaps for a constant, a modulated and a renormalized torus.

use landau_spectra::analysis::{torus_sigma, DEFAULT_FIELD_RESOLUTION};
use landau_spectra::geometry::{Potential, Profile, TorusConfig};

fn main() -> landau_spectra::Result<()> {
    let configs = [
        ("constant m=1", TorusConfig::constant(1)),
        ("cos x, eps=0.1", TorusConfig::new(1, 0.1, Profile::CosX, Potential::Zero)?),
        ("renormalized, eps=0.1", TorusConfig::new(1, 0.1, Profile::CosX, Potential::Renormalized)?),
    ];
    for (label, cfg) in configs {
        let sigma = torus_sigma(&cfg, DEFAULT_FIELD_RESOLUTION, None)?;
        println!("{label}  (cap {:.4})", sigma.energy_cap());
        for (lo, hi) in sigma.components() {
            println!("  band [{lo:.6}, {hi:.6}]");
        }
        for (lo, hi) in sigma.gaps() {
            println!("  gap  ({lo:.6}, {hi:.6})");
        }
    }
    Ok(())
}
