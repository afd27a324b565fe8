//! Exact levels of the round sphere and their distance to the band set.

use landau_spectra::analysis::{rate_fit, sphere_exact};
use landau_spectra::geometry::SphereConfig;

fn main() -> landau_spectra::Result<()> {
    let sphere = SphereConfig::kaehler();
    let mut offsets = Vec::new();
    for p in [4, 8, 16, 64] {
        for level in sphere_exact(&sphere, p, 2) {
            println!("p = {p:>3}  k = {}  nu = {:>12.8}  mult {:>3}  dist {:.6}", level.k, level.nu, level.multiplicity, level.dist);
            if level.k == 1 {
                offsets.push((p as f64, level.dist));
            }
        }
    }
    println!("k = 1 distance slope in p: {:.6}", rate_fit(&offsets)?.slope);
    Ok(())
}
