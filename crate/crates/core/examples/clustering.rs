//! Distances of lattice eigenvalues in `(0, 4 pi)` to the band set as `p` grows.

use std::f64::consts::PI;

use landau_spectra::analysis::{cluster_run, clustering_constant, torus_sigma, DEFAULT_FIELD_RESOLUTION};
use landau_spectra::eigensolve::EigenOptions;
use landau_spectra::geometry::TorusConfig;
use landau_spectra::lattice::convergent_grid;

fn main() -> landau_spectra::Result<()> {
    let cfg = TorusConfig::constant(1);
    let sigma = torus_sigma(&cfg, DEFAULT_FIELD_RESOLUTION, None)?;
    let mut reports = Vec::new();
    println!("{:>4} {:>5} {:>6} {:>12} {:>12}", "p", "N", "count", "max_dist", "witness");
    for p in [4, 8, 16] {
        let n = convergent_grid(p, 6.0);
        let run = cluster_run(&cfg, &sigma, p, n, (0.0, 4.0 * PI), &EigenOptions::default())?;
        let r = run.report;
        println!("{p:>4} {n:>5} {:>6} {:>12.4e} {:>12.4e}", r.per_eig_dist.len(), r.max_dist, r.witness());
        reports.push(r);
    }
    println!("clustering constant C = {:.4e}", clustering_constant(&reports));
    Ok(())
}
