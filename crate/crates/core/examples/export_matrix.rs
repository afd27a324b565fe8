//! Writes a small lattice operator in MatrixMarket coordinate format.

use std::fs::File;
use std::io::BufWriter;

use landau_spectra::geometry::{Potential, Profile, TorusConfig};
use landau_spectra::lattice::LatticeOperator;

fn main() -> landau_spectra::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "H_p4_N16.mtx".into());
    let cfg = TorusConfig::new(1, 0.1, Profile::CosX, Potential::Zero)?;
    let op = LatticeOperator::assemble(&cfg, 4, 16)?;
    op.write_matrix_market(BufWriter::new(File::create(&path)?))?;
    println!("wrote {path}: dim {}, nnz {}", op.dim(), op.matrix().nnz());
    Ok(())
}
