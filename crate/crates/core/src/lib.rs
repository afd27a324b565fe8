//! Spectral toolkit for magnetic Bochner-Schrodinger operators
//! `H_p = p^{-1} Delta + V` on line-bundle powers.
//!
//! The model side ([`model_spectrum`]) computes Landau levels, the band set
//! and projector kernels of the frozen-field model operators. The lattice side
//! ([`lattice`], [`eigensolve`]) discretizes `H_p` on the magnetic flat torus
//! with U(1) link phases, and [`analysis`] and [`kernels`] compare the two.

pub mod error;
pub mod analysis;
pub mod cli;
pub mod eigensolve;
pub mod geometry;
pub mod kernels;
pub mod lattice;
pub mod linalg;
pub mod model_spectrum;

pub use error::{Error, Result};
