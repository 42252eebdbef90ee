//! Exact diagonalization toolkit for hard-core bosons on a zig-zag ladder
//! with density-dependent Peierls hoppings.

pub mod basis;
pub mod config;
pub mod eigensolver;
pub mod dump;
pub mod error;
pub mod fermion;
pub mod gutzwiller;
pub mod hamiltonian;
pub mod meanfield;
pub mod micro;
pub mod observables;
pub mod optim;
pub mod params;
pub mod sparse;
pub mod sweep;

pub use error::{Error, Result};
pub use params::{Boundary, ModelParams};
