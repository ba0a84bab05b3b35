//! Numerical lab for the area-weighted Motzkin spin chain: walk strings,
//! normalization tables, frustration-free Hamiltonians, ground-space
//! projectors and the finite-size gap criterion.

pub mod criterion;
pub mod eigen;
pub mod error;
pub mod exec;
pub mod groundspace;
pub mod hamiltonian;
pub mod normtable;
pub mod oracle;
pub mod poly;
pub mod walks;

pub use error::{Error, Result};
pub use exec::Exec;
pub use walks::{Imbalance, WalkString};
