//! Number-phase Wigner kernels on a truncated extended Fock space.

pub mod cli;
pub mod error;
pub mod fock;
pub mod kernel;
pub mod periodics;
pub mod verify;
pub mod wigner;

pub use error::{Error, Result};
