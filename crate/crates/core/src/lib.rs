//! Discrete brittle-damage energies on admissible triangulations, their
//! limit densities, and explicit recovery constructions for every scaling
//! regime.

pub mod densities;
pub mod error;
pub mod fem;
pub mod mesh;
pub mod oned;
pub mod recovery;

pub use error::{Error, Result};
