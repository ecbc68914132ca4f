//! Geometric phases of a quantum particle confined to a closed curve whose
//! shape is cyclically deformed.

pub mod error;
pub mod geometry;
pub mod grid;
pub mod hamiltonian;
pub mod linalg;

pub use error::{Error, Result};
pub mod holonomy;
pub mod normal_modes;
pub mod perturbation;
pub mod evolution;
