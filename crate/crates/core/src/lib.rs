//! Skorokhod M1 distances, oscillation functionals and Lévy-driven
//! convolution integrals on finite-dimensional càdlàg paths.

pub mod cli;
pub mod convolution;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod levy;
pub mod linalg;
pub mod m1;
pub mod ou;
pub mod path;
pub mod rng;

pub use error::{Error, Result};
pub use path::{CadlagPath, CompletedGraph, Segment};
