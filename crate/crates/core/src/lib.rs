//! Quadratic operator pencils for damped beams under tension.

pub mod config;
pub mod counts;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod harness;
pub mod inertia;
pub mod linalg;
pub mod operators;
pub mod pencil;
pub mod profile;
pub mod regions;
pub mod resolvent;
pub mod surrogate;

pub use error::{Error, Result};
pub use grid::Grid;
pub use operators::{assemble_operators, OperatorSet};
pub use pencil::{compute_spectrum, PencilSpectrum};
pub use profile::Profile;
