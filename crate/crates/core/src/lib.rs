//! Eigenpolynomials of exactly solvable differential operator pencils,
//! the algebraic curve governing their root asymptotics, and the
//! measures and support curves of the limiting root distributions.

pub mod error;
pub mod export;
pub mod measures;
pub mod pencil;
pub mod battery;
pub mod curve;
pub mod poly;
pub mod recurrence;
pub mod scalar;
pub mod series;
pub mod support;

pub use error::{Error, Result};
pub use num_complex::Complex64;
