//! First-passage times of symmetric subordinate Brownian motions on the half-line.

pub mod cbf;
pub mod dagger;
pub mod descriptor;
pub mod enclosure;
pub mod error;
pub mod oracle;
pub mod passage;
pub mod quadrature;
pub mod special;
pub mod spectral;

pub use cbf::{ProcessSpec, SpecError};
pub use enclosure::Enclosure;
pub use error::{FptError, Result};
