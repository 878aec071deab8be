//! Commuting partial difference operators from discrete Baker-Akhiezer
//! modules: theta-function and rational spectral varieties, closed-form and
//! collocation builders, and the checks that tie them together.

pub mod algebra;
pub mod builders;
pub mod error;
pub mod families;
pub mod linalg;
pub mod matrix;
pub mod scalar;
pub mod serde_complex;
pub mod theta;
pub mod verify;

pub use error::{Error, Result};
