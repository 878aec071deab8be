//! Riemann theta functions with characteristics, sections of the flat
//! bundles built from them, and the rational sigma degeneration.

pub mod schur;
pub mod section;
pub mod series;
pub mod siegel;

pub use schur::sigma_schur;
pub use section::basis_section;
pub use series::{theta_eval, theta_fixed_radius, truncation_radius, Theta, ThetaValue};
pub use siegel::{validate_siegel, SiegelPoint, ThetaCharacteristic, TruncationPolicy};
