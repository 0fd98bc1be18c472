//! Curvature invariants of (α, β)-Finsler metrics `F = α φ(β/α)`.
//!
//! Spray coefficients, S-curvature and E-curvature are each computed twice: by
//! closed forms in the scalars of [`scalar::ScalarPack`], and by
//! finite-difference oracles that work from the definitions. The
//! [`classifier`] module turns sampled curvature into isotropy verdicts.

pub mod classifier;
pub mod cli;
pub mod curvature;
pub mod error;
pub mod fd;
pub mod fixture;
pub mod geometry;
pub mod jet;
pub mod quadrature;
pub mod scalar;
pub mod tolerances;
pub mod verify;

pub use error::{Error, Result};
pub use fixture::Fixture;
pub use jet::Jet;
pub use scalar::{PhiFamily, PhiSpec, ScalarPack};
