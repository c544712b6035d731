//! Schwarzian derivatives of sense-preserving harmonic mappings of the unit
//! disk, hyperbolic sup-norm estimation, and the univalence and
//! quasiconformal-extension criteria built on them.
//!
//! Derivatives are propagated exactly with order-3 jets ([`jet::Jet3`]);
//! maps are built compositionally ([`mappings`]); the
//! [`norm`] module turns pointwise functionals into sup-norm reports; and
//! [`criteria`] turns reports into three-valued certificates.

pub mod criteria;
pub mod error;
pub mod jet;
pub mod mappings;
pub mod norm;
pub mod quadrature;
pub mod sampling;
pub mod schwarzian;
pub mod verify;

pub use error::{Error, Result};
pub use jet::Jet3;
pub use mappings::{AnalyticMap, HarmonicMap, MobiusParams};
pub use norm::{NormReport, SamplingSpec};
