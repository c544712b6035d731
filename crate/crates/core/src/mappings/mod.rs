//! Analytic and harmonic maps of the unit disk, and the operations that
//! build new maps from old ones.

mod analytic;
mod harmonic;

pub use analytic::{fmt_complex, Analytic, AnalyticMap, MobiusParams};
pub use harmonic::{HarmonicJets, HarmonicMap, SenseCheck};
