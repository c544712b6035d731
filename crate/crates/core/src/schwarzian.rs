//! Pointwise Schwarzian derivatives.
//!
//! For a locally univalent analytic `φ`:
//!
//! ```text
//! S(φ) = φ'''/φ' - 3/2 (φ''/φ')^2
//! ```
//!
//! which is the expanded form of `(φ''/φ')' - 1/2 (φ''/φ')^2`. For a
//! sense-preserving harmonic `f = h + conj(g)` with dilatation `ω = g'/h'`:
//!
//! ```text
//! S_f = S(h) + conj(ω)/(1 - |ω|^2) (h''/h' ω' - ω'')
//!            - 3/2 (conj(ω) ω' / (1 - |ω|^2))^2
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet3;
use crate::mappings::{AnalyticMap, HarmonicJets, HarmonicMap};

/// Smallest admissible `1 - |ω|^2`.
pub const DEFAULT_BOUNDARY_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwarzianSample {
    pub z: Complex64,
    pub value: Complex64,
    /// `|value| (1 - |z|^2)^2`.
    pub weighted: f64,
}

fn nonzero_derivative(j: &Jet3) -> Result<Complex64> {
    let m = j.d1.norm();
    if !(m > crate::jet::DEFAULT_DIV_EPSILON) {
        return Err(Error::DivisionNearZero {
            modulus: m,
            at: None,
        });
    }
    Ok(j.d1)
}

/// `φ''/φ'` from a jet.
pub fn pre_schwarzian_of_jet(j: &Jet3) -> Result<Complex64> {
    Ok(j.d2 / nonzero_derivative(j)?)
}

/// `φ'''/φ' - 3/2 (φ''/φ')^2` from a jet.
pub fn schwarzian_of_jet(j: &Jet3) -> Result<Complex64> {
    let d1 = nonzero_derivative(j)?;
    let p = j.d2 / d1;
    Ok(j.d3 / d1 - 1.5 * p * p)
}

/// Harmonic Schwarzian from the jets of `h` and `g'`.
pub fn harmonic_schwarzian_of_jets(jets: &HarmonicJets, boundary_eps: f64) -> Result<Complex64> {
    let sh = schwarzian_of_jet(&jets.h)?;
    let pre = pre_schwarzian_of_jet(&jets.h)?;
    let w = jets.dilatation()?;
    let gap = 1.0 - w.d0.norm_sqr();
    if !(gap > boundary_eps) {
        return Err(Error::DilatationOnBoundary { gap, at: None });
    }
    let wc = w.d0.conj() / gap;
    let t = wc * w.d1;
    Ok(sh + wc * (pre * w.d1 - w.d2) - 1.5 * t * t)
}

pub fn schwarzian_analytic(phi: &AnalyticMap, z: Complex64) -> Result<Complex64> {
    schwarzian_of_jet(&phi.eval(z)?).map_err(|e| e.at(z))
}

pub fn pre_schwarzian(phi: &AnalyticMap, z: Complex64) -> Result<Complex64> {
    pre_schwarzian_of_jet(&phi.eval(z)?).map_err(|e| e.at(z))
}

pub fn schwarzian_harmonic(f: &HarmonicMap, z: Complex64) -> Result<Complex64> {
    schwarzian_harmonic_eps(f, z, DEFAULT_BOUNDARY_EPSILON)
}

pub fn schwarzian_harmonic_eps(f: &HarmonicMap, z: Complex64, boundary_eps: f64) -> Result<Complex64> {
    harmonic_schwarzian_of_jets(&f.jets(z)?, boundary_eps).map_err(|e| e.at(z))
}

/// `|s| (1 - |z|^2)^2`.
pub fn weighted_magnitude(s: Complex64, z: Complex64) -> f64 {
    let w = 1.0 - z.norm_sqr();
    s.norm() * w * w
}

/// Harmonic Schwarzian together with its hyperbolic weighting.
pub fn sample(f: &HarmonicMap, z: Complex64) -> Result<SchwarzianSample> {
    let value = schwarzian_harmonic(f, z)?;
    Ok(SchwarzianSample {
        z,
        value,
        weighted: weighted_magnitude(value, z),
    })
}
