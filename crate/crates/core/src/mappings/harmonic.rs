use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use super::analytic::{check_disk, Analytic, AnalyticMap};
use crate::error::{Error, Result};
use crate::jet::Jet3;
use crate::sampling::SamplingSpec;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `f = h + conj(g)` on the unit disk.
#[derive(Clone, Debug)]
pub struct HarmonicMap {
    pub h: AnalyticMap,
    pub g: AnalyticMap,
}

/// Jets of `h` and of `g'` at one point: everything the Schwarzian needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicJets {
    pub h: Jet3,
    /// `(g', g'', g''', -)`.
    pub dg: Jet3,
}

/// Outcome of [`HarmonicMap::is_sense_preserving`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SenseCheck {
    pub sense_preserving: bool,
    /// Grid point with the smallest Jacobian (or the first point that could
    /// not be evaluated).
    pub worst_point: Complex64,
    /// `J_f` at `worst_point`; `-inf` when evaluation failed there.
    pub min_jacobian: f64,
}

impl fmt::Display for HarmonicMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h = {}; g = {}", self.h, self.g)
    }
}

impl HarmonicMap {
    pub fn new(h: AnalyticMap, g: AnalyticMap) -> Self {
        Self { h, g }
    }

    /// An analytic map viewed as a harmonic one (`g ≡ 0`).
    pub fn analytic(h: AnalyticMap) -> Self {
        Self::new(h, AnalyticMap::zero())
    }

    /// `f = h + conj(g)` where only `g'` is given; `g` is its antiderivative
    /// vanishing at 0.
    pub fn from_co_analytic_derivative(h: AnalyticMap, dg: AnalyticMap) -> Self {
        Self::new(h, dg.antiderivative())
    }

    /// `f = h + conj(g)` with `g' = ω h'`.
    pub fn from_dilatation(h: AnalyticMap, omega: AnalyticMap) -> Self {
        let dg = omega * h.derivative();
        Self::from_co_analytic_derivative(h, dg)
    }

    pub fn describe(&self) -> String {
        self.to_string()
    }

    /// `f(z) = h(z) + conj(g(z))`.
    pub fn value(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.h.eval(z)?.d0 + self.g.eval(z)?.d0.conj())
    }

    pub fn jets(&self, z: Complex64) -> Result<HarmonicJets> {
        Ok(HarmonicJets {
            h: self.h.eval(z)?,
            dg: self.g.eval_derivative(z)?,
        })
    }

    /// `J_f = |h'|^2 - |g'|^2`.
    pub fn jacobian(&self, z: Complex64) -> Result<f64> {
        let j = self.jets(z)?;
        Ok(j.h.d1.norm_sqr() - j.dg.d0.norm_sqr())
    }

    /// Jet `(ω, ω', ω'', 0)` of the dilatation `ω = g'/h'`.
    pub fn dilatation_jet(&self, z: Complex64) -> Result<Jet3> {
        self.jets(z)?.dilatation().map_err(|e| e.at(z))
    }

    /// The dilatation as an analytic map (top jet slot zero).
    pub fn dilatation(&self) -> AnalyticMap {
        AnalyticMap::new(Dilatation(self.clone()))
    }

    /// `conj(f) = g + conj(h)`, sense-reversing when `f` is sense-preserving.
    pub fn conjugate(&self) -> Self {
        Self::new(self.g.clone(), self.h.clone())
    }

    /// Koebe transform
    /// `(f((z + ζ)/(1 + conj(ζ) z)) - f(ζ)) / ((1 - |ζ|^2) h'(ζ))`.
    pub fn koebe_transform(&self, zeta: Complex64) -> Result<Self> {
        check_disk(zeta)?;
        let sigma = AnalyticMap::disk_automorphism(zeta, 0.0)?;
        let hz = self.h.eval(zeta)?;
        let gz = self.g.eval(zeta)?.d0;
        let factor = (1.0 - zeta.norm_sqr()) * hz.d1;
        let m = factor.norm();
        if !(m > crate::jet::DEFAULT_DIV_EPSILON) {
            return Err(Error::DivisionNearZero {
                modulus: m,
                at: Some(zeta),
            });
        }
        let h = (self.h.compose_in_disk(&sigma) - AnalyticMap::constant(hz.d0)).scale(ONE / factor);
        let g = (self.g.compose_in_disk(&sigma) - AnalyticMap::constant(gz))
            .scale(ONE / factor.conj());
        Ok(Self::new(h, g))
    }

    /// Affine change `(f - conj(ε f)) / (1 - conj(ε) g'(0))`.
    ///
    /// Writing it again as `H + conj(G)` gives
    /// `H = (h - conj(ε) g) / N` and `G = (g - ε h) / conj(N)` with
    /// `N = 1 - conj(ε) g'(0)`.
    pub fn affine_transform(&self, eps: Complex64) -> Result<Self> {
        if !(eps.norm() < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "affine change needs |eps| < 1, got {eps}"
            )));
        }
        let dg0 = self.g.eval_derivative(ZERO)?.d0;
        let n = ONE - eps.conj() * dg0;
        if !(n.norm() > 1e-14) {
            return Err(Error::DegenerateAffine);
        }
        let h = (self.h.clone() - self.g.scale(eps.conj())).scale(ONE / n);
        let g = (self.g.clone() - self.h.scale(eps)).scale(ONE / n.conj());
        Ok(Self::new(h, g))
    }

    /// Unnormalized `f + conj(a f) = (h + conj(a) g) + conj(g + a h)`.
    pub fn affine_combination(&self, a: Complex64) -> Result<Self> {
        self.post_affine(ONE, a.conj())
    }

    /// `L ∘ f` for `L(w) = a w + b conj(w)` with `|b| < |a|`.
    pub fn post_affine(&self, a: Complex64, b: Complex64) -> Result<Self> {
        if !(b.norm() < a.norm()) {
            return Err(Error::SenseReversing);
        }
        let h = self.h.scale(a) + self.g.scale(b);
        let g = self.g.scale(a.conj()) + self.h.scale(b.conj());
        Ok(Self::new(h, g))
    }

    /// `f ∘ φ` for an analytic self-map φ of the disk.
    pub fn precompose(&self, phi: &AnalyticMap) -> Self {
        Self::new(self.h.compose_in_disk(phi), self.g.compose_in_disk(phi))
    }

    /// `J_f > 0` at every point of the coarse grid of `grid`.
    pub fn is_sense_preserving(&self, grid: &SamplingSpec) -> SenseCheck {
        let pts = grid.points();
        let values: Vec<f64> = pts
            .par_iter()
            .map(|&z| self.jacobian(z).unwrap_or(f64::NEG_INFINITY))
            .collect();
        let mut worst = 0;
        for (k, v) in values.iter().enumerate() {
            if *v < values[worst] {
                worst = k;
            }
        }
        let min_jacobian = values[worst];
        SenseCheck {
            sense_preserving: values.iter().all(|v| *v > 0.0),
            worst_point: pts[worst],
            min_jacobian,
        }
    }
}

impl HarmonicJets {
    /// `(ω, ω', ω'', 0)`; the quotient's third slot would need `h''''`.
    pub fn dilatation(&self) -> Result<Jet3> {
        let dh = self.h.derivative();
        let w = self.dg.checked_div(&dh)?;
        Ok(Jet3::new(w.d0, w.d1, w.d2, ZERO))
    }
}

struct Dilatation(HarmonicMap);

impl Analytic for Dilatation {
    fn jet(&self, z: Complex64) -> Result<Jet3> {
        let f = &self.0;
        let jets = HarmonicJets {
            h: f.h.jet_anywhere(z)?,
            dg: f.g.derivative_jet_anywhere(z)?,
        };
        jets.dilatation()
    }
    fn describe(&self) -> String {
        format!("dilatation({})", self.0)
    }
}
