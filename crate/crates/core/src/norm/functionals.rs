use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mappings::{AnalyticMap, HarmonicMap};
use crate::schwarzian::{self, DEFAULT_BOUNDARY_EPSILON};

/// A non-negative quantity evaluated pointwise on the disk whose supremum is
/// the norm of interest.
pub trait NormFunctional: Send + Sync {
    fn name(&self) -> &'static str;

    fn sample(&self, z: Complex64) -> Result<f64>;

    /// Value that a supremum reaching it (within tolerance) flags as
    /// degenerate, e.g. `1` for the sup-modulus of a dilatation.
    fn ceiling(&self) -> Option<f64> {
        None
    }
}

/// `|S_f(z)| (1 - |z|^2)^2`.
pub struct SchwarzianNorm {
    pub f: HarmonicMap,
    pub boundary_eps: f64,
}

impl SchwarzianNorm {
    pub fn new(f: HarmonicMap) -> Self {
        Self {
            f,
            boundary_eps: DEFAULT_BOUNDARY_EPSILON,
        }
    }
}

impl NormFunctional for SchwarzianNorm {
    fn name(&self) -> &'static str {
        "schwarzian"
    }
    fn sample(&self, z: Complex64) -> Result<f64> {
        let s = schwarzian::schwarzian_harmonic_eps(&self.f, z, self.boundary_eps)?;
        Ok(schwarzian::weighted_magnitude(s, z))
    }
}

fn dilatation_gap(w: Complex64, z: Complex64) -> Result<f64> {
    let gap = 1.0 - w.norm_sqr();
    if !(gap > DEFAULT_BOUNDARY_EPSILON) {
        return Err(Error::DilatationOnBoundary { gap, at: Some(z) });
    }
    Ok(gap)
}

/// `|ω'(z)| (1 - |z|^2) / (1 - |ω(z)|^2)`.
pub struct OmegaStar {
    pub omega: AnalyticMap,
}

impl NormFunctional for OmegaStar {
    fn name(&self) -> &'static str {
        "omega_star"
    }
    fn sample(&self, z: Complex64) -> Result<f64> {
        let j = self.omega.eval(z)?;
        let gap = dilatation_gap(j.d0, z)?;
        Ok(j.d1.norm() * (1.0 - z.norm_sqr()) / gap)
    }
}

/// `|ω''(z)| (1 - |z|^2)^2 / (1 - |ω(z)|^2)`.
pub struct OmegaSecond {
    pub omega: AnalyticMap,
}

impl NormFunctional for OmegaSecond {
    fn name(&self) -> &'static str {
        "omega_second"
    }
    fn sample(&self, z: Complex64) -> Result<f64> {
        let j = self.omega.eval(z)?;
        let gap = dilatation_gap(j.d0, z)?;
        let w = 1.0 - z.norm_sqr();
        Ok(j.d2.norm() * w * w / gap)
    }
}

/// `|ω(z)|`.
pub struct SupModulus {
    pub omega: AnalyticMap,
}

impl NormFunctional for SupModulus {
    fn name(&self) -> &'static str {
        "omega_sup"
    }
    fn sample(&self, z: Complex64) -> Result<f64> {
        Ok(self.omega.eval(z)?.d0.norm())
    }
    fn ceiling(&self) -> Option<f64> {
        Some(1.0)
    }
}

pub type FunctionalFactory = fn(&HarmonicMap) -> Box<dyn NormFunctional>;

struct Entry {
    description: &'static str,
    factory: FunctionalFactory,
}

/// Functionals of a harmonic map, looked up by name.
pub struct FunctionalRegistry {
    entries: BTreeMap<&'static str, Entry>,
}

impl FunctionalRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("schwarzian", "sup |S_f| (1-|z|^2)^2", |f| {
            Box::new(SchwarzianNorm::new(f.clone()))
        });
        r.register(
            "omega_star",
            "sup |w'| (1-|z|^2) / (1-|w|^2) of the dilatation",
            |f| Box::new(OmegaStar { omega: f.dilatation() }),
        );
        r.register(
            "omega_second",
            "sup |w''| (1-|z|^2)^2 / (1-|w|^2) of the dilatation",
            |f| Box::new(OmegaSecond { omega: f.dilatation() }),
        );
        r.register("omega_sup", "sup |w| of the dilatation", |f| {
            Box::new(SupModulus { omega: f.dilatation() })
        });
        r
    }

    pub fn register(&mut self, name: &'static str, description: &'static str, factory: FunctionalFactory) {
        self.entries.insert(name, Entry { description, factory });
    }

    pub fn build(&self, name: &str, f: &HarmonicMap) -> Option<Box<dyn NormFunctional>> {
        self.entries.get(name).map(|e| (e.factory)(f))
    }

    pub fn description(&self, name: &str) -> Option<&'static str> {
        self.entries.get(name).map(|e| e.description)
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

impl Default for FunctionalRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lists_builtins() {
        let r = FunctionalRegistry::builtin();
        let names: Vec<_> = r.names().collect();
        assert_eq!(names, ["omega_second", "omega_star", "omega_sup", "schwarzian"]);
        let f = HarmonicMap::analytic(AnalyticMap::koebe());
        for n in names {
            assert_eq!(r.build(n, &f).unwrap().name(), n);
            assert!(r.description(n).is_some());
        }
        assert!(r.build("nope", &f).is_none());
    }

    #[test]
    fn pointwise_values() {
        let z = Complex64::new(0.5, 0.0);
        let id = OmegaStar { omega: AnalyticMap::identity() };
        assert!((id.sample(z).unwrap() - 1.0).abs() < 1e-15);
        let sec = OmegaSecond { omega: AnalyticMap::identity() };
        assert_eq!(sec.sample(z).unwrap(), 0.0);
        let sup = SupModulus { omega: AnalyticMap::identity() };
        assert_eq!(sup.sample(z).unwrap(), 0.5);
        let bad = OmegaStar { omega: AnalyticMap::constant(Complex64::new(1.0, 0.0)) };
        assert!(matches!(bad.sample(z), Err(Error::DilatationOnBoundary { .. })));
    }
}
