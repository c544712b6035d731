//! Seeded property suites for the invariance laws of the Schwarzian.
//!
//! A suite draws random cases from its own per-case generator, so any case
//! can be replayed from the seed recorded in a [`CaseFailure`]. Cases run in
//! parallel; the report does not depend on scheduling.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet3;
use crate::mappings::{AnalyticMap, HarmonicMap, MobiusParams};
use crate::norm::{self, SamplingSpec};
use crate::schwarzian;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Result of a single random case.
#[derive(Debug, Clone, PartialEq)]
pub enum CaseOutcome {
    /// The property was evaluated; `residual` is compared to the suite
    /// tolerance.
    Checked { residual: f64, detail: String },
    /// The generated input was refused by a guard that is supposed to
    /// refuse it.
    Rejected { reason: String },
    /// Evaluation failed or a guard misbehaved.
    Error { message: String },
}

pub trait PropertySuite: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn tolerance(&self) -> f64;
    fn default_cases(&self) -> usize;
    fn run_case(&self, rng: &mut ChaCha8Rng) -> CaseOutcome;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseFailure {
    pub case: usize,
    /// Seed of the per-case generator; see [`case_seed`].
    pub seed: u64,
    pub residual: Option<f64>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub n_cases: usize,
    pub tolerance: f64,
    pub checked: usize,
    pub rejected: usize,
    pub max_residual: f64,
    pub failures: Vec<CaseFailure>,
    pub passed: bool,
}

/// SplitMix64 step mixing the suite seed with the case index.
pub fn case_seed(seed: u64, case: usize) -> u64 {
    let mut z = seed ^ (case as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run_suite(suite: &dyn PropertySuite, seed: u64, n_cases: usize) -> SuiteReport {
    let outcomes: Vec<(u64, CaseOutcome)> = (0..n_cases)
        .into_par_iter()
        .map(|k| {
            let s = case_seed(seed, k);
            (s, suite.run_case(&mut ChaCha8Rng::seed_from_u64(s)))
        })
        .collect();
    let tol = suite.tolerance();
    let mut report = SuiteReport {
        suite: suite.name().to_string(),
        seed,
        n_cases,
        tolerance: tol,
        checked: 0,
        rejected: 0,
        max_residual: 0.0,
        failures: Vec::new(),
        passed: true,
    };
    for (case, (s, outcome)) in outcomes.into_iter().enumerate() {
        match outcome {
            CaseOutcome::Checked { residual, detail } => {
                report.checked += 1;
                report.max_residual = report.max_residual.max(residual);
                if !(residual <= tol) {
                    report.failures.push(CaseFailure {
                        case,
                        seed: s,
                        residual: Some(residual),
                        message: detail,
                    });
                }
            }
            CaseOutcome::Rejected { .. } => report.rejected += 1,
            CaseOutcome::Error { message } => report.failures.push(CaseFailure {
                case,
                seed: s,
                residual: None,
                message,
            }),
        }
    }
    report.passed = report.failures.is_empty();
    report
}

/// Property suites looked up by name.
pub struct SuiteRegistry {
    suites: BTreeMap<&'static str, Box<dyn PropertySuite>>,
}

impl SuiteRegistry {
    pub fn empty() -> Self {
        Self { suites: BTreeMap::new() }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(NullSet));
        r.register(Box::new(ChainRule));
        r.register(Box::new(AffineInvariance));
        r.register(Box::new(AnalyticReduction));
        r.register(Box::new(NormAutomorphism::default()));
        r.register(Box::new(SchwarzPick::default()));
        r.register(Box::new(JetsVsFd));
        r
    }

    pub fn register(&mut self, suite: Box<dyn PropertySuite>) {
        self.suites.insert(suite.name(), suite);
    }

    pub fn get(&self, name: &str) -> Option<&dyn PropertySuite> {
        self.suites.get(name).map(|s| s.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.suites.keys().copied()
    }

    pub fn run(&self, name: &str, seed: u64, n_cases: Option<usize>) -> Result<SuiteReport> {
        let suite = self
            .get(name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {name:?}")))?;
        Ok(run_suite(suite, seed, n_cases.unwrap_or_else(|| suite.default_cases())))
    }
}

impl Default for SuiteRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

// Random corpus.

/// Uniform point in the disk of radius `r`.
pub fn random_point(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    Complex64::from_polar(r * rng.random::<f64>().sqrt(), std::f64::consts::TAU * rng.random::<f64>())
}

/// `h = z + a2 z^2 + a3 z^3`, `g = b1 z + b2 z^2 + b3 z^3` with coefficients
/// small enough that `|g'| < |h'|` on the closed disk.
pub fn random_harmonic(rng: &mut ChaCha8Rng) -> HarmonicMap {
    let h = AnalyticMap::polynomial(vec![ZERO, ONE, random_point(rng, 0.15), random_point(rng, 0.05)]);
    let g = AnalyticMap::polynomial(vec![
        ZERO,
        random_point(rng, 0.2),
        random_point(rng, 0.05),
        random_point(rng, 0.02),
    ]);
    HarmonicMap::new(h, g)
}

pub fn random_automorphism(rng: &mut ChaCha8Rng, max_zeta: f64) -> AnalyticMap {
    let zeta = random_point(rng, max_zeta);
    AnalyticMap::disk_automorphism(zeta, std::f64::consts::TAU * rng.random::<f64>())
        .expect("|zeta| < 1")
}

/// Möbius map with its pole well outside the closed disk.
pub fn random_mobius(rng: &mut ChaCha8Rng) -> AnalyticMap {
    let a = random_point(rng, 2.0) + 0.5;
    let b = random_point(rng, 1.0);
    let c = random_point(rng, 1.0);
    let d = Complex64::from_polar(1.5 * c.norm() + 0.5 + rng.random::<f64>(), std::f64::consts::TAU * rng.random::<f64>());
    // a d - b c stays away from 0 because |a d| > 0.5 |d| > |b c| for most
    // draws; resample the rare degenerate ones.
    match AnalyticMap::mobius(MobiusParams::new(a, b, c, d)) {
        Ok(m) if (a * d - b * c).norm() > 0.1 => m,
        _ => random_mobius(rng),
    }
}

/// Finite Blaschke product of degree 1..=3 composed with an automorphism.
pub fn random_blaschke(rng: &mut ChaCha8Rng) -> AnalyticMap {
    let degree = rng.random_range(1..=3);
    let mut b = AnalyticMap::constant(Complex64::from_polar(1.0, std::f64::consts::TAU * rng.random::<f64>()));
    for _ in 0..degree {
        let zero = random_point(rng, 0.8);
        b = b * AnalyticMap::disk_automorphism(-zero, 0.0).expect("|zero| < 1");
    }
    b.compose(&random_automorphism(rng, 0.6))
}

fn residual_scale(x: Complex64) -> f64 {
    x.norm().max(1.0)
}

/// Null set: `f = αT + β conj(T)` with `|β| < |α|` has `S_f ≡ 0`.
pub struct NullSet;

impl PropertySuite for NullSet {
    fn name(&self) -> &'static str {
        "null_set"
    }
    fn description(&self) -> &'static str {
        "max |S_f| over 200 points for f = aT + b conj(T), |b| < |a|, T Mobius"
    }
    fn tolerance(&self) -> f64 {
        1e-10
    }
    fn default_cases(&self) -> usize {
        50
    }
    fn run_case(&self, rng: &mut ChaCha8Rng) -> CaseOutcome {
        let t = random_mobius(rng);
        let alpha = Complex64::from_polar(0.5 + rng.random::<f64>(), std::f64::consts::TAU * rng.random::<f64>());
        let beta = random_point(rng, 0.95 * alpha.norm());
        let f = HarmonicMap::new(t.scale(alpha), t.scale(beta.conj()));
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let z = random_point(rng, 0.99);
            match schwarzian::schwarzian_harmonic(&f, z) {
                Ok(s) => worst = worst.max(s.norm()),
                Err(e) => return CaseOutcome::Error { message: e.to_string() },
            }
        }
        CaseOutcome::Checked {
            residual: worst,
            detail: format!("alpha={alpha}, beta={beta}, T={}", t.describe()),
        }
    }
}

/// Chain rule: `S_{f∘φ} = S_f(φ) (φ')^2 + S(φ)` for analytic self-maps `φ`.
pub struct ChainRule;

impl PropertySuite for ChainRule {
    fn name(&self) -> &'static str {
        "chain_rule"
    }
    fn description(&self) -> &'static str {
        "|S_{f o phi} - S_f(phi) phi'^2 - S(phi)| / max(1, |S_{f o phi}|), phi an automorphism or lens o automorphism"
    }
    fn tolerance(&self) -> f64 {
        1e-9
    }
    fn default_cases(&self) -> usize {
        500
    }
    fn run_case(&self, rng: &mut ChaCha8Rng) -> CaseOutcome {
        let f = random_harmonic(rng);
        let sigma = random_automorphism(rng, 0.5);
        let phi = if rng.random::<bool>() {
            sigma
        } else {
            AnalyticMap::lens(0.3 + 0.7 * rng.random::<f64>()).expect("alpha in (0, 1]").compose(&sigma)
        };
        let z = random_point(rng, 0.8);
        let run = || -> Result<(Complex64, Complex64)> {
            let lhs = schwarzian::schwarzian_harmonic(&f.precompose(&phi), z)?;
            let p = phi.eval(z)?;
            let rhs = schwarzian::schwarzian_harmonic(&f, p.d0)? * p.d1 * p.d1 + schwarzian::schwarzian_of_jet(&p)?;
            Ok((lhs, rhs))
        };
        match run() {
            Ok((lhs, rhs)) => CaseOutcome::Checked {
                residual: (lhs - rhs).norm() / residual_scale(lhs),
                detail: format!("f: {f}; phi = {}; z = {z}", phi.describe()),
            },
            Err(e) => CaseOutcome::Error { message: e.to_string() },
        }
    }
}

/// Affine invariance: `S_{L∘f} = S_f` for `L(w) = a w + b conj(w)`,
/// `|b| < |a|`. Draws with `|b| >= |a|` must be refused.
pub struct AffineInvariance;

impl PropertySuite for AffineInvariance {
    fn name(&self) -> &'static str {
        "affine_invariance"
    }
    fn description(&self) -> &'static str {
        "|S_{L o f} - S_f| / max(1, |S_f|) for L(w) = a w + b conj(w); |b| >= |a| must be rejected"
    }
    fn tolerance(&self) -> f64 {
        1e-10
    }
    fn default_cases(&self) -> usize {
        500
    }
    fn run_case(&self, rng: &mut ChaCha8Rng) -> CaseOutcome {
        let f = random_harmonic(rng);
        let a = Complex64::from_polar(0.5 + 1.5 * rng.random::<f64>(), std::f64::consts::TAU * rng.random::<f64>());
        let b = random_point(rng, 1.25 * a.norm());
        let z = random_point(rng, 0.95);
        let lf = match f.post_affine(a, b) {
            Ok(lf) if b.norm() < a.norm() => lf,
            Ok(_) => {
                return CaseOutcome::Error {
                    message: format!("sense-reversing L accepted: a = {a}, b = {b}"),
                }
            }
            Err(Error::SenseReversing) if b.norm() >= a.norm() => {
                return CaseOutcome::Rejected {
                    reason: format!("|b| >= |a| for a = {a}, b = {b}"),
                }
            }
            Err(e) => return CaseOutcome::Error { message: e.to_string() },
        };
        match (schwarzian::schwarzian_harmonic(&lf, z), schwarzian::schwarzian_harmonic(&f, z)) {
            (Ok(x), Ok(y)) => CaseOutcome::Checked {
                residual: (x - y).norm() / residual_scale(y),
                detail: format!("f: {f}; a = {a}; b = {b}; z = {z}"),
            },
            (Err(e), _) | (_, Err(e)) => CaseOutcome::Error { message: e.to_string() },
        }
    }
}

/// For `g ≡ 0` the harmonic Schwarzian is the classical one.
pub struct AnalyticReduction;

impl PropertySuite for AnalyticReduction {
    fn name(&self) -> &'static str {
        "analytic_reduction"
    }
    fn description(&self) -> &'static str {
        "|S_f - S(h)| for g = 0 at a random point"
    }
    fn tolerance(&self) -> f64 {
        1e-14
    }
    fn default_cases(&self) -> usize {
        1000
    }
    fn run_case(&self, rng: &mut ChaCha8Rng) -> CaseOutcome {
        let h = match rng.random_range(0..3) {
            0 => random_harmonic(rng).h,
            1 => AnalyticMap::koebe(),
            _ => AnalyticMap::lens(0.1 + 0.9 * rng.random::<f64>()).expect("alpha in (0, 1]"),
        };
        let z = random_point(rng, 0.95);
        let f = HarmonicMap::analytic(h.clone());
        match (schwarzian::schwarzian_harmonic(&f, z), schwarzian::schwarzian_analytic(&h, z)) {
            (Ok(x), Ok(y)) => CaseOutcome::Checked {
                residual: (x - y).norm(),
                detail: format!("h = {}; z = {z}", h.describe()),
            },
            (Err(e), _) | (_, Err(e)) => CaseOutcome::Error { message: e.to_string() },
        }
    }
}

/// `||S_{f∘σ}|| = ||S_f||` for automorphisms `σ`, compared on estimates.
pub struct NormAutomorphism {
    pub sampling: SamplingSpec,
    pub max_zeta: f64,
}

impl Default for NormAutomorphism {
    fn default() -> Self {
        Self {
            sampling: SamplingSpec::default(),
            max_zeta: 0.7,
        }
    }
}

impl PropertySuite for NormAutomorphism {
    fn name(&self) -> &'static str {
        "norm_automorphism"
    }
    fn description(&self) -> &'static str {
        "relative difference of the Schwarzian norm estimates of f and f o sigma"
    }
    fn tolerance(&self) -> f64 {
        1e-3
    }
    fn default_cases(&self) -> usize {
        20
    }
    fn run_case(&self, rng: &mut ChaCha8Rng) -> CaseOutcome {
        let f = random_harmonic(rng);
        let sigma = random_automorphism(rng, self.max_zeta);
        let run = || -> Result<(f64, f64)> {
            let a = norm::estimate_schwarzian_norm(&f, &self.sampling)?.estimate;
            let b = norm::estimate_schwarzian_norm(&f.precompose(&sigma), &self.sampling)?.estimate;
            Ok((a, b))
        };
        match run() {
            Ok((a, b)) => CaseOutcome::Checked {
                residual: (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE),
                detail: format!("f: {f}; sigma = {}; norms {a} vs {b}", sigma.describe()),
            },
            Err(e) => CaseOutcome::Error { message: e.to_string() },
        }
    }
}

/// Schwarz–Pick: `||ω*|| <= 1` for self-maps of the disk. The residual is
/// `estimate - 1`.
pub struct SchwarzPick {
    pub sampling: SamplingSpec,
}

impl Default for SchwarzPick {
    fn default() -> Self {
        Self {
            sampling: SamplingSpec::default(),
        }
    }
}

impl PropertySuite for SchwarzPick {
    fn name(&self) -> &'static str {
        "schwarz_pick"
    }
    fn description(&self) -> &'static str {
        "hyperbolic derivative norm of Blaschke products composed with automorphisms, minus 1"
    }
    fn tolerance(&self) -> f64 {
        1e-9
    }
    fn default_cases(&self) -> usize {
        50
    }
    fn run_case(&self, rng: &mut ChaCha8Rng) -> CaseOutcome {
        let omega = random_blaschke(rng);
        match norm::estimate_omega_star_norm(&omega, &self.sampling) {
            Ok(rep) => CaseOutcome::Checked {
                residual: rep.estimate.max(rep.lower_bound) - 1.0,
                detail: format!("omega = {}; estimate {}", omega.describe(), rep.estimate),
            },
            Err(e) => CaseOutcome::Error { message: e.to_string() },
        }
    }
}

/// Step of the finite differences in [`fd_jet_residual`].
pub const FD_STEP: f64 = 1e-3;

/// Largest mismatch between jet slots 1..=3 and fourth-order central
/// differences of slots 0..=2 along the real direction, relative to
/// `max(|jet|, |fd|, 1)`.
pub fn fd_jet_residual(map: &AnalyticMap, z: Complex64, step: f64) -> Result<f64> {
    let at = |dz: f64| map.eval(z + dz);
    let (m2, m1, p1, p2) = (at(-2.0 * step)?, at(-step)?, at(step)?, at(2.0 * step)?);
    let j = map.eval(z)?;
    let slot = |k: usize, x: &Jet3| x.components()[k];
    let mut worst: f64 = 0.0;
    for k in 0..3 {
        let fd = (slot(k, &m2) - 8.0 * slot(k, &m1) + 8.0 * slot(k, &p1) - slot(k, &p2)) / (12.0 * step);
        let exact = slot(k + 1, &j);
        let scale = exact.norm().max(fd.norm()).max(1.0);
        worst = worst.max((exact - fd).norm() / scale);
    }
    Ok(worst)
}

/// Primitive corpus for the finite-difference check.
pub fn fd_corpus_member(rng: &mut ChaCha8Rng) -> AnalyticMap {
    let shift = Complex64::new(2.0, 0.0);
    match rng.random_range(0..8) {
        0 => random_mobius(rng),
        1 => AnalyticMap::identity().scale(random_point(rng, 1.0)).exp(),
        2 => AnalyticMap::identity().shift(shift).ln(),
        3 => AnalyticMap::identity().shift(shift).powf(2.0 * rng.random::<f64>() - 1.0),
        4 => AnalyticMap::lens(0.1 + 0.9 * rng.random::<f64>()).expect("alpha in (0, 1]"),
        5 => AnalyticMap::koebe(),
        6 => AnalyticMap::lens(0.5).expect("valid").compose(&random_automorphism(rng, 0.5)),
        _ => AnalyticMap::koebe().compose(&random_mobius(rng).scale(Complex64::new(0.1, 0.0))).exp(),
    }
}

/// Jets of the primitive corpus against finite differences.
pub struct JetsVsFd;

impl PropertySuite for JetsVsFd {
    fn name(&self) -> &'static str {
        "jets_vs_fd"
    }
    fn description(&self) -> &'static str {
        "jet slots 1..3 against fourth-order central differences of slots 0..2"
    }
    fn tolerance(&self) -> f64 {
        1e-6
    }
    fn default_cases(&self) -> usize {
        500
    }
    fn run_case(&self, rng: &mut ChaCha8Rng) -> CaseOutcome {
        let map = fd_corpus_member(rng);
        let z = random_point(rng, 0.6);
        match fd_jet_residual(&map, z, FD_STEP) {
            Ok(r) => CaseOutcome::Checked {
                residual: r,
                detail: format!("{} at {z}", map.describe()),
            },
            Err(e) => CaseOutcome::Error { message: e.to_string() },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names() {
        let r = SuiteRegistry::builtin();
        let names: Vec<_> = r.names().collect();
        assert_eq!(
            names,
            [
                "affine_invariance",
                "analytic_reduction",
                "chain_rule",
                "jets_vs_fd",
                "norm_automorphism",
                "null_set",
                "schwarz_pick"
            ]
        );
        assert!(r.run("nope", 0, None).is_err());
    }

    #[test]
    fn fast_suites_pass() {
        let r = SuiteRegistry::builtin();
        for name in ["null_set", "chain_rule", "affine_invariance", "analytic_reduction", "jets_vs_fd"] {
            let rep = r.run(name, 11, Some(60)).unwrap();
            assert!(rep.passed, "{rep:?}");
            assert!(rep.checked > 0);
        }
    }

    #[test]
    fn affine_guard_rejects_sense_reversing_draws() {
        let rep = run_suite(&AffineInvariance, 5, 200);
        assert!(rep.passed, "{rep:?}");
        assert!(rep.rejected > 0);
        assert_eq!(rep.rejected + rep.checked, 200);
    }

    #[test]
    fn reports_are_deterministic_and_replayable() {
        let a = run_suite(&ChainRule, 3, 40);
        let b = run_suite(&ChainRule, 3, 40);
        assert_eq!(a, b);
        let s = case_seed(3, 7);
        let one = ChainRule.run_case(&mut ChaCha8Rng::seed_from_u64(s));
        assert_eq!(one, ChainRule.run_case(&mut ChaCha8Rng::seed_from_u64(s)));
    }

    #[test]
    fn failures_carry_seeds() {
        struct Bad;
        impl PropertySuite for Bad {
            fn name(&self) -> &'static str {
                "bad"
            }
            fn description(&self) -> &'static str {
                ""
            }
            fn tolerance(&self) -> f64 {
                0.5
            }
            fn default_cases(&self) -> usize {
                4
            }
            fn run_case(&self, rng: &mut ChaCha8Rng) -> CaseOutcome {
                CaseOutcome::Checked {
                    residual: rng.random::<f64>() + 0.6,
                    detail: String::new(),
                }
            }
        }
        let rep = run_suite(&Bad, 9, 4);
        assert!(!rep.passed);
        assert_eq!(rep.failures.len(), 4);
        assert_eq!(rep.failures[2].seed, case_seed(9, 2));
    }

    #[test]
    fn fd_detects_a_wrong_jet() {
        struct Wrong;
        impl crate::mappings::Analytic for Wrong {
            fn jet(&self, z: Complex64) -> Result<Jet3> {
                Ok(Jet3::new(z * z, 2.0 * z, Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)))
            }
            fn describe(&self) -> String {
                "wrong".into()
            }
        }
        let m = AnalyticMap::new(Wrong);
        assert!(fd_jet_residual(&m, Complex64::new(0.2, 0.1), FD_STEP).unwrap() > 0.1);
        assert!(fd_jet_residual(&AnalyticMap::koebe(), Complex64::new(0.2, 0.1), FD_STEP).unwrap() < 1e-6);
    }

    #[test]
    fn corpora_stay_in_their_domains() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let f = random_harmonic(&mut rng);
            for _ in 0..5 {
                let z = random_point(&mut rng, 0.999);
                assert!(f.jacobian(z).unwrap() > 0.0);
            }
            let b = random_blaschke(&mut rng);
            let z = random_point(&mut rng, 0.999);
            assert!(b.eval(z).unwrap().d0.norm() < 1.0);
        }
    }
}
