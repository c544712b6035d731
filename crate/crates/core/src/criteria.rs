//! Univalence and quasiconformal-extension criteria.
//!
//! Every check returns a three-valued [`Certificate`]. Sup-norms are only
//! ever known from below (see [`crate::norm`]), so a `certified` verdict that
//! rests on a norm estimate always carries a caveat saying so; the
//! constructors in this module are the only place verdicts are decided.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mappings::{AnalyticMap, HarmonicMap};
use crate::norm::{self, NormReport};
use crate::sampling::SamplingSpec;

/// Caveat attached to every verdict derived from a sup-norm estimate.
pub const ONE_SIDED: &str =
    "sup-norms are sampled: lower_bound is exact over the samples, estimate is extrapolated, no upper bound is proven";

/// Normalization at the origin is checked to this absolute tolerance.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Refuted,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub verdict: Verdict,
    pub criterion: String,
    pub measured: f64,
    pub threshold: f64,
    pub witness: Option<Complex64>,
    /// Second point of a witness pair (injectivity sampling).
    pub witness_partner: Option<Complex64>,
    pub caveat: String,
    /// Named auxiliary quantities, e.g. the Ahlfors–Weill constant.
    pub details: BTreeMap<String, f64>,
    pub norms: Vec<NormReport>,
    pub sub_checks: Vec<Certificate>,
}

impl Certificate {
    fn bare(criterion: &str, verdict: Verdict, measured: f64, threshold: f64, caveat: String) -> Self {
        Self {
            verdict,
            criterion: criterion.to_string(),
            measured,
            threshold,
            witness: None,
            witness_partner: None,
            caveat,
            details: BTreeMap::new(),
            norms: Vec::new(),
            sub_checks: Vec::new(),
        }
    }

    /// Decide `norm <= threshold` from a report. `measured` is the larger of
    /// the sample maximum and the extrapolated estimate.
    fn from_norm(criterion: &str, report: NormReport, threshold: f64, extra_caveat: &str) -> Self {
        let measured = report.lower_bound.max(report.estimate);
        let (verdict, mut caveat) = if report.lower_bound > threshold {
            (Verdict::Refuted, "criterion not satisfied: the sampled lower bound exceeds the threshold".to_string())
        } else if measured <= threshold {
            (Verdict::Certified, ONE_SIDED.to_string())
        } else {
            (
                Verdict::Inconclusive,
                "sampled values stay below the threshold but the extrapolated estimate exceeds it".to_string(),
            )
        };
        if !extra_caveat.is_empty() {
            caveat.push_str("; ");
            caveat.push_str(extra_caveat);
        }
        let mut cert = Self::bare(criterion, verdict, measured, threshold, caveat);
        if verdict == Verdict::Refuted {
            cert.witness = Some(report.argmax);
        }
        cert.details.insert("lower_bound".into(), report.lower_bound);
        cert.details.insert("estimate".into(), report.estimate);
        cert.norms.push(report);
        cert
    }

    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }
}

/// Nehari: `||S(h)|| <= 2` for analytic `h`.
pub fn nehari_check(h: &AnalyticMap, spec: &SamplingSpec) -> Result<Certificate> {
    let report = norm::estimate_schwarzian_norm(&HarmonicMap::analytic(h.clone()), spec)?;
    Ok(Certificate::from_norm(
        "nehari",
        report,
        2.0,
        "the criterion is sufficient, not necessary; failing it says nothing about univalence",
    ))
}

/// `K = (1 + t)/(1 - t)` for `0 <= t < 1`.
pub fn ahlfors_weill_k(t: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::InvalidT(t));
    }
    Ok((1.0 + t) / (1.0 - t))
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidDelta(delta));
    }
    Ok(())
}

/// Options for [`harmonic_univalence_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShearOptions {
    /// Moduli of the sampled coefficients `a`, each in `(0, 1]`.
    pub radii: &'static [f64],
    pub n_angles: usize,
}

impl Default for ShearOptions {
    fn default() -> Self {
        Self {
            radii: &[0.5, 1.0],
            n_angles: 4,
        }
    }
}

/// `||S_f|| <= δ` for a user supplied `δ`. With `shear` set, Nehari is also
/// run on `h + a g` for `a = 0` and a polar sample of `|a| <= 1`; those
/// results are attached as sub-checks and do not change the verdict.
pub fn harmonic_univalence_check(
    f: &HarmonicMap,
    delta: f64,
    spec: &SamplingSpec,
    shear: Option<ShearOptions>,
) -> Result<Certificate> {
    check_delta(delta)?;
    let report = norm::estimate_schwarzian_norm(f, spec)?;
    let mut cert = Certificate::from_norm(
        "harmonic_univalence",
        report,
        delta,
        "conditional on the supplied delta not exceeding the universal constant delta_0, whose value is unknown",
    );
    if let Some(opts) = shear {
        let mut coefficients = vec![Complex64::new(0.0, 0.0)];
        for &r in opts.radii {
            for k in 0..opts.n_angles {
                coefficients.push(Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / opts.n_angles as f64));
            }
        }
        cert.sub_checks = coefficients
            .into_iter()
            .map(|a| {
                let sheared = f.h.clone() + f.g.scale(a);
                let mut sub = match nehari_check(&sheared, spec) {
                    Ok(c) => c,
                    Err(e) => {
                        let mut c = Certificate::bare("nehari", Verdict::Inconclusive, 0.0, 2.0, format!("evaluation failed: {e}"));
                        c.witness = e.point();
                        c.details.insert("evaluation_failed".into(), 1.0);
                        c
                    }
                };
                sub.criterion = format!("nehari_shear(a={})", crate::mappings::fmt_complex(a));
                sub
            })
            .collect();
    }
    Ok(cert)
}

/// `||S_f|| <= δ t` together with `sup |ω| < 1`.
pub fn qc_extension_check(f: &HarmonicMap, delta: f64, t: f64, spec: &SamplingSpec) -> Result<Certificate> {
    check_delta(delta)?;
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidT(t));
    }
    let k = ahlfors_weill_k(t)?;
    let sup = norm::estimate_sup_modulus(&f.dilatation(), spec)?;
    let dilatation_fails = sup.boundary_degenerate || sup.estimate >= 1.0 - spec.rel_tol;
    let mut cert = if dilatation_fails {
        // only a sampled modulus at the ceiling is a witness; a rim trend
        // towards it leaves the hypothesis unverified
        let (verdict, caveat) = if sup.lower_bound >= 1.0 - spec.rel_tol {
            (Verdict::Refuted, "dilatation hypothesis fails: a sampled |w| reaches 1")
        } else {
            (
                Verdict::Inconclusive,
                "dilatation hypothesis unverified: sup |w| is not bounded away from 1 (measured is the sampled maximum; the modulus still grows at the rim and its radial trend reaches 1), and a small Schwarzian norm alone does not give a quasiconformal extension, as the lens-map example shows",
            )
        };
        let mut c = Certificate::bare("qc_extension", verdict, sup.lower_bound.max(sup.estimate), 1.0, caveat.to_string());
        c.witness = Some(sup.argmax);
        if let Some(l) = sup.rim_extrapolation {
            c.details.insert("sup_dilatation_rim_trend".into(), l);
        }
        // the Schwarzian blows up where |w| = 1, so it is informative only
        if let Ok(report) = norm::estimate_schwarzian_norm(f, spec) {
            c.details.insert("schwarzian_norm".into(), report.lower_bound.max(report.estimate));
            c.norms.push(report);
        }
        c
    } else {
        Certificate::from_norm(
            "qc_extension",
            norm::estimate_schwarzian_norm(f, spec)?,
            delta * t,
            "conditional on the supplied delta not exceeding the universal constant delta_0",
        )
    };
    cert.details.insert("sup_dilatation".into(), sup.estimate);
    cert.details.insert("K".into(), k);
    cert.norms.push(sup);
    Ok(cert)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub lambda: f64,
    /// Require `h(0) = g(0) = 0`, `h'(0) = 1`.
    pub normalized: bool,
    /// Require `g'(0) = 0` as well.
    pub zero_dilatation_at_origin: bool,
}

impl FamilySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        Ok(())
    }
}

/// Membership in the family of maps with `||S_f|| <= λ` and the
/// requested normalization at the origin.
pub fn family_membership(f: &HarmonicMap, family: &FamilySpec, sampling: &SamplingSpec) -> Result<Certificate> {
    family.validate()?;
    let zero = Complex64::new(0.0, 0.0);
    let mut defects = Vec::new();
    if family.normalized || family.zero_dilatation_at_origin {
        let h = f.h.eval(zero)?;
        let dg = f.g.eval_derivative(zero)?;
        let g0 = f.g.eval(zero)?.d0;
        if family.normalized {
            if h.d0.norm() > NORMALIZATION_TOL {
                defects.push(("h(0)", h.d0.norm()));
            }
            if g0.norm() > NORMALIZATION_TOL {
                defects.push(("g(0)", g0.norm()));
            }
            if (h.d1 - 1.0).norm() > NORMALIZATION_TOL {
                defects.push(("h'(0)-1", (h.d1 - 1.0).norm()));
            }
        }
        if family.zero_dilatation_at_origin && dg.d0.norm() > NORMALIZATION_TOL {
            defects.push(("g'(0)", dg.d0.norm()));
        }
    }
    let report = norm::estimate_schwarzian_norm(f, sampling)?;
    let mut cert = if defects.is_empty() {
        Certificate::from_norm("family_membership", report, family.lambda, "")
    } else {
        let names: Vec<_> = defects.iter().map(|(n, _)| *n).collect();
        let measured = report.lower_bound.max(report.estimate);
        let mut c = Certificate::bare(
            "family_membership",
            Verdict::Refuted,
            measured,
            family.lambda,
            format!("normalization fails at the origin: {}", names.join(", ")),
        );
        c.witness = Some(zero);
        c.norms.push(report);
        c
    };
    for (name, value) in defects {
        cert.details.insert(format!("defect {name}"), value);
    }
    Ok(cert)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InjectivityOptions {
    /// Images closer than this count as equal.
    pub collision_tol: f64,
    /// Arguments closer than this count as the same point.
    pub separation_tol: f64,
    /// Samples are drawn from `|z| <= r_max`.
    pub r_max: f64,
}

impl Default for InjectivityOptions {
    fn default() -> Self {
        Self {
            collision_tol: 1e-9,
            separation_tol: 1e-6,
            r_max: 1.0 - 1e-3,
        }
    }
}

/// Sample points in antipodal pairs: the first half is seeded uniform in the
/// disk of radius `r_max`, the second half their negatives, plus the origin
/// for odd `n`.
pub fn injectivity_points(n_points: usize, seed: u64, r_max: f64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half: Vec<Complex64> = (0..n_points / 2)
        .map(|_| {
            let r = r_max * rng.random::<f64>().sqrt();
            Complex64::from_polar(r, std::f64::consts::TAU * rng.random::<f64>())
        })
        .collect();
    let mut pts = half.clone();
    pts.extend(half.iter().map(|z| -z));
    if n_points % 2 == 1 {
        pts.push(Complex64::new(0.0, 0.0));
    }
    pts
}

fn cell(w: Complex64, size: f64) -> (i64, i64) {
    ((w.re / size).floor() as i64, (w.im / size).floor() as i64)
}

/// Search for two well separated samples with coincident images. Sampling
/// can refute injectivity but never certify it, so the outcome is either
/// `refuted` with a witness pair or `inconclusive`.
pub fn injectivity_sample(f: &HarmonicMap, n_points: usize, seed: u64) -> Result<Certificate> {
    injectivity_sample_with(f, n_points, seed, &InjectivityOptions::default())
}

pub fn injectivity_sample_with(
    f: &HarmonicMap,
    n_points: usize,
    seed: u64,
    opts: &InjectivityOptions,
) -> Result<Certificate> {
    if n_points < 2 {
        return Err(Error::InvalidArgument(format!("n_points must be >= 2, got {n_points}")));
    }
    if !(opts.collision_tol > 0.0 && opts.separation_tol >= 0.0 && opts.r_max > 0.0 && opts.r_max < 1.0) {
        return Err(Error::InvalidArgument("invalid injectivity tolerances".into()));
    }
    let pts = injectivity_points(n_points, seed, opts.r_max);
    let images: Vec<Option<Complex64>> = pts
        .par_iter()
        .map(|&z| f.value(z).ok().filter(|w| w.is_finite()))
        .collect();

    let size = opts.collision_tol;
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut collisions = 0usize;
    let mut first: Option<(usize, usize)> = None;
    let mut skipped = 0usize;
    for (i, w) in images.iter().enumerate() {
        let Some(w) = *w else {
            skipped += 1;
            continue;
        };
        let (cx, cy) = cell(w, size);
        for dx in -1..=1 {
            for dy in -1..=1 {
                let Some(bucket) = grid.get(&(cx.saturating_add(dx), cy.saturating_add(dy))) else {
                    continue;
                };
                for &j in bucket {
                    let wj = images[j].expect("only evaluated samples are hashed");
                    if (w - wj).norm() <= opts.collision_tol && (pts[i] - pts[j]).norm() > opts.separation_tol {
                        collisions += 1;
                        first.get_or_insert((j, i));
                    }
                }
            }
        }
        grid.entry((cx, cy)).or_default().push(i);
    }

    let mut cert = match first {
        Some((j, i)) => {
            let mut c = Certificate::bare(
                "injectivity_sample",
                Verdict::Refuted,
                collisions as f64,
                0.0,
                "two separated samples have coincident images".to_string(),
            );
            c.witness = Some(pts[j]);
            c.witness_partner = Some(pts[i]);
            c.details.insert(
                "image_distance".into(),
                (images[i].unwrap() - images[j].unwrap()).norm(),
            );
            c
        }
        None => Certificate::bare(
            "injectivity_sample",
            Verdict::Inconclusive,
            0.0,
            0.0,
            "no collisions found; sampling cannot certify injectivity".to_string(),
        ),
    };
    cert.details.insert("samples".into(), n_points as f64);
    cert.details.insert("skipped".into(), skipped as f64);
    cert.details.insert("collision_tol".into(), opts.collision_tol);
    cert.details.insert("separation_tol".into(), opts.separation_tol);
    Ok(cert)
}
