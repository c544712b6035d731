//! Sup-norm estimation over the open unit disk.
//!
//! A supremum over an open set cannot be certified from samples, so a
//! [`NormReport`] keeps two numbers apart: `lower_bound` is the exact maximum
//! over the points that were evaluated, `estimate` additionally accounts for
//! growth towards the boundary by extrapolating the outermost ring maxima.
//! No upper bound is ever claimed.
//!
//! The search is a polar grid whose radii have `1 - r` geometric (see
//! [`SamplingSpec::radii`]), followed by rounds of local refinement around
//! the current maximizer. All evaluations are independent and run in
//! parallel; reductions scan in lexicographic (radius, angle) order with a
//! strict comparison, so the result does not depend on scheduling.

mod functionals;

pub use functionals::{
    FunctionalFactory, FunctionalRegistry, NormFunctional, OmegaSecond, OmegaStar, SchwarzianNorm,
    SupModulus,
};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mappings::{AnalyticMap, HarmonicMap};
pub use crate::sampling::SamplingSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormReport {
    pub functional: String,
    /// Maximum over all evaluated samples.
    pub lower_bound: f64,
    /// `lower_bound`, or the radial extrapolation when it is stable and
    /// exceeds the sample maximum by more than the relative tolerance.
    pub estimate: f64,
    pub argmax: Complex64,
    pub converged: bool,
    pub extrapolated: bool,
    /// Radial limit suggested by the outermost rings when the maximizer sits
    /// there, whether or not it was stable enough to become `estimate`.
    pub rim_extrapolation: Option<f64>,
    /// Set when the functional has a ceiling (the sup-modulus has 1) and the
    /// estimate reaches it within tolerance.
    pub boundary_degenerate: bool,
    pub samples_used: usize,
    /// `lower_bound` after the coarse pass and after each refinement round.
    pub history: Vec<f64>,
}

#[derive(Clone, Copy)]
struct Best {
    value: f64,
    z: Complex64,
}

fn checked_sample(functional: &dyn NormFunctional, z: Complex64) -> Result<f64> {
    let v = functional.sample(z).map_err(|e| e.at(z))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { at: Some(z) })
    }
}

/// Maximum over one row of points, first maximizer wins.
fn row_max(functional: &dyn NormFunctional, row: &[Complex64]) -> Result<Best> {
    let mut best = Best {
        value: f64::NEG_INFINITY,
        z: row[0],
    };
    for &z in row {
        let v = checked_sample(functional, z)?;
        if v > best.value {
            best = Best { value: v, z };
        }
    }
    Ok(best)
}

/// Row maxima of a lexicographically ordered grid, evaluated in parallel.
/// The first failing row (in order) determines the error.
fn rows_max(functional: &dyn NormFunctional, rows: &[Vec<Complex64>]) -> Result<Vec<Best>> {
    rows.par_iter()
        .map(|row| row_max(functional, row))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

fn reduce(rows: &[Best]) -> (usize, Best) {
    let mut k = 0;
    for (i, b) in rows.iter().enumerate() {
        if b.value > rows[k].value {
            k = i;
        }
    }
    (k, rows[k])
}

fn relatively_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Aitken Δ² limit of the last three ring maxima, when they increase with
/// geometrically shrinking increments.
pub(crate) fn radial_extrapolation(ring_max: &[f64]) -> Option<f64> {
    let n = ring_max.len();
    if n < 3 {
        return None;
    }
    let (m0, m1, m2) = (ring_max[n - 3], ring_max[n - 2], ring_max[n - 1]);
    let (d1, d2) = (m1 - m0, m2 - m1);
    if !(d1 > 0.0 && d2 > 0.0) {
        return None;
    }
    let rho = d2 / d1;
    if !(rho < 1.0) {
        return None;
    }
    Some(m2 + d2 * rho / (1.0 - rho))
}

/// Estimate the supremum of `functional` over the open unit disk.
pub fn estimate(functional: &dyn NormFunctional, spec: &SamplingSpec) -> Result<NormReport> {
    spec.validate()?;
    let radii = spec.radii();
    let angles = spec.angles();
    let rows: Vec<Vec<Complex64>> = radii
        .iter()
        .map(|&r| angles.iter().map(|&t| Complex64::from_polar(r, t)).collect())
        .collect();
    let ring = rows_max(functional, &rows)?;
    let mut samples_used = radii.len() * angles.len();
    let (ring_idx, mut best) = reduce(&ring);
    let mut history = vec![best.value];

    // Local refinement on a (2F+1)^2 polar patch around the maximizer,
    // halving widths by F each round. Patches never leave [0, r_max], and
    // their angular extent covers at least the radial one, so a patch near
    // the origin wraps around it instead of following a single ray.
    let f = spec.refine_factor;
    let dtheta = std::f64::consts::TAU / spec.n_angles as f64;
    let lo_gap = if ring_idx > 0 { radii[ring_idx] - radii[ring_idx - 1] } else { 0.0 };
    let hi_gap = if ring_idx + 1 < radii.len() { radii[ring_idx + 1] - radii[ring_idx] } else { 0.0 };
    let mut half_r = lo_gap.max(hi_gap);
    let mut half_t = dtheta;
    for _ in 0..spec.refine_rounds {
        let (rc, tc) = (best.z.norm(), best.z.arg());
        let span_t = if half_r >= rc * std::f64::consts::PI {
            std::f64::consts::PI
        } else {
            half_t.max(half_r / rc)
        };
        let steps = 2 * f + 1;
        let patch: Vec<Vec<Complex64>> = (0..steps)
            .map(|i| {
                let r = (rc + half_r * (i as f64 / f as f64 - 1.0)).clamp(0.0, spec.r_max);
                (0..steps)
                    .map(|j| {
                        let t = tc + span_t * (j as f64 / f as f64 - 1.0);
                        Complex64::from_polar(r, t)
                    })
                    .collect()
            })
            .collect();
        let maxima = rows_max(functional, &patch)?;
        samples_used += steps * steps;
        let (_, cand) = reduce(&maxima);
        if cand.value > best.value {
            best = cand;
        }
        history.push(best.value);
        half_r /= f as f64;
        half_t /= f as f64;
    }

    let lower_bound = best.value;
    let mut estimate = lower_bound;
    let ring_values: Vec<f64> = ring.iter().map(|b| b.value).collect();
    let on_rim = ring_idx + 2 >= radii.len();
    let limit = if on_rim { radial_extrapolation(&ring_values) } else { None };
    // The model is trusted only when the previous triple predicts the same
    // limit; slowly (e.g. logarithmically) converging rims make Aitken drift
    // upwards and are left unextrapolated.
    let stable = limit.zip(radial_extrapolation(&ring_values[..ring_values.len() - 1]))
        .is_some_and(|(a, b)| relatively_close(a, b, spec.rel_tol));
    let mut extrapolated = false;
    if let Some(l) = limit {
        if stable && l - lower_bound > spec.rel_tol * lower_bound.abs() {
            estimate = l;
            extrapolated = true;
        }
    }

    let converged = !extrapolated
        && history.len() >= 2
        && relatively_close(history[history.len() - 1], history[history.len() - 2], spec.rel_tol);
    // Growth that the outward trend carries up to the ceiling counts as
    // reaching it, even when the trend is too unstable to report as an
    // estimate.
    let boundary_degenerate = functional
        .ceiling()
        .is_some_and(|c| estimate >= c - spec.rel_tol || limit.is_some_and(|l| l >= c - spec.rel_tol));

    Ok(NormReport {
        functional: functional.name().to_string(),
        lower_bound,
        estimate,
        argmax: best.z,
        converged,
        extrapolated,
        rim_extrapolation: limit,
        boundary_degenerate,
        samples_used,
        history,
    })
}

pub fn estimate_schwarzian_norm(f: &HarmonicMap, spec: &SamplingSpec) -> Result<NormReport> {
    estimate(&SchwarzianNorm::new(f.clone()), spec)
}

pub fn estimate_omega_star_norm(omega: &AnalyticMap, spec: &SamplingSpec) -> Result<NormReport> {
    estimate(&OmegaStar { omega: omega.clone() }, spec)
}

pub fn estimate_omega_second_functional(omega: &AnalyticMap, spec: &SamplingSpec) -> Result<NormReport> {
    estimate(&OmegaSecond { omega: omega.clone() }, spec)
}

pub fn estimate_sup_modulus(omega: &AnalyticMap, spec: &SamplingSpec) -> Result<NormReport> {
    estimate(&SupModulus { omega: omega.clone() }, spec)
}
