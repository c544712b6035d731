//! Polar sampling grids on the unit disk.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    pub n_radii: usize,
    pub n_angles: usize,
    /// Outermost sampled radius, strictly below 1.
    pub r_max: f64,
    pub refine_rounds: usize,
    pub refine_factor: usize,
    /// Relative tolerance for convergence and the extrapolation noise floor.
    pub rel_tol: f64,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        Self {
            n_radii: 64,
            n_angles: 256,
            r_max: 1.0 - 1e-3,
            refine_rounds: 3,
            refine_factor: 8,
            rel_tol: 1e-4,
        }
    }
}

impl SamplingSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_radii < 4 || self.n_angles < 4 {
            return Err(Error::InvalidSampling(format!(
                "need at least 4 radii and 4 angles, got {} x {}",
                self.n_radii, self.n_angles
            )));
        }
        if !(self.r_max > 0.0 && self.r_max < 1.0) {
            return Err(Error::InvalidSampling(format!(
                "r_max must lie in (0, 1), got {}",
                self.r_max
            )));
        }
        if self.refine_factor == 0 {
            return Err(Error::InvalidSampling("refine_factor must be positive".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidSampling(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        Ok(())
    }

    /// Radii with `1 - r` geometric, from `r = 0` up to `r = r_max`.
    pub fn radii(&self) -> Vec<f64> {
        let gap = 1.0 - self.r_max;
        let last = (self.n_radii - 1) as f64;
        (0..self.n_radii)
            .map(|k| {
                if k + 1 == self.n_radii {
                    self.r_max
                } else {
                    1.0 - gap.powf(k as f64 / last)
                }
            })
            .collect()
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.n_angles)
            .map(|j| TAU * j as f64 / self.n_angles as f64)
            .collect()
    }

    /// Coarse grid points in lexicographic (radius, angle) order.
    pub fn points(&self) -> Vec<Complex64> {
        let angles = self.angles();
        self.radii()
            .into_iter()
            .flat_map(|r| angles.iter().map(move |&t| Complex64::from_polar(r, t)))
            .collect()
    }
}
