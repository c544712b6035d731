use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure carries the disk point at which it was detected when one is
/// known. Jet-level operations have no notion of a point and leave it empty;
/// map evaluation fills it in on the way out.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by a quantity of modulus {modulus:e} (critical point){}", fmt_at(.at))]
    DivisionNearZero { modulus: f64, at: Option<Complex64> },

    #[error("argument {value} lies on the principal branch cut{}", fmt_at(.at))]
    BranchCutViolation {
        value: Complex64,
        at: Option<Complex64>,
    },

    #[error("Möbius coefficients have vanishing determinant ad - bc")]
    DegenerateMobius,

    #[error("point {point} is not inside the open unit disk")]
    PointOutsideDisk { point: Complex64 },

    #[error("lens exponent must satisfy 0 < alpha <= 1, got {0}")]
    InvalidAlpha(f64),

    #[error("affine normalizer 1 - conj(eps) g'(0) vanishes")]
    DegenerateAffine,

    #[error("affine map a w + b conj(w) with |b| >= |a| is not sense-preserving")]
    SenseReversing,

    #[error("1 - |omega|^2 = {gap:e} is not positive enough{}", fmt_at(.at))]
    DilatationOnBoundary { gap: f64, at: Option<Complex64> },

    #[error("non-finite value{}", fmt_at(.at))]
    NonFinite { at: Option<Complex64> },

    #[error("parameter t must satisfy 0 < t < 1 (0 <= t < 1 for the Ahlfors-Weill constant), got {0}")]
    InvalidT(f64),

    #[error("delta must be positive, got {0}")]
    InvalidDelta(f64),

    #[error("invalid sampling specification: {0}")]
    InvalidSampling(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn fmt_at(at: &Option<Complex64>) -> String {
    match at {
        Some(z) => format!(" at z = {z}"),
        None => String::new(),
    }
}

impl Error {
    /// Attach `z` as the location of the failure unless one is already set.
    pub fn at(self, z: Complex64) -> Self {
        match self {
            Error::DivisionNearZero { modulus, at: None } => Error::DivisionNearZero {
                modulus,
                at: Some(z),
            },
            Error::BranchCutViolation { value, at: None } => {
                Error::BranchCutViolation { value, at: Some(z) }
            }
            Error::DilatationOnBoundary { gap, at: None } => {
                Error::DilatationOnBoundary { gap, at: Some(z) }
            }
            Error::NonFinite { at: None } => Error::NonFinite { at: Some(z) },
            other => other,
        }
    }

    /// The disk point associated with the failure, if any.
    pub fn point(&self) -> Option<Complex64> {
        match self {
            Error::DivisionNearZero { at, .. }
            | Error::BranchCutViolation { at, .. }
            | Error::DilatationOnBoundary { at, .. }
            | Error::NonFinite { at } => *at,
            Error::PointOutsideDisk { point } => Some(*point),
            _ => None,
        }
    }

    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DivisionNearZero { .. } => "DivisionNearZero",
            Error::BranchCutViolation { .. } => "BranchCutViolation",
            Error::DegenerateMobius => "DegenerateMobius",
            Error::PointOutsideDisk { .. } => "PointOutsideDisk",
            Error::InvalidAlpha(_) => "InvalidAlpha",
            Error::DegenerateAffine => "DegenerateAffine",
            Error::SenseReversing => "SenseReversing",
            Error::DilatationOnBoundary { .. } => "DilatationOnBoundary",
            Error::NonFinite { .. } => "NonFinite",
            Error::InvalidT(_) => "InvalidT",
            Error::InvalidDelta(_) => "InvalidDelta",
            Error::InvalidSampling(_) => "InvalidSampling",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_is_attached_once() {
        let z = Complex64::new(0.25, 0.0);
        let w = Complex64::new(0.5, 0.0);
        let e = Error::DivisionNearZero {
            modulus: 0.0,
            at: None,
        }
        .at(z)
        .at(w);
        assert_eq!(e.point(), Some(z));
        assert_eq!(e.kind(), "DivisionNearZero");
    }

    #[test]
    fn display_mentions_point() {
        let e = Error::NonFinite { at: None }.at(Complex64::new(0.5, -0.5));
        assert!(e.to_string().contains("0.5-0.5i"), "{e}");
    }
}
