//! Order-3 jets of holomorphic functions.
//!
//! A [`Jet3`] stores `f(z), f'(z), f''(z), f'''(z)` at a single point (plain
//! derivatives, not Taylor coefficients). Arithmetic on jets follows the
//! Leibniz rule and composition follows Faà di Bruno, both truncated at
//! order three, so every derivative that enters a Schwarzian is exact up to
//! floating point rounding.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default guard for [`Jet3::checked_div`].
pub const DEFAULT_DIV_EPSILON: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Jet3 {
    pub d0: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
    pub d3: Complex64,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl Jet3 {
    pub const fn new(d0: Complex64, d1: Complex64, d2: Complex64, d3: Complex64) -> Self {
        Self { d0, d1, d2, d3 }
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    /// The jet of the constant function 1.
    pub const fn one() -> Self {
        Self::constant(ONE)
    }

    pub const fn constant(c: Complex64) -> Self {
        Self::new(c, ZERO, ZERO, ZERO)
    }

    /// Jet of the identity map at `z`.
    pub const fn variable(z: Complex64) -> Self {
        Self::new(z, ONE, ZERO, ZERO)
    }

    /// Build a jet from real-valued components, handy in tests.
    pub fn from_reals(d: [f64; 4]) -> Self {
        Self::new(d[0].into(), d[1].into(), d[2].into(), d[3].into())
    }

    pub fn components(&self) -> [Complex64; 4] {
        [self.d0, self.d1, self.d2, self.d3]
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|c| c.is_finite())
    }

    /// Jet of `f'` built from the jet of `f`. The fourth derivative is not
    /// available, so the top slot of the result is zero and must not be
    /// consumed.
    pub fn derivative(&self) -> Self {
        Self::new(self.d1, self.d2, self.d3, ZERO)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.d0 * c, self.d1 * c, self.d2 * c, self.d3 * c)
    }

    /// Largest component modulus, used for relative comparisons.
    pub fn max_norm(&self) -> f64 {
        self.components()
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Reciprocal `1/b` as a jet.
    pub fn checked_recip(&self) -> Result<Self> {
        self.checked_recip_eps(DEFAULT_DIV_EPSILON)
    }

    pub fn checked_recip_eps(&self, eps: f64) -> Result<Self> {
        let m = self.d0.norm();
        if !(m > eps) {
            return Err(Error::DivisionNearZero {
                modulus: m,
                at: None,
            });
        }
        let w = self.d0;
        let outer = Self::new(
            ONE / w,
            -ONE / (w * w),
            Complex64::from(2.0) / (w * w * w),
            Complex64::from(-6.0) / (w * w * w * w),
        );
        Ok(compose(&outer, self))
    }

    /// Quotient `self / b` with the default guard.
    pub fn checked_div(&self, b: &Self) -> Result<Self> {
        self.checked_div_eps(b, DEFAULT_DIV_EPSILON)
    }

    /// Quotient `self / b`; fails when `|b.d0| <= eps`.
    pub fn checked_div_eps(&self, b: &Self, eps: f64) -> Result<Self> {
        let m = b.d0.norm();
        if !(m > eps) {
            return Err(Error::DivisionNearZero {
                modulus: m,
                at: None,
            });
        }
        // q = a / b solved order by order from a = q b.
        let inv = ONE / b.d0;
        let q0 = self.d0 * inv;
        let q1 = (self.d1 - q0 * b.d1) * inv;
        let q2 = (self.d2 - 2.0 * q1 * b.d1 - q0 * b.d2) * inv;
        let q3 = (self.d3 - 3.0 * q2 * b.d1 - 3.0 * q1 * b.d2 - q0 * b.d3) * inv;
        Ok(Self::new(q0, q1, q2, q3))
    }

    pub fn exp(&self) -> Self {
        let e = self.d0.exp();
        compose(&Self::new(e, e, e, e), self)
    }

    /// Principal logarithm. Fails when the value lies on the closed negative
    /// real axis.
    pub fn ln(&self) -> Result<Self> {
        let w = self.d0;
        if w.im == 0.0 && w.re <= 0.0 {
            return Err(Error::BranchCutViolation {
                value: w,
                at: None,
            });
        }
        let inv = ONE / w;
        let outer = Self::new(w.ln(), inv, -inv * inv, 2.0 * inv * inv * inv);
        Ok(compose(&outer, self))
    }

    /// Principal power `self^alpha = exp(alpha log self)`.
    pub fn powf(&self, alpha: f64) -> Result<Self> {
        Ok((self.ln()? * alpha).exp())
    }
}

/// Faà di Bruno to order three. `outer` must be the jet at `inner.d0`.
pub fn compose(outer: &Jet3, inner: &Jet3) -> Jet3 {
    let i1 = inner.d1;
    let i2 = inner.d2;
    let i3 = inner.d3;
    Jet3::new(
        outer.d0,
        outer.d1 * i1,
        outer.d2 * i1 * i1 + outer.d1 * i2,
        outer.d3 * i1 * i1 * i1 + 3.0 * outer.d2 * i1 * i2 + outer.d1 * i3,
    )
}

impl Add for Jet3 {
    type Output = Jet3;
    fn add(self, b: Jet3) -> Jet3 {
        Jet3::new(self.d0 + b.d0, self.d1 + b.d1, self.d2 + b.d2, self.d3 + b.d3)
    }
}

impl AddAssign for Jet3 {
    fn add_assign(&mut self, b: Jet3) {
        *self = *self + b;
    }
}

impl Sub for Jet3 {
    type Output = Jet3;
    fn sub(self, b: Jet3) -> Jet3 {
        Jet3::new(self.d0 - b.d0, self.d1 - b.d1, self.d2 - b.d2, self.d3 - b.d3)
    }
}

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        Jet3::new(-self.d0, -self.d1, -self.d2, -self.d3)
    }
}

impl Add<Complex64> for Jet3 {
    type Output = Jet3;
    fn add(mut self, c: Complex64) -> Jet3 {
        self.d0 += c;
        self
    }
}

impl Sub<Complex64> for Jet3 {
    type Output = Jet3;
    fn sub(mut self, c: Complex64) -> Jet3 {
        self.d0 -= c;
        self
    }
}

/// Leibniz rule to order three.
impl Mul for Jet3 {
    type Output = Jet3;
    fn mul(self, b: Jet3) -> Jet3 {
        let a = self;
        Jet3::new(
            a.d0 * b.d0,
            a.d1 * b.d0 + a.d0 * b.d1,
            a.d2 * b.d0 + 2.0 * a.d1 * b.d1 + a.d0 * b.d2,
            a.d3 * b.d0 + 3.0 * a.d2 * b.d1 + 3.0 * a.d1 * b.d2 + a.d0 * b.d3,
        )
    }
}

impl Mul<Complex64> for Jet3 {
    type Output = Jet3;
    fn mul(self, c: Complex64) -> Jet3 {
        self.scale(c)
    }
}

impl Mul<f64> for Jet3 {
    type Output = Jet3;
    fn mul(self, c: f64) -> Jet3 {
        self.scale(Complex64::from(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel_close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
    }

    fn jets_close(a: &Jet3, b: &Jet3, tol: f64) -> bool {
        a.components()
            .iter()
            .zip(b.components().iter())
            .all(|(x, y)| rel_close(*x, *y, tol))
    }

    /// Fourth-order central difference along the real direction.
    fn fd(f: impl Fn(Complex64) -> Complex64, z: Complex64, h: f64) -> Complex64 {
        (-f(z + 2.0 * h) + 8.0 * f(z + h) - 8.0 * f(z - h) + f(z - 2.0 * h)) / (12.0 * h)
    }

    /// Checks d1 ~ fd(d0), d2 ~ fd(d1), d3 ~ fd(d2) for a jet-valued function.
    fn assert_fd_chain(jet: impl Fn(Complex64) -> Jet3, z: Complex64) {
        let h = 1e-4;
        let j = jet(z);
        let pairs = [
            (j.d1, fd(|w| jet(w).d0, z, h)),
            (j.d2, fd(|w| jet(w).d1, z, h)),
            (j.d3, fd(|w| jet(w).d2, z, h)),
        ];
        for (k, (exact, approx)) in pairs.iter().enumerate() {
            assert!(
                rel_close(*exact, *approx, 1e-6),
                "order {} at {z}: jet {exact} vs fd {approx}",
                k + 1
            );
        }
    }

    // Closed forms used as independent sources of values.
    fn u(z: Complex64) -> Complex64 {
        (0.3 * z).exp() + z * z
    }
    fn u_jet(z: Complex64) -> Jet3 {
        let e = (0.3 * z).exp();
        Jet3::new(e + z * z, 0.3 * e + 2.0 * z, 0.09 * e + 2.0, 0.027 * e)
    }
    fn v(z: Complex64) -> Complex64 {
        1.0 / (2.0 - z)
    }
    fn v_jet(z: Complex64) -> Jet3 {
        let w = 2.0 - z;
        Jet3::new(1.0 / w, 1.0 / (w * w), 2.0 / (w * w * w), 6.0 / (w * w * w * w))
    }

    #[test]
    fn add_examples() {
        let id = Jet3::variable(c(0.0, 0.0));
        assert_eq!(id + Jet3::zero(), id);
        let a = Jet3::from_reals([1.0, 2.0, 3.0, 4.0]);
        let b = Jet3::from_reals([5.0, 6.0, 7.0, 8.0]);
        assert_eq!(a + b, Jet3::from_reals([6.0, 8.0, 10.0, 12.0]));
        assert_eq!(a + b, b + a);
    }

    #[test]
    fn mul_examples() {
        let a = Jet3::new(c(1.0, 2.0), c(-0.5, 0.1), c(3.0, 0.0), c(0.0, 7.0));
        assert_eq!(a * Jet3::one(), a);
        let z = Jet3::variable(c(2.0, 0.0));
        assert_eq!(z * z, Jet3::from_reals([4.0, 4.0, 2.0, 0.0]));
    }

    #[test]
    fn mul_matches_finite_differences_of_product() {
        for z in [c(0.1, 0.2), c(-0.6, 0.3), c(0.85, -0.1), c(0.0, -0.9)] {
            let prod = |w: Complex64| u_jet(w) * v_jet(w);
            assert!(rel_close(prod(z).d0, u(z) * v(z), 1e-14));
            assert_fd_chain(prod, z);
        }
    }

    #[test]
    fn div_examples() {
        let a = Jet3::new(c(0.7, -0.2), c(1.0, 2.0), c(-3.0, 0.5), c(0.25, 0.0));
        assert!(jets_close(&a.checked_div(&a).unwrap(), &Jet3::one(), 1e-14));

        // 1/(1 - z) at 0 has derivatives n!.
        let one_minus_z = Jet3::one() - Jet3::variable(c(0.0, 0.0));
        let q = Jet3::one().checked_div(&one_minus_z).unwrap();
        assert_eq!(q, Jet3::from_reals([1.0, 1.0, 2.0, 6.0]));
        let fd_val = fd(|w| 1.0 / (1.0 - w), c(0.0, 0.0), 1e-4);
        assert!(rel_close(fd_val, q.d1, 1e-10));

        let zero_b = Jet3::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        assert!(matches!(
            a.checked_div(&zero_b),
            Err(Error::DivisionNearZero { .. })
        ));
    }

    #[test]
    fn div_epsilon_is_configurable() {
        let b = Jet3::constant(c(1e-8, 0.0));
        assert!(Jet3::one().checked_div(&b).is_ok());
        assert!(Jet3::one().checked_div_eps(&b, 1e-6).is_err());
    }

    #[test]
    fn recip_matches_quotient() {
        let b = v_jet(c(0.3, 0.4));
        let r1 = b.checked_recip().unwrap();
        let r2 = Jet3::one().checked_div(&b).unwrap();
        assert!(jets_close(&r1, &r2, 1e-13));
    }

    #[test]
    fn compose_examples() {
        let a = Jet3::new(c(1.0, 2.0), c(-0.5, 0.1), c(3.0, 0.0), c(0.0, 7.0));
        let w = c(0.4, -0.3);
        assert_eq!(compose(&a, &Jet3::variable(w)), a);
        let inner = Jet3::new(w, c(2.0, 1.0), c(-1.0, 0.5), c(0.3, 0.3));
        assert_eq!(compose(&Jet3::variable(w), &inner), inner);

        // exp(2z) at 0 -> (1, 2, 4, 8)
        let two_z = Jet3::variable(c(0.0, 0.0)) * 2.0;
        let e = two_z.exp();
        assert!(jets_close(&e, &Jet3::from_reals([1.0, 2.0, 4.0, 8.0]), 1e-15));
        assert_fd_chain(|w| (Jet3::variable(w) * 2.0).exp(), c(0.0, 0.0));
    }

    #[test]
    fn exp_log_pow_examples() {
        assert_eq!(Jet3::zero().exp(), Jet3::one());

        let a = Jet3::new(c(0.3, 2.5), c(1.0, -1.0), c(0.2, 0.0), c(0.0, 0.4));
        let back = a.exp().ln().unwrap();
        assert!(jets_close(&back, &a, 1e-13), "{back:?}");

        // l(z) = (1+z)/(1-z); l(0) = 1, l'(0) = 2.
        let ell = |w: Complex64| {
            let z = Jet3::variable(w);
            (Jet3::one() + z).checked_div(&(Jet3::one() - z)).unwrap()
        };
        for alpha in [0.1, 0.25, 0.5, 1.0] {
            let p = ell(c(0.0, 0.0)).powf(alpha).unwrap();
            assert!(rel_close(p.d0, c(1.0, 0.0), 1e-15));
            assert!(rel_close(p.d1, c(2.0 * alpha, 0.0), 1e-14));
            for z in [c(0.0, 0.0), c(0.5, 0.2), c(-0.7, -0.4)] {
                assert_fd_chain(|w| ell(w).powf(alpha).unwrap(), z);
            }
        }
    }

    #[test]
    fn log_rejects_branch_cut() {
        for value in [c(-1.0, 0.0), c(0.0, 0.0), c(-1e-3, 0.0)] {
            assert!(matches!(
                Jet3::constant(value).ln(),
                Err(Error::BranchCutViolation { .. })
            ));
            assert!(Jet3::constant(value).powf(0.5).is_err());
        }
        assert!(Jet3::constant(c(-1.0, 1e-12)).ln().is_ok());
    }

    #[test]
    fn derivative_shifts_slots() {
        let a = Jet3::from_reals([1.0, 2.0, 3.0, 4.0]);
        assert_eq!(a.derivative(), Jet3::from_reals([2.0, 3.0, 4.0, 0.0]));
    }

    fn arb_complex(r: f64) -> impl Strategy<Value = Complex64> {
        (-r..r, -r..r).prop_map(|(a, b)| Complex64::new(a, b))
    }

    fn arb_jet() -> impl Strategy<Value = Jet3> {
        (arb_complex(2.0), arb_complex(2.0), arb_complex(2.0), arb_complex(2.0))
            .prop_map(|(a, b, c, d)| Jet3::new(a, b, c, d))
    }

    proptest! {
        #[test]
        fn mul_commutes_and_associates(a in arb_jet(), b in arb_jet(), c in arb_jet()) {
            let ab_scale = a.max_norm().max(1.0) * b.max_norm().max(1.0);
            for (x, y) in (a * b).components().iter().zip((b * a).components().iter()) {
                prop_assert!((x - y).norm() <= 1e-14 * ab_scale);
            }
            let scale = a.max_norm().max(1.0) * b.max_norm().max(1.0) * c.max_norm().max(1.0);
            let lhs = (a * b) * c;
            let rhs = a * (b * c);
            for (x, y) in lhs.components().iter().zip(rhs.components().iter()) {
                prop_assert!((x - y).norm() <= 1e-13 * scale);
            }
        }

        #[test]
        fn div_undoes_mul(a in arb_jet(), b in arb_jet()) {
            prop_assume!(b.d0.norm() >= 0.1);
            let back = (a * b).checked_div(&b).unwrap();
            for (x, y) in back.components().iter().zip(a.components().iter()) {
                prop_assert!((x - y).norm() <= 1e-12 * a.max_norm().max(1.0) * (b.max_norm() / b.d0.norm()).powi(3));
            }
        }
    }
}
