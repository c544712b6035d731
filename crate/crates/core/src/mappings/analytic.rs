use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{self, Jet3};
use crate::quadrature;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A holomorphic function that can report its order-3 jet at a point.
///
/// Implementations evaluate wherever their formula makes sense; the
/// restriction to the unit disk is enforced by [`AnalyticMap::eval`].
pub trait Analytic: Send + Sync {
    fn jet(&self, z: Complex64) -> Result<Jet3>;

    /// Jet of the derivative. Slots `d0..=d2` (that is `f'`, `f''`, `f'''`)
    /// must be exact; `d3` may be zero. The default drops the value slot of
    /// [`Analytic::jet`]; nodes whose value is expensive (antiderivatives)
    /// override this to skip computing it.
    fn derivative_jet(&self, z: Complex64) -> Result<Jet3> {
        self.jet(z).map(|j| j.derivative())
    }

    fn describe(&self) -> String;
}

/// Shared handle to an analytic map on the unit disk.
#[derive(Clone)]
pub struct AnalyticMap(Arc<dyn Analytic>);

impl fmt::Debug for AnalyticMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("AnalyticMap").field(&self.describe()).finish()
    }
}

impl fmt::Display for AnalyticMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

pub(crate) fn check_disk(z: Complex64) -> Result<()> {
    if z.is_finite() && z.norm_sqr() < 1.0 {
        Ok(())
    } else {
        Err(Error::PointOutsideDisk { point: z })
    }
}

fn check_finite(j: Jet3) -> Result<Jet3> {
    if j.is_finite() {
        Ok(j)
    } else {
        Err(Error::NonFinite { at: None })
    }
}

impl AnalyticMap {
    pub fn new<A: Analytic + 'static>(inner: A) -> Self {
        Self(Arc::new(inner))
    }

    /// Jet at `z`, which must lie in the open unit disk.
    pub fn eval(&self, z: Complex64) -> Result<Jet3> {
        check_disk(z)?;
        self.0.jet(z).and_then(check_finite).map_err(|e| e.at(z))
    }

    /// Jet of the derivative at `z` (slots `d0..=d2` exact).
    pub fn eval_derivative(&self, z: Complex64) -> Result<Jet3> {
        check_disk(z)?;
        self.0
            .derivative_jet(z)
            .and_then(check_finite)
            .map_err(|e| e.at(z))
    }

    /// Jet at `z` without the disk restriction.
    pub fn jet_anywhere(&self, z: Complex64) -> Result<Jet3> {
        self.0.jet(z)
    }

    pub fn derivative_jet_anywhere(&self, z: Complex64) -> Result<Jet3> {
        self.0.derivative_jet(z)
    }

    pub fn describe(&self) -> String {
        self.0.describe()
    }

    pub fn identity() -> Self {
        Self::new(Identity)
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(Constant(c))
    }

    pub fn zero() -> Self {
        Self::constant(ZERO)
    }

    pub fn polynomial(coefficients: Vec<Complex64>) -> Self {
        Self::new(Polynomial(coefficients))
    }

    /// `(a z + b) / (c z + d)`.
    pub fn mobius(p: MobiusParams) -> Result<Self> {
        p.validate()?;
        Ok(Self::new(Mobius(p)))
    }

    /// `e^{iθ} (z + ζ) / (1 + conj(ζ) z)`.
    pub fn disk_automorphism(zeta: Complex64, theta: f64) -> Result<Self> {
        check_disk(zeta)?;
        let rot = Complex64::from_polar(1.0, theta);
        Ok(Self::new(Automorphism {
            zeta,
            theta,
            mobius: MobiusParams::new(rot, rot * zeta, zeta.conj(), ONE),
        }))
    }

    /// Koebe function `z / (1 - z)^2`.
    pub fn koebe() -> Self {
        Self::new(Koebe)
    }

    /// Lens map `(ℓ^α - 1)/(ℓ^α + 1)` with `ℓ(z) = (1 + z)/(1 - z)`.
    pub fn lens(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        Ok(Self::new(Lens { alpha }))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(Scale(c, self.clone()))
    }

    pub fn shift(&self, c: Complex64) -> Self {
        self.clone() + Self::constant(c)
    }

    /// Quotient `self / denominator`, failing lazily where the denominator
    /// vanishes.
    pub fn div(&self, denominator: &AnalyticMap) -> Self {
        Self::new(Binary {
            op: BinaryOp::Quotient,
            a: self.clone(),
            b: denominator.clone(),
        })
    }

    /// `self ∘ inner` with no restriction on where `inner` lands.
    pub fn compose(&self, inner: &AnalyticMap) -> Self {
        Self::new(Compose {
            outer: self.clone(),
            inner: inner.clone(),
            require_disk: false,
        })
    }

    /// `self ∘ inner` where `inner` must map into the unit disk; evaluation
    /// fails with [`Error::PointOutsideDisk`] otherwise.
    pub fn compose_in_disk(&self, inner: &AnalyticMap) -> Self {
        Self::new(Compose {
            outer: self.clone(),
            inner: inner.clone(),
            require_disk: true,
        })
    }

    pub fn exp(&self) -> Self {
        Self::new(Unary {
            op: UnaryOp::Exp,
            inner: self.clone(),
        })
    }

    pub fn ln(&self) -> Self {
        Self::new(Unary {
            op: UnaryOp::Log,
            inner: self.clone(),
        })
    }

    pub fn powf(&self, alpha: f64) -> Self {
        Self::new(Unary {
            op: UnaryOp::Pow(alpha),
            inner: self.clone(),
        })
    }

    /// `z ↦ ∫_0^z self(s) ds` along the straight segment, by adaptive
    /// Gauss–Legendre quadrature.
    pub fn antiderivative(&self) -> Self {
        Self::new(Antiderivative(self.clone()))
    }

    /// The derivative as a map. Its jets carry a zero top slot.
    pub fn derivative(&self) -> Self {
        Self::new(Derivative(self.clone()))
    }
}

impl Add for AnalyticMap {
    type Output = AnalyticMap;
    fn add(self, b: AnalyticMap) -> AnalyticMap {
        AnalyticMap::new(Binary {
            op: BinaryOp::Sum,
            a: self,
            b,
        })
    }
}

impl Sub for AnalyticMap {
    type Output = AnalyticMap;
    fn sub(self, b: AnalyticMap) -> AnalyticMap {
        AnalyticMap::new(Binary {
            op: BinaryOp::Difference,
            a: self,
            b,
        })
    }
}

impl Mul for AnalyticMap {
    type Output = AnalyticMap;
    fn mul(self, b: AnalyticMap) -> AnalyticMap {
        AnalyticMap::new(Binary {
            op: BinaryOp::Product,
            a: self,
            b,
        })
    }
}

impl Neg for AnalyticMap {
    type Output = AnalyticMap;
    fn neg(self) -> AnalyticMap {
        self.scale(-ONE)
    }
}

/// Coefficients of `(a z + b)/(c z + d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusParams {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MobiusParams {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self { a, b, c, d }
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn validate(&self) -> Result<()> {
        let scale = (self.a * self.d).norm() + (self.b * self.c).norm();
        if !(self.determinant().norm() > 1e-14 * scale) {
            return Err(Error::DegenerateMobius);
        }
        Ok(())
    }

    fn jet(&self, z: Complex64) -> Result<Jet3> {
        let w = self.c * z + self.d;
        let m = w.norm();
        if !(m > jet::DEFAULT_DIV_EPSILON) {
            return Err(Error::DivisionNearZero {
                modulus: m,
                at: None,
            });
        }
        let det = self.determinant();
        let inv = ONE / w;
        let inv2 = inv * inv;
        Ok(Jet3::new(
            (self.a * z + self.b) * inv,
            det * inv2,
            -2.0 * self.c * det * inv2 * inv,
            6.0 * self.c * self.c * det * inv2 * inv2,
        ))
    }
}

struct Identity;

impl Analytic for Identity {
    fn jet(&self, z: Complex64) -> Result<Jet3> {
        Ok(Jet3::variable(z))
    }
    fn describe(&self) -> String {
        "z".into()
    }
}

struct Constant(Complex64);

impl Analytic for Constant {
    fn jet(&self, _z: Complex64) -> Result<Jet3> {
        Ok(Jet3::constant(self.0))
    }
    fn derivative_jet(&self, _z: Complex64) -> Result<Jet3> {
        Ok(Jet3::zero())
    }
    fn describe(&self) -> String {
        fmt_complex(self.0)
    }
}

struct Polynomial(Vec<Complex64>);

impl Analytic for Polynomial {
    fn jet(&self, z: Complex64) -> Result<Jet3> {
        let var = Jet3::variable(z);
        let mut acc = Jet3::zero();
        for c in self.0.iter().rev() {
            acc = acc * var + *c;
        }
        Ok(acc)
    }
    fn describe(&self) -> String {
        let terms: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != ZERO)
            .map(|(k, c)| match k {
                0 => fmt_complex(*c),
                1 => format!("{}*z", fmt_complex(*c)),
                _ => format!("{}*z^{k}", fmt_complex(*c)),
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

struct Mobius(MobiusParams);

impl Analytic for Mobius {
    fn jet(&self, z: Complex64) -> Result<Jet3> {
        self.0.jet(z)
    }
    fn describe(&self) -> String {
        let p = &self.0;
        format!(
            "mobius({}, {}, {}, {})",
            fmt_complex(p.a),
            fmt_complex(p.b),
            fmt_complex(p.c),
            fmt_complex(p.d)
        )
    }
}

struct Automorphism {
    zeta: Complex64,
    theta: f64,
    mobius: MobiusParams,
}

impl Analytic for Automorphism {
    fn jet(&self, z: Complex64) -> Result<Jet3> {
        self.mobius.jet(z)
    }
    fn describe(&self) -> String {
        format!("automorphism({}, {})", fmt_complex(self.zeta), self.theta)
    }
}

struct Koebe;

impl Analytic for Koebe {
    fn jet(&self, z: Complex64) -> Result<Jet3> {
        let w = ONE - z;
        let m = w.norm();
        if !(m > jet::DEFAULT_DIV_EPSILON) {
            return Err(Error::DivisionNearZero {
                modulus: m,
                at: None,
            });
        }
        let inv = ONE / w;
        let inv2 = inv * inv;
        let inv3 = inv2 * inv;
        Ok(Jet3::new(
            z * inv2,
            (ONE + z) * inv3,
            (4.0 + 2.0 * z) * inv3 * inv,
            (18.0 + 6.0 * z) * inv3 * inv2,
        ))
    }
    fn describe(&self) -> String {
        "koebe()".into()
    }
}

struct Lens {
    alpha: f64,
}

impl Analytic for Lens {
    fn jet(&self, z: Complex64) -> Result<Jet3> {
        let var = Jet3::variable(z);
        let ell = (Jet3::one() + var).checked_div(&(Jet3::one() - var))?;
        let p = ell.powf(self.alpha)?;
        (p - ONE).checked_div(&(p + ONE))
    }
    fn describe(&self) -> String {
        format!("lens({})", self.alpha)
    }
}

struct Scale(Complex64, AnalyticMap);

impl Analytic for Scale {
    fn jet(&self, z: Complex64) -> Result<Jet3> {
        Ok(self.1 .0.jet(z)?.scale(self.0))
    }
    fn derivative_jet(&self, z: Complex64) -> Result<Jet3> {
        Ok(self.1 .0.derivative_jet(z)?.scale(self.0))
    }
    fn describe(&self) -> String {
        format!("{}*({})", fmt_complex(self.0), self.1.describe())
    }
}

#[derive(Clone, Copy)]
enum BinaryOp {
    Sum,
    Difference,
    Product,
    Quotient,
}

struct Binary {
    op: BinaryOp,
    a: AnalyticMap,
    b: AnalyticMap,
}

impl Analytic for Binary {
    fn jet(&self, z: Complex64) -> Result<Jet3> {
        let a = self.a.0.jet(z)?;
        let b = self.b.0.jet(z)?;
        match self.op {
            BinaryOp::Sum => Ok(a + b),
            BinaryOp::Difference => Ok(a - b),
            BinaryOp::Product => Ok(a * b),
            BinaryOp::Quotient => a.checked_div(&b),
        }
    }
    fn derivative_jet(&self, z: Complex64) -> Result<Jet3> {
        match self.op {
            BinaryOp::Sum => Ok(self.a.0.derivative_jet(z)? + self.b.0.derivative_jet(z)?),
            BinaryOp::Difference => {
                Ok(self.a.0.derivative_jet(z)? - self.b.0.derivative_jet(z)?)
            }
            _ => self.jet(z).map(|j| j.derivative()),
        }
    }
    fn describe(&self) -> String {
        let sym = match self.op {
            BinaryOp::Sum => "+",
            BinaryOp::Difference => "-",
            BinaryOp::Product => "*",
            BinaryOp::Quotient => "/",
        };
        format!("({} {sym} {})", self.a.describe(), self.b.describe())
    }
}

#[derive(Clone, Copy)]
enum UnaryOp {
    Exp,
    Log,
    Pow(f64),
}

struct Unary {
    op: UnaryOp,
    inner: AnalyticMap,
}

impl Analytic for Unary {
    fn jet(&self, z: Complex64) -> Result<Jet3> {
        let j = self.inner.0.jet(z)?;
        match self.op {
            UnaryOp::Exp => Ok(j.exp()),
            UnaryOp::Log => j.ln(),
            UnaryOp::Pow(alpha) => j.powf(alpha),
        }
    }
    fn describe(&self) -> String {
        match self.op {
            UnaryOp::Exp => format!("exp({})", self.inner.describe()),
            UnaryOp::Log => format!("log({})", self.inner.describe()),
            UnaryOp::Pow(alpha) => format!("pow({}, {alpha})", self.inner.describe()),
        }
    }
}

struct Compose {
    outer: AnalyticMap,
    inner: AnalyticMap,
    require_disk: bool,
}

impl Compose {
    fn inner_jet(&self, z: Complex64) -> Result<Jet3> {
        let inner = self.inner.0.jet(z)?;
        if self.require_disk {
            check_disk(inner.d0)?;
        }
        Ok(inner)
    }
}

impl Analytic for Compose {
    fn jet(&self, z: Complex64) -> Result<Jet3> {
        let inner = self.inner_jet(z)?;
        let outer = self.outer.0.jet(inner.d0)?;
        Ok(jet::compose(&outer, &inner))
    }
    fn derivative_jet(&self, z: Complex64) -> Result<Jet3> {
        // The chain rule never needs the outer value, only its derivatives.
        let inner = self.inner_jet(z)?;
        let od = self.outer.0.derivative_jet(inner.d0)?;
        let outer = Jet3::new(ZERO, od.d0, od.d1, od.d2);
        Ok(jet::compose(&outer, &inner).derivative())
    }
    fn describe(&self) -> String {
        format!(
            "compose({}, {})",
            self.outer.describe(),
            self.inner.describe()
        )
    }
}

struct Antiderivative(AnalyticMap);

impl Analytic for Antiderivative {
    fn jet(&self, z: Complex64) -> Result<Jet3> {
        let integrand = &self.0 .0;
        let value = quadrature::segment_integral(|s| integrand.jet(s).map(|j| j.d0), z)?;
        let d = integrand.jet(z)?;
        Ok(Jet3::new(value, d.d0, d.d1, d.d2))
    }
    fn derivative_jet(&self, z: Complex64) -> Result<Jet3> {
        self.0 .0.jet(z)
    }
    fn describe(&self) -> String {
        format!("integral({})", self.0.describe())
    }
}

struct Derivative(AnalyticMap);

impl Analytic for Derivative {
    fn jet(&self, z: Complex64) -> Result<Jet3> {
        self.0 .0.derivative_jet(z)
    }
    fn describe(&self) -> String {
        format!("derivative({})", self.0.describe())
    }
}

/// Formats `a+bi` the way the map-spec grammar reads it.
pub fn fmt_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else if c.im < 0.0 {
        format!("({}-{}i)", c.re, -c.im)
    } else {
        format!("({}+{}i)", c.re, c.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
    }

    fn jets_close(a: &Jet3, b: &Jet3, tol: f64) -> bool {
        a.components()
            .iter()
            .zip(b.components().iter())
            .all(|(x, y)| close(*x, *y, tol))
    }

    fn fd(f: impl Fn(Complex64) -> Complex64, z: Complex64, h: f64) -> Complex64 {
        (-f(z + 2.0 * h) + 8.0 * f(z + h) - 8.0 * f(z - h) + f(z - 2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn mobius_examples() {
        let id = AnalyticMap::mobius(MobiusParams::new(ONE, ZERO, ZERO, ONE)).unwrap();
        assert_eq!(id.eval(c(0.5, 0.0)).unwrap(), Jet3::from_reals([0.5, 1.0, 0.0, 0.0]));

        // z / (z + 1): value 0, derivative 1/(z+1)^2 = 1 at 0.
        let m = AnalyticMap::mobius(MobiusParams::new(ONE, ZERO, ONE, ONE)).unwrap();
        let j = m.eval(ZERO).unwrap();
        assert_eq!(j.d0, ZERO);
        assert_eq!(j.d1, ONE);
        let z = c(0.3, -0.2);
        let direct = |w: Complex64| w / (w + 1.0);
        assert!(close(m.eval(z).unwrap().d1, fd(direct, z, 1e-4), 1e-10));

        assert!(matches!(
            AnalyticMap::mobius(MobiusParams::new(ONE, ONE, ONE, ONE)),
            Err(Error::DegenerateMobius)
        ));
    }

    #[test]
    fn mobius_pole_inside_disk() {
        // pole at z = 0.5
        let m = AnalyticMap::mobius(MobiusParams::new(ONE, ZERO, ONE, c(-0.5, 0.0))).unwrap();
        let err = m.eval(c(0.5, 0.0)).unwrap_err();
        assert!(matches!(err, Error::DivisionNearZero { at: Some(_), .. }));
    }

    #[test]
    fn evaluation_outside_disk_fails() {
        let id = AnalyticMap::identity();
        for z in [c(1.0, 0.0), c(0.8, 0.8), c(f64::NAN, 0.0)] {
            assert!(matches!(id.eval(z), Err(Error::PointOutsideDisk { .. })));
        }
    }

    #[test]
    fn automorphism_examples() {
        let id = AnalyticMap::disk_automorphism(ZERO, 0.0).unwrap();
        let z = c(0.2, 0.7);
        assert_eq!(id.eval(z).unwrap(), Jet3::variable(z));

        let s = AnalyticMap::disk_automorphism(c(0.5, 0.0), 0.0).unwrap();
        assert_eq!(s.eval(ZERO).unwrap().d0, c(0.5, 0.0));

        assert!(matches!(
            AnalyticMap::disk_automorphism(c(1.0, 0.0), 0.0),
            Err(Error::PointOutsideDisk { .. })
        ));

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let zeta = c(-0.6, 0.55);
        let s = AnalyticMap::disk_automorphism(zeta, 1.3).unwrap();
        for _ in 0..10_000 {
            let r = rng.random::<f64>().sqrt() * 0.999_999;
            let z = Complex64::from_polar(r, rng.random::<f64>() * std::f64::consts::TAU);
            assert!(s.eval(z).unwrap().d0.norm() < 1.0);
        }
    }

    #[test]
    fn automorphisms_compose_within_group() {
        let (z1, t1) = (c(0.3, -0.4), 0.7);
        let (z2, t2) = (c(-0.5, 0.1), -1.1);
        let s1 = AnalyticMap::disk_automorphism(z1, t1).unwrap();
        let s2 = AnalyticMap::disk_automorphism(z2, t2).unwrap();
        let comp = s2.compose_in_disk(&s1);
        // e^{iθ}(z + ζ)/(1 + conj(ζ) z) has value e^{iθ} ζ and derivative
        // e^{iθ}(1 - |ζ|^2) at the origin.
        let j0 = comp.eval(ZERO).unwrap();
        let rot = j0.d1 / j0.d1.norm();
        let zeta = j0.d0 / rot;
        let direct = AnalyticMap::disk_automorphism(zeta, rot.arg()).unwrap();
        for z in [c(0.1, 0.1), c(-0.7, 0.2), c(0.0, -0.95)] {
            assert!(jets_close(&comp.eval(z).unwrap(), &direct.eval(z).unwrap(), 1e-12));
        }
    }

    #[test]
    fn lens_examples() {
        let l1 = AnalyticMap::lens(1.0).unwrap();
        for z in [c(0.3, 0.4), c(-0.9, 0.0), c(0.0, 0.99)] {
            assert!(jets_close(&l1.eval(z).unwrap(), &Jet3::variable(z), 1e-12));
        }
        for alpha in [0.1, 0.5, 0.9] {
            let l = AnalyticMap::lens(alpha).unwrap();
            assert_eq!(l.eval(ZERO).unwrap().d0, ZERO);
        }
        // α = 1/2 via a square root
        let z = c(0.3, 0.0);
        let ell = (1.0 + z) / (1.0 - z);
        let s = ell.sqrt();
        let direct = (s - 1.0) / (s + 1.0);
        let got = AnalyticMap::lens(0.5).unwrap().eval(z).unwrap().d0;
        assert!(close(got, direct, 1e-14));

        for alpha in [0.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(AnalyticMap::lens(alpha), Err(Error::InvalidAlpha(_))));
        }
    }

    #[test]
    fn koebe_matches_closed_form() {
        let k = AnalyticMap::koebe();
        let z = c(0.4, -0.3);
        let direct = |w: Complex64| w / ((1.0 - w) * (1.0 - w));
        let j = k.eval(z).unwrap();
        assert!(close(j.d0, direct(z), 1e-15));
        assert!(close(j.d1, fd(direct, z, 1e-4), 1e-9));
    }

    #[test]
    fn polynomial_and_arithmetic() {
        let p = AnalyticMap::polynomial(vec![c(1.0, 0.0), c(0.0, 2.0), c(3.0, 0.0)]);
        let z = c(0.25, 0.5);
        let j = p.eval(z).unwrap();
        assert!(close(j.d0, 1.0 + c(0.0, 2.0) * z + 3.0 * z * z, 1e-15));
        assert!(close(j.d2, c(6.0, 0.0), 1e-15));
        let q = (p.clone() - p.clone()).eval(z).unwrap();
        assert_eq!(q, Jet3::zero());
        let r = p.div(&p).eval(z).unwrap();
        assert!(jets_close(&r, &Jet3::one(), 1e-14));
    }

    #[test]
    fn antiderivative_recovers_primitive() {
        let e = AnalyticMap::identity().exp();
        let g = e.antiderivative();
        let z = c(0.6, 0.5);
        let j = g.eval(z).unwrap();
        assert!(close(j.d0, z.exp() - 1.0, 1e-13));
        assert!(close(j.d1, z.exp(), 1e-15));
        assert!(close(j.d3, z.exp(), 1e-15));
        let d = g.eval_derivative(z).unwrap();
        assert!(close(d.d2, z.exp(), 1e-15));
    }

    #[test]
    fn compose_in_disk_guards() {
        let two_z = AnalyticMap::identity().scale(c(2.0, 0.0));
        let f = AnalyticMap::identity().compose_in_disk(&two_z);
        assert!(matches!(
            f.eval(c(0.6, 0.0)),
            Err(Error::PointOutsideDisk { .. })
        ));
        let g = AnalyticMap::identity().compose(&two_z);
        assert!(g.eval(c(0.6, 0.0)).is_ok());
    }

    #[test]
    fn derivative_jets_agree_with_full_jets() {
        let g = AnalyticMap::lens(0.3).unwrap().antiderivative();
        let s = AnalyticMap::disk_automorphism(c(0.2, 0.1), 0.4).unwrap();
        let m = (g.compose_in_disk(&s) - AnalyticMap::constant(c(1.0, 1.0))).scale(c(0.5, -2.0));
        let z = c(-0.3, 0.45);
        let full = m.eval(z).unwrap().derivative();
        let fast = m.eval_derivative(z).unwrap();
        for k in 0..3 {
            assert!(close(full.components()[k], fast.components()[k], 1e-12));
        }
    }

    #[test]
    fn evaluation_is_deterministic() {
        let m = AnalyticMap::lens(0.37).unwrap().compose(&AnalyticMap::koebe().scale(c(0.1, 0.0)));
        let z = c(0.1, -0.2);
        assert_eq!(m.eval(z).unwrap(), m.eval(z).unwrap());
    }
}
