//! Adaptive Gauss–Legendre integration of complex-valued integrands over
//! real intervals.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::Result;

const ORDER: usize = 10;
const MAX_DEPTH: u32 = 40;
const DEFAULT_TOL: f64 = 1e-14;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

fn fixed<F>(f: &F, a: f64, b: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let (nodes, weights) = rule();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in nodes.iter().zip(weights) {
        acc += f(mid + half * x)? * *w;
    }
    Ok(acc * half)
}

/// Integrate `f` over `[a, b]`, bisecting until the two-panel estimate agrees
/// with the one-panel estimate to `tol` (relative to the magnitude of the
/// running integral, absolute below 1).
pub fn integrate<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let whole = fixed(f, a, b)?;
    recurse(f, a, b, whole, tol, 0)
}

fn recurse<F>(f: &F, a: f64, b: f64, whole: Complex64, tol: f64, depth: u32) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let mid = 0.5 * (a + b);
    let left = fixed(f, a, mid)?;
    let right = fixed(f, mid, b)?;
    let split = left + right;
    if depth >= MAX_DEPTH || (split - whole).norm() <= tol * split.norm().max(1.0) {
        return Ok(split);
    }
    Ok(recurse(f, a, mid, left, tol, depth + 1)? + recurse(f, mid, b, right, tol, depth + 1)?)
}

/// `∫_0^z f(s) ds` along the straight segment from 0 to `z`.
pub fn segment_integral<F>(f: F, z: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if z == Complex64::new(0.0, 0.0) {
        return Ok(z);
    }
    let integrand = |u: f64| f(z * u).map(|v| v * z);
    integrate(&integrand, 0.0, 1.0, DEFAULT_TOL)
}
