//! Log-Gamma, digamma and trigamma for complex and real arguments.
//!
//! Arguments with real part below [`SHIFT`] are moved to the right with the
//! recurrence `Γ(z+1) = zΓ(z)`, after which the Stirling series is summed.
//! Adding principal logarithms of the shift factors one at a time keeps the
//! result on the analytic continuation of log Γ away from the positive axis.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

const SHIFT: f64 = 10.0;

// B_{2k} / (2k (2k-1)) for k = 1..6.
const STIRLING: [f64; 6] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
];

// B_{2k} / (2k) for k = 1..6.
const DIGAMMA: [f64; 6] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
];

// B_{2k} for k = 1..6.
const TRIGAMMA: [f64; 6] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
];

fn check_pole<T: Real>(re: T, im: T) -> Result<()> {
    if im == T::zero() && re <= T::zero() && re == re.floor() {
        return Err(Error::Pole(re.f64()));
    }
    if !re.is_finite() || !im.is_finite() {
        return Err(Error::InvalidArgs("non-finite argument".into()));
    }
    Ok(())
}

fn shifts<T: Real>(re: T) -> usize {
    let need = T::lit(SHIFT) - re;
    if need > T::zero() {
        need.ceil().to_usize().unwrap_or(0)
    } else {
        0
    }
}

/// Horner evaluation of `Σ c_k u^k` for `k = 0..n`.
fn series<T: Real>(coef: &[f64], u: Complex<T>) -> Complex<T> {
    coef.iter()
        .rev()
        .fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * u + T::lit(c))
}

/// Principal branch of log Γ(z).
pub fn log_gamma<T: Real>(z: Complex<T>) -> Result<Complex<T>> {
    check_pole(z.re, z.im)?;
    let n = shifts(z.re);
    let mut acc = Complex::new(T::zero(), T::zero());
    let mut w = z;
    for _ in 0..n {
        acc = acc + w.ln();
        w = w + T::one();
    }
    let half = T::lit(0.5);
    let inv = w.inv();
    let tail = series(&STIRLING, inv * inv) * inv;
    let lg = (w - half) * w.ln() - w + T::lit(0.5 * (2.0 * std::f64::consts::PI).ln()) + tail;
    Ok(lg - acc)
}

/// Digamma ψ(z) = d/dz log Γ(z).
pub fn digamma<T: Real>(z: Complex<T>) -> Result<Complex<T>> {
    check_pole(z.re, z.im)?;
    let n = shifts(z.re);
    let mut acc = Complex::new(T::zero(), T::zero());
    let mut w = z;
    for _ in 0..n {
        acc = acc + w.inv();
        w = w + T::one();
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let tail = series(&DIGAMMA, inv2) * inv2;
    Ok(w.ln() - inv * T::lit(0.5) - tail - acc)
}

/// Trigamma ψ'(z).
pub fn trigamma<T: Real>(z: Complex<T>) -> Result<Complex<T>> {
    check_pole(z.re, z.im)?;
    let n = shifts(z.re);
    let mut acc = Complex::new(T::zero(), T::zero());
    let mut w = z;
    for _ in 0..n {
        let r = w.inv();
        acc = acc + r * r;
        w = w + T::one();
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let tail = series(&TRIGAMMA, inv2) * inv2 * inv;
    Ok(inv + inv2 * T::lit(0.5) + tail + acc)
}

/// log Γ(x) for real `x > 0`.
pub fn ln_gamma<T: Real>(x: T) -> Result<T> {
    if x <= T::zero() {
        return Err(Error::InvalidArgs(format!("ln_gamma needs x > 0, got {x}")));
    }
    log_gamma(Complex::new(x, T::zero())).map(|v| v.re)
}

/// ψ(x) for real `x`, which may be negative but not a pole.
pub fn digamma_real<T: Real>(x: T) -> Result<T> {
    if x < T::zero() {
        // Reflection keeps the recurrence short for negative arguments.
        check_pole(x, T::zero())?;
        let pi = T::PI();
        let base = digamma_real(T::one() - x)?;
        return Ok(base - pi / (pi * x).tan());
    }
    digamma(Complex::new(x, T::zero())).map(|v| v.re)
}

/// ψ'(x) for real `x > 0`.
pub fn trigamma_real<T: Real>(x: T) -> Result<T> {
    if x <= T::zero() {
        return Err(Error::InvalidArgs(format!("trigamma needs x > 0, got {x}")));
    }
    trigamma(Complex::new(x, T::zero())).map(|v| v.re)
}

/// log k! via log Γ(k+1).
pub fn ln_factorial<T: Real>(k: usize) -> T {
    ln_gamma(T::of(k) + T::one()).unwrap_or_else(|_| T::zero())
}
