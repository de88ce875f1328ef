//! Globally adaptive Gauss–Kronrod (7/15) integration of complex-valued
//! functions on a finite interval.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral<T> {
    pub value: Complex<T>,
    pub error: T,
    pub panels: usize,
}

#[derive(Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: Complex<T>,
    error: T,
}

fn gk15<T: Real, F: Fn(T) -> Complex<T>>(f: &F, a: T, b: T) -> Panel<T> {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let fc = f(mid);
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let pair = f(mid - dx) + f(mid + dx);
        kron = kron + pair * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * T::lit(WG[j / 2]);
        }
    }
    let value = kron * half;
    let error = ((kron - gauss) * half).norm();
    Panel { a, b, value, error }
}

/// Integrates `f` over `[a, b]`, starting from `initial` equal panels and
/// bisecting the panel with the largest error estimate until the summed
/// estimate drops below `rel_tol · |integral|`.
pub fn integrate<T, F>(f: F, a: T, b: T, initial: usize, rel_tol: T, max_panels: usize) -> Result<Integral<T>>
where
    T: Real,
    F: Fn(T) -> Complex<T>,
{
    let initial = initial.max(1);
    let width = (b - a) / T::of(initial);
    let mut panels: Vec<Panel<T>> = (0..initial)
        .map(|i| {
            let lo = a + width * T::of(i);
            let hi = if i + 1 == initial { b } else { lo + width };
            gk15(&f, lo, hi)
        })
        .collect();

    loop {
        let (value, error) = totals(&panels);
        if error <= rel_tol * value.norm() {
            panels.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap_or(std::cmp::Ordering::Equal));
            let (value, error) = totals(&panels);
            return Ok(Integral { value, error, panels: panels.len() });
        }
        if panels.len() >= max_panels {
            return Err(Error::QuadratureNonConvergence { error: (error / value.norm()).f64(), panels: panels.len() });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = panels.swap_remove(worst);
        let m = (p.a + p.b) * T::lit(0.5);
        panels.push(gk15(&f, p.a, m));
        panels.push(gk15(&f, m, p.b));
    }
}

fn totals<T: Real>(panels: &[Panel<T>]) -> (Complex<T>, T) {
    panels.iter().fold((Complex::new(T::zero(), T::zero()), T::zero()), |(v, e), p| (v + p.value, e + p.error))
}
