//! Root finders for the saddle-point equations.
//!
//! Every equation here is a strictly increasing function of the unknown on an
//! open half-line, so a sign-change bracket always exists. Equations are
//! solved in logarithmic form so that large depths do not overflow.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DataSummary, NetworkSpec};
use crate::scalar::Real;

/// A root together with the diagnostics of the search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleSolution<T> {
    pub root: T,
    /// Value of the log-form equation at `root`.
    pub residual: T,
    pub iterations: usize,
    /// Sign-change bracket the search started from.
    pub bracket: (T, T),
}

/// Leading saddle ζ* and its first correction ζ** for general widths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZetaSolution<T> {
    pub zeta_star: T,
    pub zeta_star2: T,
    /// The large parameter `N` used to scale ζ.
    pub n_scale: T,
    pub solution: SaddleSolution<T>,
}

const MAX_ITER: usize = 2000;

/// Finds the root of an increasing function `g` on `(lower, ∞)`.
///
/// Bisection narrows the bracket to width 1e-3, after which Newton steps are
/// taken, falling back to bisection whenever a step leaves the bracket or
/// fails to halve the residual.
pub(crate) fn solve_increasing<T, G, D>(g: G, dg: D, lower: T, start: T, res_tol: T) -> Result<SaddleSolution<T>>
where
    T: Real,
    G: Fn(T) -> T,
    D: Fn(T) -> T,
{
    let fail = |msg: &str| Error::RootNotFound(msg.to_string());
    let g0 = g(start);
    if g0.is_nan() {
        return Err(fail("equation is NaN at the starting point"));
    }
    let one = T::one();
    let two = T::lit(2.0);
    if g0 == T::zero() {
        let lo = if lower.is_finite() { lower } else { start - one };
        return Ok(SaddleSolution { root: start, residual: T::zero(), iterations: 0, bracket: (lo, start + one) });
    }

    let mut iterations = 0;
    let (mut lo, mut hi) = (start, start);
    if g0 < T::zero() {
        let mut step = start.abs().max(one);
        loop {
            iterations += 1;
            hi = start + step;
            let v = g(hi);
            if v.is_nan() || !hi.is_finite() || iterations > MAX_ITER {
                return Err(fail("could not bracket the root from above"));
            }
            if v > T::zero() {
                break;
            }
            lo = hi;
            step = step * two;
        }
    } else {
        let mut step = start.abs().max(one);
        loop {
            iterations += 1;
            lo = if lower.is_finite() { lower + (hi - lower) / two } else { start - step };
            let v = g(lo);
            if v.is_nan() || lo <= lower || iterations > MAX_ITER {
                return Err(fail("could not bracket the root from below"));
            }
            if v < T::zero() {
                break;
            }
            hi = lo;
            step = step * two;
        }
    }
    let bracket = (lo, hi);

    let width_switch = T::lit(1e-3);
    let (mut a, mut b) = (lo, hi);
    let mut x = (a + b) / two;
    let mut fx = g(x);
    let mut prev = T::infinity();
    while iterations < MAX_ITER {
        iterations += 1;
        if fx.abs() <= res_tol || fx == T::zero() {
            break;
        }
        if fx < T::zero() {
            a = x;
        } else {
            b = x;
        }
        if b - a <= T::epsilon() * T::lit(4.0) * a.abs().max(b.abs()).max(T::min_positive_value()) {
            break;
        }
        let mut next = (a + b) / two;
        if b - a <= width_switch && fx.abs() < prev {
            let newton = x - fx / dg(x);
            if newton > a && newton < b && newton.is_finite() {
                next = newton;
            }
        }
        prev = fx.abs() / two;
        x = next;
        fx = g(x);
    }
    if !x.is_finite() || fx.is_nan() {
        return Err(fail("iteration produced a non-finite value"));
    }
    Ok(SaddleSolution { root: x, residual: fx, iterations, bracket })
}

fn residual_tol<T: Real>(rhs: T) -> T {
    T::epsilon() * T::lit(4.0) * rhs.abs().max(T::one())
}

/// Root z* > max{−1, −α} of ν/σ^{2(L+1)} = (1 + z/α)(1 + z)^L.
pub fn solve_z_star<T: Real>(nu: T, sigma2: T, alpha: T, depth: usize) -> Result<SaddleSolution<T>> {
    for (name, v) in [("nu", nu), ("sigma2", sigma2), ("alpha", alpha)] {
        if !(v > T::zero()) || !v.is_finite() {
            return Err(Error::InvalidArgs(format!("{name} must be positive, got {v}")));
        }
    }
    let l = T::of(depth);
    let target = nu.ln() - (l + T::one()) * sigma2.ln();
    let lower = if depth > 0 { -alpha.min(T::one()) } else { -alpha };
    if target == T::zero() {
        return Ok(SaddleSolution { root: T::zero(), residual: T::zero(), iterations: 0, bracket: (lower, T::one()) });
    }
    // The depth term is skipped at L = 0, where z may pass below −1.
    let g = |z: T| (z / alpha).ln_1p() - target + if depth > 0 { l * z.ln_1p() } else { T::zero() };
    let dg = |z: T| (alpha + z).recip() + if depth > 0 { l / (T::one() + z) } else { T::zero() };
    solve_increasing(g, dg, lower, T::zero(), residual_tol(target))
}

/// Root t* > −1 of ν = (1 + t) exp(λ_post t).
pub fn solve_t_star<T: Real>(nu: T, lambda_post: T) -> Result<SaddleSolution<T>> {
    if !(nu > T::zero()) || !nu.is_finite() {
        return Err(Error::InvalidArgs(format!("nu must be positive, got {nu}")));
    }
    if !(lambda_post >= T::zero()) || !lambda_post.is_finite() {
        return Err(Error::InvalidArgs(format!("lambda_post must be non-negative, got {lambda_post}")));
    }
    let target = nu.ln();
    if target == T::zero() {
        return Ok(SaddleSolution { root: T::zero(), residual: T::zero(), iterations: 0, bracket: (-T::one(), T::one()) });
    }
    let g = |t: T| t.ln_1p() + lambda_post * t - target;
    let dg = |t: T| (T::one() + t).recip() + lambda_post;
    solve_increasing(g, dg, -T::one(), T::zero(), residual_tol(target))
}

/// Saddle ζ* of the general-width product equation and its correction ζ**
/// for a width shift `k`.
///
/// `N` is the smallest hidden width (or `P` when there are no hidden layers),
/// so that equal widths `N_ℓ = N` give ζ* = z*/2.
pub fn solve_zeta<T: Real>(spec: &NetworkSpec<T>, data: &DataSummary<T>, k: usize) -> Result<ZetaSolution<T>> {
    spec.validate()?;
    data.validate()?;
    let p = T::of(data.p);
    let n = T::of(spec.min_width().unwrap_or(data.p));
    let groups = spec.width_groups();
    let depth = T::of(spec.depth());
    let target = data.nu().ln() - (depth + T::one()) * spec.sigma2.ln();

    // Solve in w = 2Nζ.
    let g = |w: T| {
        groups.iter().fold((w / p).ln_1p(), |acc, &(nl, m)| acc + T::of(m) * (w / T::of(nl)).ln_1p()) - target
    };
    let dg = |w: T| groups.iter().fold((p + w).recip(), |acc, &(nl, m)| acc + T::of(m) / (T::of(nl) + w));
    let lower = -groups.iter().fold(p, |acc, &(nl, _)| acc.min(T::of(nl)));
    let solution = if target == T::zero() {
        SaddleSolution { root: T::zero(), residual: T::zero(), iterations: 0, bracket: (lower, T::one()) }
    } else {
        solve_increasing(g, dg, lower, T::zero(), residual_tol(target))?
    };
    let two = T::lit(2.0);
    let zeta_star = solution.root / (two * n);
    let a = (two * zeta_star + p / n).recip();
    let b = groups.iter().fold(T::zero(), |acc, &(nl, m)| acc + T::of(m) / (two * zeta_star + T::of(nl) / n));
    let zeta_star2 = -(a + (T::one() + two * T::of(k)) * b) / (two * (a + b));
    Ok(ZetaSolution { zeta_star, zeta_star2, n_scale: n, solution })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn z_star_examples() {
        assert_eq!(solve_z_star(8.0, 2.0, 0.7, 2).unwrap().root, 0.0);
        assert_abs_diff_eq!(solve_z_star(3.0, 1.0, 1.0, 0).unwrap().root, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(solve_z_star(4.0, 1.0, 1.0, 1).unwrap().root, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn t_star_examples() {
        assert_eq!(solve_t_star(1.0, 3.0).unwrap().root, 0.0);
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(solve_t_star(2.0 * e, 1.0).unwrap().root, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(solve_t_star(5.0, 0.0).unwrap().root, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn root_inside_bracket() {
        for nu in [1e-3, 0.2, 3.0, 1e3] {
            let s = solve_z_star(nu, 1.0, 0.5, 4).unwrap();
            assert!(s.bracket.0 < s.root && s.root < s.bracket.1, "{s:?}");
        }
    }

    #[test]
    fn zeta_examples() {
        let spec = NetworkSpec::uniform(40, 20, 3, 1.0).unwrap();
        let data = DataSummary::from_nu(10, 40, 1.0).unwrap();
        let z = solve_zeta(&spec, &data, 0).unwrap();
        assert_eq!(z.zeta_star, 0.0);
        assert_abs_diff_eq!(z.zeta_star2, -0.5, epsilon = 1e-15);

        let data = DataSummary::from_nu(10, 40, 3.0).unwrap();
        let z = solve_zeta(&spec, &data, 2).unwrap();
        let zs = solve_z_star(3.0, 1.0, 0.5, 3).unwrap();
        assert_abs_diff_eq!(z.zeta_star, zs.root / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn single_precision_z_star() {
        let s = solve_z_star(4.0f32, 1.0, 1.0, 1).unwrap();
        assert!((s.root - 1.0).abs() < 1e-5);
    }
}
