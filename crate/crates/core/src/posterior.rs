//! Exact and asymptotic evidence, predictive moments and the predictive
//! Gaussian of the zero-noise posterior.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::asymptotics::{log_evidence_asymptotic, RegimeParams, Sizes};
use crate::datagen::{sigma_perp, Geometry};
use crate::error::{Error, Result};
use crate::gamma::{ln_factorial, ln_gamma};
use crate::meijer::{scale_m, GArgs, QuadConfig, ShiftTarget};
use crate::model::{DataSummary, NetworkSpec, Regime};
use crate::scalar::Real;

/// Series terms are dropped once smaller than this fraction of the sum.
pub const SERIES_REL_TOL: f64 = 1e-14;
/// Hard cap on the number of series terms.
pub const SERIES_MAX_TERMS: usize = 200;

fn args<T: Real>(spec: &NetworkSpec<T>, data: &DataSummary<T>) -> Result<GArgs<T>> {
    GArgs::new(spec.clone(), *data)
}

/// log Z = (P/2) log(4π/‖θ*‖²) − Σ log Γ(N_ℓ/2) + log G.
pub fn log_evidence_exact<T: Real>(spec: &NetworkSpec<T>, data: &DataSummary<T>, cfg: &QuadConfig<T>) -> Result<T> {
    let a = args(spec, data)?;
    let log_g = a.gamma_product().log_meijer(cfg)?.log_value;
    let half_p = T::of(data.p) / T::lit(2.0);
    let four_pi = T::lit(4.0) * T::PI();
    let mut out = half_p * (four_pi / data.theta_star_norm2).ln() + log_g;
    for &n in &spec.widths {
        out = out - ln_gamma(T::of(n) / T::lit(2.0))?;
    }
    Ok(out)
}

/// Predictive mean θ*ᵀx.
pub fn posterior_mean<T: Real>(theta_star: &[T], x: &[T]) -> Result<T> {
    if theta_star.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: theta_star.len(), got: x.len() });
    }
    Ok(theta_star.iter().zip(x).map(|(&a, &b)| a * b).sum())
}

/// log(2M).
fn log_two_m<T: Real>(spec: &NetworkSpec<T>) -> T {
    scale_m(spec) - T::LN_2()
}

/// Var f(x) = 2M ‖x⊥‖² exp(Δ(log G)[1]).
pub fn posterior_variance_exact<T: Real>(
    spec: &NetworkSpec<T>,
    data: &DataSummary<T>,
    x_perp_norm2: T,
    cfg: &QuadConfig<T>,
) -> Result<T> {
    if !(x_perp_norm2 >= T::zero()) {
        return Err(Error::InvalidArgs("x_perp_norm2 must be non-negative".into()));
    }
    if x_perp_norm2 == T::zero() {
        return Ok(T::zero());
    }
    let delta = crate::meijer::delta_log_g(&args(spec, data)?, 1, ShiftTarget::Widths, cfg)?;
    Ok((log_two_m(spec) + x_perp_norm2.ln() + delta).exp())
}

/// c_N = Var f(x) · N0 / (ν ‖x⊥‖²).
pub fn variance_factor_exact<T: Real>(spec: &NetworkSpec<T>, data: &DataSummary<T>, cfg: &QuadConfig<T>) -> Result<T> {
    let delta = crate::meijer::delta_log_g(&args(spec, data)?, 1, ShiftTarget::Widths, cfg)?;
    Ok((log_two_m(spec) + T::of(spec.n0).ln() - data.nu().ln() + delta).exp())
}

/// Truncated characteristic-function series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharFnPartialSum<T> {
    pub value: Complex<T>,
    pub terms: usize,
    /// Magnitude of the first omitted term.
    pub truncation_bound: T,
}

fn series_terms<T: Real>(
    spec: &NetworkSpec<T>,
    data: &DataSummary<T>,
    t_perp_norm2: T,
    cfg: &QuadConfig<T>,
    mut keep_going: impl FnMut(usize, T, T) -> bool,
) -> Result<(T, usize, T)> {
    let a = args(spec, data)?;
    if !(t_perp_norm2 >= T::zero()) {
        return Err(Error::InvalidArgs("t_perp_norm2 must be non-negative".into()));
    }
    let mut sum = T::one();
    if t_perp_norm2 == T::zero() {
        return Ok((sum, 1, T::zero()));
    }
    let base = a.gamma_product().log_meijer(cfg)?.log_value;
    let log_ms = scale_m(spec) - T::lit(4.0).ln() + t_perp_norm2.ln();
    let flat = spec.depth() == 0;
    let mut k = 1;
    loop {
        let delta = if flat {
            T::zero()
        } else {
            a.with_shift(ShiftTarget::Widths, k).gamma_product().log_meijer(cfg)?.log_value - base
        };
        let magnitude = (T::of(k) * log_ms - ln_factorial::<T>(k) + delta).exp();
        if !keep_going(k, magnitude, sum) {
            return Ok((sum, k, magnitude));
        }
        sum = if k % 2 == 1 { sum - magnitude } else { sum + magnitude };
        k += 1;
    }
}

/// Partial sum of `Σ_k (−1)^k/k! (M‖t⊥‖²)^k G_k/G_0` over `k < k_terms`,
/// times `exp(−i⟨θ*, t⟩)`.
///
/// Fails when the first omitted term exceeds `tol · |sum|`; pass an infinite
/// `tol` to inspect unconverged partial sums.
#[allow(clippy::too_many_arguments)]
pub fn char_fn_partial_sum<T: Real>(
    spec: &NetworkSpec<T>,
    data: &DataSummary<T>,
    t_par_inner: T,
    t_perp_norm2: T,
    k_terms: usize,
    tol: T,
    cfg: &QuadConfig<T>,
) -> Result<CharFnPartialSum<T>> {
    if k_terms == 0 {
        return Err(Error::InvalidArgs("at least one series term is required".into()));
    }
    let (sum, terms, bound) = series_terms(spec, data, t_perp_norm2, cfg, |k, _, _| k < k_terms)?;
    if bound > tol * sum.abs() {
        return Err(Error::TruncationNotConverged { bound: bound.f64(), allowed: (tol * sum.abs()).f64() });
    }
    Ok(CharFnPartialSum { value: Complex::from_polar(sum, -t_par_inner), terms, truncation_bound: bound })
}

/// Z(t)/Z(0) with the series stopped at a term below `1e-14 · |sum|` or after
/// 200 terms.
pub fn char_fn<T: Real>(
    spec: &NetworkSpec<T>,
    data: &DataSummary<T>,
    t_par_inner: T,
    t_perp_norm2: T,
    cfg: &QuadConfig<T>,
) -> Result<CharFnPartialSum<T>> {
    let rel = T::lit(SERIES_REL_TOL);
    let (sum, terms, bound) = series_terms(spec, data, t_perp_norm2, cfg, |k, m, s| {
        k < SERIES_MAX_TERMS && m >= rel * s.abs()
    })?;
    if bound >= rel * sum.abs() && terms >= SERIES_MAX_TERMS {
        return Err(Error::TruncationNotConverged { bound: bound.f64(), allowed: (rel * sum.abs()).f64() });
    }
    Ok(CharFnPartialSum { value: Complex::from_polar(sum, -t_par_inner), terms, truncation_bound: bound })
}

/// Regime parameters implied by an architecture and data summary.
pub fn regime_params<T: Real>(spec: &NetworkSpec<T>, data: &DataSummary<T>, regime: Regime) -> Result<RegimeParams<T>> {
    let nu = data.nu();
    match regime {
        Regime::FiniteL => {
            let n = spec.min_width().unwrap_or(data.p);
            RegimeParams::finite_l(T::of(data.p) / T::of(n), nu, spec.sigma2, 0)
        }
        Regime::FixedLambdaPrior => {
            let mut p = RegimeParams::fixed_lambda_prior(spec.lambda_prior(), nu, 0)?;
            p.sigma2 = spec.sigma2;
            p.validate()?;
            Ok(p)
        }
        Regime::FixedLambdaPost => {
            let mut p = RegimeParams::fixed_lambda_post(data.lambda_post(spec), nu, 0)?;
            p.sigma2 = spec.sigma2;
            p.validate()?;
            Ok(p)
        }
    }
}

/// Limiting variance factor c of a regime: 1/(1 + z*/α), 1 or 1/(1 + t*).
pub fn variance_factor_limit<T: Real>(params: &RegimeParams<T>, depth: usize) -> Result<T> {
    params.validate()?;
    match params.regime {
        Regime::FiniteL => {
            let z = params.z_star(depth)?;
            Ok((T::one() + z / params.alpha.unwrap_or(T::one())).recip())
        }
        Regime::FixedLambdaPrior => Ok(T::one()),
        Regime::FixedLambdaPost => Ok((T::one() + params.t_star()?).recip()),
    }
}

/// Gaussian approximation of the predictive posterior at a set of points.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub mean: Vec<f64>,
    /// ν c (1 − α0) Σ⊥, so that a single point has variance ν c ‖x⊥‖²/N0.
    pub covariance: DMatrix<f64>,
    pub variance_factor_c: f64,
    pub log_evidence: f64,
    pub regime: Regime,
}

/// Predictive Gaussian with mean θ*ᵀx and perpendicular variance scaled by
/// the regime's limiting factor c.
pub fn predictive_gaussian(
    spec: &NetworkSpec<f64>,
    geometry: &Geometry,
    test_points: &[DVector<f64>],
    regime: Regime,
) -> Result<PosteriorSummary> {
    if spec.n0 != geometry.n0() {
        return Err(Error::DimensionMismatch { expected: spec.n0, got: geometry.n0() });
    }
    let data = geometry.summary()?;
    let params = regime_params(spec, &data, regime)?;
    let c = variance_factor_limit(&params, spec.depth())?;
    let sizes = Sizes { n0: spec.n0, p: data.p, widths: spec.widths.clone() };
    let log_evidence = log_evidence_asymptotic(&params, &sizes)?;
    let mean = test_points
        .iter()
        .map(|x| posterior_mean(geometry.theta_star.as_slice(), x.as_slice()))
        .collect::<Result<Vec<_>>>()?;
    let covariance = if data.p < spec.n0 {
        sigma_perp(test_points, geometry)? * (data.nu() * c * (1.0 - data.alpha0()))
    } else {
        DMatrix::zeros(test_points.len(), test_points.len())
    };
    Ok(PosteriorSummary { mean, covariance, variance_factor_c: c, log_evidence, regime })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg() -> QuadConfig<f64> {
        QuadConfig::with_tol(1e-12)
    }

    #[test]
    fn depth_zero_evidence_is_gaussian() {
        // With no hidden layers θ ~ N(0, σ²/N0 I) and the evidence is (2π)^P
        // times the density of θ_∥ at θ* in P dimensions.
        let (n0, p, s2) = (10usize, 4usize, 1.3f64);
        let spec = NetworkSpec::new(n0, vec![], s2).unwrap();
        let v = s2 / n0 as f64;
        let two_pi = 2.0 * std::f64::consts::PI;
        for theta2 in [0.05, 0.7, 3.0] {
            let data = DataSummary::new(p, n0, theta2).unwrap();
            let gauss = -(p as f64) / 2.0 * (two_pi * v).ln() - theta2 / (2.0 * v);
            let z = log_evidence_exact(&spec, &data, &cfg()).unwrap();
            assert_abs_diff_eq!(z, p as f64 * two_pi.ln() + gauss, epsilon = 1e-10);
        }
    }

    #[test]
    fn depth_zero_variance_is_prior() {
        let spec = NetworkSpec::new(12, vec![], 1.7).unwrap();
        let data = DataSummary::from_nu(5, 12, 2.0).unwrap();
        let v = posterior_variance_exact(&spec, &data, 3.0, &cfg()).unwrap();
        assert_abs_diff_eq!(v, 1.7 * 3.0 / 12.0, epsilon = 1e-14);
        assert_eq!(posterior_variance_exact(&spec, &data, 0.0, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn evidence_scaling_invariance() {
        let spec = NetworkSpec::new(20, vec![6, 9], 1.0).unwrap();
        let data = DataSummary::new(8, 20, 0.9).unwrap();
        let c: f64 = 1.6;
        let spec2 = NetworkSpec::new(20, vec![6, 9], c).unwrap();
        let data2 = DataSummary::new(8, 20, 0.9 * c.powi(3)).unwrap();
        let a = log_evidence_exact(&spec, &data, &cfg()).unwrap();
        let b = log_evidence_exact(&spec2, &data2, &cfg()).unwrap();
        assert_abs_diff_eq!(b - a, -4.0 * 3.0 * c.ln(), epsilon = 1e-9);
    }

    #[test]
    fn mean_examples() {
        let theta = [3.0, 4.0, 0.0];
        assert_eq!(posterior_mean(&theta, &[0.0, 0.0, 1.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(posterior_mean(&theta, &[0.6, 0.8, 0.0]).unwrap(), 5.0, epsilon = 1e-15);
        assert!(posterior_mean(&theta, &[1.0]).is_err());
    }

    #[test]
    fn char_fn_point_mass_and_telescoping() {
        let spec = NetworkSpec::new(6, vec![6], 1.0).unwrap();
        let data = DataSummary::from_nu(2, 6, 1.5).unwrap();
        let r = char_fn_partial_sum(&spec, &data, 0.8, 0.0, 3, 1e-14, &cfg()).unwrap();
        assert_abs_diff_eq!(r.value.norm(), 1.0, epsilon = 1e-15);
        let inf = f64::INFINITY;
        let one = char_fn_partial_sum(&spec, &data, 0.0, 0.5, 1, inf, &cfg()).unwrap();
        let two = char_fn_partial_sum(&spec, &data, 0.0, 0.5, 2, inf, &cfg()).unwrap();
        assert_abs_diff_eq!(one.value.re - two.value.re, one.truncation_bound, epsilon = 1e-15);
        assert!(char_fn_partial_sum(&spec, &data, 0.0, 0.5, 1, 1e-10, &cfg()).is_err());
    }
}
