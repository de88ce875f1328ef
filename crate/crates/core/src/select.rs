//! Closed-form model-selection optima and evidence gaps.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::saddle::{solve_t_star, solve_z_star};
use crate::scalar::{weighted, Real};

/// Evidence-maximizing prior variance σ*² = ν^{1/(L+1)}.
pub fn sigma_star<T: Real>(nu: T, depth: usize) -> Result<T> {
    if !(nu > T::zero()) {
        return Err(Error::InvalidArgs(format!("nu must be positive, got {nu}")));
    }
    Ok(nu.powf(T::of(depth + 1).recip()))
}

/// Evidence-maximizing depth L* = log ν / log σ² − 1, real-valued.
pub fn l_star<T: Real>(nu: T, sigma2: T) -> Result<T> {
    if !(nu > T::zero()) || !(sigma2 > T::zero()) {
        return Err(Error::InvalidArgs("nu and sigma2 must be positive".into()));
    }
    if sigma2 == T::one() {
        return Err(Error::InvalidArgs("sigma2 = 1 has no finite optimal depth".into()));
    }
    Ok(nu.ln() / sigma2.ln() - T::one())
}

/// Optimal effective prior depth λ* = √(1 + log²ν) − 1.
pub fn lambda_prior_star<T: Real>(nu: T) -> Result<T> {
    if !(nu > T::zero()) {
        return Err(Error::InvalidArgs(format!("nu must be positive, got {nu}")));
    }
    let l = nu.ln();
    // Rationalised to stay accurate near ν = 1.
    Ok(l * l / ((T::one() + l * l).sqrt() + T::one()))
}

/// Second derivative of the fixed-λ_prior log evidence in λ at λ*.
pub fn lambda_prior_curvature<T: Real>(nu: T) -> Result<T> {
    let s = lambda_prior_star(nu)?;
    Ok(-(s + T::one()) / (T::lit(2.0) * s * s))
}

/// Per-unit-N log-evidence gap (1/N) log(Z_L / Z_{λN}) at leading order:
/// `(α/2)[log(1 + z*/α) − z*/α] + (L/2)[log(1 + z*) − z*]`, never positive.
/// Sign convention: Z_L / Z_{λN} ≈ exp(N · gap).
pub fn evidence_gap_finite_depth<T: Real>(depth: usize, alpha: T, nu: T, sigma2: T) -> Result<T> {
    let z = solve_z_star(nu, sigma2, alpha, depth)?.root;
    let half = T::lit(0.5);
    let u = z / alpha;
    Ok(half * alpha * (u.ln_1p() - u) + weighted(half * T::of(depth), z.ln_1p() - z))
}

/// ∂ log Z / ∂λ_post = P t*²/4 in the fixed-λ_post regime.
pub fn d_log_evidence_d_lambda_post<T: Real>(p: usize, nu: T, lambda_post: T) -> Result<T> {
    let t = solve_t_star(nu, lambda_post)?.root;
    Ok(T::of(p) * t * t / T::lit(4.0))
}

/// All selection quantities for one data set and architecture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionReport<T> {
    pub sigma_star2: T,
    /// `None` when σ² = 1.
    pub l_star: Option<T>,
    pub lambda_prior_star: T,
    pub evidence_gap: T,
    pub d_log_z_d_lambda_post: T,
}

pub fn selection_report<T: Real>(
    nu: T,
    depth: usize,
    sigma2: T,
    alpha: T,
    p: usize,
    lambda_post: T,
) -> Result<SelectionReport<T>> {
    Ok(SelectionReport {
        sigma_star2: sigma_star(nu, depth)?,
        l_star: if sigma2 == T::one() { None } else { Some(l_star(nu, sigma2)?) },
        lambda_prior_star: lambda_prior_star(nu)?,
        evidence_gap: evidence_gap_finite_depth(depth, alpha, nu, sigma2)?,
        d_log_z_d_lambda_post: d_log_evidence_d_lambda_post(p, nu, lambda_post)?,
    })
}
