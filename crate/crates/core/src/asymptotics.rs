//! Large-width expansions of log G and Δ(log G)[k] in the three regimes.
//!
//! Every explicitly known O(1) term is kept. Regimes validate their inputs
//! and never extrapolate: the fixed-λ regimes require σ² = 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Regime;
use crate::saddle::{solve_t_star, solve_z_star};
use crate::scalar::{weighted, Real};

/// Parameters selecting an asymptotic regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams<T> {
    pub regime: Regime,
    /// P/N, finite-depth regime only.
    pub alpha: Option<T>,
    /// Σ 1/N_ℓ, fixed-λ_prior regime only.
    pub lambda_prior: Option<T>,
    /// P Σ 1/N_ℓ, fixed-λ_post regime only.
    pub lambda_post: Option<T>,
    pub nu: T,
    pub sigma2: T,
    /// Width shift of the G-function.
    pub k: usize,
}

/// Problem sizes for the evidence expansions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sizes {
    pub n0: usize,
    pub p: usize,
    pub widths: Vec<usize>,
}

impl<T: Real> RegimeParams<T> {
    pub fn finite_l(alpha: T, nu: T, sigma2: T, k: usize) -> Result<Self> {
        let p = Self { regime: Regime::FiniteL, alpha: Some(alpha), lambda_prior: None, lambda_post: None, nu, sigma2, k };
        p.validate()?;
        Ok(p)
    }

    pub fn fixed_lambda_prior(lambda_prior: T, nu: T, k: usize) -> Result<Self> {
        let p = Self {
            regime: Regime::FixedLambdaPrior,
            alpha: None,
            lambda_prior: Some(lambda_prior),
            lambda_post: None,
            nu,
            sigma2: T::one(),
            k,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn fixed_lambda_post(lambda_post: T, nu: T, k: usize) -> Result<Self> {
        let p = Self {
            regime: Regime::FixedLambdaPost,
            alpha: None,
            lambda_prior: None,
            lambda_post: Some(lambda_post),
            nu,
            sigma2: T::one(),
            k,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidRegime(m));
        if !(self.nu > T::zero()) || !(self.sigma2 > T::zero()) {
            return bad(format!("nu and sigma2 must be positive, got {} and {}", self.nu, self.sigma2));
        }
        let (field, name) = match self.regime {
            Regime::FiniteL => (self.alpha, "alpha"),
            Regime::FixedLambdaPrior => (self.lambda_prior, "lambda_prior"),
            Regime::FixedLambdaPost => (self.lambda_post, "lambda_post"),
        };
        match field {
            Some(v) if v > T::zero() && v.is_finite() => {}
            _ => return bad(format!("{} regime needs a positive {name}", self.regime.as_str())),
        }
        if self.regime != Regime::FiniteL && self.sigma2 != T::one() {
            return bad(format!("{} regime requires sigma2 = 1, got {}", self.regime.as_str(), self.sigma2));
        }
        Ok(())
    }

    fn expect(&self, regime: Regime) -> Result<()> {
        self.validate()?;
        if self.regime != regime {
            return Err(Error::InvalidRegime(format!("expected {}, got {}", regime.as_str(), self.regime.as_str())));
        }
        Ok(())
    }

    /// z* of the finite-depth regime.
    pub fn z_star(&self, depth: usize) -> Result<T> {
        self.expect(Regime::FiniteL)?;
        Ok(solve_z_star(self.nu, self.sigma2, self.alpha.unwrap_or(T::one()), depth)?.root)
    }

    /// t* of the fixed-λ_post regime.
    pub fn t_star(&self) -> Result<T> {
        self.expect(Regime::FixedLambdaPost)?;
        Ok(solve_t_star(self.nu, self.lambda_post.unwrap_or(T::zero()))?.root)
    }
}

fn half<T: Real>(x: T) -> T {
    x * T::lit(0.5)
}

fn check_lambda<T: Real>(given: Option<T>, derived: T, name: &str) -> Result<T> {
    let given = given.unwrap_or(derived);
    if (given - derived).abs() > T::lit(1e-9) * derived.abs().max(T::one()) {
        return Err(Error::InvalidRegime(format!("{name} = {given} does not match the widths ({derived})")));
    }
    Ok(derived)
}

fn ln_2pi<T: Real>() -> T {
    (T::lit(2.0) * T::PI()).ln()
}

/// log G with `depth` hidden layers of width `n` and `P = αN`.
pub fn log_g_case_a<T: Real>(n: usize, depth: usize, params: &RegimeParams<T>) -> Result<T> {
    params.expect(Regime::FiniteL)?;
    if n < 2 {
        return Err(Error::InvalidArgs("width must be at least 2".into()));
    }
    let alpha = params.alpha.unwrap_or(T::one());
    let z = params.z_star(depth)?;
    let n = T::of(n);
    let l = T::of(depth);
    let k = T::of(params.k);
    let one = T::one();
    let half_n = half(n);
    let ratio = one + z / alpha;
    let lead = half_n
        * (alpha * ((alpha * half_n).ln() + ratio.ln() - ratio) + weighted(l, half_n.ln() + z.ln_1p() - (one + z)));
    let shift = weighted(half(l * (T::lit(2.0) * k - one)), half_n.ln() + z.ln_1p());
    let hess = -half((one + weighted(l, (alpha + z) / (one + z))).ln());
    Ok(lead + shift + half(l) * ln_2pi::<T>() + hess)
}

/// Δ(log G)[k] = kL[log(N/2) + log(1 + z*)].
pub fn delta_log_g_case_a<T: Real>(n: usize, depth: usize, params: &RegimeParams<T>, k: usize) -> Result<T> {
    let z = params.z_star(depth)?;
    Ok(weighted(T::of(k) * T::of(depth), half(T::of(n)).ln() + z.ln_1p()))
}

/// log G for arbitrary widths with λ_prior = Σ 1/N_ℓ held fixed.
pub fn log_g_case_b<T: Real>(widths: &[usize], p: usize, params: &RegimeParams<T>) -> Result<T> {
    params.expect(Regime::FixedLambdaPrior)?;
    let lambda = check_lambda(params.lambda_prior, widths.iter().map(|&n| T::of(n).recip()).sum(), "lambda_prior")?;
    let one = T::one();
    let k = T::of(params.k);
    let log_nu = params.nu.ln();
    let sum_log: T = widths.iter().map(|&n| half(T::of(n)).ln()).sum();
    let stirling: T = widths.iter().map(|&n| half(T::of(n)) * (half(T::of(n)).ln() - one)).sum();
    let half_p = half(T::of(p));
    Ok(stirling + half_p * (half_p.ln() - one) + half(T::of(widths.len())) * ln_2pi::<T>() + (k - half(one)) * sum_log
        - half(half_p.ln())
        + (k - half(one)) * log_nu
        - lambda / T::lit(12.0)
        - log_nu * log_nu / (T::lit(4.0) * lambda)
        - half((T::lit(2.0) * lambda).ln()))
}

/// Δ(log G)[k] = k[Σ log(N_ℓ/2) + log ν].
pub fn delta_log_g_case_b<T: Real>(widths: &[usize], params: &RegimeParams<T>, k: usize) -> Result<T> {
    params.expect(Regime::FixedLambdaPrior)?;
    check_lambda(params.lambda_prior, widths.iter().map(|&n| T::of(n).recip()).sum(), "lambda_prior")?;
    let sum_log: T = widths.iter().map(|&n| half(T::of(n)).ln()).sum();
    Ok(T::of(k) * (sum_log + params.nu.ln()))
}

/// log G for arbitrary widths with λ_post = P Σ 1/N_ℓ held fixed.
///
/// The constant term is `−log ν`. A `−log P` constant would be off from the
/// exact value by `log P − log ν`.
pub fn log_g_case_c<T: Real>(widths: &[usize], p: usize, params: &RegimeParams<T>) -> Result<T> {
    params.expect(Regime::FixedLambdaPost)?;
    let lambda = check_lambda(
        params.lambda_post,
        T::of(p) * widths.iter().map(|&n| T::of(n).recip()).sum::<T>(),
        "lambda_post",
    )?;
    let t = solve_t_star(params.nu, lambda)?.root;
    let one = T::one();
    let two = T::lit(2.0);
    let k = T::of(params.k);
    let half_p = half(T::of(p));
    let layers: T = widths
        .iter()
        .map(|&n| {
            let h = half(T::of(n));
            h * (h.ln() - one) + half(two * k - one) * h.ln()
        })
        .sum();
    Ok(half_p * (half_p.ln() - one + t.ln_1p() - t * (one + half(lambda * t))) - params.nu.ln()
        + half(T::of(widths.len())) * ln_2pi::<T>()
        + layers
        - half((lambda + (one + t).recip()).ln())
        + half((two * k + one) * lambda * t + t.ln_1p()))
}

/// Δ(log G)[k] = k[Σ log(N_ℓ/2) + λ_post t*].
pub fn delta_log_g_case_c<T: Real>(widths: &[usize], p: usize, params: &RegimeParams<T>, k: usize) -> Result<T> {
    params.expect(Regime::FixedLambdaPost)?;
    let lambda = check_lambda(
        params.lambda_post,
        T::of(p) * widths.iter().map(|&n| T::of(n).recip()).sum::<T>(),
        "lambda_post",
    )?;
    let t = solve_t_star(params.nu, lambda)?.root;
    let sum_log: T = widths.iter().map(|&n| half(T::of(n)).ln()).sum();
    Ok(T::of(k) * (sum_log + lambda * t))
}

/// Large-P expansion of the log evidence.
///
/// In the fixed-λ_prior regime the leading order does not depend on
/// λ_prior, so the O(1) block `−½log(P/2) − ½log(2λ) − (λ + log ν)²/(4λ)`
/// is included to make the expression usable for depth selection.
pub fn log_evidence_asymptotic<T: Real>(params: &RegimeParams<T>, sizes: &Sizes) -> Result<T> {
    params.validate()?;
    if sizes.p == 0 || sizes.n0 == 0 {
        return Err(Error::InvalidArgs("sizes must be positive".into()));
    }
    let one = T::one();
    let half_p = half(T::of(sizes.p));
    let theta2 = params.nu * T::of(sizes.p) / T::of(sizes.n0);
    let base = half_p * (half_p.ln() - (theta2 / (T::lit(4.0) * T::PI())).ln());
    match params.regime {
        Regime::FiniteL => {
            let alpha = params.alpha.unwrap_or(one);
            let z = params.z_star(sizes.widths.len())?;
            let ratio = one + z / alpha;
            let width_sum: T = sizes.widths.iter().map(|&n| half(T::of(n))).sum();
            Ok(base + half_p * (ratio.ln() - ratio) + weighted(width_sum, z.ln_1p() - z))
        }
        Regime::FixedLambdaPrior => {
            let lambda = params.lambda_prior.unwrap_or(one);
            let shifted = lambda + params.nu.ln();
            Ok(base - half_p - half(half_p.ln()) - half((T::lit(2.0) * lambda).ln())
                - shifted * shifted / (T::lit(4.0) * lambda))
        }
        Regime::FixedLambdaPost => {
            let t = params.t_star()?;
            let lambda = params.lambda_post.unwrap_or(one);
            Ok(base - half_p + half_p * (t.ln_1p() - t - half(lambda * t * t)))
        }
    }
}
