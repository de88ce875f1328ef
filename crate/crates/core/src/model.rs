//! Architecture and data summaries shared by every module.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Input dimension, hidden widths and prior variance of a deep linear network.
///
/// An empty `widths` vector is the depth-zero (linear regression) model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec<T> {
    pub n0: usize,
    pub widths: Vec<usize>,
    pub sigma2: T,
}

impl<T: Real> NetworkSpec<T> {
    pub fn new(n0: usize, widths: Vec<usize>, sigma2: T) -> Result<Self> {
        let spec = Self { n0, widths, sigma2 };
        spec.validate()?;
        Ok(spec)
    }

    /// `L` identical hidden layers of width `n`.
    pub fn uniform(n0: usize, width: usize, depth: usize, sigma2: T) -> Result<Self> {
        Self::new(n0, vec![width; depth], sigma2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n0 == 0 {
            return Err(Error::InvalidArgs("n0 must be at least 1".into()));
        }
        if self.widths.contains(&0) {
            return Err(Error::InvalidArgs("hidden widths must be at least 1".into()));
        }
        if !(self.sigma2 > T::zero()) || !self.sigma2.is_finite() {
            return Err(Error::InvalidArgs(format!("sigma2 must be positive, got {}", self.sigma2)));
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.widths.len()
    }

    /// λ_prior = Σ 1/N_ℓ.
    pub fn lambda_prior(&self) -> T {
        self.widths.iter().map(|&n| T::of(n).recip()).sum()
    }

    /// Smallest hidden width, the natural large parameter `N`.
    pub fn min_width(&self) -> Option<usize> {
        self.widths.iter().copied().min()
    }

    /// Hidden widths with their multiplicities, in increasing order.
    pub fn width_groups(&self) -> Vec<(usize, usize)> {
        let mut groups = BTreeMap::new();
        for &n in &self.widths {
            *groups.entry(n).or_insert(0usize) += 1;
        }
        groups.into_iter().collect()
    }
}

/// Sufficient statistics of a training set for the zero-noise posterior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataSummary<T> {
    pub p: usize,
    pub n0: usize,
    pub theta_star_norm2: T,
}

impl<T: Real> DataSummary<T> {
    pub fn new(p: usize, n0: usize, theta_star_norm2: T) -> Result<Self> {
        let d = Self { p, n0, theta_star_norm2 };
        d.validate()?;
        Ok(d)
    }

    /// Summary with ‖θ*‖² chosen so that ν takes the given value.
    pub fn from_nu(p: usize, n0: usize, nu: T) -> Result<Self> {
        if p == 0 || n0 == 0 {
            return Err(Error::InvalidArgs("p and n0 must be positive".into()));
        }
        Self::new(p, n0, nu * T::of(p) / T::of(n0))
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.p > self.n0 {
            return Err(Error::InvalidArgs(format!("need 1 <= p <= n0, got p={} n0={}", self.p, self.n0)));
        }
        if !(self.theta_star_norm2 >= T::zero()) || !self.theta_star_norm2.is_finite() {
            return Err(Error::InvalidArgs("theta_star_norm2 must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// α0 = P/N0.
    pub fn alpha0(&self) -> T {
        T::of(self.p) / T::of(self.n0)
    }

    /// ν = ‖θ*‖²/α0.
    pub fn nu(&self) -> T {
        self.theta_star_norm2 / self.alpha0()
    }

    /// λ_post = P Σ 1/N_ℓ for the given architecture.
    pub fn lambda_post(&self, spec: &NetworkSpec<T>) -> T {
        T::of(self.p) * spec.lambda_prior()
    }
}

/// Asymptotic regime of the large-width analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Depth fixed while widths and data grow proportionally.
    FiniteL,
    /// Depth proportional to width, data proportional to width.
    FixedLambdaPrior,
    /// Depth times data over width held fixed.
    FixedLambdaPost,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::FiniteL => "finite_l",
            Regime::FixedLambdaPrior => "fixed_lambda_prior",
            Regime::FixedLambdaPost => "fixed_lambda_post",
        }
    }
}
