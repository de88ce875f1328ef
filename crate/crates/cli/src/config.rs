//! JSON run configurations, one shape per subcommand.

use dln_core::Regime;
use serde::{Deserialize, Serialize};

/// A one-dimensional grid, given either explicitly or as a range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range { min: f64, max: f64, count: usize, #[serde(default)] scale: Scale },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

impl Grid {
    pub fn points(&self) -> Result<Vec<f64>, String> {
        let pts = match self {
            Grid::Values(v) => v.clone(),
            Grid::Range { min, max, count, scale } => {
                if *count == 0 {
                    return Err("grid count must be positive".into());
                }
                if !(min.is_finite() && max.is_finite()) || min > max {
                    return Err(format!("grid bounds [{min}, {max}] are invalid"));
                }
                let (a, b) = match scale {
                    Scale::Linear => (*min, *max),
                    Scale::Log if *min > 0.0 => (min.ln(), max.ln()),
                    Scale::Log => return Err("log grids need a positive minimum".into()),
                };
                (0..*count)
                    .map(|i| {
                        let u = if *count == 1 { a } else { a + (b - a) * i as f64 / (*count - 1) as f64 };
                        if *scale == Scale::Log { u.exp() } else { u }
                    })
                    .collect()
            }
        };
        if pts.is_empty() || pts.iter().any(|v| !v.is_finite()) {
            return Err("grid must contain finite values".into());
        }
        Ok(pts)
    }
}

fn default_tol() -> f64 {
    1e-10
}

/// Exact and asymptotic log evidence over a σ² grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceSweep {
    pub n0: usize,
    pub p: usize,
    pub widths: Vec<usize>,
    pub nu: f64,
    pub sigma2: Grid,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

/// How depth follows width in a variance sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthRule {
    /// Constant depth.
    Fixed(usize),
    /// L = round(λ_prior N).
    LambdaPrior(f64),
    /// L = round(λ_post N / P).
    LambdaPost(f64),
}

/// Exact variance factor against its regime limit over a width grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosteriorVariance {
    pub regime: Regime,
    pub n0: usize,
    pub p: usize,
    pub nu: f64,
    #[serde(default = "one")]
    pub sigma2: f64,
    pub width: Grid,
    pub depth: DepthRule,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn one() -> f64 {
    1.0
}

/// Monte Carlo generalization error across α0.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleDescent {
    pub n0: usize,
    pub sigma_eps2: f64,
    pub alpha0: Grid,
    pub trials: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Exact product-of-Gammas density against the Monte Carlo oracle over a ν grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleDensity {
    pub n0: usize,
    pub p: usize,
    pub widths: Vec<usize>,
    #[serde(default = "one")]
    pub sigma2: f64,
    pub nu: Grid,
    pub samples: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Thresholds of the quick invariant suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Validate {
    pub oracle_samples: usize,
    pub oracle_max_z: f64,
    pub ks_samples: usize,
    pub ks_min_p: f64,
    pub stationarity_tol: f64,
    pub seed: Option<u64>,
}

impl Default for Validate {
    fn default() -> Self {
        Self {
            oracle_samples: 200_000,
            oracle_max_z: 3.0,
            ks_samples: 20_000,
            ks_min_p: 0.01,
            stationarity_tol: 0.02,
            seed: None,
        }
    }
}
