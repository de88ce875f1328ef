//! Monte Carlo ground truth for the analytic evaluators.
//!
//! Samples are drawn in fixed-size chunks, each from its own ChaCha8 stream,
//! and partial results are merged in chunk order so every estimate is a pure
//! function of its seed regardless of thread count.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::datagen::{decompose, generate_stream, min_norm_interpolant, rng_for};
use crate::error::{Error, Result};
use crate::gamma::{digamma_real, ln_gamma};
use crate::meijer::{log_meijer_g_general, GArgs, QuadConfig};
use crate::model::{DataSummary, NetworkSpec};

const CHUNK: usize = 1 << 14;

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n as f64 / n as f64,
            m2: self.m2 + o.m2 + d * d * (self.n as f64 * o.n as f64) / n as f64,
        }
    }

    fn estimate(self, seed: u64, scale: f64) -> McEstimate {
        let var = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        McEstimate {
            value: self.mean * scale,
            std_error: (var / self.n as f64).sqrt() * scale,
            n_samples: self.n,
            seed,
        }
    }
}

fn chunked<F>(n: usize, seed: u64, f: F) -> Moments
where
    F: Fn(&mut rand_chacha::ChaCha8Rng, usize) -> Moments + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_for(seed, c as u64);
            f(&mut rng, CHUNK.min(n - c * CHUNK))
        })
        .collect();
    parts.into_iter().fold(Moments::default(), Moments::merge)
}

/// Rao–Blackwellized estimate of the density of Σ_j log φ_j at zero.
///
/// φ_1..φ_L are sampled and the exact density of log φ_0 is averaged at
/// `−Σ_{ℓ≥1} log φ_ℓ`, so no smoothing bandwidth is involved.
pub fn rb_density_product_gammas(args: &GArgs<f64>, n: usize, seed: u64) -> Result<McEstimate> {
    args.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgs("need at least one sample".into()));
    }
    let product = args.gamma_product();
    let (first, rest) = product.factors.split_first().expect("data factor present");
    let (a0, lt0) = (first.shape, first.log_scale);
    let norm0 = ln_gamma(a0)? + a0 * lt0;
    let log_den0 = move |u: f64| a0 * u - (u - lt0).exp() - norm0;

    let mut samplers = Vec::new();
    let mut mean_sum = 0.0;
    for f in rest {
        let g = Gamma::new(f.shape, f.log_scale.exp()).map_err(|e| Error::InvalidArgs(e.to_string()))?;
        mean_sum += f.mult as f64 * (digamma_real(f.shape)? + f.log_scale);
        samplers.push((g, f.mult));
    }
    // Values are reported relative to the density at the mean of the sampled sum.
    let reference = log_den0(-mean_sum);
    let m = chunked(n, seed, |rng, count| {
        let mut acc = Moments::default();
        for _ in 0..count {
            let mut s = 0.0;
            for (g, mult) in &samplers {
                for _ in 0..*mult {
                    s += g.sample(rng).ln();
                }
            }
            acc.push((log_den0(-s) - reference).exp());
        }
        acc
    });
    Ok(m.estimate(seed, reference.exp()))
}

/// Draws of Q = ‖Ŵ_L ⋯ Ŵ_1 u‖² with standard Gaussian Ŵ_ℓ of shape N_ℓ × N_{ℓ−1}.
///
/// The input dimension is 1, which is equivalent to any unit vector `u`.
pub fn prior_q_samples(widths: &[usize], n: usize, seed: u64) -> Result<Vec<f64>> {
    if widths.is_empty() || widths.contains(&0) {
        return Err(Error::InvalidArgs("need at least one positive width".into()));
    }
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_for(seed, c as u64);
            let count = CHUNK.min(n - c * CHUNK);
            (0..count)
                .map(|_| {
                    let mut v = DVector::from_element(1, 1.0);
                    for &w in widths {
                        let m = nalgebra::DMatrix::from_fn(w, v.len(), |_, _| -> f64 { StandardNormal.sample(&mut rng) });
                        v = m * v;
                    }
                    v.norm_squared()
                })
                .collect()
        })
        .collect();
    Ok(parts.concat())
}

/// Log-density of log Q from the Meijer-G form of the density of Q.
pub fn log_q_log_density(widths: &[usize], u: f64, cfg: &QuadConfig<f64>) -> Result<f64> {
    let l = widths.len() as f64;
    let b: Vec<f64> = widths.iter().map(|&w| w as f64 / 2.0 - 1.0).collect();
    let log_g = log_meijer_g_general(u - l * std::f64::consts::LN_2, &b, cfg)?.log_value;
    let mut norm = l * std::f64::consts::LN_2;
    for &w in widths {
        norm += ln_gamma(w as f64 / 2.0)?;
    }
    Ok(u + log_g - norm)
}

/// Kolmogorov–Smirnov comparison of samples with a reference CDF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    /// Integral of the reference density over the grid, ideally 1.
    pub total_mass: f64,
}

/// Asymptotic Kolmogorov p-value with Stephens' small-sample correction.
pub fn kolmogorov_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS test of Q samples against the Meijer-G density of Q.
///
/// The CDF of log Q is tabulated by integrating the density on a grid that
/// extends until the density is e⁻³⁵ below its peak, and is interpolated with
/// cubic Hermite polynomials that use the density as the slope.
pub fn q_density_ks_test(samples: &[f64], widths: &[usize]) -> Result<KsResult> {
    if samples.is_empty() || samples.iter().any(|&q| !(q > 0.0)) {
        return Err(Error::InvalidArgs("samples must be positive".into()));
    }
    let cfg = QuadConfig::with_tol(1e-10);
    let mut logs: Vec<f64> = samples.iter().map(|q| q.ln()).collect();
    logs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let dens = |u: f64| log_q_log_density(widths, u, &cfg);

    let centre = logs[logs.len() / 2];
    let peak = dens(centre)?;
    let step = ((logs[logs.len() - 1] - logs[0]) / 50.0).max(1e-3);
    let mut lo = logs[0].min(centre - step);
    while dens(lo)? > peak - 35.0 {
        lo -= step;
    }
    let mut hi = logs[logs.len() - 1].max(centre + step);
    while dens(hi)? > peak - 35.0 {
        hi += step;
    }

    let cells = 400;
    let h = (hi - lo) / cells as f64;
    let nodes: Vec<f64> = (0..=cells).map(|i| lo + h * i as f64).collect();
    let pdf = nodes.par_iter().map(|&u| dens(u).map(f64::exp)).collect::<Result<Vec<_>>>()?;
    // Four-point Gauss–Legendre per cell; cells are narrow next to the
    // density's own scale, so the rule error is far below the KS resolution.
    const GL_X: [f64; 2] = [0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
    const GL_W: [f64; 2] = [0.652_145_154_862_546_1, 0.347_854_845_137_453_9];
    let masses = (0..cells)
        .into_par_iter()
        .map(|i| {
            let mid = nodes[i] + h / 2.0;
            let mut acc = 0.0;
            for (x, w) in GL_X.iter().zip(GL_W) {
                for sign in [-1.0, 1.0] {
                    acc += w * dens(mid + sign * x * h / 2.0)?.exp();
                }
            }
            Ok(acc * h / 2.0)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut cdf = vec![0.0; cells + 1];
    for i in 0..cells {
        cdf[i + 1] = cdf[i] + masses[i];
    }
    let total_mass = cdf[cells];

    let eval = |u: f64| -> f64 {
        if u <= lo {
            return 0.0;
        }
        if u >= hi {
            return total_mass;
        }
        let i = (((u - lo) / h) as usize).min(cells - 1);
        let s = (u - nodes[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * cdf[i]
            + (s3 - 2.0 * s2 + s) * h * pdf[i]
            + (-2.0 * s3 + 3.0 * s2) * cdf[i + 1]
            + (s3 - s2) * h * pdf[i + 1]
    };
    let n = logs.len();
    let statistic = logs.iter().enumerate().fold(0.0f64, |d, (i, &u)| {
        let f = eval(u);
        d.max((i + 1) as f64 / n as f64 - f).max(f - i as f64 / n as f64)
    });
    Ok(KsResult { statistic, p_value: kolmogorov_p_value(statistic, n), n, total_mass })
}

/// Self-normalized importance-sampling estimate of Z(t)/Z(0) for t ⟂ col(X).
///
/// Conditional on the hidden layers, θ is isotropic Gaussian with variance
/// `V = (σ²/N0) Π (σ²/N_ℓ) χ²_{N_ℓ}`. Prior draws of V are weighted by the
/// density of θ_∥ at θ*, and `exp(−V‖t⊥‖²/2)` is averaged.
pub fn mc_posterior_char_fn(
    spec: &NetworkSpec<f64>,
    data: &DataSummary<f64>,
    t_perp_norm2: f64,
    n: usize,
    seed: u64,
) -> Result<McEstimate> {
    spec.validate()?;
    data.validate()?;
    if n < 2 {
        return Err(Error::InvalidArgs("need at least two samples".into()));
    }
    let samplers = spec
        .widths
        .iter()
        .map(|&w| {
            Gamma::new(w as f64 / 2.0, 2.0 * spec.sigma2 / w as f64).map_err(|e| Error::InvalidArgs(e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let base = (spec.sigma2 / spec.n0 as f64).ln();
    let half_p = data.p as f64 / 2.0;
    let theta2 = data.theta_star_norm2;
    let chunks = n.div_ceil(CHUNK);
    let draws: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_for(seed, c as u64);
            (0..CHUNK.min(n - c * CHUNK))
                .map(|_| {
                    let log_v = base + samplers.iter().map(|g| g.sample(&mut rng).ln()).sum::<f64>();
                    let v = log_v.exp();
                    (-half_p * log_v - theta2 / (2.0 * v), (-v * t_perp_norm2 / 2.0).exp())
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .concat();
    let top = draws.iter().fold(f64::NEG_INFINITY, |m, d| m.max(d.0));
    let (mut sw, mut swg) = (0.0, 0.0);
    for &(lw, g) in &draws {
        let w = (lw - top).exp();
        sw += w;
        swg += w * g;
    }
    let ratio = swg / sw;
    let var: f64 = draws
        .iter()
        .map(|&(lw, g)| {
            let w = (lw - top).exp();
            (w * (g - ratio)).powi(2)
        })
        .sum::<f64>()
        / (sw * sw);
    Ok(McEstimate { value: ratio, std_error: var.sqrt(), n_samples: n, seed })
}

/// Large-N closed form for the generalization error of the
/// evidence-maximizing posterior, `1/α0 − α0 + σ²/(1 − α0)` below the
/// threshold.
pub fn double_descent_closed_form(alpha0: f64, sigma_eps2: f64) -> f64 {
    if alpha0 < 1.0 {
        1.0 / alpha0 - alpha0 + sigma_eps2 / (1.0 - alpha0)
    } else {
        sigma_eps2 / (alpha0 - 1.0)
    }
}

/// Bias term `1 − α0 + α0 σ_ε²/(1 − α0)` below the threshold, `σ_ε²/(α0 − 1)` above.
pub fn double_descent_bias(alpha0: f64, sigma_eps2: f64) -> f64 {
    if alpha0 < 1.0 {
        1.0 - alpha0 + alpha0 * sigma_eps2 / (1.0 - alpha0)
    } else {
        sigma_eps2 / (alpha0 - 1.0)
    }
}

/// Exact finite-size expectation of the posterior-variance term,
/// `(1 − α0)(1 + σ_ε² N0/(N0 − P − 1))`, using E‖θ*‖² = α0 + σ_ε² P/(N0 − P − 1).
pub fn double_descent_variance_exact(n0: usize, p: usize, sigma_eps2: f64) -> f64 {
    if p + 1 >= n0 {
        return 0.0;
    }
    let alpha0 = p as f64 / n0 as f64;
    (1.0 - alpha0) * (1.0 + sigma_eps2 * n0 as f64 / (n0 - p - 1) as f64)
}

/// One grid point of the double-descent experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoubleDescentPoint {
    pub alpha0: f64,
    pub p: usize,
    pub error: McEstimate,
    pub bias: McEstimate,
    pub variance: McEstimate,
    pub closed_form: f64,
}

/// Monte Carlo estimate of E[(f(x) − V0ᵀx)²] under the predictive posterior
/// N(θ*ᵀx, ν‖x⊥‖²/N0) at a fresh Gaussian input, one input per trial.
pub fn mc_double_descent_error(
    n0: usize,
    alpha0_grid: &[f64],
    sigma_eps2: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<DoubleDescentPoint>> {
    if trials < 2 {
        return Err(Error::InvalidArgs("need at least two trials".into()));
    }
    if !(sigma_eps2 >= 0.0) {
        return Err(Error::InvalidArgs("sigma_eps2 must be non-negative".into()));
    }
    if let Some(&a) = alpha0_grid.iter().find(|&&a| (a - 1.0).abs() < 1e-3 || !(a > 0.0)) {
        return Err(Error::SingularAlpha0(a));
    }
    let sigma_eps = sigma_eps2.sqrt();
    alpha0_grid
        .iter()
        .enumerate()
        .map(|(gi, &alpha0)| {
            let p = ((alpha0 * n0 as f64).round() as usize).max(1);
            if p == n0 {
                return Err(Error::SingularAlpha0(alpha0));
            }
            let per_trial = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let stream = ((gi as u64) << 32) | t as u64;
                    let data = generate_stream(n0, p, sigma_eps, seed, stream)?;
                    let geo = min_norm_interpolant(&data)?;
                    let mut rng = rng_for(seed, stream | (1 << 63));
                    let x = DVector::from_fn(n0, |_, _| -> f64 { rng.sample(StandardNormal) });
                    let bias = (geo.theta_star.dot(&x) - data.v0.dot(&x)).powi(2);
                    let variance = if p < n0 {
                        let (_, perp) = decompose(&x, &geo)?;
                        let nu = geo.theta_star_norm2 * n0 as f64 / p as f64;
                        nu * perp.norm_squared() / n0 as f64
                    } else {
                        0.0
                    };
                    Ok((bias, variance))
                })
                .collect::<Result<Vec<_>>>()?;
            let (mut e, mut b, mut v) = (Moments::default(), Moments::default(), Moments::default());
            for (bias, var) in per_trial {
                e.push(bias + var);
                b.push(bias);
                v.push(var);
            }
            Ok(DoubleDescentPoint {
                alpha0,
                p,
                error: e.estimate(seed, 1.0),
                bias: b.estimate(seed, 1.0),
                variance: v.estimate(seed, 1.0),
                closed_form: double_descent_closed_form(alpha0, sigma_eps2),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_zero_estimator_is_exact() {
        let args = GArgs::new(NetworkSpec::new(10, vec![], 1.0).unwrap(), DataSummary::from_nu(4, 10, 2.0).unwrap())
            .unwrap();
        let est = rb_density_product_gammas(&args, 1000, 5).unwrap();
        let exact = args.gamma_product().log_density_at_zero(&QuadConfig::default()).unwrap().log_value.exp();
        assert!((est.value - exact).abs() < 1e-12 * exact);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn seeds_reproduce() {
        let args = GArgs::new(NetworkSpec::new(10, vec![4, 6], 1.0).unwrap(), DataSummary::from_nu(4, 10, 2.0).unwrap())
            .unwrap();
        let a = rb_density_product_gammas(&args, 40_000, 17).unwrap();
        let b = rb_density_product_gammas(&args, 40_000, 17).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn kolmogorov_tail() {
        assert_eq!(kolmogorov_p_value(0.0, 100), 1.0);
        // λ ≈ 1.36 is the 5% point.
        let d = 1.358 / (10_000f64.sqrt() + 0.12 + 0.11 / 100.0);
        assert!((kolmogorov_p_value(d, 10_000) - 0.05).abs() < 1e-3);
    }

    #[test]
    fn singular_alpha_rejected() {
        assert!(matches!(mc_double_descent_error(64, &[0.5, 1.0005], 0.1, 10, 1), Err(Error::SingularAlpha0(_))));
    }
}
