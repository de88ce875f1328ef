//! Exact evaluation of `G^{m,0}_{0,m}` through the density of a sum of
//! log-Gamma variables.
//!
//! If `φ_j ~ Gamma(a_j, θ_j)` are independent, the density of `Σ log φ_j` at
//! zero is `(1/2π) ∫ exp Φ(t) dt` with
//! `Φ(t) = Σ_j [−i t log θ_j + log Γ(a_j − i t) − log Γ(a_j)]`, and
//! `G(z; a_j − 1) = Den(0) · Π Γ(a_j) θ_j` when `z = 1/Π θ_j`.
//!
//! The integral is taken along the horizontal line through the saddle of Φ on
//! the imaginary axis, where the integrand is positive at its peak and decays
//! monotonically in modulus.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gamma::{digamma_real, ln_gamma, log_gamma, trigamma_real};
use crate::model::{DataSummary, NetworkSpec};
use crate::quadrature::integrate;
use crate::saddle::solve_increasing;
use crate::scalar::Real;

/// Decay below the peak, in natural-log units, at which the contour is cut.
const CUTOFF_DECADES: f64 = 46.0;

/// Gamma factor `Gamma(shape, exp(log_scale))` repeated `mult` times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaFactor<T> {
    pub shape: T,
    pub log_scale: T,
    pub mult: usize,
}

/// Independent Gamma variables whose log-sum density encodes a Meijer-G value.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaProduct<T> {
    pub factors: Vec<GammaFactor<T>>,
}

/// Which entry of the b-parameter multiset carries the integer shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ShiftTarget {
    /// All hidden-width entries `N_ℓ/2`.
    Widths,
    /// The data entry `P/2`.
    Data,
}

/// Arguments of `G^{L+1,0}_{0,L+1}(‖θ*‖²/4M; −; P/2 + k_data, N_ℓ/2 + k_widths)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GArgs<T> {
    pub spec: NetworkSpec<T>,
    pub data: DataSummary<T>,
    pub k_widths: usize,
    pub k_data: usize,
}

impl<T: Real> GArgs<T> {
    pub fn new(spec: NetworkSpec<T>, data: DataSummary<T>) -> Result<Self> {
        let args = Self { spec, data, k_widths: 0, k_data: 0 };
        args.validate()?;
        Ok(args)
    }

    pub fn with_shift(&self, target: ShiftTarget, k: usize) -> Self {
        let mut out = self.clone();
        match target {
            ShiftTarget::Widths => {
                out.k_widths = k;
                out.k_data = 0;
            }
            ShiftTarget::Data => {
                out.k_data = k;
                out.k_widths = 0;
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.data.validate()?;
        if self.spec.n0 != self.data.n0 {
            return Err(Error::InvalidArgs(format!(
                "input dimension mismatch: spec n0={} data n0={}",
                self.spec.n0, self.data.n0
            )));
        }
        if !(self.data.theta_star_norm2 > T::zero()) {
            return Err(Error::InvalidArgs("theta_star_norm2 must be positive".into()));
        }
        if self.k_widths > 0 && self.k_data > 0 {
            return Err(Error::InvalidArgs("only one of k_widths and k_data may be nonzero".into()));
        }
        Ok(())
    }

    /// log z with z = ‖θ*‖²/(4M).
    pub fn log_z(&self) -> T {
        self.data.theta_star_norm2.ln() - scale_m(&self.spec)
    }

    /// The Gamma variables `φ_0 ~ Γ(P/2 + k_data + 1, θ_0)` and
    /// `φ_ℓ ~ Γ(N_ℓ/2 + k_widths + 1, 2σ²/N_ℓ)`.
    pub fn gamma_product(&self) -> GammaProduct<T> {
        let two_s2 = (T::lit(2.0) * self.spec.sigma2).ln();
        let p = T::of(self.data.p);
        let mut factors = vec![GammaFactor {
            shape: p / T::lit(2.0) + T::of(self.k_data) + T::one(),
            log_scale: two_s2 - p.ln() - self.data.nu().ln(),
            mult: 1,
        }];
        for (n, mult) in self.spec.width_groups() {
            let n = T::of(n);
            factors.push(GammaFactor {
                shape: n / T::lit(2.0) + T::of(self.k_widths) + T::one(),
                log_scale: two_s2 - n.ln(),
                mult,
            });
        }
        GammaProduct { factors }
    }
}

/// Quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig<T> {
    /// Relative tolerance on the value of G (not its logarithm).
    pub tol: T,
    pub max_panels: usize,
    /// Contour height; the saddle height is used when `None`.
    pub shift: Option<T>,
}

impl<T: Real> QuadConfig<T> {
    pub fn with_tol(tol: T) -> Self {
        Self { tol, max_panels: 4000, shift: None }
    }
}

impl<T: Real> Default for QuadConfig<T> {
    fn default() -> Self {
        Self::with_tol(T::lit(1e-10))
    }
}

/// Outcome of one contour integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureReport<T> {
    pub log_value: T,
    /// |Im ∫| / |Re ∫| of the peak-scaled integral.
    pub imag_residual: T,
    pub panels: usize,
    pub truncation_t: T,
    pub shift_c: T,
}

/// log(4M) = Σ_{ℓ=0}^{L} [log 2σ² − log N_ℓ].
pub fn scale_m<T: Real>(spec: &NetworkSpec<T>) -> T {
    let two_s2 = (T::lit(2.0) * spec.sigma2).ln();
    std::iter::once(spec.n0)
        .chain(spec.widths.iter().copied())
        .map(|n| two_s2 - T::of(n).ln())
        .sum()
}

impl<T: Real> GammaProduct<T> {
    /// Builds the product for `G^{m,0}_{0,m}(z; b_1..b_m)` with all scales
    /// equal to `z^{-1/m}`. Requires every `b_j > −1`.
    pub fn for_meijer(log_z: T, b: &[T]) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::InvalidArgs("empty b-parameter list".into()));
        }
        if b.iter().any(|&bj| !(bj > -T::one())) {
            return Err(Error::InvalidArgs("b-parameters must exceed -1".into()));
        }
        let log_scale = -log_z / T::of(b.len());
        Ok(Self { factors: b.iter().map(|&bj| GammaFactor { shape: bj + T::one(), log_scale, mult: 1 }).collect() })
    }

    fn min_shape(&self) -> T {
        self.factors.iter().fold(T::infinity(), |m, f| m.min(f.shape))
    }

    /// Φ on the line Im s = c, without peak scaling.
    pub fn phi_at(&self, t: T, c: T) -> Result<Complex<T>> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for f in &self.factors {
            let arg = Complex::new(f.shape + c, -t);
            let term = Complex::new(c, -t) * f.log_scale + log_gamma(arg)? - ln_gamma(f.shape)?;
            acc = acc + term * T::of(f.mult);
        }
        Ok(acc)
    }

    /// Saddle height: root of Σ [log θ_j + ψ(a_j + c)] = 0.
    pub fn saddle_shift(&self) -> Result<T> {
        let g = |c: T| {
            self.factors.iter().fold(T::zero(), |acc, f| {
                acc + T::of(f.mult) * (f.log_scale + digamma_real(f.shape + c).unwrap_or(T::nan()))
            })
        };
        let dg = |c: T| {
            self.factors
                .iter()
                .fold(T::zero(), |acc, f| acc + T::of(f.mult) * trigamma_real(f.shape + c).unwrap_or(T::nan()))
        };
        let scale = self.factors.iter().fold(T::one(), |m, f| m.max(T::of(f.mult) * f.log_scale.abs()));
        let tol = T::lit(1e-12) * scale;
        Ok(solve_increasing(g, dg, -self.min_shape(), T::zero(), tol)?.root)
    }

    /// log of the density of Σ log φ_j at zero.
    pub fn log_density_at_zero(&self, cfg: &QuadConfig<T>) -> Result<QuadratureReport<T>> {
        let min_shape = self.min_shape();
        let c = match cfg.shift {
            Some(c) if c > -min_shape => c,
            Some(c) => {
                return Err(Error::InvalidArgs(format!("contour height {c} is not above the poles at {}", -min_shape)))
            }
            None => self.saddle_shift()?,
        };
        let peak = self.phi_at(T::zero(), c)?.re;
        let curvature = self
            .factors
            .iter()
            .map(|f| T::of(f.mult) * trigamma_real(f.shape + c).unwrap_or(T::zero()))
            .sum::<T>();
        let h0 = curvature.sqrt().recip().min(T::lit(1e3)).max(T::lit(1e-6));

        let drop = |t: T| self.phi_at(t, c).map(|v| v.re - peak);
        let cutoff = -T::lit(CUTOFF_DECADES) * T::LN_10();
        let mut lo = T::zero();
        let mut hi = h0;
        let mut doublings = 0;
        while drop(hi)? > cutoff {
            lo = hi;
            hi = hi * T::lit(2.0);
            doublings += 1;
            if doublings > 200 {
                return Err(Error::QuadratureNonConvergence { error: f64::NAN, panels: 0 });
            }
        }
        for _ in 0..40 {
            let mid = (lo + hi) / T::lit(2.0);
            if drop(mid)? > cutoff {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let truncation_t = hi;

        let initial = (T::lit(2.0) * truncation_t / h0).ceil().to_usize().unwrap_or(8).clamp(8, 256);
        let failure = std::cell::Cell::new(None);
        let integrand = |t: T| match self.phi_at(t, c) {
            Ok(v) => (v - peak).exp(),
            Err(e) => {
                failure.set(Some(e));
                Complex::new(T::zero(), T::zero())
            }
        };
        // Half the budget goes to the integral so the exponent keeps its share.
        let tol = cfg.tol / T::lit(2.0);
        let result = integrate(integrand, -truncation_t, truncation_t, initial, tol, cfg.max_panels)?;
        if let Some(e) = failure.take() {
            return Err(e);
        }
        if !(result.value.re > T::zero()) {
            return Err(Error::QuadratureNonConvergence { error: f64::NAN, panels: result.panels });
        }
        Ok(QuadratureReport {
            log_value: peak + result.value.re.ln() - (T::lit(2.0) * T::PI()).ln(),
            imag_residual: result.value.im.abs() / result.value.re,
            panels: result.panels,
            truncation_t,
            shift_c: c,
        })
    }

    /// log G recovered from the log-sum density.
    pub fn log_meijer(&self, cfg: &QuadConfig<T>) -> Result<QuadratureReport<T>> {
        let mut report = self.log_density_at_zero(cfg)?;
        for f in &self.factors {
            report.log_value = report.log_value + T::of(f.mult) * (f.log_scale + ln_gamma(f.shape)?);
        }
        Ok(report)
    }
}

/// Φ(t) for the arguments of the evidence G-function; Φ(0) = 0.
pub fn phi_integrand<T: Real>(t: T, args: &GArgs<T>) -> Result<Complex<T>> {
    args.validate()?;
    args.gamma_product().phi_at(t, T::zero())
}

/// log G^{L+1,0}_{0,L+1} at the given relative tolerance.
pub fn log_meijer_g<T: Real>(args: &GArgs<T>, tol: T) -> Result<QuadratureReport<T>> {
    log_meijer_g_with(args, &QuadConfig::with_tol(tol))
}

pub fn log_meijer_g_with<T: Real>(args: &GArgs<T>, cfg: &QuadConfig<T>) -> Result<QuadratureReport<T>> {
    args.validate()?;
    if !(cfg.tol >= T::lit(1e-12) && cfg.tol <= T::lit(1e-6)) {
        return Err(Error::InvalidArgs(format!("tolerance {} outside [1e-12, 1e-6]", cfg.tol)));
    }
    args.gamma_product().log_meijer(cfg)
}

/// log G^{m,0}_{0,m}(z; −; b_1, …, b_m) for any `b_j > −1`.
pub fn log_meijer_g_general<T: Real>(log_z: T, b: &[T], cfg: &QuadConfig<T>) -> Result<QuadratureReport<T>> {
    GammaProduct::for_meijer(log_z, b)?.log_meijer(cfg)
}

/// Δ(log G)[k]: log G with the shift placed on `target` minus log G unshifted.
pub fn delta_log_g<T: Real>(args: &GArgs<T>, k: usize, target: ShiftTarget, cfg: &QuadConfig<T>) -> Result<T> {
    args.validate()?;
    if k == 0 || (target == ShiftTarget::Widths && args.spec.depth() == 0) {
        return Ok(T::zero());
    }
    let base = args.with_shift(target, 0).gamma_product().log_meijer(cfg)?;
    let shifted = args.with_shift(target, k).gamma_product().log_meijer(cfg)?;
    Ok(shifted.log_value - base.log_value)
}
