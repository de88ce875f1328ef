//! Subcommand bodies. Each returns a table; row-level numeric failures are
//! recorded in the status column rather than aborting the sweep.

use dln_core::asymptotics::{log_evidence_asymptotic, Sizes};
use dln_core::meijer::{delta_log_g, log_meijer_g};
use dln_core::oracle::{
    double_descent_variance_exact, mc_double_descent_error, prior_q_samples, q_density_ks_test,
    rb_density_product_gammas,
};
use dln_core::posterior::{log_evidence_exact, regime_params, variance_factor_exact, variance_factor_limit};
use dln_core::select::sigma_star;
use dln_core::{DataSummary, Error, GArgs, NetworkSpec, QuadConfig, ShiftTarget};
use rayon::prelude::*;

use crate::config::{DepthRule, DoubleDescent, EvidenceSweep, OracleDensity, PosteriorVariance, Validate};
use crate::output::{Cell, Table};

/// Problems with the configuration itself, reported before any computation.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

impl From<Error> for ConfigError {
    fn from(e: Error) -> Self {
        ConfigError(e.to_string())
    }
}

fn status<T>(r: &Result<T, Error>) -> Cell {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => format!("error: {e}").into(),
    }
}

fn quad(tol: f64) -> Result<QuadConfig<f64>, ConfigError> {
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(ConfigError(format!("tol must lie in [1e-12, 1e-6], got {tol}")));
    }
    Ok(QuadConfig::with_tol(tol))
}

fn grid(g: &crate::config::Grid, name: &str) -> Result<Vec<f64>, ConfigError> {
    g.points().map_err(|e| ConfigError(format!("{name}: {e}")))
}

pub fn evidence_sweep(cfg: &EvidenceSweep) -> Result<Table, ConfigError> {
    let data = DataSummary::from_nu(cfg.p, cfg.n0, cfg.nu)?;
    let quad = quad(cfg.tol)?;
    let sigmas = grid(&cfg.sigma2, "sigma2")?;
    let specs = sigmas
        .iter()
        .map(|&s2| NetworkSpec::new(cfg.n0, cfg.widths.clone(), s2))
        .collect::<Result<Vec<_>, _>>()?;
    let star = sigma_star(cfg.nu, cfg.widths.len())?;
    let n = cfg.widths.iter().copied().min().unwrap_or(cfg.p);
    let rows = specs
        .par_iter()
        .map(|spec| {
            let exact = log_evidence_exact(spec, &data, &quad);
            let params = dln_core::Params::finite_l(cfg.p as f64 / n as f64, cfg.nu, spec.sigma2, 0);
            let sizes = Sizes { n0: cfg.n0, p: cfg.p, widths: cfg.widths.clone() };
            let asym = params.and_then(|p| log_evidence_asymptotic(&p, &sizes));
            let st = if exact.is_err() { status(&exact) } else { status(&asym) };
            vec![
                spec.sigma2.into(),
                exact.as_ref().copied().unwrap_or(f64::NAN).into(),
                asym.as_ref().copied().unwrap_or(f64::NAN).into(),
                star.into(),
                st,
            ]
        })
        .collect();
    let mut t = Table::new(vec!["sigma2", "log_evidence", "log_evidence_asymptotic", "sigma_star2", "status"]);
    t.rows = rows;
    Ok(t)
}

fn depth_for(rule: DepthRule, n: usize, p: usize) -> usize {
    match rule {
        DepthRule::Fixed(l) => l,
        DepthRule::LambdaPrior(l) => (l * n as f64).round() as usize,
        DepthRule::LambdaPost(l) => (l * n as f64 / p as f64).round() as usize,
    }
}

pub fn posterior_variance(cfg: &PosteriorVariance) -> Result<Table, ConfigError> {
    let data = DataSummary::from_nu(cfg.p, cfg.n0, cfg.nu)?;
    let quad = quad(cfg.tol)?;
    let widths = grid(&cfg.width, "width")?;
    let specs = widths
        .iter()
        .map(|&w| {
            if w < 1.0 || w.fract() != 0.0 {
                return Err(ConfigError(format!("width {w} is not a positive integer")));
            }
            let n = w as usize;
            Ok(NetworkSpec::uniform(cfg.n0, n, depth_for(cfg.depth, n, cfg.p), cfg.sigma2)?)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let rows = specs
        .par_iter()
        .map(|spec| {
            let exact = variance_factor_exact(spec, &data, &quad);
            let limit =
                regime_params(spec, &data, cfg.regime).and_then(|p| variance_factor_limit(&p, spec.depth()));
            let st = if exact.is_err() { status(&exact) } else { status(&limit) };
            let n = spec.min_width().unwrap_or(0);
            vec![
                n.into(),
                spec.depth().into(),
                spec.lambda_prior().into(),
                data.lambda_post(spec).into(),
                exact.as_ref().copied().unwrap_or(f64::NAN).into(),
                limit.as_ref().copied().unwrap_or(f64::NAN).into(),
                st,
            ]
        })
        .collect();
    let mut t = Table::new(vec!["width", "depth", "lambda_prior", "lambda_post", "c_exact", "c_limit", "status"]);
    t.rows = rows;
    Ok(t)
}

pub fn double_descent(cfg: &DoubleDescent, seed: u64) -> Result<Table, ConfigError> {
    let alphas = grid(&cfg.alpha0, "alpha0")?;
    if cfg.trials < 2 {
        return Err(ConfigError("trials must be at least 2".into()));
    }
    if cfg.n0 < 2 || cfg.sigma_eps2.is_nan() || cfg.sigma_eps2 < 0.0 {
        return Err(ConfigError("n0 must be at least 2 and sigma_eps2 non-negative".into()));
    }
    let p_of = |a: f64| ((a * cfg.n0 as f64).round() as usize).max(1);
    let regular: Vec<f64> =
        alphas.iter().copied().filter(|&a| a > 0.0 && (a - 1.0).abs() >= 1e-3 && p_of(a) != cfg.n0).collect();
    let points = mc_double_descent_error(cfg.n0, &regular, cfg.sigma_eps2, cfg.trials, seed);
    let mut t = Table::new(vec![
        "alpha0",
        "p",
        "error",
        "error_se",
        "bias",
        "bias_se",
        "variance",
        "variance_se",
        "closed_form",
        "variance_finite_size",
        "status",
    ]);
    let mut it = match &points {
        Ok(v) => v.iter(),
        Err(_) => [].iter(),
    };
    for &a in &alphas {
        let nan = f64::NAN;
        if !regular.contains(&a) {
            let mut row: Vec<Cell> = vec![a.into(), p_of(a).into()];
            row.extend((0..8).map(|_| Cell::from(nan)));
            row.push(format!("error: {}", Error::SingularAlpha0(a)).into());
            t.rows.push(row);
            continue;
        }
        match (&points, it.next()) {
            (Ok(_), Some(pt)) => t.rows.push(vec![
                a.into(),
                pt.p.into(),
                pt.error.value.into(),
                pt.error.std_error.into(),
                pt.bias.value.into(),
                pt.bias.std_error.into(),
                pt.variance.value.into(),
                pt.variance.std_error.into(),
                pt.closed_form.into(),
                double_descent_variance_exact(cfg.n0, pt.p, cfg.sigma_eps2).into(),
                "ok".into(),
            ]),
            (Err(e), _) => {
                let mut row: Vec<Cell> = vec![a.into(), p_of(a).into()];
                row.extend((0..8).map(|_| Cell::from(nan)));
                row.push(format!("error: {e}").into());
                t.rows.push(row);
            }
            (Ok(_), None) => unreachable!("one point per regular grid value"),
        }
    }
    Ok(t)
}

pub fn oracle_density(cfg: &OracleDensity, seed: u64) -> Result<Table, ConfigError> {
    if cfg.samples < 1000 {
        return Err(ConfigError("samples must be at least 1000".into()));
    }
    let spec = NetworkSpec::new(cfg.n0, cfg.widths.clone(), cfg.sigma2)?;
    let nus = grid(&cfg.nu, "nu")?;
    let args = nus
        .iter()
        .map(|&nu| Ok(GArgs::new(spec.clone(), DataSummary::from_nu(cfg.p, cfg.n0, nu)?)?))
        .collect::<Result<Vec<_>, ConfigError>>()?;
    let quad = QuadConfig::with_tol(1e-12);
    let mut t = Table::new(vec!["nu", "exact", "mc", "mc_se", "z", "status"]);
    // Points run one after another; each oracle call is parallel internally.
    for (i, (a, nu)) in args.iter().zip(&nus).enumerate() {
        let exact = a.gamma_product().log_density_at_zero(&quad).map(|r| r.log_value.exp());
        let mc = rb_density_product_gammas(a, cfg.samples, seed.wrapping_add(i as u64));
        let row = match (&exact, &mc) {
            (Ok(e), Ok(m)) => {
                let z = if m.std_error > 0.0 { (m.value - e) / m.std_error } else { 0.0 };
                vec![(*nu).into(), (*e).into(), m.value.into(), m.std_error.into(), z.into(), "ok".into()]
            }
            _ => {
                let st = if exact.is_err() { status(&exact) } else { status(&mc) };
                vec![(*nu).into(), f64::NAN.into(), f64::NAN.into(), f64::NAN.into(), f64::NAN.into(), st]
            }
        };
        t.rows.push(row);
    }
    Ok(t)
}

/// Outcome of the invariant suite: the table and whether every check passed.
pub fn validate(cfg: &Validate, seed: u64) -> Result<(Table, bool), ConfigError> {
    if cfg.oracle_samples < 1000 || cfg.ks_samples < 100 {
        return Err(ConfigError("oracle_samples must be ≥ 1000 and ks_samples ≥ 100".into()));
    }
    let mut t = Table::new(vec!["check", "measured", "threshold", "status"]);
    let mut all = true;
    let mut push = |t: &mut Table, name: &str, r: Result<(f64, bool), Error>, threshold: f64| {
        let (measured, st): (f64, Cell) = match r {
            Ok((m, true)) => (m, "ok".into()),
            Ok((m, false)) => (m, "fail".into()),
            Err(e) => (f64::NAN, format!("error: {e}").into()),
        };
        all &= matches!(&st, Cell::Text(s) if s == "ok");
        t.rows.push(vec![name.into(), measured.into(), threshold.into(), st]);
    };

    let reduction = (|| {
        let mut worst: f64 = 0.0;
        for b in [0.5, 2.0, 10.0] {
            let p = (2.0 * b) as usize;
            for z in [1e-3, 0.5, 1.0, 30.0, 1e3] {
                let a = GArgs::new(NetworkSpec::new(p, vec![], 1.0)?, DataSummary::new(p, p, z * 2.0 / p as f64)?)?;
                let v = log_meijer_g(&a, 1e-12)?.log_value;
                let e = b * f64::ln(z) - z;
                worst = worst.max((v - e).abs() / e.abs().max(1.0));
            }
        }
        Ok((worst, worst <= 1e-12))
    })();
    push(&mut t, "gamma_density_reduction", reduction, 1e-12);

    let gaussian = (|| {
        let (n0, p, s2, theta2) = (10usize, 4usize, 1.3f64, 0.7f64);
        let v = s2 / n0 as f64;
        let two_pi = 2.0 * std::f64::consts::PI;
        let expected = p as f64 * two_pi.ln() - p as f64 / 2.0 * (two_pi * v).ln() - theta2 / (2.0 * v);
        let z = log_evidence_exact(&NetworkSpec::new(n0, vec![], s2)?, &DataSummary::new(p, n0, theta2)?, &QuadConfig::with_tol(1e-12))?;
        let err = (z - expected).abs();
        Ok((err, err <= 1e-9))
    })();
    push(&mut t, "depth_zero_gaussian_evidence", gaussian, 1e-9);

    let oracle = (|| {
        let a = GArgs::new(NetworkSpec::new(12, vec![8, 12], 1.0)?, DataSummary::from_nu(6, 12, 2.0)?)?;
        let exact = a.gamma_product().log_density_at_zero(&QuadConfig::<f64>::with_tol(1e-12))?.log_value.exp();
        let mc = rb_density_product_gammas(&a, cfg.oracle_samples, seed)?;
        let z = (mc.value - exact).abs() / mc.std_error;
        Ok((z, z <= cfg.oracle_max_z))
    })();
    push(&mut t, "oracle_vs_exact_z", oracle, cfg.oracle_max_z);

    let stationarity = (|| {
        let nu: f64 = 2.0;
        let a = GArgs::new(NetworkSpec::new(400, vec![6, 6], sigma_star(nu, 2)?)?, DataSummary::from_nu(200, 400, nu)?)?;
        let d = delta_log_g(&a, 1, ShiftTarget::Data, &QuadConfig::default())?;
        let dev = (d.exp() / 100.0 - 1.0).abs();
        Ok((dev, dev <= cfg.stationarity_tol))
    })();
    push(&mut t, "evidence_stationarity", stationarity, cfg.stationarity_tol);

    let ks = (|| {
        let samples = prior_q_samples(&[6, 6], cfg.ks_samples, seed)?;
        let r = q_density_ks_test(&samples, &[6, 6])?;
        Ok((r.p_value, r.p_value > cfg.ks_min_p))
    })();
    push(&mut t, "prior_norm_ks_p_value", ks, cfg.ks_min_p);

    Ok((t, all))
}
