//! Acceptance suite: one PASS/FAIL line per headline result.
//!
//! Run with `cargo test -p dln-core --test acceptance`. The process exits
//! non-zero if any criterion fails.

use std::time::Instant;

use dln_core::asymptotics::{delta_log_g_case_a, log_evidence_asymptotic, RegimeParams, Sizes};
use dln_core::meijer::{delta_log_g, log_meijer_g, GArgs, QuadConfig, ShiftTarget};
use dln_core::oracle::{
    double_descent_variance_exact, mc_double_descent_error, prior_q_samples, q_density_ks_test,
    rb_density_product_gammas,
};
use dln_core::posterior::{log_evidence_exact, variance_factor_exact};
use dln_core::saddle::{solve_t_star, solve_z_star};
use dln_core::select::{d_log_evidence_d_lambda_post, lambda_prior_star, sigma_star};
use dln_core::{DataSummary, NetworkSpec};

struct Outcome {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Self { pass, summary: summary.into(), details: Vec::new() }
    }

    fn detail(mut self, line: impl Into<String>) -> Self {
        self.details.push(line.into());
        self
    }
}

fn spec(n0: usize, widths: Vec<usize>, sigma2: f64) -> NetworkSpec<f64> {
    NetworkSpec::new(n0, widths, sigma2).expect("valid spec")
}

fn data(p: usize, n0: usize, nu: f64) -> DataSummary<f64> {
    DataSummary::from_nu(p, n0, nu).expect("valid data")
}

fn gamma_density_reduction() -> Outcome {
    let mut worst = 0.0f64;
    let mut at = (0.0, 0.0);
    for b in [0.5, 1.0, 2.0, 5.0, 10.0, 50.0] {
        let p = (2.0 * b) as usize;
        for i in 0..=24 {
            let z = 10f64.powf(-3.0 + 6.0 * i as f64 / 24.0);
            // With no hidden layers 4M = 2σ²/N0.
            let theta2 = z * 2.0 / p as f64;
            let args = GArgs::new(spec(p, vec![], 1.0), DataSummary::new(p, p, theta2).unwrap()).unwrap();
            let got = log_meijer_g(&args, 1e-12).unwrap().log_value;
            let exact = b * z.ln() - z;
            let rel = (got - exact).abs() / exact.abs().max(1.0);
            if rel > worst {
                worst = rel;
                at = (z, b);
            }
        }
    }
    Outcome::new(worst <= 1e-12, format!("max relative error {worst:.2e} (z={:.3e}, b={})", at.0, at.1))
}

fn oracle_certification() -> Outcome {
    let sets = [
        ("L=2 N=(8,12) P=6 nu=2 s2=1", spec(12, vec![8, 12], 1.0), data(6, 12, 2.0)),
        ("L=1 N=(5) P=3 nu=0.7 s2=1.3", spec(9, vec![5], 1.3), data(3, 9, 0.7)),
        ("L=3 N=(10,6,14) P=10 nu=3 s2=0.8", spec(20, vec![10, 6, 14], 0.8), data(10, 20, 3.0)),
    ];
    let mut out = Outcome::new(true, "");
    let mut worst = 0.0f64;
    for (i, (name, s, d)) in sets.into_iter().enumerate() {
        let args = GArgs::new(s, d).unwrap();
        let exact = args.gamma_product().log_density_at_zero(&QuadConfig::with_tol(1e-12)).unwrap().log_value.exp();
        let mc = rb_density_product_gammas(&args, 1_000_000, 1000 + i as u64).unwrap();
        let z = (mc.value - exact).abs() / mc.std_error;
        worst = worst.max(z);
        out.pass &= z <= 3.0;
        out = out.detail(format!(
            "{name}: exact {exact:.8e}, mc {:.8e} ± {:.2e}, |z| = {z:.2}",
            mc.value, mc.std_error
        ));
    }
    out.summary = format!("worst |exact - mc| / se = {worst:.2} over 3 sets, n = 1e6");
    out
}

fn case_a_delta() -> Outcome {
    let params = RegimeParams::finite_l(1.0, 4.0, 1.0, 0).unwrap();
    let cfg = QuadConfig::with_tol(1e-12);
    let mut gaps = Vec::new();
    let mut out = Outcome::new(true, "");
    for n in [128usize, 256, 512] {
        let args = GArgs::new(spec(2 * n, vec![n, n], 1.0), data(n, 2 * n, 4.0)).unwrap();
        let exact = delta_log_g(&args, 1, ShiftTarget::Widths, &cfg).unwrap();
        let asym = delta_log_g_case_a(n, 2, &params, 1).unwrap();
        let gap = (exact - asym).abs();
        out.pass &= gap <= 5.0 / n as f64;
        out = out.detail(format!("N={n}: exact {exact:.10}, expansion {asym:.10}, gap {gap:.3e}, N*gap {:.4}", gap * n as f64));
        gaps.push(gap);
    }
    let ratios: Vec<f64> = gaps.windows(2).map(|w| w[0] / w[1]).collect();
    out.pass &= ratios.iter().all(|&r| r >= 1.6);
    out.summary = format!("gaps {:.2e}/{:.2e}/{:.2e}, shrink ratios {:.3}, {:.3}", gaps[0], gaps[1], gaps[2], ratios[0], ratios[1]);
    out
}

fn variance_factors() -> Outcome {
    let cfg = QuadConfig::default();
    let za = solve_z_star(4.0, 1.0, 1.0, 2).unwrap().root;
    let tc = solve_t_star(2.0, 2.0).unwrap().root;
    let cases = [
        ("a: N=512 L=2 alpha=1 nu=4", spec(1024, vec![512; 2], 1.0), data(512, 1024, 4.0), 1.0 / (1.0 + za)),
        ("b: N=96 L=48 P=32 nu=2", spec(64, vec![96; 48], 1.0), data(32, 64, 2.0), 1.0),
        ("c: N=400 L=40 P=20 nu=2", spec(40, vec![400; 40], 1.0), data(20, 40, 2.0), 1.0 / (1.0 + tc)),
    ];
    let mut out = Outcome::new(true, "");
    let mut worst = 0.0f64;
    for (name, s, d, target) in cases {
        let c = variance_factor_exact(&s, &d, &cfg).unwrap();
        let err = (c - target).abs();
        worst = worst.max(err);
        out.pass &= err <= 0.05;
        out = out.detail(format!("{name}: c_N = {c:.6}, limit {target:.6}, |diff| {err:.4}"));
    }
    out.summary = format!("worst |c_N - c| = {worst:.4} (tolerance 0.05)");
    out
}

fn model_selection() -> Outcome {
    let cfg = QuadConfig::default();
    let d = data(256, 512, 4.0);
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..=40 {
        let s2 = 1.0 + 0.05 * i as f64;
        let z = log_evidence_exact(&spec(512, vec![256], s2), &d, &cfg).unwrap();
        if z > best.0 {
            best = (z, s2);
        }
    }
    let target = sigma_star(4.0, 1).unwrap();
    let sigma_ok = (best.1 - target).abs() <= 0.05 * target;

    // Stationary point of the fixed-λ_prior evidence, located by bisection on
    // a centred difference of the expression itself.
    let mut lam_err = 0.0f64;
    let mut out = Outcome::new(true, "");
    for nu in [std::f64::consts::E, 2.0, 0.3, 7.5] {
        let sizes = Sizes { n0: 4, p: 2, widths: vec![] };
        let f = |l: f64| log_evidence_asymptotic(&RegimeParams::fixed_lambda_prior(l, nu, 0).unwrap(), &sizes).unwrap();
        let slope = |l: f64| {
            let h = 1e-5 * l;
            f(l + h) - f(l - h)
        };
        let (mut lo, mut hi) = (1e-4, 20.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let star = lambda_prior_star(nu).unwrap();
        let err = (0.5 * (lo + hi) - star).abs();
        lam_err = lam_err.max(err);
        out = out.detail(format!("nu={nu:.4}: stationary lambda {:.12}, closed form {star:.12}", 0.5 * (lo + hi)));
    }
    out.pass = sigma_ok && lam_err <= 1e-9;
    out.summary = format!(
        "sigma2 grid argmax {:.2} vs {target:.2}; lambda_prior* error {lam_err:.2e}",
        best.1
    );
    out
}

fn evidence_stationarity() -> Outcome {
    let nu: f64 = 2.0;
    let s2 = sigma_star(nu, 2).unwrap();
    let args = GArgs::new(spec(400, vec![6, 6], s2), data(200, 400, nu)).unwrap();
    let delta = delta_log_g(&args, 1, ShiftTarget::Data, &QuadConfig::default()).unwrap();
    let ratio = delta.exp() / 100.0;
    Outcome::new(
        (0.98..=1.02).contains(&ratio),
        format!("exp(delta)/(P/2) = {ratio:.5} at P=200, N0=400, widths (6,6), sigma2 = nu^(1/3)"),
    )
}

fn double_descent() -> Outcome {
    let grid = [0.25, 0.5, 0.8, 1.25, 2.0];
    let points = mc_double_descent_error(256, &grid, 0.25, 2000, 2024).unwrap();
    let mut out = Outcome::new(true, "");
    let mut failures = Vec::new();
    for pt in &points {
        let z = (pt.error.value - pt.closed_form).abs() / pt.error.std_error;
        let ok = z <= 3.0;
        out.pass &= ok;
        if !ok {
            failures.push(format!("{}", pt.alpha0));
        }
        // E‖θ* − V0‖² = 1 − α0 + σ²P/(N0 − P − 1) below the threshold.
        let (n0, p) = (256.0, pt.p as f64);
        let exact = if pt.alpha0 < 1.0 {
            (1.0 - p / n0) + 0.25 * p / (n0 - p - 1.0) + double_descent_variance_exact(256, pt.p, 0.25)
        } else {
            0.25 * n0 / (p - n0 - 1.0)
        };
        out = out.detail(format!(
            "alpha0={:.2}: mc {:.4} ± {:.4}, closed form {:.4}, |z| {z:.1}; finite-size expectation {exact:.4}",
            pt.alpha0, pt.error.value, pt.error.std_error, pt.closed_form
        ));
    }
    out.summary = if failures.is_empty() {
        "all grid points within 3 SE of the closed form".into()
    } else {
        format!("closed form outside 3 SE at alpha0 = {}", failures.join(", "))
    };
    out
}

fn scaling_law() -> Outcome {
    let (lambda, alpha, nu): (f64, f64, f64) = (0.5, 1.0, 2.0);
    let cfg = QuadConfig::default();
    let mut scaled = Vec::new();
    let mut out = Outcome::new(true, "");
    for n in [64usize, 128, 256, 512] {
        let l = (lambda * n as f64) as usize;
        let p = (alpha * n as f64) as usize;
        let c = variance_factor_exact(&spec(2 * p, vec![n; l], 1.0), &data(p, 2 * p, nu), &cfg).unwrap();
        let v = n as f64 * (c - 1.0);
        out = out.detail(format!("N={n}: c_N = {c:.10}, N(c_N - 1) = {v:.5}"));
        scaled.push(v);
    }
    let (a, b) = (scaled[2], scaled[3]);
    let stable = (a - b).abs() <= 0.1 * b.abs();
    let ln = nu.ln();
    let closed = -8.0 * lambda / 3.0 + 2.0 * (1.0 + ln) + (1.0 / alpha + ln) * (1.0 - ln / lambda);
    let matches = (b - closed).abs() <= 0.05 * closed.abs();
    out.pass = stable && matches;
    out.summary = format!(
        "N(c_N - 1): {a:.4} -> {b:.4} ({}stable within 10%); closed-form C = {closed:.4} ({}within 5%)",
        if stable { "" } else { "not " },
        if matches { "" } else { "not " }
    );
    out
}

fn monotonicity() -> Outcome {
    let (p, nu) = (100usize, 2.0);
    let sizes = Sizes { n0: 200, p, widths: vec![] };
    let mut worst = 0.0f64;
    let mut all_nonneg = true;
    for i in 0..20 {
        let lam = 0.05 * 400f64.powf(i as f64 / 19.0);
        let f = |l: f64| log_evidence_asymptotic(&RegimeParams::fixed_lambda_post(l, nu, 0).unwrap(), &sizes).unwrap();
        let h = 1e-4 * lam;
        let fd = (f(lam + h) - f(lam - h)) / (2.0 * h);
        let exact = d_log_evidence_d_lambda_post(p, nu, lam).unwrap();
        all_nonneg &= exact >= 0.0 && fd >= 0.0;
        worst = worst.max((fd - exact).abs() / exact.abs());
    }
    Outcome::new(
        worst <= 1e-6 && all_nonneg,
        format!("max relative difference {worst:.2e} over 20 lambda_post values; all derivatives >= 0: {all_nonneg}"),
    )
}

fn prior_density() -> Outcome {
    let samples = prior_q_samples(&[6, 6], 100_000, 77).unwrap();
    let ks = q_density_ks_test(&samples, &[6, 6]).unwrap();
    let mean = samples.iter().sum::<f64>() / samples.len() as f64 / 36.0;
    Outcome::new(
        ks.p_value > 0.01,
        format!("KS D = {:.5}, p = {:.3}, density mass {:.10}, mean Q/36 = {mean:.4}", ks.statistic, ks.p_value, ks.total_mass),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("gamma-density reduction", gamma_density_reduction),
        ("oracle certification", oracle_certification),
        ("finite-depth delta expansion", case_a_delta),
        ("regime variance factors", variance_factors),
        ("model selection optima", model_selection),
        ("evidence stationarity", evidence_stationarity),
        ("double descent", double_descent),
        ("variance-limited scaling law", scaling_law),
        ("evidence monotone in lambda_post", monotonicity),
        ("prior density KS test", prior_density),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id:>2} {name}: {} ({secs:.1} s)", outcome.summary);
        for line in &outcome.details {
            println!("          {line}");
        }
        if !outcome.pass {
            failed += 1;
        }
    }
    println!("acceptance: {failed} failing criteria");
    if failed > 0 {
        std::process::exit(1);
    }
}
