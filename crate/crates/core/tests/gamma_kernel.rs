use dln_core::gamma::{digamma, digamma_real, log_gamma, trigamma_real};
use num_complex::Complex64;
use proptest::prelude::*;

fn polar_strategy() -> impl Strategy<Value = Complex64> {
    // |z| log-uniform in [0.5, 1e4], argument in the open right half-plane.
    (0.5f64.ln()..1e4f64.ln(), -1.5f64..1.5).prop_map(|(r, a)| Complex64::from_polar(r.exp(), a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn recurrence(z in polar_strategy()) {
        let lhs = log_gamma(z + 1.0).unwrap() - log_gamma(z).unwrap() - z.ln();
        prop_assert!(lhs.norm() <= 1e-12 * (1.0 + log_gamma(z).unwrap().norm() * 1e-3), "{z}: {lhs}");
    }

    #[test]
    fn conjugate_symmetry(z in polar_strategy()) {
        let a = log_gamma(z.conj()).unwrap();
        let b = log_gamma(z).unwrap().conj();
        prop_assert!((a - b).norm() <= 1e-13 * b.norm().max(1.0));
    }

    #[test]
    fn complex_digamma_matches_finite_difference(z in polar_strategy()) {
        let h = 1e-5 * z.norm().max(1.0);
        let fd = (log_gamma(z + h).unwrap() - log_gamma(z - h).unwrap()) / (2.0 * h);
        let psi = digamma(z).unwrap();
        prop_assert!((fd - psi).norm() <= 1e-6 * psi.norm().max(1.0));
    }
}

#[test]
fn derivative_consistency_on_real_grid() {
    let h = 1e-5;
    for i in 0..=99 {
        let x = 1.0 + i as f64;
        let z = Complex64::new(x, 0.0);
        let fd = (log_gamma(z + h).unwrap() - log_gamma(z - h).unwrap()).re / (2.0 * h);
        let psi = digamma_real(x).unwrap();
        assert!((fd - psi).abs() < 1e-8, "x={x}: fd {fd} vs {psi}");
        let fd2 = (digamma_real(x + h).unwrap() - digamma_real(x - h).unwrap()) / (2.0 * h);
        assert!((fd2 - trigamma_real(x).unwrap()).abs() < 1e-8);
    }
}

#[test]
fn finite_across_contour_range() {
    // Arguments of the form width/2 + 1 − i N t visited by the contour.
    for n in [2.0, 64.0, 4096.0] {
        for t in [-50.0, -1.0, 0.0, 0.3, 7.0, 200.0] {
            let v = log_gamma(Complex64::new(n / 2.0 + 1.0, -n * t)).unwrap();
            assert!(v.re.is_finite() && v.im.is_finite());
        }
    }
}
