use proptest::prelude::*;

use sbm_core::bernstein::stable_tail_identity;
use sbm_core::green::green_numeric_split;
use sbm_core::heatkernel::{chapman_kolmogorov, p_fourier, total_mass};
use sbm_core::LaplaceExponentSpec;

fn catalog() -> Vec<LaplaceExponentSpec> {
    vec![
        LaplaceExponentSpec::stable(0.6).unwrap(),
        LaplaceExponentSpec::stable(1.0).unwrap(),
        LaplaceExponentSpec::stable(1.7).unwrap(),
        LaplaceExponentSpec::geometric_stable(1.0).unwrap(),
        LaplaceExponentSpec::geometric_stable(2.0).unwrap(),
        LaplaceExponentSpec::conjugate_geometric(1.0).unwrap(),
        LaplaceExponentSpec::conjugate_geometric(0.5).unwrap(),
        LaplaceExponentSpec::conjugate_gamma(),
    ]
}

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

proptest! {
    #[test]
    fn doubling_inequalities(i in 0usize..8, l in log_uniform(1e-6, 1e8), x in 1.0f64..10.0) {
        let s = &catalog()[i];
        let (p, h) = (s.phi(l).unwrap(), s.h(l).unwrap());
        prop_assert!(s.phi(x * l).unwrap() <= x * p * (1.0 + 1e-12));
        prop_assert!(s.h(x * l).unwrap() <= x * x * h * (1.0 + 1e-9));
        // and φ, H are non-decreasing
        prop_assert!(s.phi(x * l).unwrap() >= p * (1.0 - 1e-12));
        prop_assert!(s.h(x * l).unwrap() >= h * (1.0 - 1e-9));
    }

    #[test]
    fn inverse_round_trip(i in 0usize..8, l in log_uniform(1e-6, 1e10)) {
        let s = &catalog()[i];
        let back = s.phi_inverse(s.phi(l).unwrap()).unwrap();
        prop_assert!((back / l - 1.0).abs() < 1e-8, "{} lambda={l} back={back}", s.name());
    }

    #[test]
    fn stable_levy_identity(alpha in 0.2f64..1.9, r in log_uniform(1e-3, 1e3)) {
        let (lhs, rhs) = stable_tail_identity(alpha, r).unwrap();
        prop_assert!((lhs / rhs - 1.0).abs() < 1e-8);
    }

    #[test]
    fn stable_h_is_a_fixed_fraction_of_phi(alpha in 0.1f64..1.95, l in log_uniform(1e-6, 1e8)) {
        let s = LaplaceExponentSpec::stable(alpha).unwrap();
        let ratio = s.h(l).unwrap() / s.phi(l).unwrap();
        prop_assert!((ratio - (1.0 - 0.5 * alpha)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn kernel_has_unit_mass(alpha in 0.6f64..1.8, t in log_uniform(1e-2, 1.0), d in 1usize..=3) {
        let s = LaplaceExponentSpec::stable(alpha).unwrap();
        let m = total_mass(&s, t, d).unwrap();
        prop_assert!((m - 1.0).abs() < 1e-4, "mass {m}");
    }

    #[test]
    fn chapman_kolmogorov_at_origin(i in 0usize..8, t in log_uniform(5e-2, 1.0)) {
        let s = &catalog()[i];
        // the geometric stable kernel is unbounded at the origin for small t
        prop_assume!(!s.name().starts_with("geometric") || t >= 0.5);
        let (direct, conv) = chapman_kolmogorov(s, t).unwrap();
        prop_assert!((conv / direct - 1.0).abs() < 1e-5, "{} t={t}: {direct} vs {conv}", s.name());
    }

    #[test]
    fn kernel_decreases_radially(i in 0usize..8, t in log_uniform(1e-2, 1.0), d in 1usize..=3) {
        let s = &catalog()[i];
        prop_assume!(!s.name().starts_with("geometric"));
        let mut prev = f64::INFINITY;
        for k in 0..30 {
            let r = 1e-3 * 1.4f64.powi(k);
            let p = p_fourier(s, t, r, d).unwrap();
            prop_assert!(p > 0.0 && p <= prev * (1.0 + 1e-9), "r={r}: {p} after {prev}");
            prev = p;
        }
    }

    #[test]
    fn green_is_homogeneous_for_stable(alpha in 0.5f64..1.8, r in log_uniform(1e-2, 1.0)) {
        let s = LaplaceExponentSpec::stable(alpha).unwrap();
        let g1 = green_numeric_split(&s, r, 3, 1.0).unwrap().g;
        let g2 = green_numeric_split(&s, 2.0 * r, 3, 1.0).unwrap().g;
        prop_assert!((g2 / g1 / 2f64.powf(alpha - 3.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn green_does_not_depend_on_the_split(r in log_uniform(1e-3, 1.0), split in 0.25f64..4.0) {
        let s = LaplaceExponentSpec::conjugate_gamma();
        let a = green_numeric_split(&s, r, 3, 1.0).unwrap().g;
        let b = green_numeric_split(&s, r, 3, split).unwrap().g;
        prop_assert!((a / b - 1.0).abs() < 1e-2);
    }
}
