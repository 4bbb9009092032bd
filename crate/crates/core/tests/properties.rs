use num_complex::Complex64;
use oumle::estimate::*;
use oumle::invert::{cdf_lambda_hat, InversionConfig};
use oumle::model::*;
use oumle::simulate::{path_to_stats, simulate_ou_exact, SimConfig};
use oumle::transform::*;
use proptest::prelude::*;

fn stats() -> impl Strategy<Value = SufficientStats> {
    (-5.0..5.0f64, 0.5..60.0f64, -3.0..3.0f64, -3.0..3.0f64, 0.01..20.0f64).prop_map(|(y0, t, y_t, m, spread)| {
        let i_t = m * t;
        SufficientStats {
            y_t,
            i_t,
            j_t: i_t * i_t / t + spread * t,
            y0,
            horizon: t,
        }
    })
}

fn params() -> impl Strategy<Value = OUParams> {
    (-1.0..3.0f64, -2.0..2.0f64, -2.0..2.0f64, 0.5..30.0f64).prop_map(|(l, a, y, t)| OUParams::unit(l, a, y, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn q_is_minimised_at_alpha_bar(s in stats(), d in -3.0..3.0f64) {
        let ab = s.alpha_bar();
        prop_assert!(s.q_of_alpha(ab + d) >= s.q_of_alpha(ab) - 1e-9 * s.j_t.abs().max(1.0));
        prop_assert!((s.q_of_alpha(ab + d) - s.q_min() - d * d * s.horizon).abs() <= 1e-8 * s.j_t.abs().max(1.0));
    }

    #[test]
    fn sigma_rescaling_round_trips(p in params(), sigma in 0.05..20.0f64) {
        let (u, f) = rescale_to_unit_sigma(OUParams { sigma, ..p }).unwrap();
        prop_assert_eq!(u.sigma, 1.0);
        let back = restore_sigma(u, f);
        prop_assert!((back.alpha - p.alpha).abs() <= 1e-12 * (1.0 + p.alpha.abs()));
        prop_assert!((back.y0 - p.y0).abs() <= 1e-12 * (1.0 + p.y0.abs()));
        prop_assert_eq!(back.sigma, sigma);
    }

    #[test]
    fn lambda_hat_error_is_martingale_ratio(s in stats(), l in -2.0..2.0f64, a in -2.0..2.0f64) {
        let q = s.q_of_alpha(a);
        let lh = mle_lambda_given_alpha(&s, a).unwrap();
        prop_assert!(((lh - l) - s.martingale_m(l, a) / q).abs() <= 1e-9 * (1.0 + lh.abs()));
    }

    #[test]
    fn lambda_bar_decomposes_through_known_alpha(s in stats(), a in -2.0..2.0f64) {
        let ab = s.alpha_bar();
        let qb = s.q_min();
        let rhs = mle_lambda_given_alpha(&s, a).unwrap() * s.q_of_alpha(a) / qb + (ab - a) * (s.y_t - s.y0) / qb;
        let lb = lambda_bar(&s).unwrap();
        prop_assert!((lb - rhs).abs() <= 1e-8 * (1.0 + lb.abs()), "{} vs {}", lb, rhs);
    }

    #[test]
    fn alpha_hat_solves_score(s in stats(), l in 0.1..3.0f64) {
        let a = mle_alpha_given_lambda(&s, l).unwrap();
        prop_assert!(s.martingale_n(l, a).abs() <= 1e-9 * (1.0 + s.i_t.abs() * l));
    }

    #[test]
    fn likelihood_ratio_is_antisymmetric(s in stats(), l in -1.0..2.0f64, a in -1.0..1.0f64, l0 in -1.0..2.0f64, a0 in -1.0..1.0f64) {
        let f = log_likelihood_ratio(&s, &LikelihoodRatioArgs { lambda: l, alpha: a, lambda0: l0, alpha0: a0 });
        let b = log_likelihood_ratio(&s, &LikelihoodRatioArgs { lambda: l0, alpha: a0, lambda0: l, alpha0: a });
        prop_assert!((f + b).abs() <= 1e-9 * (1.0 + f.abs()));
    }

    #[test]
    fn complex_transform_conjugate_symmetry(p in params(), z in prop::array::uniform8(-0.3..0.3f64), mu in 0.05..2.0f64, w in -2.0..2.0f64) {
        let args = MgfArgs::new(
            Complex64::new(z[0], z[1]),
            Complex64::new(z[2], z[3]),
            Complex64::new(z[4].min(0.0), z[5]),
            Complex64::new(mu, w),
        );
        let u = psi_complex(&p, args, &mut BranchTracker::new());
        let v = psi_complex(&p, args.conj(), &mut BranchTracker::new());
        if let (Ok(u), Ok(v)) = (u, v) {
            prop_assert!((u - v.conj()).norm() <= 1e-10 * u.norm().max(1e-300));
        }
    }

    #[test]
    fn dual_derivative_matches_difference(p in params(), mu in 0.05..2.0f64) {
        let args = MgfArgs::laplace(mu);
        let d = psi_lambda_dual(&p, args).unwrap();
        let h = 1e-4 * (1.0 + p.lambda.abs());
        let fd = (psi(&p.with_lambda(p.lambda + h), args).unwrap() - psi(&p.with_lambda(p.lambda - h), args).unwrap()) / (2.0 * h);
        prop_assert!((d.d1() - fd).abs() <= 1e-5 * (d.d1().abs() + 1e-6 * d.value()), "{} vs {}", d.d1(), fd);
    }

    #[test]
    fn integrals_satisfy_cauchy_schwarz(seed in 0u64..1_000, l in -0.5..2.0f64, a in -1.0..1.0f64) {
        let path = simulate_ou_exact(OUParams::unit(l, a, 1.0, 3.0), SimConfig::new(300, seed, 1)).unwrap();
        let s = path_to_stats(&path[0]);
        prop_assert!(s.i_t * s.i_t <= s.horizon * s.j_t * (1.0 + 1e-12));
        prop_assert!(s.q_min() >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cdf_is_monotone(l in 0.0..2.0f64, a in -1.0..1.0f64, t in 5.0..40.0f64, x in -0.5..2.5f64, dx in 0.01..1.0f64) {
        let p = OUParams::unit(l, a, 1.0, t);
        let cfg = InversionConfig::default();
        let lo = cdf_lambda_hat(&p, x, &cfg).unwrap();
        let hi = cdf_lambda_hat(&p, x + dx, &cfg).unwrap();
        prop_assert!(hi.cdf >= lo.cdf - 1e-8);
        prop_assert!((0.0..=1.0).contains(&lo.cdf));
    }
}
