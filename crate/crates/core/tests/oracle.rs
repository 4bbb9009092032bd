use oumle::model::{EstimatorKind, OUParams};
use oumle::moments::{integrate_semi_infinite, lambda_bar_moments, psi_bar_jet, QuadratureConfig};
use oumle::oracle::*;
use oumle::simulate::{stream_stats, SimConfig};

fn cfg(n: usize) -> OracleConfig {
    OracleConfig::default().with_paths(n)
}

#[test]
fn lambda_hat_bias_at_moderate_horizon() {
    let p = OUParams::unit(1.0, 0.0, 1.0, 50.0);
    let (bias, mse) = mc_estimator_stats(&p, EstimatorKind::LambdaHatGivenAlpha, &cfg(20_000)).unwrap();
    let bias = bias.compare(0.039206);
    let mse = mse.compare(0.04420);
    assert!(bias.passes(Z_MAX), "{bias:?}");
    assert!(mse.passes(Z_MAX), "{mse:?}");
    assert_eq!(bias.n_steps, 5000);
}

#[test]
fn alpha_hat_is_unbiased() {
    let p = OUParams::unit(0.5, 0.7, 1.0, 20.0);
    let (bias, mse) = mc_estimator_stats(&p, EstimatorKind::AlphaHatGivenLambda, &cfg(10_000).with_steps(2000)).unwrap();
    let bias = bias.compare(0.0);
    assert!(bias.passes(Z_MAX), "{bias:?}");
    let mse = mse.compare(1.0 / (0.25 * 20.0));
    assert!(mse.passes(Z_MAX), "{mse:?}");
}

#[test]
fn runs_are_deterministic_given_seed() {
    let p = OUParams::unit(1.0, 0.0, 1.0, 5.0);
    let c = cfg(500).with_steps(200);
    let a = mc_functional_mean(&p, Functional::QMean, &c).unwrap();
    let b = mc_functional_mean(&p, Functional::QMean, &c).unwrap();
    assert_eq!(a, b);
    let d = mc_functional_mean(&p, Functional::QMean, &c.with_seed(7)).unwrap();
    assert_ne!(a.estimate, d.estimate);
}

#[test]
fn discretization_sweep_converges_to_exact_bias() {
    let p = OUParams::unit(1.0, 0.0, 1.0, 50.0);
    let grid = [625, 1250, 2500, 5000, 10000];
    let s = mc_discretization_sweep(&p, EstimatorKind::LambdaHatGivenAlpha, &grid, &cfg(10_000)).unwrap();
    assert_eq!(s.rows.len(), 5);
    let d: Vec<f64> = s.rows.windows(2).map(|w| (w[1].bias - w[0].bias).abs()).collect();
    for w in d.windows(2) {
        assert!(w[1] < w[0], "successive differences should shrink: {d:?}");
    }
    let e = s.extrapolated_bias.clone().compare(0.039206);
    assert!(e.passes(Z_MAX), "{e:?}");
    assert!(mc_discretization_sweep(&p, EstimatorKind::LambdaHatGivenAlpha, &[600, 1000], &cfg(100)).is_err());
    assert!(mc_discretization_sweep(&p, EstimatorKind::LambdaHatGivenAlpha, &[1000, 500], &cfg(100)).is_err());
}

#[test]
fn strides_share_terminal_values() {
    let p = OUParams::unit(0.4, 0.2, 1.0, 3.0);
    let mut checked = 0;
    stream_stats(p, SimConfig::new(120, 9, 50), &[1, 2, 4, 120], |_, st| {
        for s in &st[1..] {
            assert_eq!(s.y_t, st[0].y_t);
        }
        checked += 1;
    })
    .unwrap();
    assert_eq!(checked, 50);
}

#[test]
fn transform_at_origin_is_exactly_one() {
    let p = OUParams::unit(1.0, 0.0, 1.0, 5.0);
    let f = Functional::ExpLinearQuadratic(oumle::transform::MgfArgs::new(0.0, 0.0, 0.0, 0.0));
    let r = mc_functional_mean(&p, f, &cfg(200).with_steps(50)).unwrap();
    assert_eq!(r.estimate, 1.0);
    assert_eq!(r.std_error, 0.0);
    assert!(r.compare(1.0).passes(Z_MAX));
}

#[test]
fn indicator_matches_inverted_cdf() {
    let p = OUParams::unit(1.0, 0.0, 1.0, 10.0);
    let fs: Vec<Functional> = [0.5, 1.0, 1.5].iter().map(|&x| Functional::IndicatorLambdaHatBelow(x)).collect();
    let rs = mc_functional_means(&p, &fs, &cfg(10_000).with_steps(2000)).unwrap();
    for (f, r) in fs.iter().zip(rs) {
        let a = f.analytic(&p).unwrap();
        assert!((r.estimate - a).abs() < 0.01, "{}: {} vs {a}", f.name(), r.estimate);
    }
}

#[test]
fn lambda_bar_mean_uses_mixed_coefficient() {
    let p = OUParams::unit(1.0, 1.0, 0.0, 3.0);
    let q = QuadratureConfig::default();
    let derived = lambda_bar_moments(&p, &q).unwrap().mean.value;
    let t = p.horizon;
    let alternative = integrate_semi_infinite(
        |u| {
            let j = psi_bar_jet(&p, u * u).unwrap();
            2.0 * u * (0.5 * t * j.coeff(0, 0) - j.coeff(2, 0) + 2.0 * j.coeff(0, 2))
        },
        &q,
    )
    .unwrap()
    .value;
    let names = vec!["lambda_bar".to_string()];
    let mc = mc_path_means(&p, &names, &cfg(20_000).with_steps(2000), |s, out| {
        out[0] = oumle::estimate::lambda_bar(s).ok();
    })
    .unwrap()
    .remove(0);
    assert!(mc.clone().compare(derived).passes(Z_MAX), "{mc:?} vs {derived}");
    let alt = mc.compare(alternative);
    assert!(!alt.passes(5.0), "alternative {alternative}: {alt:?}, derived {derived}");
}

#[test]
fn retry_quadruples_paths_on_large_z() {
    let p = OUParams::unit(1.0, 0.0, 1.0, 2.0);
    let c = cfg(400).with_steps(100);
    let r = with_retry(&c, Z_MAX, |c| Ok(mc_functional_mean(&p, Functional::QMean, c)?.compare(-10.0))).unwrap();
    assert!(r.retried);
    assert_eq!(r.n_paths, 1600);
}

#[test]
fn invalid_configs_are_rejected() {
    let p = OUParams::unit(1.0, 0.0, 1.0, 2.0);
    assert!(mc_functional_mean(&p, Functional::QMean, &cfg(1)).is_err());
    let bad = OracleConfig { n_batches: 1, ..cfg(100) };
    assert!(mc_functional_mean(&p, Functional::QMean, &bad).is_err());
}
