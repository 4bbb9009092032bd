use oumle::model::OUParams;
use oumle::moments::*;
use oumle::scalar::Dual2;
use oumle::transform::{psi, MgfArgs};
use oumle::Error;

/// Bias and MSE per (λ, T) row for α = −1, 0, 0.5, 1, from an independent
/// double-exponential quadrature of finite-difference λ-derivatives,
/// rounded to four decimals.
const ORACLE: [(f64, f64, [(f64, f64); 4]); 21] = [
    (0.01, 50.0, [(0.0341, 0.0049), (0.0361, 0.0055), (0.0366, 0.0057), (0.0368, 0.0057)]),
    (0.01, 75.0, [(0.0236, 0.0024), (0.0245, 0.0026), (0.0248, 0.0026), (0.0248, 0.0026)]),
    (0.01, 100.0, [(0.0181, 0.0014), (0.0186, 0.0015), (0.0188, 0.0015), (0.0188, 0.0015)]),
    (0.01, 125.0, [(0.0147, 0.0010), (0.0151, 0.0010), (0.0151, 0.0010), (0.0152, 0.0010)]),
    (0.01, 150.0, [(0.0124, 0.0007), (0.0127, 0.0007), (0.0127, 0.0007), (0.0127, 0.0007)]),
    (0.01, 175.0, [(0.0107, 0.0005), (0.0109, 0.0005), (0.0110, 0.0005), (0.0110, 0.0005)]),
    (0.01, 200.0, [(0.0095, 0.0004), (0.0096, 0.0004), (0.0096, 0.0004), (0.0096, 0.0004)]),
    (0.1, 50.0, [(0.0366, 0.0082), (0.0388, 0.0090), (0.0393, 0.0092), (0.0395, 0.0093)]),
    (0.1, 75.0, [(0.0252, 0.0046), (0.0261, 0.0049), (0.0264, 0.0050), (0.0265, 0.0050)]),
    (0.1, 100.0, [(0.0192, 0.0031), (0.0197, 0.0033), (0.0199, 0.0033), (0.0199, 0.0033)]),
    (0.1, 125.0, [(0.0155, 0.0023), (0.0158, 0.0024), (0.0159, 0.0024), (0.0160, 0.0024)]),
    (0.1, 150.0, [(0.0130, 0.0019), (0.0132, 0.0019), (0.0133, 0.0019), (0.0133, 0.0019)]),
    (0.1, 175.0, [(0.0112, 0.0015), (0.0113, 0.0016), (0.0114, 0.0016), (0.0114, 0.0016)]),
    (0.1, 200.0, [(0.0098, 0.0013), (0.0099, 0.0013), (0.0100, 0.0013), (0.0100, 0.0013)]),
    (1.0, 50.0, [(0.0370, 0.0415), (0.0392, 0.0442), (0.0398, 0.0450), (0.0400, 0.0452)]),
    (1.0, 75.0, [(0.0253, 0.0274), (0.0263, 0.0286), (0.0266, 0.0289), (0.0267, 0.0290)]),
    (1.0, 100.0, [(0.0192, 0.0204), (0.0198, 0.0211), (0.0199, 0.0212), (0.0200, 0.0213)]),
    (1.0, 125.0, [(0.0155, 0.0163), (0.0159, 0.0167), (0.0160, 0.0168), (0.0160, 0.0168)]),
    (1.0, 150.0, [(0.0130, 0.0135), (0.0132, 0.0138), (0.0133, 0.0139), (0.0133, 0.0139)]),
    (1.0, 175.0, [(0.0112, 0.0116), (0.0114, 0.0118), (0.0114, 0.0118), (0.0114, 0.0119)]),
    (1.0, 200.0, [(0.0098, 0.0101), (0.0100, 0.0103), (0.0100, 0.0103), (0.0100, 0.0103)]),
];

#[test]
fn table_grid_matches_independent_quadrature() {
    let rows = table1(&QuadratureConfig::default());
    assert_eq!(rows.len(), 84);
    let mut k = 0;
    for &(l, t, cells) in &ORACLE {
        for (i, &(b, m)) in cells.iter().enumerate() {
            let r = &rows[k];
            k += 1;
            assert_eq!((r.lambda, r.horizon, r.alpha), (l, t, TABLE_ALPHAS[i]));
            assert!(r.err.is_none());
            assert!((r.bias - b).abs() <= 5.1e-5, "bias at ({l}, {}, {t}): {} vs {b}", r.alpha, r.bias);
            assert!((r.mse - m).abs() <= 5.1e-5, "mse at ({l}, {}, {t}): {} vs {m}", r.alpha, r.mse);
        }
    }
}

#[test]
fn quadrature_reports_small_error_estimates() {
    let p = OUParams::unit(0.1, 0.0, 1.0, 100.0);
    let cfg = QuadratureConfig::default();
    let b = bias_lambda_hat(&p, &cfg).unwrap();
    assert!(b.error < 1e-8 * b.value.abs() + 1e-12);
    assert!((b.value - 0.019717).abs() < 1e-6);
}

#[test]
fn mse_dominates_cramer_rao_on_table_grid() {
    for r in table1(&QuadratureConfig::default()) {
        assert!(r.mse >= r.cr_bound, "({}, {}, {}): {} < {}", r.lambda, r.alpha, r.horizon, r.mse, r.cr_bound);
    }
}

#[test]
fn brownian_scaling_constants() {
    let c = limit_constants_check(&QuadratureConfig::default()).unwrap();
    for row in &c.rows {
        assert!((row.t_bias - 1.781423).abs() < 2e-5, "T·bias = {}", row.t_bias);
        assert!((row.t2_mse - 13.2846).abs() < 2e-3, "T²·mse = {}", row.t2_mse);
    }
    assert!((c.c1_est - 13.2857).abs() / 13.2857 < 1e-3);
    assert!((c.c0_est - 1.7814).abs() / 1.7814 > 100.0);
}

#[test]
fn lambda_bar_moments_match_oracle() {
    let cfg = QuadratureConfig::default();
    let m = lambda_bar_moments(&OUParams::unit(1.0, 0.5, 0.0, 50.0), &cfg).unwrap();
    assert!((m.bias - 0.08228).abs() < 1e-5);
    assert!((m.mse - 0.05355).abs() < 1e-5);
    let m = lambda_bar_moments(&OUParams::unit(1.0, 0.0, 0.0, 200.0), &cfg).unwrap();
    assert!((m.bias - 0.02017).abs() < 1e-5);
    assert!((m.mse - 0.010836).abs() < 1e-5);
    assert!((m.bias - 2.0 / 200.0).abs() / 0.01 > 0.9, "bias(λ̄) is near 4/T, not 2/T");
    assert!(lambda_bar_moments(&OUParams::unit(1.0, 0.0, 1.0, 10.0), &cfg).is_err());
}

#[test]
fn explosive_regime_scaled_curves_vanish() {
    let cfg = QuadratureConfig::default();
    for a in TABLE_ALPHAS {
        let r = moment_row(&OUParams::unit(-1.0, a, 1.0, 20.0), &cfg);
        assert!(r.f1.abs() < 1e-5 && r.f2.abs() < 1e-5, "{r:?}");
    }
}

#[test]
fn scaled_curves_reject_empty_grid() {
    let p = OUParams::unit(1.0, 0.0, 1.0, 10.0);
    assert!(matches!(scaled_curves(&p, &[], &QuadratureConfig::default()), Err(Error::InvalidConfig(_))));
}

#[test]
fn expected_q_is_minus_mu_derivative_of_laplace_transform() {
    for &(l, a, y, t) in &[(1.0, 0.0, 1.0, 2.0), (0.3, -1.0, 2.0, 7.0), (-0.5, 0.5, 1.0, 3.0)] {
        let p = OUParams::unit(l, a, y, t);
        let z = Dual2::constant(0.0);
        let d = psi(&p, MgfArgs::new(z, z, z, Dual2::variable(0.0))).unwrap();
        let eq = expected_q(&p).unwrap();
        assert!((-d.d1() - eq).abs() <= 1e-10 * eq, "{} vs {eq}", -d.d1());
    }
    let eq = expected_q(&OUParams::unit(1.0, 0.0, 1.0, 2.0)).unwrap();
    assert!((eq - 1.2454).abs() < 1e-4);
}

#[test]
fn negative_moments_are_consistent_with_jensen() {
    let p = OUParams::unit(1.0, 0.0, 1.0, 10.0);
    let cfg = QuadratureConfig::default();
    let m1 = negative_moment_q(&p, 1.0, &cfg).unwrap().value;
    let m2 = negative_moment_q(&p, 2.0, &cfg).unwrap().value;
    let mh = negative_moment_q(&p, 0.5, &cfg).unwrap().value;
    assert!(m1 >= 1.0 / expected_q(&p).unwrap());
    assert!(m2 >= m1 * m1);
    assert!(m1 >= mh * mh);
    assert!(negative_moment_q(&p, 0.0, &cfg).is_err());
}

#[test]
fn refinement_budget_is_enforced() {
    let cfg = QuadratureConfig {
        max_refinements: 1,
        rel_tol: 1e-14,
        abs_tol: 1e-300,
        ..Default::default()
    };
    let r = bias_lambda_hat(&OUParams::unit(1.0, 0.0, 1.0, 50.0), &cfg);
    assert!(matches!(r, Err(Error::ToleranceNotMet { .. })), "{r:?}");
}

#[test]
fn alpha_hat_closed_forms() {
    let m = alpha_hat_moments(&OUParams::unit(0.1, 0.5, 1.0, 100.0)).unwrap();
    assert_eq!(m.bias, 0.0);
    assert!((m.mse - 1.0).abs() < 1e-12);
    let a = alpha_bar_moments(&OUParams::unit(1.0, 0.5, 1.0, 10.0)).unwrap();
    assert!((a.mean - (0.5 + 0.5 * (1.0 - (-10f64).exp()) / 10.0)).abs() < 1e-12);
    assert!((a.asymptotic_variance.unwrap() - 0.1).abs() < 1e-15);
}

#[test]
fn table_csv_layout() {
    let rows = vec![moment_row(&OUParams::unit(1.0, 0.0, 1.0, 50.0), &QuadratureConfig::default())];
    let mut buf = Vec::new();
    write_table1_csv(&mut buf, &rows).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda,alpha,T,bias,mse,err"));
    let f: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&f[..3], &["1", "0", "50"]);
    assert!((f[3].parse::<f64>().unwrap() - 0.0392).abs() < 5e-5);
    assert_eq!(f[5], "");
}
