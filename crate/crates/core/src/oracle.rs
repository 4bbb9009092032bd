//! Monte Carlo oracle.
//!
//! Every analytic quantity in the crate has a brute-force counterpart here:
//! exact-transition paths are reduced to sufficient statistics on the fly
//! and averaged, with standard errors from batch means. Path `k` always
//! draws from substream `k` of the seed, so results do not depend on
//! evaluation order, and coarser grids in a sweep reuse the same noise.

use crate::error::{Error, Result};
use crate::estimate::{lambda_bar, mle_alpha_given_lambda, mle_lambda_given_alpha};
use crate::invert::{cdf_lambda_hat, InversionConfig};
use crate::model::{validate, EstimatorKind, OUParams, SufficientStats};
use crate::moments::{
    alpha_bar_moments, alpha_hat_moments, expected_q, lambda_bar_moments, lambda_hat_moments,
    negative_moment_q, QuadratureConfig,
};
use crate::simulate::{stream_stats, SimConfig};
use crate::transform::{cameron_martin, laplace_q, psi, psi_bar, MgfArgs};
use serde::{Deserialize, Serialize};
use std::io::Write;

pub const Z_MAX: f64 = 3.0;

/// Steps per path when none is given.
pub fn default_n_steps(horizon: f64) -> usize {
    if horizon <= 50.0 {
        5000
    } else {
        (100.0 * horizon).ceil() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub n_paths: usize,
    pub n_steps: Option<usize>,
    pub seed: u64,
    pub n_batches: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            n_paths: 100_000,
            n_steps: None,
            seed: 20_150_601,
            n_batches: 100,
        }
    }
}

impl OracleConfig {
    pub fn quick() -> Self {
        OracleConfig {
            n_paths: 10_000,
            ..Default::default()
        }
    }

    pub fn with_paths(self, n_paths: usize) -> Self {
        OracleConfig { n_paths, ..self }
    }

    pub fn with_steps(self, n_steps: usize) -> Self {
        OracleConfig {
            n_steps: Some(n_steps),
            ..self
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        OracleConfig { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(Error::InvalidConfig("n_paths must be >= 2".into()));
        }
        if self.n_batches < 2 {
            return Err(Error::InvalidConfig("n_batches must be >= 2".into()));
        }
        if self.n_steps == Some(0) {
            return Err(Error::InvalidConfig("n_steps must be >= 1".into()));
        }
        Ok(())
    }

    pub fn steps_for(&self, horizon: f64) -> usize {
        self.n_steps.unwrap_or_else(|| default_n_steps(horizon))
    }

    pub fn sim(&self, horizon: f64) -> SimConfig {
        SimConfig::new(self.steps_for(horizon), self.seed, self.n_paths)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub target: String,
    pub estimate: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub analytic: Option<f64>,
    pub z_score: Option<f64>,
    /// Paths dropped because the functional was undefined on them.
    pub excluded: usize,
    pub retried: bool,
}

impl McReport {
    /// Attaches an analytic value and the resulting z-score.
    pub fn compare(mut self, analytic: f64) -> Self {
        let diff = self.estimate - analytic;
        let z = if diff == 0.0 {
            0.0
        } else {
            diff / self.std_error.max(f64::MIN_POSITIVE)
        };
        self.analytic = Some(analytic);
        self.z_score = Some(z);
        self
    }

    pub fn passes(&self, z_max: f64) -> bool {
        self.z_score.is_some_and(|z| z.abs() <= z_max)
    }

    pub fn exclusion_rate(&self) -> f64 {
        self.excluded as f64 / self.n_paths as f64
    }
}

/// Batch-means accumulator: path `k` of `n` goes to batch `k·b/n`.
#[derive(Clone, Debug)]
pub struct BatchMeans {
    n_paths: usize,
    sums: Vec<f64>,
    counts: Vec<usize>,
}

impl BatchMeans {
    pub fn new(n_paths: usize, n_batches: usize) -> Self {
        let b = n_batches.min(n_paths).max(1);
        BatchMeans {
            n_paths,
            sums: vec![0.0; b],
            counts: vec![0; b],
        }
    }

    pub fn push(&mut self, path_index: usize, value: f64) {
        let b = path_index * self.sums.len() / self.n_paths;
        self.sums[b] += value;
        self.counts[b] += 1;
    }

    pub fn count(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Overall mean and its standard error.
    pub fn finish(&self) -> (f64, f64) {
        let n = self.count();
        if n == 0 {
            return (f64::NAN, f64::NAN);
        }
        let mean = self.sums.iter().sum::<f64>() / n as f64;
        let means: Vec<f64> = self
            .sums
            .iter()
            .zip(&self.counts)
            .filter(|(_, &c)| c > 0)
            .map(|(s, &c)| s / c as f64)
            .collect();
        let b = means.len();
        if b < 2 {
            return (mean, f64::NAN);
        }
        let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (b - 1) as f64;
        (mean, (var / b as f64).sqrt())
    }
}

/// Path functionals with an analytic counterpart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    /// `exp{z₁Y_T + z₂I_T − vY_T² − μQ_T(α)}`.
    ExpLinearQuadratic(MgfArgs<f64>),
    /// `Q_T(α)^{−p}`.
    InverseQPower(f64),
    /// `1{λ̂_T(α) < x}`.
    IndicatorLambdaHatBelow(f64),
    QMean,
    /// `exp{z₁Y_T + z₂ᾱ_T − μQ_T(ᾱ_T)}`.
    PsiBar { z1: f64, z2: f64, mu: f64 },
}

impl Functional {
    pub fn name(&self) -> String {
        match self {
            Functional::ExpLinearQuadratic(a) => {
                format!("exp_linear_quadratic({}, {}, {}, {})", a.z1, a.z2, a.v, a.mu)
            }
            Functional::InverseQPower(p) => format!("inverse_q_power({p})"),
            Functional::IndicatorLambdaHatBelow(x) => format!("indicator_lambda_hat_below({x})"),
            Functional::QMean => "q_mean".into(),
            Functional::PsiBar { z1, z2, mu } => format!("psi_bar({z1}, {z2}, {mu})"),
        }
    }

    pub fn eval(&self, s: &SufficientStats, alpha: f64) -> Option<f64> {
        match *self {
            Functional::ExpLinearQuadratic(a) => Some(
                (a.z1 * s.y_t + a.z2 * s.i_t - a.v * s.y_t * s.y_t - a.mu * s.q_of_alpha(alpha)).exp(),
            ),
            Functional::InverseQPower(p) => {
                let q = s.q_of_alpha(alpha);
                (q > 0.0).then(|| q.powf(-p))
            }
            Functional::IndicatorLambdaHatBelow(x) => {
                mle_lambda_given_alpha(s, alpha).ok().map(|l| if l < x { 1.0 } else { 0.0 })
            }
            Functional::QMean => Some(s.q_of_alpha(alpha)),
            Functional::PsiBar { z1, z2, mu } => {
                Some((z1 * s.y_t + z2 * s.alpha_bar() - mu * s.q_min()).exp())
            }
        }
    }

    /// The closed-form or quadrature value of `E[functional]`.
    pub fn analytic(&self, params: &OUParams) -> Result<f64> {
        match *self {
            Functional::ExpLinearQuadratic(a) => psi(params, a),
            Functional::InverseQPower(p) => Ok(negative_moment_q(params, p, &QuadratureConfig::default())?.value),
            Functional::IndicatorLambdaHatBelow(x) => Ok(cdf_lambda_hat(params, x, &InversionConfig::default())?.cdf),
            Functional::QMean => expected_q(params),
            Functional::PsiBar { z1, z2, mu } => psi_bar(params, z1, z2, mu),
        }
    }
}

/// Averages several path functionals over one set of simulated paths.
/// `f` writes one optional value per name; `None` excludes the path for
/// that entry.
pub fn mc_path_means<F>(params: &OUParams, names: &[String], cfg: &OracleConfig, mut f: F) -> Result<Vec<McReport>>
where
    F: FnMut(&SufficientStats, &mut [Option<f64>]),
{
    cfg.validate()?;
    let p = validate(*params)?;
    let sim = cfg.sim(p.horizon);
    let mut acc: Vec<BatchMeans> = names.iter().map(|_| BatchMeans::new(cfg.n_paths, cfg.n_batches)).collect();
    let mut buf = vec![None; names.len()];
    stream_stats(p, sim, &[1], |k, st| {
        buf.iter_mut().for_each(|b| *b = None);
        f(&st[0], &mut buf);
        for (a, v) in acc.iter_mut().zip(&buf) {
            if let Some(v) = v {
                if v.is_finite() {
                    a.push(k, *v);
                }
            }
        }
    })?;
    Ok(names
        .iter()
        .zip(&acc)
        .map(|(name, a)| {
            let (estimate, std_error) = a.finish();
            McReport {
                target: name.clone(),
                estimate,
                std_error,
                n_paths: cfg.n_paths,
                n_steps: sim.n_steps,
                seed: cfg.seed,
                analytic: None,
                z_score: None,
                excluded: cfg.n_paths - a.count(),
                retried: false,
            }
        })
        .collect())
}

/// MC means of several functionals from a single simulation pass.
pub fn mc_functional_means(params: &OUParams, functionals: &[Functional], cfg: &OracleConfig) -> Result<Vec<McReport>> {
    let names: Vec<String> = functionals.iter().map(Functional::name).collect();
    let alpha = params.alpha;
    mc_path_means(params, &names, cfg, |s, out| {
        for (o, f) in out.iter_mut().zip(functionals) {
            *o = f.eval(s, alpha);
        }
    })
}

pub fn mc_functional_mean(params: &OUParams, functional: Functional, cfg: &OracleConfig) -> Result<McReport> {
    Ok(mc_functional_means(params, &[functional], cfg)?.remove(0))
}

/// Estimation error `θ̂ − θ` of one path, `None` when undefined.
pub fn estimator_error(kind: EstimatorKind, s: &SufficientStats, params: &OUParams) -> Option<f64> {
    match kind {
        EstimatorKind::LambdaHatGivenAlpha => mle_lambda_given_alpha(s, params.alpha).ok().map(|l| l - params.lambda),
        EstimatorKind::AlphaHatGivenLambda => mle_alpha_given_lambda(s, params.lambda).ok().map(|a| a - params.alpha),
        EstimatorKind::AlphaBar => Some(s.alpha_bar() - params.alpha),
        EstimatorKind::LambdaBar => lambda_bar(s).ok().map(|l| l - params.lambda),
    }
}

/// Sample bias and MSE of an estimator, as two reports.
pub fn mc_estimator_stats(params: &OUParams, kind: EstimatorKind, cfg: &OracleConfig) -> Result<(McReport, McReport)> {
    let names = [format!("bias_{}", kind.name()), format!("mse_{}", kind.name())];
    let p = *params;
    let mut r = mc_path_means(params, &names, cfg, |s, out| {
        if let Some(e) = estimator_error(kind, s, &p) {
            out[0] = Some(e);
            out[1] = Some(e * e);
        }
    })?;
    let mse = r.pop().expect("two reports");
    let bias = r.pop().expect("two reports");
    Ok((bias, mse))
}

/// Runs `f`, and once more with four times the paths if the first run
/// fails the z-test.
pub fn with_retry<F>(cfg: &OracleConfig, z_max: f64, f: F) -> Result<McReport>
where
    F: Fn(&OracleConfig) -> Result<McReport>,
{
    let first = f(cfg)?;
    if first.passes(z_max) || first.z_score.is_none() {
        return Ok(first);
    }
    let mut second = f(&cfg.with_paths(cfg.n_paths * 4))?;
    second.retried = true;
    Ok(second)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n_steps: usize,
    pub bias: f64,
    pub bias_se: f64,
    pub mse: f64,
    pub mse_se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationSweep {
    pub rows: Vec<SweepRow>,
    /// First-order Richardson extrapolation of the bias from the two finest
    /// grids, computed path by path.
    pub extrapolated_bias: McReport,
}

/// Bias and MSE on several grids driven by the same noise. Every entry of
/// `steps_grid` must divide the last one.
pub fn mc_discretization_sweep(
    params: &OUParams,
    kind: EstimatorKind,
    steps_grid: &[usize],
    cfg: &OracleConfig,
) -> Result<DiscretizationSweep> {
    cfg.validate()?;
    let p = validate(*params)?;
    if steps_grid.len() < 2 || steps_grid.windows(2).any(|w| w[0] >= w[1]) || steps_grid[0] == 0 {
        return Err(Error::InvalidConfig("steps_grid must be increasing with at least two entries".into()));
    }
    let fine = *steps_grid.last().expect("non-empty");
    if steps_grid.iter().any(|&n| !fine.is_multiple_of(n)) {
        return Err(Error::InvalidConfig("every grid size must divide the finest".into()));
    }
    let strides: Vec<usize> = steps_grid.iter().map(|&n| fine / n).collect();
    let m = steps_grid.len();
    let ratio = steps_grid[m - 1] as f64 / steps_grid[m - 2] as f64;
    let mut bias: Vec<BatchMeans> = (0..m).map(|_| BatchMeans::new(cfg.n_paths, cfg.n_batches)).collect();
    let mut mse = bias.clone();
    let mut ext = BatchMeans::new(cfg.n_paths, cfg.n_batches);
    let mut excluded = 0usize;
    stream_stats(p, SimConfig::new(fine, cfg.seed, cfg.n_paths), &strides, |k, st| {
        let errs: Vec<Option<f64>> = st.iter().map(|s| estimator_error(kind, s, &p)).collect();
        if errs.iter().any(Option::is_none) {
            excluded += 1;
            return;
        }
        for (i, e) in errs.iter().enumerate() {
            let e = e.expect("checked");
            bias[i].push(k, e);
            mse[i].push(k, e * e);
        }
        let (ef, ec) = (errs[m - 1].expect("checked"), errs[m - 2].expect("checked"));
        ext.push(k, ef + (ef - ec) / (ratio - 1.0));
    })?;
    let rows = steps_grid
        .iter()
        .zip(bias.iter().zip(&mse))
        .map(|(&n, (b, s))| {
            let (bias, bias_se) = b.finish();
            let (mse, mse_se) = s.finish();
            SweepRow {
                n_steps: n,
                bias,
                bias_se,
                mse,
                mse_se,
            }
        })
        .collect();
    let (estimate, std_error) = ext.finish();
    Ok(DiscretizationSweep {
        rows,
        extrapolated_bias: McReport {
            target: format!("extrapolated_bias_{}", kind.name()),
            estimate,
            std_error,
            n_paths: cfg.n_paths,
            n_steps: fine,
            seed: cfg.seed,
            analytic: None,
            z_score: None,
            excluded,
            retried: false,
        },
    })
}

pub fn write_sweep_csv<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    wr.write_record(["n_steps", "bias", "bias_se", "mse", "mse_se"]).map_err(io)?;
    for r in rows {
        wr.write_record([
            r.n_steps.to_string(),
            format!("{:.10e}", r.bias),
            format!("{:.10e}", r.bias_se),
            format!("{:.10e}", r.mse),
            format!("{:.10e}", r.mse_se),
        ])
        .map_err(io)?;
    }
    wr.flush()?;
    Ok(())
}

/// One analytic-versus-MC pairing of the validation suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub params: OUParams,
    pub report: McReport,
    /// Extra absolute tolerance required on top of the z-test, if any.
    pub abs_tol: Option<f64>,
    pub passed: bool,
}

fn check(name: &str, params: OUParams, report: McReport, abs_tol: Option<f64>) -> Check {
    let within = match (abs_tol, report.analytic) {
        (Some(t), Some(a)) => (report.estimate - a).abs() <= t,
        _ => true,
    };
    Check {
        name: name.into(),
        params,
        passed: report.passes(Z_MAX) && within,
        report,
        abs_tol,
    }
}

fn functional_check(name: &str, params: OUParams, f: Functional, cfg: &OracleConfig, abs_tol: Option<f64>) -> Result<Check> {
    let analytic = f.analytic(&params)?;
    let r = with_retry(cfg, Z_MAX, |c| Ok(mc_functional_mean(&params, f, c)?.compare(analytic)))?;
    Ok(check(name, params, r, abs_tol))
}

fn estimator_check(
    name: &str,
    params: OUParams,
    kind: EstimatorKind,
    mse_moment: bool,
    analytic: f64,
    cfg: &OracleConfig,
) -> Result<Check> {
    let r = with_retry(cfg, Z_MAX, |c| {
        let (b, m) = mc_estimator_stats(&params, kind, c)?;
        Ok(if mse_moment { m } else { b }.compare(analytic))
    })?;
    Ok(check(name, params, r, None))
}

/// The default oracle suite: each transform, moment and inversion routine
/// against its MC counterpart.
pub fn validation_suite(cfg: &OracleConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let q = QuadratureConfig::default();

    let p = OUParams::unit(1.0, 0.5, 1.0, 2.0);
    let args = MgfArgs::new(0.2, 0.1, 0.3, 0.5);
    out.push(functional_check("psi", p, Functional::ExpLinearQuadratic(args), cfg, None)?);

    let p = OUParams::unit(1.0, 0.5, 0.0, 2.0);
    let f = Functional::PsiBar { z1: 0.2, z2: 0.3, mu: 0.4 };
    out.push(functional_check("psi_bar", p, f, cfg, None)?);

    let p = OUParams::unit(1.0, 1.0, 1.0, 2.0);
    let laplace = Functional::ExpLinearQuadratic(MgfArgs::laplace(0.3));
    let r = with_retry(cfg, Z_MAX, |c| Ok(mc_functional_mean(&p, laplace, c)?.compare(laplace_q(&p, 0.3)?)))?;
    out.push(check("laplace_q", p, r, None));

    let p = OUParams::unit(0.0, 0.0, 1.0, 1.0);
    let cm = Functional::ExpLinearQuadratic(MgfArgs::laplace(1.0));
    let r = with_retry(cfg, Z_MAX, |c| Ok(mc_functional_mean(&p, cm, c)?.compare(cameron_martin(1.0, 1.0, 1.0))))?;
    out.push(check("cameron_martin", p, r, None));

    let p = OUParams::unit(1.0, 0.0, 1.0, 10.0);
    out.push(functional_check("negative_moment_q_p1", p, Functional::InverseQPower(1.0), cfg, None)?);
    out.push(functional_check("negative_moment_q_p2", p, Functional::InverseQPower(2.0), cfg, None)?);
    out.push(functional_check("expected_q", p, Functional::QMean, cfg, None)?);
    for x in [0.5, 1.0, 1.5, 2.0] {
        let f = Functional::IndicatorLambdaHatBelow(x);
        out.push(functional_check(&format!("cdf_lambda_hat_x{x}"), p, f, cfg, Some(0.01))?);
    }

    let m = lambda_hat_moments(&p, &q)?;
    out.push(estimator_check("bias_lambda_hat", p, EstimatorKind::LambdaHatGivenAlpha, false, m.bias.value, cfg)?);
    out.push(estimator_check("mse_lambda_hat", p, EstimatorKind::LambdaHatGivenAlpha, true, m.mse.value, cfg)?);

    let p = OUParams::unit(-1.0, 0.0, 1.0, 2.0);
    let m = lambda_hat_moments(&p, &q)?;
    out.push(estimator_check("bias_lambda_hat_explosive", p, EstimatorKind::LambdaHatGivenAlpha, false, m.bias.value, cfg)?);

    for (l, t) in [(1.0, 10.0), (0.1, 100.0)] {
        let p = OUParams::unit(l, 0.5, 1.0, t);
        let a = alpha_hat_moments(&p)?;
        let kind = EstimatorKind::AlphaHatGivenLambda;
        out.push(estimator_check(&format!("bias_alpha_hat_l{l}_t{t}"), p, kind, false, a.bias, cfg)?);
        out.push(estimator_check(&format!("mse_alpha_hat_l{l}_t{t}"), p, kind, true, a.mse, cfg)?);
    }

    let p = OUParams::unit(1.0, 0.5, 1.0, 10.0);
    let a = alpha_bar_moments(&p)?;
    out.push(estimator_check("mean_alpha_bar", p, EstimatorKind::AlphaBar, false, a.mean - p.alpha, cfg)?);
    let var_target = a.variance + (a.mean - p.alpha).powi(2);
    out.push(estimator_check("variance_alpha_bar", p, EstimatorKind::AlphaBar, true, var_target, cfg)?);

    let p = OUParams::unit(1.0, 0.5, 0.0, 10.0);
    let m = lambda_bar_moments(&p, &q)?;
    out.push(estimator_check("bias_lambda_bar", p, EstimatorKind::LambdaBar, false, m.bias, cfg)?);
    out.push(estimator_check("mse_lambda_bar", p, EstimatorKind::LambdaBar, true, m.mse, cfg)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_means_of_constant_has_zero_error() {
        let mut b = BatchMeans::new(1000, 100);
        for k in 0..1000 {
            b.push(k, 2.5);
        }
        assert_eq!(b.finish(), (2.5, 0.0));
    }

    #[test]
    fn batch_means_matches_naive_for_iid_batches() {
        let mut b = BatchMeans::new(4, 4);
        for (k, v) in [1.0, 2.0, 3.0, 4.0].into_iter().enumerate() {
            b.push(k, v);
        }
        let (m, se) = b.finish();
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn default_steps_rule() {
        assert_eq!(default_n_steps(10.0), 5000);
        assert_eq!(default_n_steps(50.0), 5000);
        assert_eq!(default_n_steps(200.0), 20000);
    }

    #[test]
    fn origin_functional_is_exactly_one() {
        let p = OUParams::unit(1.0, 0.0, 1.0, 1.0);
        let cfg = OracleConfig::default().with_paths(200).with_steps(50);
        let r = mc_functional_mean(&p, Functional::ExpLinearQuadratic(MgfArgs::laplace(0.0)), &cfg).unwrap();
        assert_eq!(r.estimate, 1.0);
        assert_eq!(r.std_error, 0.0);
        assert_eq!(r.compare(1.0).z_score, Some(0.0));
    }

    #[test]
    fn reports_are_seed_deterministic() {
        let p = OUParams::unit(1.0, 0.0, 1.0, 5.0);
        let cfg = OracleConfig::default().with_paths(300).with_steps(100);
        let a = mc_estimator_stats(&p, EstimatorKind::LambdaHatGivenAlpha, &cfg).unwrap();
        let b = mc_estimator_stats(&p, EstimatorKind::LambdaHatGivenAlpha, &cfg).unwrap();
        assert_eq!(a, b);
        let c = mc_estimator_stats(&p, EstimatorKind::LambdaHatGivenAlpha, &cfg.with_seed(1)).unwrap();
        assert_ne!(a.0.estimate, c.0.estimate);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let p = OUParams::unit(1.0, 0.0, 1.0, 5.0);
        let cfg = OracleConfig::default().with_paths(10);
        let k = EstimatorKind::LambdaHatGivenAlpha;
        assert!(mc_discretization_sweep(&p, k, &[100, 50], &cfg).is_err());
        assert!(mc_discretization_sweep(&p, k, &[30, 100], &cfg).is_err());
        assert!(mc_discretization_sweep(&p, k, &[100], &cfg).is_err());
    }

    #[test]
    fn sweep_finest_row_matches_direct_run() {
        let p = OUParams::unit(1.0, 0.0, 1.0, 5.0);
        let cfg = OracleConfig::default().with_paths(200).with_steps(400);
        let k = EstimatorKind::LambdaHatGivenAlpha;
        let s = mc_discretization_sweep(&p, k, &[100, 200, 400], &cfg).unwrap();
        let (b, _) = mc_estimator_stats(&p, k, &cfg).unwrap();
        assert!((s.rows[2].bias - b.estimate).abs() < 1e-12);
    }
}
