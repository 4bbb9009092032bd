//! Semi-infinite quadrature and the analytic moments of the estimators.

use crate::error::{Error, Result};
use crate::model::{require_unit_sigma, validate, OUParams};
use crate::scalar::{integrated_variance_kernel, one_minus_exp_over, Jet2};
use crate::transform::{psi, psi_bar, psi_lambda_dual, MgfArgs};
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::io::Write;

/// Truncation rule for `[0, ∞)`: panels `[0, b], [b, 2b], [2b, 4b], …` are
/// added until the integrand at the panel end is below `abs_tol` and the
/// last panel is below `rel_tol` of the running total; the remainder
/// `[b, ∞)` is then integrated through `x = b/t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuMaxPolicy {
    /// First panel end; `None` lets each caller pick a scale-aware start.
    pub initial_upper: Option<f64>,
    pub max_panels: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub mu_max_policy: MuMaxPolicy,
    pub max_refinements: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            mu_max_policy: MuMaxPolicy {
                initial_upper: None,
                max_panels: 200,
            },
            max_refinements: 4000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x > 0.0 && x < 1.0;
        if !ok(self.rel_tol) || !ok(self.abs_tol) || self.max_refinements < 1 {
            return Err(Error::InvalidConfig(format!("bad quadrature config {self:?}")));
        }
        Ok(())
    }

    fn with_hint(&self, hint: f64) -> QuadratureConfig {
        let mut c = *self;
        if c.mu_max_policy.initial_upper.is_none() {
            c.mu_max_policy.initial_upper = Some(hint);
        }
        c
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    /// End of the last explicit panel.
    pub upper: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConstants {
    pub c0: f64,
    pub c1: f64,
}

impl Default for AsymptoticConstants {
    fn default() -> Self {
        AsymptoticConstants {
            c0: 1.7814,
            c1: 13.2857,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, evals: &mut usize) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv = [(0.0, 0.0); 7];
    for (j, x) in XGK.iter().take(7).enumerate() {
        let f1 = f(c - h * x);
        let f2 = f(c + h * x);
        fv[j] = (f1, f2);
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    *evals += 15;
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for (j, (f1, f2)) in fv.iter().enumerate() {
        resasc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = resk * h;
    let resabs = resabs * h.abs();
    let resasc = resasc * h.abs();
    let mut error = ((resk - resg) * h).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Segment { a, b, value, error }
}

/// Globally adaptive GK15 on a finite interval.
fn adaptive<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
    budget: &mut usize,
    evals: &mut usize,
) -> Result<(f64, f64, f64)> {
    let first = gk15(f, a, b, evals);
    if !first.value.is_finite() {
        return Err(Error::ToleranceNotMet {
            value: first.value,
            error: f64::INFINITY,
        });
    }
    let mut segs = vec![first];
    loop {
        let value: f64 = segs.iter().map(|s| s.value).sum();
        let error: f64 = segs.iter().map(|s| s.error).sum();
        let abs_value: f64 = segs.iter().map(|s| s.value.abs()).sum();
        if error <= (cfg.rel_tol * value.abs()).max(cfg.abs_tol) {
            return Ok((value, error, abs_value));
        }
        if *budget == 0 {
            return Err(Error::ToleranceNotMet { value, error });
        }
        *budget -= 1;
        let (k, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("nonempty");
        let s = segs.swap_remove(k);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            return Err(Error::ToleranceNotMet { value, error });
        }
        let l = gk15(f, s.a, mid, evals);
        let r = gk15(f, mid, s.b, evals);
        if !(l.value.is_finite() && r.value.is_finite()) {
            return Err(Error::ToleranceNotMet {
                value: f64::NAN,
                error: f64::INFINITY,
            });
        }
        segs.push(l);
        segs.push(r);
    }
}

/// `∫₀^∞ f(x) dx` with doubling panels and a mapped tail.
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(mut f: F, cfg: &QuadratureConfig) -> Result<QuadResult> {
    cfg.validate()?;
    let mut budget = cfg.max_refinements;
    let mut evals = 0;
    let mut lo = 0.0;
    let mut hi = cfg.mu_max_policy.initial_upper.unwrap_or(1.0);
    if !(hi > 0.0 && hi.is_finite()) {
        return Err(Error::InvalidConfig(format!("initial upper limit {hi}")));
    }
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut panels = 0;
    loop {
        let (v, e, abs_v) = adaptive(&mut f, lo, hi, cfg, &mut budget, &mut evals)?;
        total += v;
        total_err += e;
        panels += 1;
        let f_end = f(hi).abs();
        evals += 1;
        let small_panel = abs_v <= cfg.rel_tol * total.abs() + cfg.abs_tol;
        if panels >= 2 && small_panel && f_end < cfg.abs_tol {
            break;
        }
        if panels >= cfg.mu_max_policy.max_panels {
            return Err(Error::ToleranceNotMet {
                value: total,
                error: total_err + abs_v,
            });
        }
        lo = hi;
        hi *= 2.0;
    }
    let b = hi;
    let mut tail = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let x = b / t;
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v * b / (t * t)
        }
    };
    let (tv, te, _) = adaptive(&mut tail, 0.0, 1.0, cfg, &mut budget, &mut evals)?;
    total += tv;
    total_err += te;
    if !(total_err <= cfg.rel_tol * total.abs() + cfg.abs_tol) || !total.is_finite() {
        return Err(Error::ToleranceNotMet {
            value: total,
            error: total_err,
        });
    }
    Ok(QuadResult {
        value: total,
        error: total_err,
        evaluations: evals,
        upper: b,
    })
}

/// Captures the first error raised inside an integrand.
struct Guard(RefCell<Option<Error>>);

impl Guard {
    fn new() -> Self {
        Guard(RefCell::new(None))
    }

    fn wrap(&self, r: Result<f64>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                self.0.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    }

    fn finish(self, r: Result<QuadResult>) -> Result<QuadResult> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => r,
        }
    }
}

/// Starting upper limit in `u = √μ` for ψ-type integrands.
fn u_hint(params: &OUParams) -> f64 {
    std::f64::consts::SQRT_2 * 40.0 / params.horizon
}

/// `E[Q_T(α)^{−p}] = Γ(p)^{−1} ∫ μ^{p−1} E[e^{−μQ}] dμ`.
pub fn negative_moment_q(params: &OUParams, p: f64, cfg: &QuadratureConfig) -> Result<QuadResult> {
    require_unit_sigma(params)?;
    if !(p > 0.0) {
        return Err(Error::InvalidConfig(format!("p = {p} must be positive")));
    }
    let g = Guard::new();
    let r = if p >= 1.0 {
        // μ = u²
        let scale = 1.0 / statrs::function::gamma::gamma(p);
        let cfg = cfg.with_hint(u_hint(params));
        integrate_semi_infinite(
            |u| {
                let mu = u * u;
                let v = g.wrap(psi(params, MgfArgs::laplace(mu)));
                if v == 0.0 {
                    0.0
                } else {
                    2.0 * u.powf(2.0 * p - 1.0) * v * scale
                }
            },
            &cfg,
        )
    } else {
        // μ = u^{1/p}
        let scale = 1.0 / statrs::function::gamma::gamma(p + 1.0);
        let cfg = cfg.with_hint((2.0 * (40.0 / params.horizon).powi(2)).powf(p));
        integrate_semi_infinite(|u| g.wrap(psi(params, MgfArgs::laplace(u.powf(1.0 / p)))) * scale, &cfg)
    };
    g.finish(r)
}

/// Integrals of the λ-derivatives of `ψ(0,0,0,μ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaHatMoments {
    pub bias: QuadResult,
    pub mse: QuadResult,
    /// `∂ bias / ∂λ`.
    pub bias_derivative: QuadResult,
}

fn lambda_integral<F>(params: &OUParams, cfg: &QuadratureConfig, pick: F) -> Result<QuadResult>
where
    F: Fn(f64, crate::scalar::Dual2) -> f64,
{
    require_unit_sigma(params)?;
    let g = Guard::new();
    let cfg = cfg.with_hint(u_hint(params));
    let r = integrate_semi_infinite(
        |u| {
            let mu = u * u;
            match psi_lambda_dual(params, MgfArgs::laplace(mu)) {
                Ok(d) => {
                    if d.value() == 0.0 && d.d1() == 0.0 && d.d2() == 0.0 {
                        0.0
                    } else {
                        2.0 * u * pick(mu, d)
                    }
                }
                Err(e) => g.wrap(Err(e)),
            }
        },
        &cfg,
    );
    g.finish(r)
}

/// `bias(λ̂_T(α)) = ∫ ∂ψ/∂λ dμ`.
pub fn bias_lambda_hat(params: &OUParams, cfg: &QuadratureConfig) -> Result<QuadResult> {
    lambda_integral(params, cfg, |_, d| d.d1())
}

/// `mse(λ̂_T(α)) = ∫ (ψ + μ ∂²ψ/∂λ²) dμ`.
pub fn mse_lambda_hat(params: &OUParams, cfg: &QuadratureConfig) -> Result<QuadResult> {
    lambda_integral(params, cfg, |mu, d| d.value() + mu * d.d2())
}

/// `∂ bias / ∂λ = ∫ ∂²ψ/∂λ² dμ`.
pub fn bias_derivative_lambda_hat(params: &OUParams, cfg: &QuadratureConfig) -> Result<QuadResult> {
    lambda_integral(params, cfg, |_, d| d.d2())
}

pub fn lambda_hat_moments(params: &OUParams, cfg: &QuadratureConfig) -> Result<LambdaHatMoments> {
    Ok(LambdaHatMoments {
        bias: bias_lambda_hat(params, cfg)?,
        mse: mse_lambda_hat(params, cfg)?,
        bias_derivative: bias_derivative_lambda_hat(params, cfg)?,
    })
}

/// `(x − 1 + e^{−x}) / x²`.
fn quad_kernel(x: f64) -> f64 {
    if x.abs() < 0.5 {
        let mut term = 0.5;
        let mut sum = 0.5;
        for j in 1..24 {
            term *= -x / (j as f64 + 2.0);
            sum += term;
        }
        sum
    } else {
        (1.0 - one_minus_exp_over(x)) / x
    }
}

/// `E[Q_T(α)] = T/(2λ) − (1 − e^{−2λT})/(4λ²) + (y − α)²(1 − e^{−2λT})/(2λ)`,
/// evaluated in a form that is regular at λ = 0.
pub fn expected_q(params: &OUParams) -> Result<f64> {
    require_unit_sigma(params)?;
    let (l, t) = (params.lambda, params.horizon);
    let x0 = params.y0 - params.alpha;
    let x = 2.0 * l * t;
    Ok(t * t * quad_kernel(x) + x0 * x0 * t * one_minus_exp_over(x))
}

/// `(1 + ∂bias/∂λ)² / E[Q_T]`.
pub fn cramer_rao_lambda(params: &OUParams, bias_derivative: f64) -> Result<f64> {
    let eq = expected_q(params)?;
    if !(eq > 0.0) {
        return Err(Error::InvalidConfig(format!("E[Q] = {eq} must be positive")));
    }
    Ok((1.0 + bias_derivative).powi(2) / eq)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasMse {
    pub bias: f64,
    pub mse: f64,
}

/// `α̂_T(λ)` is unbiased with `mse = σ²/(λ²T)`, which is also its
/// Cramér–Rao bound.
pub fn alpha_hat_moments(params: &OUParams) -> Result<BiasMse> {
    let p = validate(*params)?;
    if p.lambda == 0.0 {
        return Err(Error::LambdaZero);
    }
    Ok(BiasMse {
        bias: 0.0,
        mse: p.sigma * p.sigma / (p.lambda * p.lambda * p.horizon),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaBarMoments {
    pub mean: f64,
    pub variance: f64,
    /// `σ²/(λ²T)`, the leading term of the variance.
    pub asymptotic_variance: Option<f64>,
}

pub fn alpha_bar_moments(params: &OUParams) -> Result<AlphaBarMoments> {
    let p = validate(*params)?;
    let (l, t, s2) = (p.lambda, p.horizon, p.sigma * p.sigma);
    Ok(AlphaBarMoments {
        mean: p.alpha + (p.y0 - p.alpha) * one_minus_exp_over(l * t),
        variance: s2 * t * integrated_variance_kernel(l * t),
        asymptotic_variance: (l != 0.0).then(|| s2 / (l * l * t)),
    })
}

/// Taylor coefficients of Ψ at the origin in `(z₁, z₂)`, as a function of μ.
pub fn psi_bar_jet(params: &OUParams, mu: f64) -> Result<Jet2> {
    psi_bar(params, Jet2::var1(0.0), Jet2::var2(0.0), mu)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaBarMoments {
    pub bias: f64,
    pub mse: f64,
    pub mean: QuadResult,
    pub second_moment: QuadResult,
}

/// Bias and MSE of `λ̄_T` for `Y₀ = 0`, λ > 0.
///
/// With `N = (T − Y_T² + 2ᾱY_T)/2` and `Q̄ = Q_T(ᾱ_T)`:
/// `E[λ̄] = ∫ E[N e^{−μQ̄}] dμ` and `E[λ̄²] = ∫ μ E[N² e^{−μQ̄}] dμ`,
/// where `E[Y^j ᾱ^k e^{−μQ̄}] = j! k! c_{jk}(μ)` from the jet of Ψ.
pub fn lambda_bar_moments(params: &OUParams, cfg: &QuadratureConfig) -> Result<LambdaBarMoments> {
    require_unit_sigma(params)?;
    if params.y0 != 0.0 {
        return Err(Error::NonzeroInitialValue(params.y0));
    }
    if params.lambda <= 0.0 {
        return Err(Error::NonPositiveLambda(params.lambda));
    }
    let t = params.horizon;
    let cfg = cfg.with_hint(u_hint(params));
    let g = Guard::new();
    let mean = integrate_semi_infinite(
        |u| {
            let mu = u * u;
            match psi_bar_jet(params, mu) {
                Ok(j) => 2.0 * u * (0.5 * t * j.coeff(0, 0) - j.coeff(2, 0) + j.coeff(1, 1)),
                Err(e) => g.wrap(Err(e)),
            }
        },
        &cfg,
    );
    let mean = g.finish(mean)?;
    let g = Guard::new();
    let second = integrate_semi_infinite(
        |u| {
            let mu = u * u;
            match psi_bar_jet(params, mu) {
                Ok(j) => {
                    let c = |a, b| j.coeff(a, b);
                    let n2 = t * t * c(0, 0) + 24.0 * c(4, 0) + 16.0 * c(2, 2) - 4.0 * t * c(2, 0)
                        + 4.0 * t * c(1, 1)
                        - 24.0 * c(3, 1);
                    2.0 * u * mu * 0.25 * n2
                }
                Err(e) => g.wrap(Err(e)),
            }
        },
        &cfg,
    );
    let second = g.finish(second)?;
    let l = params.lambda;
    Ok(LambdaBarMoments {
        bias: mean.value - l,
        mse: second.value - 2.0 * l * mean.value + l * l,
        mean,
        second_moment: second,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub horizon: f64,
    pub bias: f64,
    pub mse: f64,
    pub t_bias: f64,
    pub t2_bias: f64,
    pub t2_mse: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitConstants {
    pub rows: Vec<LimitRow>,
    /// `T²·bias` at the largest T.
    pub c0_est: f64,
    /// `T²·mse` at the largest T.
    pub c1_est: f64,
}

/// λ = 0, α = 0, y = 0 scaled bias and MSE at `T ∈ {50, 100, 200}`.
pub fn limit_constants_check(cfg: &QuadratureConfig) -> Result<LimitConstants> {
    let mut rows = Vec::new();
    for &t in &[50.0, 100.0, 200.0] {
        let p = OUParams::unit(0.0, 0.0, 0.0, t);
        let b = bias_lambda_hat(&p, cfg)?.value;
        let m = mse_lambda_hat(&p, cfg)?.value;
        rows.push(LimitRow {
            horizon: t,
            bias: b,
            mse: m,
            t_bias: t * b,
            t2_bias: t * t * b,
            t2_mse: t * t * m,
        });
    }
    let last = rows[rows.len() - 1];
    Ok(LimitConstants {
        c0_est: last.t2_bias,
        c1_est: last.t2_mse,
        rows,
    })
}

/// One row of a moment table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub lambda: f64,
    pub alpha: f64,
    pub horizon: f64,
    pub bias: f64,
    pub mse: f64,
    pub cr_bound: f64,
    pub f1: f64,
    pub f2: f64,
    pub quad_err_bias: f64,
    pub quad_err_mse: f64,
    pub err: Option<String>,
}

impl MomentRow {
    fn failed(params: &OUParams, e: &Error) -> Self {
        MomentRow {
            lambda: params.lambda,
            alpha: params.alpha,
            horizon: params.horizon,
            bias: f64::NAN,
            mse: f64::NAN,
            cr_bound: f64::NAN,
            f1: f64::NAN,
            f2: f64::NAN,
            quad_err_bias: f64::NAN,
            quad_err_mse: f64::NAN,
            err: Some(e.to_string()),
        }
    }
}

/// Bias, MSE, Cramér–Rao bound and scaled curves `f₁ = T·bias`,
/// `f₂ = (T/λ)·mse` at one parameter point. Errors are kept in the row.
pub fn moment_row(params: &OUParams, cfg: &QuadratureConfig) -> MomentRow {
    match lambda_hat_moments(params, cfg).and_then(|m| {
        let cr = cramer_rao_lambda(params, m.bias_derivative.value)?;
        Ok((m, cr))
    }) {
        Ok((m, cr)) => {
            let t = params.horizon;
            MomentRow {
                lambda: params.lambda,
                alpha: params.alpha,
                horizon: t,
                bias: m.bias.value,
                mse: m.mse.value,
                cr_bound: cr,
                f1: t * m.bias.value,
                f2: if params.lambda != 0.0 {
                    t / params.lambda * m.mse.value
                } else {
                    f64::NAN
                },
                quad_err_bias: m.bias.error,
                quad_err_mse: m.mse.error,
                err: None,
            }
        }
        Err(e) => MomentRow::failed(params, &e),
    }
}

/// `(T, f₁, f₂)` over a horizon grid.
pub fn scaled_curves(params: &OUParams, t_grid: &[f64], cfg: &QuadratureConfig) -> Result<Vec<MomentRow>> {
    require_unit_sigma(params)?;
    if t_grid.is_empty() {
        return Err(Error::InvalidConfig("empty horizon grid".into()));
    }
    Ok(t_grid.iter().map(|&t| moment_row(&params.with_horizon(t), cfg)).collect())
}

pub const TABLE_LAMBDAS: [f64; 3] = [0.01, 0.1, 1.0];
pub const TABLE_ALPHAS: [f64; 4] = [-1.0, 0.0, 0.5, 1.0];
pub const TABLE_HORIZONS: [f64; 7] = [50.0, 75.0, 100.0, 125.0, 150.0, 175.0, 200.0];

/// The 84-cell grid at σ = 1, y₀ = 1, ordered by (λ, T, α).
pub fn table1_grid() -> Vec<OUParams> {
    let mut out = Vec::new();
    for &l in &TABLE_LAMBDAS {
        for &t in &TABLE_HORIZONS {
            for &a in &TABLE_ALPHAS {
                out.push(OUParams::unit(l, a, 1.0, t));
            }
        }
    }
    out
}

pub fn table1(cfg: &QuadratureConfig) -> Vec<MomentRow> {
    table1_grid().iter().map(|p| moment_row(p, cfg)).collect()
}

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.12e}")
    }
}

/// `lambda,alpha,T,bias,mse,cr_bound,f1,f2,quad_err_bias,quad_err_mse`.
pub fn write_moments_csv<W: Write>(w: W, rows: &[MomentRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    wr.write_record([
        "lambda",
        "alpha",
        "T",
        "bias",
        "mse",
        "cr_bound",
        "f1",
        "f2",
        "quad_err_bias",
        "quad_err_mse",
    ])
    .map_err(io)?;
    for r in rows {
        wr.write_record([
            r.lambda.to_string(),
            r.alpha.to_string(),
            r.horizon.to_string(),
            num(r.bias),
            num(r.mse),
            num(r.cr_bound),
            num(r.f1),
            num(r.f2),
            num(r.quad_err_bias),
            num(r.quad_err_mse),
        ])
        .map_err(io)?;
    }
    wr.flush()?;
    Ok(())
}

/// `lambda,alpha,T,bias,mse,err`.
pub fn write_table1_csv<W: Write>(w: W, rows: &[MomentRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    wr.write_record(["lambda", "alpha", "T", "bias", "mse", "err"]).map_err(io)?;
    for r in rows {
        wr.write_record([
            r.lambda.to_string(),
            r.alpha.to_string(),
            r.horizon.to_string(),
            num(r.bias),
            num(r.mse),
            r.err.clone().unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    wr.flush()?;
    Ok(())
}
