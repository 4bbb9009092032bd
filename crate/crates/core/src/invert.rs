//! Distribution function of `λ̂_T(α)` by transform inversion.
//!
//! `P{λ̂ < x} = P{ζ(x) < 0}` with `ζ(x) = S_T(α) − xQ_T(α)`. The Fourier
//! method applies the Gil-Pelaez formula to the characteristic function of
//! ζ on a uniform grid. The Gaver-Stehfest method inverts the Laplace
//! transform of the nonnegative variable `V = S_max − ζ`, where
//! `S_max = (T + (y − α)²)/2`, which exists for `x ≥ 0`.

use crate::error::{Error, Result};
use crate::model::{require_unit_sigma, OUParams};
use crate::moments::expected_q;
use crate::scalar::{Dual2, Scalar};
use crate::simulate::terminal_moments;
use crate::transform::{mgf_zeta, mgf_zeta_real, psi_continued, BranchTracker, MgfArgs};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use std::f64::consts::{LN_2, PI, SQRT_2};
use std::io::Write;

const MIN_NODES: usize = 2000;
const MAX_DOUBLINGS: usize = 14;
const MAX_REFINES: usize = 6;
const TAIL_TOL: f64 = 1e-6;
const GS_TOL: f64 = 5e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InversionMethod {
    Fourier,
    GaverStehfest,
}

impl InversionMethod {
    pub fn name(&self) -> &'static str {
        match self {
            InversionMethod::Fourier => "fourier",
            InversionMethod::GaverStehfest => "gaver_stehfest",
        }
    }
}

/// `contour_step` and `tail_cut` default to values derived from the first
/// two moments of ζ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InversionConfig {
    pub method: InversionMethod,
    pub contour_step: Option<f64>,
    pub tail_cut: Option<f64>,
    pub gs_order: usize,
}

impl Default for InversionConfig {
    fn default() -> Self {
        InversionConfig {
            method: InversionMethod::Fourier,
            contour_step: None,
            tail_cut: None,
            gs_order: 14,
        }
    }
}

impl InversionConfig {
    pub fn gaver_stehfest() -> Self {
        InversionConfig {
            method: InversionMethod::GaverStehfest,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(h) = self.contour_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidConfig(format!("contour_step must be positive, got {h}")));
            }
        }
        if let Some(l) = self.tail_cut {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidConfig(format!("tail_cut must be positive, got {l}")));
            }
        }
        if !self.gs_order.is_multiple_of(2) || !(4..=18).contains(&self.gs_order) {
            return Err(Error::InvalidConfig(format!(
                "gs_order must be even and in [4, 18], got {}",
                self.gs_order
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdfResult {
    pub x: f64,
    /// Clamped to `[0, 1]`.
    pub cdf: f64,
    pub raw: f64,
    /// Set when the raw value left `[0, 1]` by more than the error estimate,
    /// or when successive Stehfest orders disagree.
    pub err_flag: bool,
    pub error_estimate: f64,
    pub method: InversionMethod,
    pub nodes: usize,
    pub tail_cut: f64,
}

impl CdfResult {
    fn finish(x: f64, raw: f64, error_estimate: f64, method: InversionMethod, nodes: usize, tail_cut: f64) -> Self {
        let slack = error_estimate.max(1e-6);
        CdfResult {
            x,
            cdf: raw.clamp(0.0, 1.0),
            raw,
            err_flag: raw < -slack || raw > 1.0 + slack,
            error_estimate,
            method,
            nodes,
            tail_cut,
        }
    }
}

/// Mean and standard deviation of `ζ(x)`.
pub fn zeta_mean_sd(params: &OUParams, x: f64) -> Result<(f64, f64)> {
    let eq = expected_q(params)?;
    let mean = (params.lambda - x) * eq;
    let (a, y, t) = (params.alpha, params.y0, params.horizon);
    let s = Dual2::variable(0.0);
    let second = psi_continued(params, MgfArgs::new(s * a, Dual2::constant(0.0), s * 0.5, s * x))
        .map(|b| (b * (s * (0.5 * t - a * y + 0.5 * y * y)).exp()).d2())
        .ok()
        .filter(|m| m.is_finite() && *m >= mean * mean);
    let sd = match second {
        Some(m2) => (m2 - mean * mean).sqrt(),
        None => (1.0 + x.abs() + params.lambda.abs()) * eq + eq.sqrt(),
    };
    Ok((mean, sd))
}

/// `P{λ̂_T(α) < x}`.
pub fn cdf_lambda_hat(params: &OUParams, x: f64, cfg: &InversionConfig) -> Result<CdfResult> {
    cfg.validate()?;
    require_unit_sigma(params)?;
    if !x.is_finite() {
        return Err(Error::NonFiniteField { field: "x", value: x });
    }
    match cfg.method {
        InversionMethod::Fourier => fourier(params, x, cfg, 1.0),
        InversionMethod::GaverStehfest => gaver_stehfest(params, x, cfg),
    }
}

/// `P{λ̂_T(α) ≥ x}`, computed from the transform of `−ζ(x)`.
pub fn survival_lambda_hat(params: &OUParams, x: f64, cfg: &InversionConfig) -> Result<CdfResult> {
    cfg.validate()?;
    require_unit_sigma(params)?;
    fourier(params, x, cfg, -1.0)
}

struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn new() -> Self {
        Neumaier { sum: 0.0, comp: 0.0 }
    }

    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// At `x = 0` the event is `{(Y_T − α)² > T + (y − α)²}`, whose probability
/// follows from the Gaussian law of `Y_T`.
fn at_zero(params: &OUParams, sign: f64) -> CdfResult {
    let m = terminal_moments(params);
    let sd = m.var_y.sqrt();
    let x0 = params.y0 - params.alpha;
    let r = (params.horizon + x0 * x0).sqrt();
    let c = m.mean_y - params.alpha;
    let phi = |z: f64| 0.5 * erfc(-z / SQRT_2);
    let below = phi((-r - c) / sd) + phi((c - r) / sd);
    let raw = if sign > 0.0 { below } else { 1.0 - below };
    CdfResult::finish(0.0, raw, 0.0, InversionMethod::Fourier, 0, 0.0)
}

fn fourier(params: &OUParams, x: f64, cfg: &InversionConfig, sign: f64) -> Result<CdfResult> {
    if x == 0.0 {
        return Ok(at_zero(params, sign));
    }
    let (mean, sd) = zeta_mean_sd(params, x)?;
    let mean = sign * mean;
    let mut h = cfg
        .contour_step
        .unwrap_or_else(|| PI / (mean.abs() + 12.0 * sd.max(1e-300)));
    let mut last_err = String::new();
    for _ in 0..MAX_REFINES {
        let cut = cfg.tail_cut.unwrap_or(h * MIN_NODES as f64).max(h * MIN_NODES as f64);
        match gil_pelaez(params, x, sign, mean, h, cut) {
            Ok((raw, err, nodes, cut)) => {
                return Ok(CdfResult::finish(x, raw, err, InversionMethod::Fourier, nodes, cut));
            }
            Err(GpFailure::Branch(msg)) => {
                last_err = msg;
                h *= 0.5;
            }
            Err(GpFailure::Fatal(e)) => return Err(e),
        }
    }
    Err(Error::ContourDivergence(last_err))
}

enum GpFailure {
    Branch(String),
    Fatal(Error),
}

/// Trapezoid on `t ∈ [0, L]` with `L` doubled until the trailing tenth of
/// the range carries less than the tail tolerance in absolute mass.
fn gil_pelaez(
    params: &OUParams,
    x: f64,
    sign: f64,
    mean: f64,
    h: f64,
    initial_cut: f64,
) -> std::result::Result<(f64, f64, usize, f64), GpFailure> {
    let mut tracker = BranchTracker::new();
    let mut acc = Neumaier::new();
    acc.add(0.5 * h * mean);
    let mut cut = initial_cut;
    let mut k = 0usize;
    let mut tail_window: Vec<f64> = Vec::new();
    for _ in 0..MAX_DOUBLINGS {
        let n_end = (cut / h).ceil() as usize;
        tail_window.clear();
        let window_start = n_end - n_end / 10;
        while k < n_end {
            k += 1;
            let t = k as f64 * h;
            let s = Complex64::new(0.0, sign * t);
            let phi = mgf_zeta(params, x, s, &mut tracker).map_err(GpFailure::Fatal)?;
            if tracker.max_jump() > 0.5 * PI {
                return Err(GpFailure::Branch(format!(
                    "phase step {:.3} exceeds pi/2 at t = {t:.4e}",
                    tracker.max_jump()
                )));
            }
            let f = phi.im / t;
            if !f.is_finite() {
                return Err(GpFailure::Fatal(Error::ContourDivergence(format!("non-finite integrand at t = {t:.4e}"))));
            }
            acc.add(h * f);
            if k >= window_start {
                tail_window.push(h * f.abs());
            }
        }
        let tail: f64 = tail_window.iter().sum();
        if tail < TAIL_TOL {
            let raw = 0.5 - acc.value() / PI;
            return Ok((raw, tail / PI, k, k as f64 * h));
        }
        cut *= 2.0;
    }
    Err(GpFailure::Fatal(Error::ContourDivergence(format!(
        "tail did not settle by t = {:.4e}",
        k as f64 * h
    ))))
}

/// Stehfest weights `V_k`, `k = 1..=n`.
pub fn stehfest_weights(n: usize) -> Result<Vec<f64>> {
    if !n.is_multiple_of(2) || !(2..=18).contains(&n) {
        return Err(Error::InvalidConfig(format!("Stehfest order must be even and in [2, 18], got {n}")));
    }
    let fact = |m: usize| (1..=m).fold(1.0f64, |a, i| a * i as f64);
    let half = n / 2;
    Ok((1..=n)
        .map(|k| {
            let s: f64 = (k.div_ceil(2)..=k.min(half))
                .map(|j| {
                    (j as f64).powi(half as i32) * fact(2 * j)
                        / (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k))
                })
                .sum();
            if (k + half).is_multiple_of(2) {
                s
            } else {
                -s
            }
        })
        .collect())
}

fn gaver_stehfest(params: &OUParams, x: f64, cfg: &InversionConfig) -> Result<CdfResult> {
    if x < 0.0 {
        return Err(Error::NotApplicable(format!(
            "x = {x} < 0: S_max - zeta is not bounded below"
        )));
    }
    let x0 = params.y0 - params.alpha;
    let s_max = 0.5 * (params.horizon + x0 * x0);
    let raw = 1.0 - stehfest_cdf(params, x, s_max, cfg.gs_order)?;
    let coarse = 1.0 - stehfest_cdf(params, x, s_max, cfg.gs_order - 2)?;
    let err = (raw - coarse).abs();
    let mut out = CdfResult::finish(x, raw, err, InversionMethod::GaverStehfest, cfg.gs_order, 0.0);
    out.err_flag |= err > GS_TOL;
    Ok(out)
}

/// `P{V ≤ s_max}` from `E[e^{−pV}] = e^{−p s_max} E[e^{pζ}]`.
fn stehfest_cdf(params: &OUParams, x: f64, s_max: f64, order: usize) -> Result<f64> {
    let weights = stehfest_weights(order)?;
    let step = LN_2 / s_max;
    let mut acc = Neumaier::new();
    for (i, w) in weights.iter().enumerate() {
        let p = (i + 1) as f64 * step;
        let lv = (-p * s_max).exp()
            * mgf_zeta_real(params, x, p).map_err(|e| match e {
                Error::OutsideConvergenceRegion(m) => Error::NotApplicable(m),
                other => other,
            })?;
        acc.add(w * lv / p);
    }
    Ok(step * acc.value())
}

/// CDF over a grid of abscissae; failures are reported per row.
pub fn cdf_grid(params: &OUParams, xs: &[f64], cfg: &InversionConfig) -> Vec<Result<CdfResult>> {
    xs.iter().map(|&x| cdf_lambda_hat(params, x, cfg)).collect()
}

pub fn write_cdf_csv<W: Write>(w: W, rows: &[(f64, Result<CdfResult>)], method: InversionMethod) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    wr.write_record(["x", "cdf", "err_flag", "method"]).map_err(io)?;
    for (x, r) in rows {
        let (cdf, flag) = match r {
            Ok(c) => (format!("{:.10}", c.cdf), if c.err_flag { "range".to_string() } else { String::new() }),
            Err(e) => ("NaN".to_string(), e.to_string().replace(',', ";")),
        };
        wr.write_record([format!("{x}"), cdf, flag, method.name().to_string()]).map_err(io)?;
    }
    wr.flush()?;
    Ok(())
}
