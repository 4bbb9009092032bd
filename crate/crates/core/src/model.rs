//! Domain types: parameters, sample paths, sufficient statistics, reports.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Parameters of `dY = λ(α − Y)dt + σ dW`, `Y_0 = y0`, observed on `[0, horizon]`.
///
/// Any finite λ is admitted, including zero and negative values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OUParams {
    pub lambda: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub y0: f64,
    pub horizon: f64,
}

impl OUParams {
    pub fn new(lambda: f64, alpha: f64, sigma: f64, y0: f64, horizon: f64) -> Self {
        OUParams {
            lambda,
            alpha,
            sigma,
            y0,
            horizon,
        }
    }

    /// Unit-σ parameters.
    pub fn unit(lambda: f64, alpha: f64, y0: f64, horizon: f64) -> Self {
        OUParams::new(lambda, alpha, 1.0, y0, horizon)
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        OUParams { lambda, ..self }
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        OUParams { alpha, ..self }
    }

    pub fn with_horizon(self, horizon: f64) -> Self {
        OUParams { horizon, ..self }
    }

    pub fn with_y0(self, y0: f64) -> Self {
        OUParams { y0, ..self }
    }
}

pub fn validate(params: OUParams) -> Result<OUParams> {
    let fields = [
        ("lambda", params.lambda),
        ("alpha", params.alpha),
        ("sigma", params.sigma),
        ("y0", params.y0),
        ("horizon", params.horizon),
    ];
    for (field, value) in fields {
        if !value.is_finite() {
            return Err(Error::NonFiniteField { field, value });
        }
    }
    if params.sigma <= 0.0 {
        return Err(Error::NonPositiveSigma {
            field: "sigma",
            value: params.sigma,
        });
    }
    if params.horizon <= 0.0 {
        return Err(Error::NonPositiveHorizon {
            field: "horizon",
            value: params.horizon,
        });
    }
    Ok(params)
}

/// Maps the problem for `Y` to the problem for `X = Y/σ`, which has unit
/// diffusion. Returns the new parameters and the factor σ.
pub fn rescale_to_unit_sigma(params: OUParams) -> Result<(OUParams, f64)> {
    let p = validate(params)?;
    let s = p.sigma;
    if s == 1.0 {
        return Ok((p, 1.0));
    }
    Ok((
        OUParams {
            lambda: p.lambda,
            alpha: p.alpha / s,
            sigma: 1.0,
            y0: p.y0 / s,
            horizon: p.horizon,
        },
        s,
    ))
}

/// Inverse of [`rescale_to_unit_sigma`].
pub fn restore_sigma(unit: OUParams, factor: f64) -> OUParams {
    if factor == 1.0 {
        return OUParams { sigma: 1.0, ..unit };
    }
    OUParams {
        lambda: unit.lambda,
        alpha: unit.alpha * factor,
        sigma: factor,
        y0: unit.y0 * factor,
        horizon: unit.horizon,
    }
}

pub fn require_unit_sigma(params: &OUParams) -> Result<()> {
    validate(*params)?;
    if params.sigma != 1.0 {
        return Err(Error::NotUnitSigma(params.sigma));
    }
    Ok(())
}

/// A trajectory on a uniform grid `0 = t_0 < … < t_n = T`.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    times: Vec<f64>,
    values: Vec<f64>,
    params_used: Option<OUParams>,
}

impl Path {
    pub fn new(times: Vec<f64>, values: Vec<f64>, params_used: Option<OUParams>) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "path needs matching times/values of length >= 2 (got {} and {})",
                times.len(),
                values.len()
            )));
        }
        let n = times.len() - 1;
        let t_end = times[n];
        if times[0] != 0.0 || t_end <= 0.0 {
            return Err(Error::InvalidConfig("grid must start at 0 and end at T > 0".into()));
        }
        let dt = t_end / n as f64;
        for (k, &t) in times.iter().enumerate() {
            let expected = k as f64 * dt;
            if (t - expected).abs() > 1e-12 * t_end.max(1.0) * 10.0 {
                return Err(Error::InvalidConfig(format!(
                    "grid not uniform at index {k}: {t} vs {expected}"
                )));
            }
        }
        Ok(Path {
            times,
            values,
            params_used,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn params_used(&self) -> Option<&OUParams> {
        self.params_used.as_ref()
    }

    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }
}

/// `(Y_T, ∫Y ds, ∫Y² ds)` together with the start value and horizon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SufficientStats {
    pub y_t: f64,
    pub i_t: f64,
    pub j_t: f64,
    pub y0: f64,
    pub horizon: f64,
}

impl SufficientStats {
    /// `Q_T(α) = ∫(α − Y)² ds`.
    pub fn q_of_alpha(&self, alpha: f64) -> f64 {
        q_of_alpha(self, alpha)
    }

    /// `S_T(α) = ∫(α − Y) dY` through its Itô-reduced closed form.
    pub fn s_of_alpha(&self, alpha: f64) -> f64 {
        let a = self.y_t - alpha;
        let b = self.y0 - alpha;
        0.5 * (self.horizon - a * a + b * b)
    }

    pub fn alpha_bar(&self) -> f64 {
        self.i_t / self.horizon
    }

    /// `Q_T(ᾱ_T) = j_T − i_T²/T`, the minimum of `Q_T` over α.
    pub fn q_min(&self) -> f64 {
        (self.j_t - self.i_t * self.i_t / self.horizon).max(0.0)
    }

    /// `M_T(α) = S_T(α) − λ Q_T(α)` for a given true λ.
    pub fn martingale_m(&self, lambda: f64, alpha: f64) -> f64 {
        self.s_of_alpha(alpha) - lambda * self.q_of_alpha(alpha)
    }

    /// `N_T = Y_T − y − λ(αT − I_T)` for given true (λ, α).
    pub fn martingale_n(&self, lambda: f64, alpha: f64) -> f64 {
        self.y_t - self.y0 - lambda * (alpha * self.horizon - self.i_t)
    }

    /// Statistics of `Y/σ` given statistics of `Y`.
    pub fn rescaled(&self, sigma: f64) -> SufficientStats {
        SufficientStats {
            y_t: self.y_t / sigma,
            i_t: self.i_t / sigma,
            j_t: self.j_t / (sigma * sigma),
            y0: self.y0 / sigma,
            horizon: self.horizon,
        }
    }
}

pub fn q_of_alpha(stats: &SufficientStats, alpha: f64) -> f64 {
    let q = stats.j_t - 2.0 * alpha * stats.i_t + alpha * alpha * stats.horizon;
    q.max(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    LambdaHatGivenAlpha,
    AlphaHatGivenLambda,
    AlphaBar,
    LambdaBar,
}

impl EstimatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::LambdaHatGivenAlpha => "lambda_hat_given_alpha",
            EstimatorKind::AlphaHatGivenLambda => "alpha_hat_given_lambda",
            EstimatorKind::AlphaBar => "alpha_bar",
            EstimatorKind::LambdaBar => "lambda_bar",
        }
    }
}

/// First-order large-T references for bias and MSE.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRef {
    pub bias: f64,
    pub mse: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimator_kind: EstimatorKind,
    pub value: f64,
    pub bias: Option<f64>,
    pub mse: Option<f64>,
    pub cr_bound: Option<f64>,
    pub asymptotic_ref: Option<AsymptoticRef>,
}

impl EstimateReport {
    pub fn new(kind: EstimatorKind, value: f64) -> Self {
        EstimateReport {
            estimator_kind: kind,
            value,
            bias: None,
            mse: None,
            cr_bound: None,
            asymptotic_ref: None,
        }
    }

    /// Checks the report invariants: finite value, and `mse ≥ cr_bound`
    /// (up to 1e-9) for an unbiased estimator.
    pub fn check(&self) -> Result<()> {
        if !self.value.is_finite() {
            return Err(Error::NonFiniteField {
                field: "value",
                value: self.value,
            });
        }
        if let (Some(m), Some(cr), Some(b)) = (self.mse, self.cr_bound, self.bias) {
            if b == 0.0 && m < cr - 1e-9 {
                return Err(Error::InvalidConfig(format!(
                    "mse {m} below Cramér–Rao bound {cr} for an unbiased estimator"
                )));
            }
        }
        Ok(())
    }
}
