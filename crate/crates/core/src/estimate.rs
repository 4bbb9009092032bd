//! Maximum-likelihood estimators from sufficient statistics.

use crate::error::{Error, Result};
use crate::model::SufficientStats;
use serde::{Deserialize, Serialize};

/// `(λ, α)` in the numerator and `(λ₀, α₀)` in the denominator of the
/// likelihood ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodRatioArgs {
    pub lambda: f64,
    pub alpha: f64,
    pub lambda0: f64,
    pub alpha0: f64,
}

/// `λ̂_T(α) = S_T(α) / Q_T(α)`.
pub fn mle_lambda_given_alpha(stats: &SufficientStats, alpha: f64) -> Result<f64> {
    let q = stats.q_of_alpha(alpha);
    if q <= 0.0 {
        return Err(Error::DegenerateQ);
    }
    Ok(stats.s_of_alpha(alpha) / q)
}

/// `α̂_T(λ) = (Y_T − y + λ I_T) / (λT)`.
pub fn mle_alpha_given_lambda(stats: &SufficientStats, lambda: f64) -> Result<f64> {
    if lambda == 0.0 {
        return Err(Error::LambdaZero);
    }
    Ok((stats.y_t - stats.y0 + lambda * stats.i_t) / (lambda * stats.horizon))
}

pub fn alpha_bar(stats: &SufficientStats) -> f64 {
    stats.alpha_bar()
}

/// `λ̄_T = λ̂_T(ᾱ_T)`.
pub fn lambda_bar(stats: &SufficientStats) -> Result<f64> {
    if stats.q_min() <= 0.0 {
        return Err(Error::DegenerateQ);
    }
    mle_lambda_given_alpha(stats, stats.alpha_bar())
}

/// `log Z_T = λS(α) − λ₀S(α₀) − ½(λ²Q(α) − λ₀²Q(α₀))`.
pub fn log_likelihood_ratio(stats: &SufficientStats, args: &LikelihoodRatioArgs) -> f64 {
    let LikelihoodRatioArgs {
        lambda: l,
        alpha: a,
        lambda0: l0,
        alpha0: a0,
    } = *args;
    l * stats.s_of_alpha(a) - l0 * stats.s_of_alpha(a0)
        - 0.5 * (l * l * stats.q_of_alpha(a) - l0 * l0 * stats.q_of_alpha(a0))
}
