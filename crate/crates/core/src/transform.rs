//! Closed-form moment-generating functions of OU path functionals.
//!
//! All transforms are evaluated in centered coordinates `X = Y − α`. A
//! Girsanov change of drift from λ to `λ₀ = √(λ² + 2μ)` absorbs the
//! `−μ∫X²` term, after which the expectation is a quadratic-exponential
//! moment of the Gaussian pair `(X_T, ∫X)` under an OU law with rate λ₀ and
//! mean zero. That moment is computed by [`gaussian_quadratic_mgf`]-style
//! completion of squares. The route needs no shifted mean `α₀` and stays
//! regular as λ₀ → 0.

use crate::error::{Error, Result};
use crate::model::{require_unit_sigma, OUParams};
use crate::scalar::{integrated_variance_kernel, one_minus_exp_over, Dual2, Jet2, Scalar};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Argument `(z₁, z₂, v, μ)` of `ψ = E[exp{z₁Y_T + z₂∫Y − vY_T² − μQ_T(α)}]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MgfArgs<S> {
    pub z1: S,
    pub z2: S,
    pub v: S,
    pub mu: S,
}

impl<S: Scalar> MgfArgs<S> {
    pub fn new(z1: S, z2: S, v: S, mu: S) -> Self {
        MgfArgs { z1, z2, v, mu }
    }

    pub fn laplace(mu: S) -> Self {
        let z = S::cst(0.0);
        MgfArgs::new(z, z, z, mu)
    }
}

impl MgfArgs<f64> {
    pub fn lift<S: Scalar>(&self) -> MgfArgs<S> {
        MgfArgs::new(S::cst(self.z1), S::cst(self.z2), S::cst(self.v), S::cst(self.mu))
    }
}

impl MgfArgs<Complex64> {
    pub fn conj(&self) -> Self {
        MgfArgs::new(self.z1.conj(), self.z2.conj(), self.v.conj(), self.mu.conj())
    }
}

/// Scalars for which the real convergence region can be checked directly.
pub trait RealScalar: Scalar {}
impl RealScalar for f64 {}
impl RealScalar for Dual2 {}
impl RealScalar for Jet2 {}

/// Moments of a bivariate Gaussian `(ξ₁, ξ₂)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BivariateGaussianSpec {
    pub m1: f64,
    pub m2: f64,
    pub d1: f64,
    pub d2: f64,
    pub d12: f64,
}

impl BivariateGaussianSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.d1 > 0.0 && self.d2 > 0.0 && self.d1 * self.d2 - self.d12 * self.d12 >= 0.0) {
            return Err(Error::InvalidConfig(format!("covariance not positive semidefinite: {self:?}")));
        }
        Ok(())
    }
}

/// `exp(exponent) · det^{-1/2}`, kept apart so the caller chooses the branch
/// of the square root.
#[derive(Clone, Copy, Debug)]
pub struct LogParts<S> {
    pub exponent: S,
    pub det: S,
    pub trace: S,
}

impl<S: Scalar> LogParts<S> {
    fn real_value(self, what: &str) -> Result<S> {
        if !(self.det.re() > 0.0 && self.trace.re() > 0.0) {
            return Err(Error::OutsideConvergenceRegion(format!(
                "{what}: det(I - 2ΣC) = {:e}, trace = {:e}",
                self.det.re(),
                self.trace.re()
            )));
        }
        let v = (self.exponent - self.det.ln() * 0.5).exp();
        if !v.is_finite() {
            return Err(Error::OutsideConvergenceRegion(format!("{what}: non-finite value")));
        }
        Ok(v)
    }
}

/// Completes the square in `E[exp{l·ξ + c₁ξ₁² + c₂ξ₂²}]`. The diagonal
/// entries `a11 = 1 − 2d₁c₁`, `a22 = 1 − 2d₂c₂` of `A = I − 2ΣC` are passed
/// in so callers can supply cancellation-free forms.
#[allow(clippy::too_many_arguments)]
fn gq_core<S: Scalar>(m: (S, S), d1: S, d2: S, d12: S, l: (S, S), c: (S, S), a11: S, a22: S) -> LogParts<S> {
    let a12 = -(d12 * c.1 * 2.0);
    let a21 = -(d12 * c.0 * 2.0);
    let det = a11 * a22 - a12 * a21;
    let m11 = (a22 * d1 - a12 * d12) / det;
    let m12 = ((a22 * d12 - a12 * d2) + (a11 * d12 - a21 * d1)) / (det * 2.0);
    let m22 = (a11 * d2 - a21 * d12) / det;
    let g1 = l.0 + c.0 * m.0 * 2.0;
    let g2 = l.1 + c.1 * m.1 * 2.0;
    let quad = g1 * g1 * m11 + g1 * g2 * m12 * 2.0 + g2 * g2 * m22;
    let exponent = l.0 * m.0 + l.1 * m.1 + c.0 * m.0 * m.0 + c.1 * m.1 * m.1 + quad * 0.5;
    LogParts {
        exponent,
        det,
        trace: a11 + a22,
    }
}

/// `E[exp{l₁ξ₁ + l₂ξ₂ + c₁ξ₁² + c₂ξ₂²}]` for a bivariate Gaussian.
pub fn gaussian_quadratic_mgf(spec: &BivariateGaussianSpec, lin1: f64, lin2: f64, quad1: f64, quad2: f64) -> Result<f64> {
    spec.validate()?;
    gq_core(
        (spec.m1, spec.m2),
        spec.d1,
        spec.d2,
        spec.d12,
        (lin1, lin2),
        (quad1, quad2),
        1.0 - 2.0 * spec.d1 * quad1,
        1.0 - 2.0 * spec.d2 * quad2,
    )
    .real_value("gaussian quadratic mgf")
}

/// `λ₀ ± λ` without cancellation, using `λ₀² − λ² = 2μ`.
fn lam0_pm<S: Scalar>(lam0: S, lam: S, mu: S) -> (S, S) {
    let r = lam.re();
    let plus = if r < 0.0 { mu * 2.0 / (lam0 - lam) } else { lam0 + lam };
    let minus = if r > 0.0 { mu * 2.0 / (lam0 + lam) } else { lam0 - lam };
    (plus, minus)
}

/// `1 − (λ₀ − λ − 2v)·(1 − e^{−2λ₀T})/(2λ₀)`.
fn terminal_quad_diag<S: Scalar>(lam0: S, plus: S, minus: S, v: S, t: f64) -> S {
    let u = lam0 * t;
    if u.modulus() < 0.5 {
        S::cst(1.0) - (minus - v * 2.0) * one_minus_exp_over(u * 2.0) * t
    } else {
        let e2 = (u * -2.0).exp();
        ((plus + v * 2.0) + (minus - v * 2.0) * e2) / (lam0 * 2.0)
    }
}

/// Moments of `(X_T, ∫₀ᵀX)` for `dX = −kX dt + dW`, `X₀ = x0`.
struct CenteredMoments<S> {
    m_x: S,
    m_i: S,
    s_xx: S,
    s_ii: S,
    s_xi: S,
}

fn centered_moments<S: Scalar>(k: S, x0: f64, t: f64) -> CenteredMoments<S> {
    let u = k * t;
    let h1 = one_minus_exp_over(u);
    let h2 = one_minus_exp_over(u * 2.0);
    CenteredMoments {
        m_x: (-u).exp() * x0,
        m_i: h1 * (x0 * t),
        s_xx: h2 * t,
        s_ii: integrated_variance_kernel(u) * (t * t * t),
        s_xi: h1 * h1 * (0.5 * t * t),
    }
}

/// Log-domain pieces of ψ with λ supplied as a scalar (so it can carry
/// derivatives).
pub fn psi_log_parts<S: Scalar>(lam: S, alpha: f64, y0: f64, t: f64, args: &MgfArgs<S>) -> LogParts<S> {
    let x0 = y0 - alpha;
    let a = args.z1 - args.v * (2.0 * alpha);
    let b = args.z2;
    let shift = args.z1 * alpha + args.z2 * (alpha * t) - args.v * (alpha * alpha);
    let lam0 = (lam * lam + args.mu * 2.0).sqrt();
    let (plus, minus) = lam0_pm(lam0, lam, args.mu);
    let q = minus * 0.5 - args.v;
    let mom = centered_moments(lam0, x0, t);
    let a11 = terminal_quad_diag(lam0, plus, minus, args.v, t);
    let mut parts = gq_core(
        (mom.m_x, mom.m_i),
        mom.s_xx,
        mom.s_ii,
        mom.s_xi,
        (a, b),
        (q, S::cst(0.0)),
        a11,
        S::cst(1.0),
    );
    let log_d = -(minus * (0.5 * (x0 * x0 + t)));
    parts.exponent = parts.exponent + shift + log_d;
    parts
}

fn check_unit(params: &OUParams) -> Result<()> {
    require_unit_sigma(params)
}

/// `ψ_{λ,α}(z₁, z₂, v, μ)` on the real convergence domain `v ≥ 0, μ ≥ 0`.
pub fn psi<S: RealScalar>(params: &OUParams, args: MgfArgs<S>) -> Result<S> {
    check_unit(params)?;
    if args.v.re() < 0.0 || args.mu.re() < 0.0 {
        return Err(Error::OutsideConvergenceRegion(
            "v < 0 or mu < 0 requires psi_continued".into(),
        ));
    }
    psi_continued(params, args)
}

/// ψ at arbitrary real arguments (analytic continuation); fails when
/// `1 − 2qd² ≤ 0`.
pub fn psi_continued<S: RealScalar>(params: &OUParams, args: MgfArgs<S>) -> Result<S> {
    check_unit(params)?;
    if args.z1.is_zero() && args.z2.is_zero() && args.v.is_zero() && args.mu.is_zero() {
        return Ok(S::cst(1.0));
    }
    psi_log_parts(S::cst(params.lambda), params.alpha, params.y0, params.horizon, &args).real_value("psi")
}

/// ψ together with its first and second λ-derivatives.
pub fn psi_lambda_dual(params: &OUParams, args: MgfArgs<f64>) -> Result<Dual2> {
    check_unit(params)?;
    if args.v < 0.0 || args.mu < 0.0 {
        return Err(Error::OutsideConvergenceRegion("v < 0 or mu < 0".into()));
    }
    psi_log_parts(
        Dual2::variable(params.lambda),
        params.alpha,
        params.y0,
        params.horizon,
        &args.lift::<Dual2>(),
    )
    .real_value("psi")
}

/// Continuous logarithm along a parameter sweep: each new value is placed on
/// the sheet nearest to the previous one.
#[derive(Clone, Debug, Default)]
pub struct BranchTracker {
    prev_im: Option<f64>,
    max_jump: f64,
    flips: usize,
}

impl BranchTracker {
    pub fn new() -> Self {
        BranchTracker::default()
    }

    pub fn log(&mut self, w: Complex64) -> Complex64 {
        let mut l = w.ln();
        if let Some(p) = self.prev_im {
            let k = ((p - l.im) / (2.0 * PI)).round();
            if k != 0.0 {
                self.flips += 1;
            }
            l.im += 2.0 * PI * k;
            self.max_jump = self.max_jump.max((l.im - p).abs());
        }
        self.prev_im = Some(l.im);
        l
    }

    /// Largest phase step between consecutive evaluations, after unwrapping.
    pub fn max_jump(&self) -> f64 {
        self.max_jump
    }

    pub fn flips(&self) -> usize {
        self.flips
    }

    pub fn reset(&mut self) {
        *self = BranchTracker::default();
    }
}

/// ψ at complex arguments. The square root of `1 − 2qd²` follows `tracker`;
/// pass a fresh tracker for an isolated evaluation near the real axis.
pub fn psi_complex(params: &OUParams, args: MgfArgs<Complex64>, tracker: &mut BranchTracker) -> Result<Complex64> {
    check_unit(params)?;
    let p = psi_log_parts(Complex64::new(params.lambda, 0.0), params.alpha, params.y0, params.horizon, &args);
    if p.det.norm() == 0.0 || !p.det.is_finite() {
        return Err(Error::OutsideConvergenceRegion("singular determinant".into()));
    }
    let v = (p.exponent - tracker.log(p.det) * 0.5).exp();
    if !Scalar::is_finite(v) {
        return Err(Error::OutsideConvergenceRegion("non-finite complex value".into()));
    }
    Ok(v)
}

/// `E[exp{−μ Q_T(α)}]`.
pub fn laplace_q(params: &OUParams, mu: f64) -> Result<f64> {
    if mu < 0.0 {
        return Err(Error::OutsideConvergenceRegion(format!("mu = {mu} < 0")));
    }
    psi(params, MgfArgs::laplace(mu))
}

/// `E[exp{−μ∫₀ᵀ(y + W_s)² ds}]` for Brownian motion `W`.
pub fn cameron_martin(mu: f64, y: f64, horizon: f64) -> f64 {
    if mu == 0.0 {
        return 1.0;
    }
    let x = (2.0 * mu).sqrt() * horizon;
    let log_cosh = x + (0.5 * (1.0 + (-2.0 * x).exp())).ln();
    (-(mu / 2.0).sqrt() * y * y * x.tanh() - 0.5 * log_cosh).exp()
}

/// The auxiliary quantities of the uncentered joint MGF
/// `E[exp{z₁Y_T + z₂I_T − vY_T² − μJ_T}]` (μ on `∫Y²`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxiliaryShape {
    pub lambda0: f64,
    pub alpha0: f64,
    pub r: f64,
    pub q: f64,
    pub m: f64,
    pub d2: f64,
    pub log_d: f64,
}

impl AuxiliaryShape {
    pub fn new(params: &OUParams, args: &MgfArgs<f64>) -> Self {
        let (l, a, y, t) = (params.lambda, params.alpha, params.y0, params.horizon);
        let lambda0 = (l * l + 2.0 * args.mu).sqrt();
        let alpha0 = (l * l * a + args.z2) / (lambda0 * lambda0);
        let r = args.z1 + l * a - lambda0 * alpha0;
        let q = 0.5 * (lambda0 - l) - args.v;
        let m = alpha0 + (y - alpha0) * (-lambda0 * t).exp();
        let d2 = t * one_minus_exp_over(2.0 * lambda0 * t);
        let log_d = (lambda0 * alpha0 - l * a) * y - 0.5 * (lambda0 - l) * (t + y * y)
            + 0.5 * (lambda0 * lambda0 * alpha0 * alpha0 - l * l * a * a) * t;
        AuxiliaryShape {
            lambda0,
            alpha0,
            r,
            q,
            m,
            d2,
            log_d,
        }
    }

    /// `D·exp{(mr + m²q + r²d²/2)/(1 − 2qd²)}·(1 − 2qd²)^{−1/2}`.
    pub fn value(&self) -> Result<f64> {
        let w = 1.0 - 2.0 * self.q * self.d2;
        if w <= 0.0 {
            return Err(Error::OutsideConvergenceRegion(format!("1 - 2qd^2 = {w:e}")));
        }
        let e = (self.m * self.r + self.m * self.m * self.q + 0.5 * self.r * self.r * self.d2) / w;
        Ok((self.log_d + e).exp() / w.sqrt())
    }
}

/// Joint MGF with μ on `∫Y²` (not on `Q_T(α)`), evaluated through the
/// uncentered measure change to `(λ₀, α₀)`. Requires `λ₀ > 0`.
pub fn psi_joint_raw(params: &OUParams, args: MgfArgs<f64>) -> Result<f64> {
    check_unit(params)?;
    if args.v < 0.0 || args.mu < 0.0 {
        return Err(Error::OutsideConvergenceRegion("v < 0 or mu < 0".into()));
    }
    let shape = AuxiliaryShape::new(params, &args);
    if shape.lambda0 <= 0.0 {
        return Err(Error::OutsideConvergenceRegion("lambda0 = 0".into()));
    }
    shape.value()
}

/// `Ψ_{λ,α}(z₁, z₂, μ) = E[exp{z₁Y_T + z₂ᾱ_T − μQ_T(ᾱ_T)}]` for `Y₀ = 0`, λ > 0.
pub fn psi_bar<S: RealScalar>(params: &OUParams, z1: S, z2: S, mu: f64) -> Result<S> {
    psi_bar_parts(params, z1, z2, mu)?.real_value("psi_bar")
}

/// The bivariate Gaussian behind Ψ: `(Y_T − α, ᾱ_T − α)` under the rate-λ₀
/// OU law started at `−α`.
pub fn psi_bar_auxiliary(params: &OUParams, mu: f64) -> BivariateGaussianSpec {
    let lam0 = (params.lambda * params.lambda + 2.0 * mu).sqrt();
    let t = params.horizon;
    let mom = centered_moments(lam0, params.y0 - params.alpha, t);
    BivariateGaussianSpec {
        m1: mom.m_x,
        m2: mom.m_i / t,
        d1: mom.s_xx,
        d2: mom.s_ii / (t * t),
        d12: mom.s_xi / t,
    }
}

fn psi_bar_parts<S: RealScalar>(params: &OUParams, z1: S, z2: S, mu: f64) -> Result<LogParts<S>> {
    check_unit(params)?;
    if params.y0 != 0.0 {
        return Err(Error::NonzeroInitialValue(params.y0));
    }
    if params.lambda <= 0.0 {
        return Err(Error::NonPositiveLambda(params.lambda));
    }
    if mu < 0.0 {
        return Err(Error::OutsideConvergenceRegion(format!("mu = {mu} < 0")));
    }
    let (lam, alpha, t) = (params.lambda, params.alpha, params.horizon);
    let lam0 = (lam * lam + 2.0 * mu).sqrt();
    let (plus, minus) = lam0_pm(lam0, lam, mu);
    let spec = psi_bar_auxiliary(params, mu);
    let u = lam0 * t;
    let c1 = 0.5 * minus;
    let c2 = mu * t;
    let a11 = terminal_quad_diag(lam0, plus, minus, 0.0, t);
    let a22 = if u < 0.5 {
        1.0 - 2.0 * spec.d2 * c2
    } else {
        let e = (-u).exp();
        (lam * lam * u + 2.0 * mu * (1.5 - 2.0 * e + 0.5 * e * e)) / (lam0 * lam0 * u)
    };
    let c = |x: f64| S::cst(x);
    let mut parts = gq_core(
        (c(spec.m1), c(spec.m2)),
        c(spec.d1),
        c(spec.d2),
        c(spec.d12),
        (z1, z2),
        (c(c1), c(c2)),
        c(a11),
        c(a22),
    );
    let x0 = -alpha;
    parts.exponent = parts.exponent + (z1 + z2) * alpha - 0.5 * minus * (x0 * x0 + t);
    Ok(parts)
}

/// `E[exp{sζ(x)}]` with `ζ(x) = S_T(α) − xQ_T(α)`, for complex `s`.
pub fn mgf_zeta(params: &OUParams, x: f64, s: Complex64, tracker: &mut BranchTracker) -> Result<Complex64> {
    let (a, y, t) = (params.alpha, params.y0, params.horizon);
    let args = MgfArgs::new(s * a, Complex64::new(0.0, 0.0), s * 0.5, s * x);
    let base = psi_complex(params, args, tracker)?;
    Ok(base * (s * (0.5 * t - a * y + 0.5 * y * y)).exp())
}

/// `E[exp{sζ(x)}]` for real `s`, where the continuation converges.
pub fn mgf_zeta_real(params: &OUParams, x: f64, s: f64) -> Result<f64> {
    let (a, y, t) = (params.alpha, params.y0, params.horizon);
    let base = psi_continued(params, MgfArgs::new(s * a, 0.0, 0.5 * s, s * x))?;
    Ok(base * (s * (0.5 * t - a * y + 0.5 * y * y)).exp())
}
