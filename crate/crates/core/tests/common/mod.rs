#![allow(dead_code)]

use oumle::model::SufficientStats;

/// Laplace transform of `Q_T(α)` in the printed variant with
/// `κ = √(2λ + μ²)`.
pub fn printed_laplace_q_variant(lambda: f64, alpha: f64, y: f64, t: f64, mu: f64) -> f64 {
    let k = (2.0 * lambda + mu * mu).sqrt();
    let c = (lambda - k) / (2.0 * k);
    let e = (-2.0 * k * t).exp();
    let d = 1.0 + c * (1.0 - e);
    let x0 = y - alpha;
    d.powf(-0.5) * ((lambda - k) * t / (2.0 * k) + 0.5 * x0 * x0 * (lambda - k + 2.0 * e / d)).exp()
}

/// `E[Q_T(α)]` in the printed variant.
pub fn printed_expected_q_variant(lambda: f64, alpha: f64, y: f64, t: f64) -> f64 {
    let e = 1.0 - (-2.0 * lambda * t).exp();
    let x0 = y - alpha;
    (t + e / (2.0 * lambda * t) + x0 * x0 * e) / (2.0 * lambda)
}

/// `λ̄_T` with the printed numerator `T − Y_T² − 2ᾱY_T − 2J_T + y²`.
pub fn printed_lambda_bar_variant(s: &SufficientStats) -> f64 {
    let ab = s.alpha_bar();
    (s.horizon - s.y_t * s.y_t - 2.0 * ab * s.y_t - 2.0 * s.j_t + s.y0 * s.y0) / (2.0 * s.q_min())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ShiftedMean {
    /// `α₀ = (λ²α + z₂)/λ₀²`.
    Derived,
    /// `α₀ = α + z₂/λ₀²`.
    PrintedVariant,
}

/// `E[exp{z₁Y_T + z₂I_T − vY_T² − μJ_T}]` with `J_T = ∫Y²`, evaluated by
/// changing the drift to `λ₀(α₀ − Y)` and integrating against the Gaussian
/// law of `Y_T`. Requires `1 − 2qd² > 0`.
#[allow(clippy::too_many_arguments)]
pub fn raw_joint_mgf(
    lambda: f64,
    alpha: f64,
    y: f64,
    t: f64,
    z1: f64,
    z2: f64,
    v: f64,
    mu: f64,
    shift: ShiftedMean,
) -> f64 {
    let l0 = (lambda * lambda + 2.0 * mu).sqrt();
    let a0 = match shift {
        ShiftedMean::Derived => (lambda * lambda * alpha + z2) / (l0 * l0),
        ShiftedMean::PrintedVariant => alpha + z2 / (l0 * l0),
    };
    let r = z1 + lambda * alpha - l0 * a0;
    let q = 0.5 * (l0 - lambda) - v;
    let m = a0 + (y - a0) * (-l0 * t).exp();
    let d2 = -(-2.0 * l0 * t).exp_m1() / (2.0 * l0);
    let w = 1.0 - 2.0 * q * d2;
    let log_d = (l0 * a0 - lambda * alpha) * y - 0.5 * (l0 - lambda) * (t + y * y)
        + 0.5 * (l0 * l0 * a0 * a0 - lambda * lambda * alpha * alpha) * t;
    (log_d + (m * r + m * m * q + 0.5 * r * r * d2) / w).exp() / w.sqrt()
}

/// Richardson-extrapolated central differences `(f', f'')` at `x`.
pub fn richardson<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> (f64, f64) {
    let d1 = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let f0 = f(x);
    let d2 = |h: f64| (f(x + h) - 2.0 * f0 + f(x - h)) / (h * h);
    ((4.0 * d1(0.5 * h) - d1(h)) / 3.0, (4.0 * d2(0.5 * h) - d2(h)) / 3.0)
}

/// Points `(λ, α, y, T, μ)` for the derivative audit.
pub fn audit_grid() -> Vec<(f64, f64, f64, f64, f64)> {
    let mut g = Vec::new();
    for &l in &[-1.0, 0.01, 0.1, 1.0, 2.5] {
        for &(a, y) in &[(-1.0, 1.0), (0.5, 1.0), (0.0, 0.0)] {
            for &t in &[2.0, 20.0] {
                for &mu in &[0.01, 0.3, 2.0] {
                    g.push((l, a, y, t, mu));
                }
            }
        }
    }
    g
}
