//! Number types threaded through the transform formulas.
//!
//! Every closed form in [`crate::transform`] is written once against
//! [`Scalar`] and evaluated over plain reals, complex numbers (for contour
//! inversion), second-order duals (λ-derivatives for bias and MSE) and
//! bivariate order-4 jets (z-partials of Ψ).

use num_complex::Complex64;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(x: f64) -> Self;
    /// Real part of the leading value.
    fn re(self) -> f64;
    /// Modulus of the leading value.
    fn modulus(self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn expm1(self) -> Self;
    fn is_finite(self) -> bool;

    fn recip(self) -> Self {
        Self::cst(1.0) / self
    }

    fn sqr(self) -> Self {
        self * self
    }

    fn is_zero(self) -> bool;
}

impl Scalar for f64 {
    fn cst(x: f64) -> Self {
        x
    }
    fn re(self) -> f64 {
        self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn expm1(self) -> Self {
        f64::exp_m1(self)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn is_zero(self) -> bool {
        self == 0.0
    }
}

impl Scalar for Complex64 {
    fn cst(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    fn ln(self) -> Self {
        Complex64::ln(self)
    }
    fn sqrt(self) -> Self {
        Complex64::sqrt(self)
    }
    fn expm1(self) -> Self {
        let (x, y) = (self.re, self.im);
        let s = (0.5 * y).sin();
        Complex64::new(x.exp_m1() * y.cos() - 2.0 * s * s, x.exp() * y.sin())
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn is_zero(self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

/// Truncated Taylor coefficients `f(c0)/0!, f'(c0)/1!, ...` for the
/// elementary functions, used by the jet types.
fn taylor_coeffs(kind: Elem, c: f64, order: usize) -> [f64; 5] {
    let mut out = [0.0; 5];
    match kind {
        Elem::Exp | Elem::Expm1 => {
            let e = c.exp();
            let mut fact = 1.0;
            for (k, o) in out.iter_mut().enumerate().take(order + 1) {
                if k > 0 {
                    fact *= k as f64;
                }
                *o = e / fact;
            }
            if let Elem::Expm1 = kind {
                out[0] = c.exp_m1();
            }
        }
        Elem::Ln => {
            out[0] = c.ln();
            let mut p = 1.0;
            for (k, o) in out.iter_mut().enumerate().take(order + 1).skip(1) {
                p /= c;
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                *o = sign * p / k as f64;
            }
        }
        Elem::Recip => {
            let mut p = 1.0 / c;
            for (k, o) in out.iter_mut().enumerate().take(order + 1) {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                *o = sign * p;
                p /= c;
            }
        }
        Elem::Sqrt => {
            let s = c.sqrt();
            let mut binom = 1.0;
            let mut p = s;
            for (k, o) in out.iter_mut().enumerate().take(order + 1) {
                if k > 0 {
                    binom *= (0.5 - (k as f64 - 1.0)) / k as f64;
                    p /= c;
                }
                *o = binom * p;
            }
        }
    }
    out
}

#[derive(Clone, Copy)]
enum Elem {
    Exp,
    Expm1,
    Ln,
    Recip,
    Sqrt,
}

/// Second-order forward-mode dual in one direction: `value + d1·h + d2·h²/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual2 {
    c: [f64; 3],
}

impl Dual2 {
    pub fn constant(v: f64) -> Self {
        Dual2 { c: [v, 0.0, 0.0] }
    }

    /// The independent variable at `v`.
    pub fn variable(v: f64) -> Self {
        Dual2 { c: [v, 1.0, 0.0] }
    }

    pub fn new(value: f64, d1: f64, d2: f64) -> Self {
        Dual2 {
            c: [value, d1, 0.5 * d2],
        }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn d1(&self) -> f64 {
        self.c[1]
    }

    pub fn d2(&self) -> f64 {
        2.0 * self.c[2]
    }

    fn compose(self, kind: Elem) -> Self {
        let a = taylor_coeffs(kind, self.c[0], 2);
        let (n1, n2) = (self.c[1], self.c[2]);
        Dual2 {
            c: [a[0], a[1] * n1, a[1] * n2 + a[2] * n1 * n1],
        }
    }
}

impl Add for Dual2 {
    type Output = Dual2;
    fn add(self, o: Dual2) -> Dual2 {
        Dual2 {
            c: [self.c[0] + o.c[0], self.c[1] + o.c[1], self.c[2] + o.c[2]],
        }
    }
}

impl Sub for Dual2 {
    type Output = Dual2;
    fn sub(self, o: Dual2) -> Dual2 {
        Dual2 {
            c: [self.c[0] - o.c[0], self.c[1] - o.c[1], self.c[2] - o.c[2]],
        }
    }
}

impl Mul for Dual2 {
    type Output = Dual2;
    fn mul(self, o: Dual2) -> Dual2 {
        let (a, b) = (self.c, o.c);
        Dual2 {
            c: [a[0] * b[0], a[0] * b[1] + a[1] * b[0], a[0] * b[2] + a[1] * b[1] + a[2] * b[0]],
        }
    }
}

impl Div for Dual2 {
    type Output = Dual2;
    fn div(self, o: Dual2) -> Dual2 {
        self * o.compose(Elem::Recip)
    }
}

impl Neg for Dual2 {
    type Output = Dual2;
    fn neg(self) -> Dual2 {
        Dual2 {
            c: [-self.c[0], -self.c[1], -self.c[2]],
        }
    }
}

impl Add<f64> for Dual2 {
    type Output = Dual2;
    fn add(mut self, o: f64) -> Dual2 {
        self.c[0] += o;
        self
    }
}

impl Sub<f64> for Dual2 {
    type Output = Dual2;
    fn sub(mut self, o: f64) -> Dual2 {
        self.c[0] -= o;
        self
    }
}

impl Mul<f64> for Dual2 {
    type Output = Dual2;
    fn mul(self, o: f64) -> Dual2 {
        Dual2 {
            c: [self.c[0] * o, self.c[1] * o, self.c[2] * o],
        }
    }
}

impl Div<f64> for Dual2 {
    type Output = Dual2;
    fn div(self, o: f64) -> Dual2 {
        self * (1.0 / o)
    }
}

impl Scalar for Dual2 {
    fn cst(x: f64) -> Self {
        Dual2::constant(x)
    }
    fn re(self) -> f64 {
        self.c[0]
    }
    fn modulus(self) -> f64 {
        self.c[0].abs()
    }
    fn exp(self) -> Self {
        self.compose(Elem::Exp)
    }
    fn ln(self) -> Self {
        self.compose(Elem::Ln)
    }
    fn sqrt(self) -> Self {
        self.compose(Elem::Sqrt)
    }
    fn expm1(self) -> Self {
        self.compose(Elem::Expm1)
    }
    fn recip(self) -> Self {
        self.compose(Elem::Recip)
    }
    fn is_finite(self) -> bool {
        self.c.iter().all(|x| x.is_finite())
    }
    fn is_zero(self) -> bool {
        self.c.iter().all(|&x| x == 0.0)
    }
}

/// Number of monomials `z1^i z2^j` with `i + j <= 4`.
pub const JET_LEN: usize = 15;
const JET_ORDER: usize = 4;

const fn jet_index(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

/// Bivariate Taylor jet truncated at total order 4. Coefficient `(i, j)`
/// multiplies `z1^i z2^j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    c: [f64; JET_LEN],
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; JET_LEN];
        c[0] = v;
        Jet2 { c }
    }

    /// First independent variable `z1` at value `v`.
    pub fn var1(v: f64) -> Self {
        let mut j = Jet2::constant(v);
        j.c[jet_index(1, 0)] = 1.0;
        j
    }

    /// Second independent variable `z2` at value `v`.
    pub fn var2(v: f64) -> Self {
        let mut j = Jet2::constant(v);
        j.c[jet_index(0, 1)] = 1.0;
        j
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Taylor coefficient of `z1^i z2^j`.
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        assert!(i + j <= JET_ORDER, "jet order exceeded");
        self.c[jet_index(i, j)]
    }

    /// Mixed partial derivative `∂^{i+j} / ∂z1^i ∂z2^j`.
    pub fn partial(&self, i: usize, j: usize) -> f64 {
        self.coeff(i, j) * factorial(i) * factorial(j)
    }

    fn compose(self, kind: Elem) -> Self {
        let a = taylor_coeffs(kind, self.c[0], JET_ORDER);
        let mut n = self;
        n.c[0] = 0.0;
        let mut acc = Jet2::constant(a[JET_ORDER]);
        for k in (0..JET_ORDER).rev() {
            acc = acc * n;
            acc.c[0] += a[k];
        }
        acc
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(mut self, o: Jet2) -> Jet2 {
        for (a, b) in self.c.iter_mut().zip(o.c.iter()) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(mut self, o: Jet2) -> Jet2 {
        for (a, b) in self.c.iter_mut().zip(o.c.iter()) {
            *a -= b;
        }
        self
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let mut c = [0.0; JET_LEN];
        for d in 0..=JET_ORDER {
            for i in 0..=d {
                let j = d - i;
                let mut s = 0.0;
                for p in 0..=i {
                    for q in 0..=j {
                        s += self.c[jet_index(p, q)] * o.c[jet_index(i - p, j - q)];
                    }
                }
                c[jet_index(i, j)] = s;
            }
        }
        Jet2 { c }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        self * o.compose(Elem::Recip)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(mut self) -> Jet2 {
        for a in self.c.iter_mut() {
            *a = -*a;
        }
        self
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(mut self, o: f64) -> Jet2 {
        self.c[0] += o;
        self
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(mut self, o: f64) -> Jet2 {
        self.c[0] -= o;
        self
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(mut self, o: f64) -> Jet2 {
        for a in self.c.iter_mut() {
            *a *= o;
        }
        self
    }
}

impl Div<f64> for Jet2 {
    type Output = Jet2;
    fn div(self, o: f64) -> Jet2 {
        self * (1.0 / o)
    }
}

impl Scalar for Jet2 {
    fn cst(x: f64) -> Self {
        Jet2::constant(x)
    }
    fn re(self) -> f64 {
        self.c[0]
    }
    fn modulus(self) -> f64 {
        self.c[0].abs()
    }
    fn exp(self) -> Self {
        self.compose(Elem::Exp)
    }
    fn ln(self) -> Self {
        self.compose(Elem::Ln)
    }
    fn sqrt(self) -> Self {
        self.compose(Elem::Sqrt)
    }
    fn expm1(self) -> Self {
        self.compose(Elem::Expm1)
    }
    fn recip(self) -> Self {
        self.compose(Elem::Recip)
    }
    fn is_finite(self) -> bool {
        self.c.iter().all(|x| x.is_finite())
    }
    fn is_zero(self) -> bool {
        self.c.iter().all(|&x| x == 0.0)
    }
}

/// `(1 - e^{-x}) / x`, analytic at the origin.
pub fn one_minus_exp_over<S: Scalar>(x: S) -> S {
    if x.modulus() < 0.5 {
        // Σ (-x)^k / (k+1)!
        let mut term = S::cst(1.0);
        let mut sum = S::cst(1.0);
        for k in 1..24 {
            term = term * (-x) / (k as f64 + 1.0);
            sum = sum + term;
        }
        sum
    } else {
        -(-x).expm1() / x
    }
}

/// `[x - 2(1 - e^{-x}) + (1 - e^{-2x})/2] / x^3`, analytic at the origin.
///
/// Scaled variance of the time average of a unit OU process.
pub fn integrated_variance_kernel<S: Scalar>(x: S) -> S {
    if x.modulus() < 0.5 {
        // Σ_{j≥3} (-1)^j (2 - 2^{j-1}) x^{j-3} / j!
        let mut sum = S::cst(0.0);
        let mut xp = S::cst(1.0);
        let mut fact = 6.0;
        for j in 3..30 {
            if j > 3 {
                fact *= j as f64;
                xp = xp * x;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let c = sign * (2.0 - 2f64.powi(j - 1)) / fact;
            sum = sum + xp * c;
        }
        sum
    } else {
        let e1 = (-x).expm1();
        let e2 = (x * -2.0).expm1();
        (x + e1 * 2.0 - e2 * 0.5) / (x * x * x)
    }
}
