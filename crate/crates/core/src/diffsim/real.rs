//! Scalar abstraction shared by the plain `f64` simulator and the
//! forward-mode [`Dual`] simulator.
//!
//! Every simulator routine is generic over [`Real`], so the same code path
//! produces loss values (with `f64`) or loss values together with their
//! derivatives with respect to all morphology parameters (with `Dual`).

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Largest supported morphology dimension. The scenarios use at most 9.
pub const MAX_PARAMS: usize = 9;

pub trait Real:
    Copy
    + Debug
    + Send
    + Sync
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign<f64>
{
    /// A constant (zero tangents).
    fn cst(value: f64) -> Self;

    /// A value whose tangent row is `tangents`; ignored by `f64`.
    fn seeded(value: f64, tangents: &[f64]) -> Self;

    fn value(&self) -> f64;

    /// Applies a scalar function given its value and derivative at `self`.
    fn chain(self, value: f64, derivative: f64) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }

    fn sqr(self) -> Self {
        self * self
    }

    fn sqrt(self) -> Self {
        let v = self.value().sqrt();
        self.chain(v, 0.5 / v)
    }

    fn exp(self) -> Self {
        let v = self.value().exp();
        self.chain(v, v)
    }

    fn ln(self) -> Self {
        let x = self.value();
        self.chain(x.ln(), 1.0 / x)
    }

    fn sin(self) -> Self {
        let x = self.value();
        self.chain(x.sin(), x.cos())
    }

    fn cos(self) -> Self {
        let x = self.value();
        self.chain(x.cos(), -x.sin())
    }

    fn tanh(self) -> Self {
        let t = self.value().tanh();
        self.chain(t, 1.0 - t * t)
    }

    fn abs(self) -> Self {
        if self.value() < 0.0 {
            -self
        } else {
            self
        }
    }

    /// `ln(1 + exp(beta x)) / beta`, evaluated without overflow.
    fn softplus(self, beta: f64) -> Self {
        let z = beta * self.value();
        let v = if z > 30.0 {
            self.value() + (-z).exp().ln_1p() / beta
        } else {
            z.exp().ln_1p() / beta
        };
        self.chain(v, sigmoid(z))
    }

    /// Logistic gate `1 / (1 + exp(-beta x))`.
    fn sigmoid(self, beta: f64) -> Self {
        let s = sigmoid(beta * self.value());
        self.chain(s, beta * s * (1.0 - s))
    }

    fn atan2(self, x: Self) -> Self;

    /// Larger of the two by value; the derivative follows the winner.
    fn max(self, other: Self) -> Self {
        if other.value() > self.value() {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other.value() < self.value() {
            other
        } else {
            self
        }
    }

    fn is_finite(&self) -> bool;

    /// First `dim` tangents; zeros for plain values.
    fn tangent_row(&self, dim: usize) -> Vec<f64> {
        vec![0.0; dim]
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl Real for f64 {
    #[inline]
    fn cst(value: f64) -> Self {
        value
    }

    #[inline]
    fn seeded(value: f64, _tangents: &[f64]) -> Self {
        value
    }

    #[inline]
    fn value(&self) -> f64 {
        *self
    }

    #[inline]
    fn chain(self, value: f64, _derivative: f64) -> Self {
        value
    }

    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }

    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }

    #[inline]
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }

    #[inline]
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

/// A value with its derivatives with respect to the morphology parameters.
///
/// Tangent slots beyond the active dimension stay zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub tangents: [f64; MAX_PARAMS],
}

impl Dual {
    pub fn constant(value: f64) -> Self {
        Dual {
            value,
            tangents: [0.0; MAX_PARAMS],
        }
    }

    /// The `k`-th coordinate variable: value `value`, tangent `e_k`.
    pub fn variable(value: f64, k: usize) -> Self {
        let mut d = Dual::constant(value);
        d.tangents[k] = 1.0;
        d
    }

    pub fn gradient(&self, dim: usize) -> Vec<f64> {
        self.tangents[..dim].to_vec()
    }

    #[inline]
    fn map_tangents(&self, scale: f64) -> [f64; MAX_PARAMS] {
        let mut t = self.tangents;
        for x in &mut t {
            *x *= scale;
        }
        t
    }
}

impl Real for Dual {
    #[inline]
    fn cst(value: f64) -> Self {
        Dual::constant(value)
    }

    fn seeded(value: f64, tangents: &[f64]) -> Self {
        let mut d = Dual::constant(value);
        d.tangents[..tangents.len()].copy_from_slice(tangents);
        d
    }

    #[inline]
    fn value(&self) -> f64 {
        self.value
    }

    #[inline]
    fn chain(self, value: f64, derivative: f64) -> Self {
        Dual {
            value,
            tangents: self.map_tangents(derivative),
        }
    }

    fn atan2(self, x: Self) -> Self {
        let (yv, xv) = (self.value, x.value);
        let r2 = xv * xv + yv * yv;
        let mut t = [0.0; MAX_PARAMS];
        for (k, tk) in t.iter_mut().enumerate() {
            *tk = (xv * self.tangents[k] - yv * x.tangents[k]) / r2;
        }
        Dual {
            value: yv.atan2(xv),
            tangents: t,
        }
    }

    fn is_finite(&self) -> bool {
        self.value.is_finite() && self.tangents.iter().all(|t| t.is_finite())
    }

    fn tangent_row(&self, dim: usize) -> Vec<f64> {
        self.tangents[..dim].to_vec()
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(mut self, rhs: Dual) -> Dual {
        self.value += rhs.value;
        for k in 0..MAX_PARAMS {
            self.tangents[k] += rhs.tangents[k];
        }
        self
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(mut self, rhs: Dual) -> Dual {
        self.value -= rhs.value;
        for k in 0..MAX_PARAMS {
            self.tangents[k] -= rhs.tangents[k];
        }
        self
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, rhs: Dual) -> Dual {
        let mut t = [0.0; MAX_PARAMS];
        for (k, tk) in t.iter_mut().enumerate() {
            *tk = self.value * rhs.tangents[k] + rhs.value * self.tangents[k];
        }
        Dual {
            value: self.value * rhs.value,
            tangents: t,
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, rhs: Dual) -> Dual {
        let inv = 1.0 / rhs.value;
        let q = self.value / rhs.value;
        let mut t = [0.0; MAX_PARAMS];
        for (k, tk) in t.iter_mut().enumerate() {
            *tk = (self.tangents[k] - q * rhs.tangents[k]) * inv;
        }
        Dual {
            value: q,
            tangents: t,
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(self) -> Dual {
        Dual {
            value: -self.value,
            tangents: self.map_tangents(-1.0),
        }
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn add(mut self, rhs: f64) -> Dual {
        self.value += rhs;
        self
    }
}

impl Sub<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn sub(mut self, rhs: f64) -> Dual {
        self.value -= rhs;
        self
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, rhs: f64) -> Dual {
        Dual {
            value: self.value * rhs,
            tangents: self.map_tangents(rhs),
        }
    }
}

impl Div<f64> for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, rhs: f64) -> Dual {
        let inv = 1.0 / rhs;
        Dual {
            value: self.value / rhs,
            tangents: self.map_tangents(inv),
        }
    }
}

impl AddAssign for Dual {
    #[inline]
    fn add_assign(&mut self, rhs: Dual) {
        *self = *self + rhs;
    }
}

impl SubAssign for Dual {
    #[inline]
    fn sub_assign(&mut self, rhs: Dual) {
        *self = *self - rhs;
    }
}

impl MulAssign<f64> for Dual {
    #[inline]
    fn mul_assign(&mut self, rhs: f64) {
        *self = *self * rhs;
    }
}
