use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use super::real::Real;

/// Planar vector over any [`Real`] scalar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec2<S> {
    pub x: S,
    pub y: S,
}

impl<S: Real> Vec2<S> {
    #[inline]
    pub fn new(x: S, y: S) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn cst(x: f64, y: f64) -> Self {
        Vec2::new(S::cst(x), S::cst(y))
    }

    #[inline]
    pub fn zero() -> Self {
        Vec2::cst(0.0, 0.0)
    }

    #[inline]
    pub fn dot(self, o: Self) -> S {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Self) -> S {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm_sq(self) -> S {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> S {
        self.norm_sq().sqrt()
    }

    /// Counter-clockwise quarter turn.
    #[inline]
    pub fn perp(self) -> Self {
        Vec2::new(-self.y, self.x)
    }

    #[inline]
    pub fn scale(self, s: S) -> Self {
        Vec2::new(self.x * s, self.y * s)
    }

    /// Rotation by an angle given as (cos, sin).
    #[inline]
    pub fn rotate(self, c: S, s: S) -> Self {
        Vec2::new(self.x * c - self.y * s, self.x * s + self.y * c)
    }

    pub fn values(self) -> [f64; 2] {
        [self.x.value(), self.y.value()]
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl<S: Real> Add for Vec2<S> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl<S: Real> Sub for Vec2<S> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl<S: Real> Neg for Vec2<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Vec2::new(-self.x, -self.y)
    }
}

impl<S: Real> Mul<f64> for Vec2<S> {
    type Output = Self;
    #[inline]
    fn mul(self, s: f64) -> Self {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl<S: Real> AddAssign for Vec2<S> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl<S: Real> SubAssign for Vec2<S> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        self.x -= o.x;
        self.y -= o.y;
    }
}
