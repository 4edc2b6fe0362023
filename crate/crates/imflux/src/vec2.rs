//! Plane vectors in the fixed (a, b) stator frame.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// A 2-vector in the fixed frame. Components are named after the stator axes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub a: f64,
    pub b: f64,
}

pub const ZERO: Vec2 = Vec2 { a: 0.0, b: 0.0 };

impl Vec2 {
    pub const fn new(a: f64, b: f64) -> Self {
        Vec2 { a, b }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.a * o.a + self.b * o.b
    }

    pub fn norm(self) -> f64 {
        self.a.hypot(self.b)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Quarter-turn rotation: J v = (-v_b, v_a) with J = [[0,-1],[1,0]].
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.b, self.a)
    }

    /// Rotate by `angle` radians (counter-clockwise).
    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.a - s * self.b, s * self.a + c * self.b)
    }

    pub fn is_finite(self) -> bool {
        self.a.is_finite() && self.b.is_finite()
    }

    pub fn from_slice(s: &[f64]) -> Vec2 {
        Vec2::new(s[0], s[1])
    }

    pub fn write_to(self, s: &mut [f64]) {
        s[0] = self.a;
        s[1] = self.b;
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.a + o.a, self.b + o.b)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.a += o.a;
        self.b += o.b;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.a - o.a, self.b - o.b)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.a, -self.b)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.a * k, self.b * k)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}
