//! Planar vectors and angle helpers shared by every module.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A 2-D vector in metres (positions, offsets) or m/s (velocities).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector pointing along `angle` (radians, counter-clockwise from +x).
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self { x: c, y: s }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    /// Angle in (−π, π].
    pub fn angle(self) -> f64 {
        wrap_angle(self.y.atan2(self.x))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    a
}

/// Wraps a coordinate into [−half, half).
pub fn wrap_coord(value: f64, half: f64) -> f64 {
    if (-half..half).contains(&value) {
        return value;
    }
    let period = 2.0 * half;
    let w = (value + half).rem_euclid(period) - half;
    // rem_euclid can round up to exactly `period` for tiny negative inputs
    if w >= half {
        w - period
    } else {
        w
    }
}

/// Wraps a position into the square [−half, half)².
pub fn wrap_point(p: Vec2, half: f64) -> Vec2 {
    Vec2::new(wrap_coord(p.x, half), wrap_coord(p.y, half))
}

/// Minimum-image representative of a 1-D displacement on a ring of length `2·half`.
pub fn min_image_component(d: f64, half: f64) -> f64 {
    let period = 2.0 * half;
    d - period * (d / period).round()
}

/// Component-wise minimum-image displacement from `p` to `q`.
pub fn min_image_offset(p: Vec2, q: Vec2, half: f64) -> Vec2 {
    Vec2::new(
        min_image_component(q.x - p.x, half),
        min_image_component(q.y - p.y, half),
    )
}
