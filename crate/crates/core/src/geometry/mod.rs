//! Planar geometry used by the estimator and the controllers.
//!
//! Everything here is a pure function of its inputs. Containment and
//! orientation tests share one tolerance, [`EPS`], which is sized for
//! meter-scale scenarios in double precision.

mod circle;
mod hull;
pub mod oracle;

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use circle::{min_enclosing_circle, SupportSet};
pub use hull::{convex_hull, dist_to_hull, prj_to_hull, uv_to_hull, ConvexPolygon};

/// Module-wide tolerance for containment and orientation tests.
pub const EPS: f64 = 1e-9;

/// Tolerance used to merge duplicate input points.
pub const DEDUP_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("point set is empty")]
    EmptyPointSet,
    #[error("point set contains a non-finite coordinate")]
    NonFinite,
    #[error("point lies inside or on the convex set")]
    PointNotOutside,
    #[error("unit vectors do not fit in an open half-plane")]
    NoHalfPlane,
}

/// A point or displacement in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn distance(self, other: Vec2) -> f64 {
        (other - self).norm()
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Angle of the vector measured counterclockwise from the +x axis, in `(-π, π]`.
    #[inline]
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Rotation by π/2 clockwise: `(x, y) ↦ (y, -x)`.
    #[inline]
    pub fn rotate_cw_90(self) -> Vec2 {
        Vec2::new(self.y, -self.x)
    }

    /// Component of `self` along the line spanned by `dir`.
    #[inline]
    pub fn project_onto(self, dir: UnitVec2) -> Vec2 {
        dir.as_vec() * self.dot(dir.as_vec())
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Vec2::new(x, y)
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, rhs: Vec2) -> Vec2 {
        rhs * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn div(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x / rhs, self.y / rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// A direction in the plane. The norm is 1 to within 1e-9.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVec2(Vec2);

impl UnitVec2 {
    pub const X: UnitVec2 = UnitVec2(Vec2::new(1.0, 0.0));
    pub const Y: UnitVec2 = UnitVec2(Vec2::new(0.0, 1.0));

    /// Normalizes `v`. Returns `None` for zero-length or non-finite input.
    pub fn new(v: Vec2) -> Option<Self> {
        let n = v.norm();
        if n > 0.0 && n.is_finite() {
            Some(UnitVec2(v / n))
        } else {
            None
        }
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        UnitVec2(Vec2::new(c, s))
    }

    #[inline]
    pub fn x(self) -> f64 {
        self.0.x
    }

    #[inline]
    pub fn y(self) -> f64 {
        self.0.y
    }

    #[inline]
    pub fn as_vec(self) -> Vec2 {
        self.0
    }

    #[inline]
    pub fn dot(self, other: UnitVec2) -> f64 {
        self.0.dot(other.0)
    }

    #[inline]
    pub fn angle(self) -> f64 {
        self.0.angle()
    }

    #[inline]
    pub fn rotate_cw_90(self) -> UnitVec2 {
        rotate_cw_90(self)
    }
}

impl From<UnitVec2> for Vec2 {
    fn from(u: UnitVec2) -> Vec2 {
        u.0
    }
}

/// Circle with `radius >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Vec2,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Vec2, radius: f64) -> Self {
        Self { center, radius }
    }

    /// True if `p` lies within `radius + EPS` of the center.
    #[inline]
    pub fn contains(&self, p: Vec2) -> bool {
        self.center.distance(p) <= self.radius + EPS
    }
}

pub fn rotate_cw_90(v: UnitVec2) -> UnitVec2 {
    UnitVec2(v.0.rotate_cw_90())
}

/// Unsigned angle between two directions, in `[0, π]`.
pub fn angle_between(u: UnitVec2, v: UnitVec2) -> f64 {
    u.dot(v).clamp(-1.0, 1.0).acos()
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_2pi(theta: f64) -> f64 {
    let w = theta.rem_euclid(2.0 * PI);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn wrap_pi(theta: f64) -> f64 {
    wrap_2pi(theta + PI) - PI
}

/// Angular extremes of a set of directions confined to an open half-plane.
///
/// Returns `(rightmost, leftmost)`: every input lies in the counterclockwise
/// sweep that starts at `rightmost` and ends at `leftmost`.
pub fn extreme_unit_vectors(vs: &[UnitVec2]) -> Result<(UnitVec2, UnitVec2), GeometryError> {
    if vs.is_empty() {
        return Err(GeometryError::EmptyPointSet);
    }
    let mut order: Vec<(f64, usize)> = vs
        .iter()
        .enumerate()
        .map(|(i, v)| (wrap_2pi(v.angle()), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));

    // The complement of the largest circular gap is the occupied sweep.
    let n = order.len();
    let (mut gap, mut after) = (order[0].0 + 2.0 * PI - order[n - 1].0, 0);
    for k in 1..n {
        let g = order[k].0 - order[k - 1].0;
        if g > gap {
            gap = g;
            after = k;
        }
    }
    if 2.0 * PI - gap >= PI - EPS {
        return Err(GeometryError::NoHalfPlane);
    }
    let rightmost = vs[order[after].1];
    let leftmost = vs[order[(after + n - 1) % n].1];
    Ok((rightmost, leftmost))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uv(x: f64, y: f64) -> UnitVec2 {
        UnitVec2::new(Vec2::new(x, y)).unwrap()
    }

    fn close(a: UnitVec2, b: UnitVec2) -> bool {
        (a.as_vec() - b.as_vec()).norm() < 1e-12
    }

    #[test]
    fn rotate_cw_examples() {
        assert!(close(rotate_cw_90(uv(1.0, 0.0)), uv(0.0, -1.0)));
        assert!(close(rotate_cw_90(uv(0.0, 1.0)), uv(1.0, 0.0)));
        assert!(close(rotate_cw_90(uv(0.6, 0.8)), uv(0.8, -0.6)));
    }

    #[test]
    fn angle_between_examples() {
        let a = uv(0.3, -0.7);
        assert_eq!(angle_between(a, a), 0.0);
        assert!((angle_between(uv(1.0, 0.0), uv(0.0, 1.0)) - PI / 2.0).abs() < 1e-15);
        assert!((angle_between(uv(1.0, 0.0), uv(-1.0, 0.0)) - PI).abs() < 1e-15);
    }

    #[test]
    fn extremes_two_vectors() {
        let (r, l) = extreme_unit_vectors(&[uv(0.0, 1.0), uv(1.0, 0.0)]).unwrap();
        assert!(close(r, uv(1.0, 0.0)));
        assert!(close(l, uv(0.0, 1.0)));
    }

    #[test]
    fn extremes_single_vector() {
        let (r, l) = extreme_unit_vectors(&[uv(1.0, 0.0)]).unwrap();
        assert!(close(r, uv(1.0, 0.0)));
        assert!(close(l, uv(1.0, 0.0)));
    }

    #[test]
    fn extremes_with_interior_vector() {
        let vs = [uv(1.0, 0.0), uv(0.7071, 0.7071), uv(0.0, 1.0)];
        let (r, l) = extreme_unit_vectors(&vs).unwrap();
        assert!(close(r, uv(1.0, 0.0)));
        assert!(close(l, uv(0.0, 1.0)));
    }

    #[test]
    fn extremes_across_the_angle_seam() {
        // spans the ±x axis from below to above
        let vs = [uv(1.0, 0.2), uv(1.0, -0.5), uv(1.0, 0.0)];
        let (r, l) = extreme_unit_vectors(&vs).unwrap();
        assert!(close(r, uv(1.0, -0.5)));
        assert!(close(l, uv(1.0, 0.2)));
    }

    #[test]
    fn extremes_reject_half_plane_violations() {
        let opposite = [uv(1.0, 0.0), uv(-1.0, 0.0)];
        assert_eq!(extreme_unit_vectors(&opposite), Err(GeometryError::NoHalfPlane));
        let wide = [uv(1.0, 0.0), uv(0.0, 1.0), uv(-1.0, -0.1)];
        assert_eq!(extreme_unit_vectors(&wide), Err(GeometryError::NoHalfPlane));
    }

    #[test]
    fn unit_vector_rejects_zero() {
        assert!(UnitVec2::new(Vec2::ZERO).is_none());
        assert!(UnitVec2::new(Vec2::new(f64::NAN, 1.0)).is_none());
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_2pi(-1e-300), 0.0);
        assert!((wrap_2pi(-PI / 2.0) - 1.5 * PI).abs() < 1e-15);
        assert!((wrap_pi(PI) + PI).abs() < 1e-15);
        assert!((wrap_pi(1.5 * PI) + 0.5 * PI).abs() < 1e-15);
    }
}
