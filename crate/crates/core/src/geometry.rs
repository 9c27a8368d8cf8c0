use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vector2<T> {
    pub dx: T,
    pub dy: T,
}

impl<T: Scalar> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Self) -> T {
        (self - other).norm()
    }

    pub fn distance_sq(self, other: Self) -> T {
        (self - other).norm_sq()
    }

    /// Reflection of `self` through `center`.
    pub fn reflect_through(self, center: Self) -> Self {
        center + (center - self)
    }

    pub fn cast<U: Scalar>(self) -> Point2<U> {
        Point2::new(U::of(self.x.as_f64()), U::of(self.y.as_f64()))
    }
}

impl<T: Scalar> Vector2<T> {
    pub fn new(dx: T, dy: T) -> Self {
        Self { dx, dy }
    }

    /// Unit vector for an orientation in degrees, measured counter-clockwise
    /// from the +x axis with y pointing up. In image coordinates (y down) this
    /// is `(cos θ, -sin θ)`.
    pub fn from_orientation_deg(deg: T) -> Self {
        let r = deg.to_radians();
        Self::new(r.cos(), -r.sin())
    }

    /// Orientation of the vector in degrees, counter-clockwise with y up, in `(-180, 180]`.
    pub fn orientation_deg(self) -> T {
        (-self.dy).atan2(self.dx).to_degrees()
    }

    pub fn norm_sq(self) -> T {
        self.dx * self.dx + self.dy * self.dy
    }

    pub fn norm(self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn dot(self, other: Self) -> T {
        self.dx * other.dx + self.dy * other.dy
    }

    pub fn cross(self, other: Self) -> T {
        self.dx * other.dy - self.dy * other.dx
    }

    /// The vector rotated by +90 degrees in the y-up convention.
    pub fn perp(self) -> Self {
        Self::new(self.dy, -self.dx)
    }

    pub fn cast<U: Scalar>(self) -> Vector2<U> {
        Vector2::new(U::of(self.dx.as_f64()), U::of(self.dy.as_f64()))
    }
}

impl<T: Scalar> Sub for Point2<T> {
    type Output = Vector2<T>;
    fn sub(self, rhs: Self) -> Vector2<T> {
        Vector2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Scalar> Add<Vector2<T>> for Point2<T> {
    type Output = Point2<T>;
    fn add(self, rhs: Vector2<T>) -> Point2<T> {
        Point2::new(self.x + rhs.dx, self.y + rhs.dy)
    }
}

impl<T: Scalar> Sub<Vector2<T>> for Point2<T> {
    type Output = Point2<T>;
    fn sub(self, rhs: Vector2<T>) -> Point2<T> {
        Point2::new(self.x - rhs.dx, self.y - rhs.dy)
    }
}

impl<T: Scalar> Add for Vector2<T> {
    type Output = Vector2<T>;
    fn add(self, rhs: Self) -> Self {
        Vector2::new(self.dx + rhs.dx, self.dy + rhs.dy)
    }
}

impl<T: Scalar> Sub for Vector2<T> {
    type Output = Vector2<T>;
    fn sub(self, rhs: Self) -> Self {
        Vector2::new(self.dx - rhs.dx, self.dy - rhs.dy)
    }
}

impl<T: Scalar> Mul<T> for Vector2<T> {
    type Output = Vector2<T>;
    fn mul(self, rhs: T) -> Self {
        Vector2::new(self.dx * rhs, self.dy * rhs)
    }
}

/// Folds an angle in degrees into `[0, period)`.
pub fn fold_deg<T: Scalar>(deg: T, period: T) -> T {
    let r = deg % period;
    let r = if r < T::zero() { r + period } else { r };
    if r >= period { T::zero() } else { r }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orientation_round_trip() {
        for deg in [0.0_f64, 30.0, 90.0, 135.0, 179.0, -45.0] {
            let v = Vector2::from_orientation_deg(deg);
            assert!((v.orientation_deg() - deg).abs() < 1e-9, "{deg}");
        }
    }

    #[test]
    fn up_is_negative_y() {
        let v = Vector2::<f64>::from_orientation_deg(90.0);
        assert!(v.dx.abs() < 1e-12 && (v.dy + 1.0).abs() < 1e-12);
    }

    #[test]
    fn fold_wraps_into_range() {
        assert_eq!(fold_deg(-30.0_f64, 180.0), 150.0);
        assert_eq!(fold_deg(180.0_f64, 180.0), 0.0);
        assert_eq!(fold_deg(-180.0_f32, 180.0), 0.0);
        assert_eq!(fold_deg(390.0_f64, 180.0), 30.0);
    }

    #[test]
    fn reflection() {
        let p = Point2::new(1.0_f64, 2.0);
        let c = Point2::new(3.0, 3.0);
        assert_eq!(p.reflect_through(c), Point2::new(5.0, 4.0));
    }
}
