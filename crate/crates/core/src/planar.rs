//! Planar (SE(2)) poses and angle arithmetic shared by every subsystem.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Normalize an angle to the half-open interval (-pi, pi].
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Signed shortest-arc difference `a - b`, wrapped to (-pi, pi].
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}

/// Blend `from` toward `to` along the shortest arc by fraction `alpha`.
pub fn blend_angle(from: f64, to: f64, alpha: f64) -> f64 {
    wrap_angle(from + alpha * angle_diff(to, from))
}

/// Fold an angle difference into (-pi/2, pi/2], treating directions that
/// differ by pi as equivalent. Used for yaw alignment against a box whose
/// lengthwise axis has no preferred sign.
pub fn fold_half_turn(angle: f64) -> f64 {
    let mut a = wrap_angle(angle);
    if a > PI / 2.0 {
        a -= PI;
    } else if a <= -PI / 2.0 {
        a += PI;
    }
    a
}

/// A planar pose: position plus heading, with yaw kept normalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self {
            x,
            y,
            yaw: wrap_angle(yaw),
        }
    }

    pub fn identity() -> Self {
        Self {
            x: 0.0,
            y: 0.0,
            yaw: 0.0,
        }
    }

    pub fn position(&self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }

    /// Rigid composition `self * other`: `other` expressed in `self`'s frame.
    pub fn compose(&self, other: &Pose2D) -> Pose2D {
        let (s, c) = self.yaw.sin_cos();
        Pose2D::new(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.yaw + other.yaw,
        )
    }

    pub fn inverse(&self) -> Pose2D {
        let (s, c) = self.yaw.sin_cos();
        Pose2D::new(
            -(c * self.x + s * self.y),
            -(-s * self.x + c * self.y),
            -self.yaw,
        )
    }

    /// Map a point from this pose's frame into the parent frame.
    pub fn transform_point(&self, p: Vector2<f64>) -> Vector2<f64> {
        let (s, c) = self.yaw.sin_cos();
        Vector2::new(self.x + c * p.x - s * p.y, self.y + s * p.x + c * p.y)
    }

    /// Map a parent-frame point into this pose's frame.
    pub fn inverse_transform_point(&self, p: Vector2<f64>) -> Vector2<f64> {
        let d = p - self.position();
        let (s, c) = self.yaw.sin_cos();
        Vector2::new(c * d.x + s * d.y, -s * d.x + c * d.y)
    }

    /// Advance the pose by a constant body-frame twist over `dt` using the
    /// exact SE(2) exponential, so circular arcs close to machine precision.
    pub fn integrate_twist(&self, vx: f64, vy: f64, wz: f64, dt: f64) -> Pose2D {
        let theta = wz * dt;
        let (dx, dy) = if theta.abs() < 1e-9 {
            // Series expansion of the exponential map near zero curvature.
            let half = 0.5 * theta;
            (vx * dt - half * vy * dt, vy * dt + half * vx * dt)
        } else {
            let s = theta.sin() / theta;
            let c = (1.0 - theta.cos()) / theta;
            (s * vx * dt - c * vy * dt, c * vx * dt + s * vy * dt)
        };
        self.compose(&Pose2D::new(dx, dy, 0.0)).rotated(theta)
    }

    fn rotated(mut self, dyaw: f64) -> Pose2D {
        self.yaw = wrap_angle(self.yaw + dyaw);
        self
    }
}
