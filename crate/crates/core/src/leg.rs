//! Planar model of one coaxially driven four-bar parallelogram leg.
//!
//! Both shoulder actuators rotate about the same axis, so the two joint
//! variables are *absolute* link angles and the parallelogram reduces to an
//! equivalent two-link chain: foot = upper*(cos q1, sin q1) + lower*(cos q2,
//! sin q2) in the shoulder frame (x forward, z up).

use crate::planar::wrap_angle;
use nalgebra::{Matrix2, Vector2};
use thiserror::Error;

/// Exact-tie tolerance for the stretched-singular configuration. Targets on
/// the outer annulus boundary itself resolve to q1 = q2; anything else inside
/// the boundary margin is rejected.
const SINGULAR_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleRange {
    pub min: f64,
    pub max: f64,
}

impl AngleRange {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn from_degrees(min: f64, max: f64) -> Self {
        Self::new(min.to_radians(), max.to_radians())
    }

    pub fn contains(&self, angle: f64) -> bool {
        angle >= self.min && angle <= self.max
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }
}

/// Geometry and limits of one leg.
#[derive(Debug, Clone, PartialEq)]
pub struct LegGeometry {
    /// Upper link length [m].
    pub upper_len: f64,
    /// Lower link length [m].
    pub lower_len: f64,
    /// Shoulder pivot position in the body frame, (x forward, z up) [m].
    pub shoulder_offset: Vector2<f64>,
    pub q1_range: AngleRange,
    pub q2_range: AngleRange,
    /// Rest angles where the mechanical bump stops carry the body.
    pub bump_stop_angles: (f64, f64),
    /// Wheel radius [m].
    pub wheel_radius: f64,
    /// Operational guard keeping the parallelogram away from flat collapse:
    /// |q1 - q2| must stay at or above this, except at the exact stretch tie.
    pub min_separation: f64,
    /// Targets closer than this to the reachability annulus boundary are
    /// rejected so the Jacobian stays well conditioned.
    pub boundary_margin: f64,
}

impl LegGeometry {
    /// Two-link geometry with all limit fields defaulted; bump stops are set
    /// to the joint angles that rest the foot at `rest_depth` below the
    /// shoulder.
    pub fn with_lengths(upper_len: f64, lower_len: f64) -> Self {
        let mut geom = Self {
            upper_len,
            lower_len,
            shoulder_offset: Vector2::zeros(),
            q1_range: AngleRange::from_degrees(-170.0, -10.0),
            q2_range: AngleRange::from_degrees(-170.0, -10.0),
            bump_stop_angles: (-90f64.to_radians(), -90f64.to_radians()),
            wheel_radius: 0.14,
            min_separation: 5f64.to_radians(),
            boundary_margin: 0.002,
        };
        // Rest pose at the minimum rolling height (0.6 m) minus wheel radius.
        let rest_depth = 0.6 - geom.wheel_radius;
        if let Ok(rest) = inverse_kinematics(&geom, Vector2::new(0.0, -rest_depth)) {
            geom.bump_stop_angles = (rest.q1, rest.q2);
        }
        geom
    }

    pub fn reach_outer(&self) -> f64 {
        self.upper_len + self.lower_len
    }

    pub fn reach_inner(&self) -> f64 {
        (self.upper_len - self.lower_len).abs()
    }

    pub fn validate(&self) -> Result<(), LegError> {
        let fail = |msg: String| Err(LegError::InvalidGeometry(msg));
        if !(self.upper_len > 0.0) || !(self.lower_len > 0.0) {
            return fail(format!(
                "link lengths must be positive, got {} / {}",
                self.upper_len, self.lower_len
            ));
        }
        if !(self.wheel_radius > 0.0) {
            return fail(format!("wheel radius must be positive, got {}", self.wheel_radius));
        }
        for (name, range) in [("q1", self.q1_range), ("q2", self.q2_range)] {
            if !(range.min < range.max) {
                return fail(format!("{name} range is empty: [{}, {}]", range.min, range.max));
            }
            if range.min <= -std::f64::consts::PI || range.max > std::f64::consts::PI {
                return fail(format!("{name} range must lie within (-pi, pi]"));
            }
        }
        if !self.q1_range.contains(self.bump_stop_angles.0)
            || !self.q2_range.contains(self.bump_stop_angles.1)
        {
            return fail("bump stop angles fall outside joint ranges".to_string());
        }
        if self.min_separation < 0.0 || self.boundary_margin < 0.0 {
            return fail("guard values must be non-negative".to_string());
        }
        Ok(())
    }
}

impl Default for LegGeometry {
    fn default() -> Self {
        Self::with_lengths(0.40, 0.35)
    }
}

/// Absolute joint angles and rates of the two driven links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointState {
    pub q1: f64,
    pub q2: f64,
    pub dq1: f64,
    pub dq2: f64,
}

impl JointState {
    pub fn new(q1: f64, q2: f64) -> Self {
        Self {
            q1,
            q2,
            dq1: 0.0,
            dq2: 0.0,
        }
    }
}

/// Force applied at the foot in the leg's sagittal plane [N].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FootForce {
    pub fx: f64,
    pub fz: f64,
}

impl FootForce {
    pub fn new(fx: f64, fz: f64) -> Self {
        Self { fx, fz }
    }

    pub fn vertical(fz: f64) -> Self {
        Self { fx: 0.0, fz }
    }
}

/// Rectangular grid of required foot positions in the shoulder frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RomSpec {
    pub x_range: (f64, f64),
    pub z_range: (f64, f64),
    /// Grid pitch [m].
    pub resolution: f64,
}

impl RomSpec {
    pub fn new(x_range: (f64, f64), z_range: (f64, f64), resolution: f64) -> Self {
        Self {
            x_range,
            z_range,
            resolution,
        }
    }

    fn axis_points(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| lo + i as f64 * step).collect()
    }

    /// All grid points, x-major then z, in deterministic order.
    pub fn grid_points(&self) -> Vec<Vector2<f64>> {
        let xs = Self::axis_points(self.x_range.0, self.x_range.1, self.resolution);
        let zs = Self::axis_points(self.z_range.0, self.z_range.1, self.resolution);
        let mut pts = Vec::with_capacity(xs.len() * zs.len());
        for &x in &xs {
            for &z in &zs {
                pts.push(Vector2::new(x, z));
            }
        }
        pts
    }

    pub fn validate(&self) -> Result<(), LegError> {
        if !(self.resolution > 0.0) {
            return Err(LegError::InvalidGeometry(format!(
                "RoM resolution must be positive, got {}",
                self.resolution
            )));
        }
        if self.x_range.1 < self.x_range.0 || self.z_range.1 < self.z_range.0 {
            return Err(LegError::InvalidGeometry("RoM ranges are empty".to_string()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LegError {
    #[error("target ({x:.4}, {z:.4}) m outside reachable annulus [{inner:.4}, {outer:.4}] m")]
    Unreachable {
        x: f64,
        z: f64,
        inner: f64,
        outer: f64,
    },
    #[error("joint state q1={q1_deg:.2} deg, q2={q2_deg:.2} deg violates joint limits")]
    OutsideLimits { q1_deg: f64, q2_deg: f64 },
    #[error("invalid leg geometry: {0}")]
    InvalidGeometry(String),
}

/// Reachability classification of a foot target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RomVerdict {
    ReachableWithinLimits,
    ReachableOutsideLimits,
    Unreachable,
}

fn check_limits(geom: &LegGeometry, joints: &JointState) -> Result<(), LegError> {
    if geom.q1_range.contains(joints.q1) && geom.q2_range.contains(joints.q2) {
        Ok(())
    } else {
        Err(LegError::OutsideLimits {
            q1_deg: joints.q1.to_degrees(),
            q2_deg: joints.q2.to_degrees(),
        })
    }
}

/// Foot position in the shoulder frame from absolute joint angles.
pub fn forward_kinematics(geom: &LegGeometry, joints: &JointState) -> Result<Vector2<f64>, LegError> {
    check_limits(geom, joints)?;
    Ok(Vector2::new(
        geom.upper_len * joints.q1.cos() + geom.lower_len * joints.q2.cos(),
        geom.upper_len * joints.q1.sin() + geom.lower_len * joints.q2.sin(),
    ))
}

/// Joint angles reaching `target`, knee-backward branch.
///
/// Of the two elbow solutions the one with the knee trailing the
/// shoulder-to-foot ray (clockwise offset) is returned. A target exactly on
/// the outer boundary resolves to the stretched tie q1 = q2.
pub fn inverse_kinematics(geom: &LegGeometry, target: Vector2<f64>) -> Result<JointState, LegError> {
    let r = target.norm();
    let outer = geom.reach_outer();
    let inner = geom.reach_inner();
    let unreachable = || LegError::Unreachable {
        x: target.x,
        z: target.y,
        inner,
        outer,
    };

    if (r - outer).abs() <= SINGULAR_TIE_TOL {
        let q = wrap_angle(target.y.atan2(target.x));
        let joints = JointState::new(q, q);
        check_limits(geom, &joints)?;
        return Ok(joints);
    }
    if r > outer - geom.boundary_margin || r < inner + geom.boundary_margin {
        return Err(unreachable());
    }

    let phi = target.y.atan2(target.x);
    let cos_beta = (geom.upper_len * geom.upper_len + r * r - geom.lower_len * geom.lower_len)
        / (2.0 * geom.upper_len * r);
    let beta = cos_beta.clamp(-1.0, 1.0).acos();

    let q1 = wrap_angle(phi - beta);
    let elbow = Vector2::new(geom.upper_len * q1.cos(), geom.upper_len * q1.sin());
    let shin = target - elbow;
    let q2 = wrap_angle(shin.y.atan2(shin.x));

    let joints = JointState::new(q1, q2);
    check_limits(geom, &joints)?;
    if wrap_angle(q1 - q2).abs() < geom.min_separation {
        return Err(LegError::OutsideLimits {
            q1_deg: q1.to_degrees(),
            q2_deg: q2.to_degrees(),
        });
    }
    Ok(joints)
}

/// Analytic foot-position Jacobian d p / d q [m/rad].
pub fn jacobian(geom: &LegGeometry, joints: &JointState) -> Result<Matrix2<f64>, LegError> {
    check_limits(geom, joints)?;
    Ok(Matrix2::new(
        -geom.upper_len * joints.q1.sin(),
        -geom.lower_len * joints.q2.sin(),
        geom.upper_len * joints.q1.cos(),
        geom.lower_len * joints.q2.cos(),
    ))
}

/// Actuator torques holding `force` at the foot in quasi-static equilibrium:
/// tau = J^T F.
pub fn static_torques(
    geom: &LegGeometry,
    joints: &JointState,
    force: &FootForce,
) -> Result<(f64, f64), LegError> {
    let j = jacobian(geom, joints)?;
    let f = Vector2::new(force.fx, force.fz);
    let tau = j.transpose() * f;
    Ok((tau.x, tau.y))
}

/// Classify a foot target consistently with `inverse_kinematics`.
pub fn in_rom(geom: &LegGeometry, target: Vector2<f64>) -> RomVerdict {
    match inverse_kinematics(geom, target) {
        Ok(_) => RomVerdict::ReachableWithinLimits,
        Err(LegError::OutsideLimits { .. }) => RomVerdict::ReachableOutsideLimits,
        Err(_) => RomVerdict::Unreachable,
    }
}

/// Rest pose on the mechanical bump stops, zero velocity.
pub fn bump_stop_pose(geom: &LegGeometry) -> JointState {
    JointState::new(geom.bump_stop_angles.0, geom.bump_stop_angles.1)
}
