//! Rotation helpers shared by the plant, controllers and teleoperation code.
//!
//! Attitudes use the ZYX (yaw-pitch-roll) convention: the body-to-world
//! rotation is `Rz(yaw) * Ry(pitch) * Rx(roll)`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type RotationMatrix = Matrix3<f64>;

/// Pitch margin (rad) around +-pi/2 where Euler-rate kinematics are refused.
pub const SINGULARITY_EPS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerAngles {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl EulerAngles {
    pub const fn new(roll: f64, pitch: f64, yaw: f64) -> Self {
        Self { roll, pitch, yaw }
    }

    pub fn from_vector(v: &Vec3) -> Self {
        Self::new(v.x, v.y, v.z)
    }

    pub fn to_vector(self) -> Vec3 {
        Vec3::new(self.roll, self.pitch, self.yaw)
    }

    pub fn is_finite(&self) -> bool {
        self.roll.is_finite() && self.pitch.is_finite() && self.yaw.is_finite()
    }
}

pub fn rot_x(angle: f64) -> RotationMatrix {
    let (s, c) = angle.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rot_y(angle: f64) -> RotationMatrix {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rot_z(yaw: f64) -> RotationMatrix {
    let (s, c) = yaw.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Body-to-world rotation for a ZYX attitude.
pub fn rot_body(att: &EulerAngles) -> RotationMatrix {
    rot_z(att.yaw) * rot_y(att.pitch) * rot_x(att.roll)
}

/// Yaw-dependent matrix mapping the tilt direction `[c1 s2; s1; c1 c2]` onto
/// the world-frame thrust direction.
///
/// Kept exactly as used in the thrust model. It is a reflection
/// (det = -1) and an involution, so applying it twice is the identity.
pub fn psi_matrix(yaw: f64) -> Matrix3<f64> {
    let (s, c) = yaw.sin_cos();
    Matrix3::new(c, s, 0.0, s, -c, 0.0, 0.0, 0.0, 1.0)
}

/// Unit thrust direction before the yaw mapping, `[c1 s2; s1; c1 c2]`.
pub fn tilt_direction(roll: f64, pitch: f64) -> Vec3 {
    let (s1, c1) = roll.sin_cos();
    let (s2, c2) = pitch.sin_cos();
    Vec3::new(c1 * s2, s1, c1 * c2)
}

/// Euler-rate Jacobian `Q(phi)` with `omega = Q(phi) * phi_dot`.
pub fn euler_rate_jacobian(att: &EulerAngles) -> Matrix3<f64> {
    let (s1, c1) = att.roll.sin_cos();
    let (s2, c2) = att.pitch.sin_cos();
    Matrix3::new(1.0, 0.0, -s2, 0.0, c1, s1 * c2, 0.0, -s1, c1 * c2)
}

/// Euler angle rates produced by the body rate `omega`, i.e. `Q(phi)^-1 omega`.
pub fn euler_rates(att: &EulerAngles, omega: &Vec3) -> Result<Vec3> {
    let pitch = att.pitch;
    if !(pitch.abs() < std::f64::consts::FRAC_PI_2 - SINGULARITY_EPS) {
        return Err(Error::SingularAttitude { pitch });
    }
    let (s1, c1) = att.roll.sin_cos();
    let (s2, c2) = pitch.sin_cos();
    let t2 = s2 / c2;
    // Closed-form inverse of Q.
    let roll_rate = omega.x + s1 * t2 * omega.y + c1 * t2 * omega.z;
    let pitch_rate = c1 * omega.y - s1 * omega.z;
    let yaw_rate = (s1 * omega.y + c1 * omega.z) / c2;
    Ok(Vec3::new(roll_rate, pitch_rate, yaw_rate))
}
