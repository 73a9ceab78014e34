//! Position, thrust/attitude and attitude-rate control of the UAM.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spatial::{psi_matrix, EulerAngles, RotationMatrix, Vec3};

const ASIN_LIMIT: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UamGains {
    /// Diagonal position gain (1/s^2).
    pub kp: Vec3,
    /// Diagonal velocity gain (1/s).
    pub kd: Vec3,
    /// Diagonal attitude gain (1/s).
    pub kr: Vec3,
    /// Nominal mass (kg).
    pub mass: f64,
    /// Nominal gravity (m/s^2).
    pub gravity: f64,
    /// Magnitude limit on desired roll and pitch (rad).
    pub tilt_limit: f64,
    /// Thrust floor (N).
    pub min_thrust: f64,
}

impl Default for UamGains {
    fn default() -> Self {
        Self {
            kp: Vec3::new(4.00, 4.00, 8.00),
            kd: Vec3::new(3.00, 3.00, 4.80),
            kr: Vec3::new(12.0, 12.0, 10.0),
            mass: 2.50,
            gravity: 9.81,
            tilt_limit: 0.5,
            min_thrust: 0.1,
        }
    }
}

impl UamGains {
    pub fn validate(&self) -> std::result::Result<(), String> {
        let all_pos = |v: &Vec3| v.iter().all(|x| x.is_finite() && *x > 0.0);
        if !(all_pos(&self.kp) && all_pos(&self.kd) && all_pos(&self.kr)) {
            return Err("UAM gains must be positive definite".into());
        }
        if !(self.mass > 0.0 && self.gravity > 0.0 && self.min_thrust > 0.0) {
            return Err("UAM nominal mass, gravity and thrust floor must be positive".into());
        }
        if !(self.tilt_limit > 0.0 && self.tilt_limit < std::f64::consts::FRAC_PI_2) {
            return Err("UAM tilt limit must lie in (0, pi/2)".into());
        }
        Ok(())
    }
}

/// Desired thrust vector
/// `m (g e3 - Kd (v - v_d) - Kp (p - p_d)) - R_b f_hat_body`.
pub fn position_control(
    gains: &UamGains,
    position: &Vec3,
    velocity: &Vec3,
    position_des: &Vec3,
    velocity_des: &Vec3,
    f_hat_body: &Vec3,
    rot_body: &RotationMatrix,
) -> Vec3 {
    let kp = Matrix3::from_diagonal(&gains.kp);
    let kd = Matrix3::from_diagonal(&gains.kd);
    gains.mass
        * (gains.gravity * Vec3::z()
            - kd * (velocity - velocity_des)
            - kp * (position - position_des))
        - rot_body * f_hat_body
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThrustAttitude {
    pub thrust: f64,
    pub roll: f64,
    pub pitch: f64,
}

/// Total thrust and desired roll/pitch from the desired thrust vector. The
/// current roll and pitch appear in the denominators.
pub fn extract_thrust_attitude(
    gains: &UamGains,
    u_des: &Vec3,
    att: &EulerAngles,
) -> Result<ThrustAttitude> {
    let rotated = psi_matrix(att.yaw) * u_des;
    let c1 = att.roll.cos();
    let c2 = att.pitch.cos();
    let thrust = rotated.z / (c1 * c2);
    if !(thrust >= gains.min_thrust) {
        return Err(Error::DegenerateThrust { thrust });
    }
    let roll = (rotated.y / thrust).clamp(-ASIN_LIMIT, ASIN_LIMIT).asin();
    let pitch = (rotated.x / (thrust * c1)).clamp(-ASIN_LIMIT, ASIN_LIMIT).asin();
    Ok(ThrustAttitude { thrust, roll, pitch })
}

/// Like [`extract_thrust_attitude`] but never fails: the thrust is floored
/// and roll/pitch are clipped to the tilt limit.
pub fn limited_thrust_attitude(
    gains: &UamGains,
    u_des: &Vec3,
    att: &EulerAngles,
) -> ThrustAttitude {
    match extract_thrust_attitude(gains, u_des, att) {
        Ok(mut out) => {
            out.roll = out.roll.clamp(-gains.tilt_limit, gains.tilt_limit);
            out.pitch = out.pitch.clamp(-gains.tilt_limit, gains.tilt_limit);
            out
        }
        Err(_) => ThrustAttitude {
            thrust: gains.min_thrust,
            roll: 0.0,
            pitch: 0.0,
        },
    }
}

pub fn attitude_rate_control(gains: &UamGains, desired: &EulerAngles, att: &EulerAngles) -> Vec3 {
    Matrix3::from_diagonal(&gains.kr) * (desired.to_vector() - att.to_vector())
}
