//! Translational dynamics of the aerial manipulator plus the kinematic
//! attitude and arm-joint servos.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spatial::{
    euler_rates, psi_matrix, rot_body, rot_x, rot_y, tilt_direction, EulerAngles, Vec3,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UamParams {
    /// True total mass (kg).
    pub mass: f64,
    pub gravity: f64,
    /// Tool point relative to the last arm joint, in the end-effector frame (m).
    pub tool_offset: Vec3,
    /// Arm joint speed limit (rad/s).
    pub joint_rate_limit: f64,
    /// First-order time constant of the arm joint servos (s).
    pub joint_time_constant: f64,
}

impl Default for UamParams {
    fn default() -> Self {
        Self {
            mass: 2.5,
            gravity: 9.81,
            tool_offset: Vec3::new(0.35, 0.0, -0.05),
            joint_rate_limit: 4.0,
            joint_time_constant: 0.02,
        }
    }
}

impl UamParams {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.mass > 0.0 && self.gravity > 0.0) {
            return Err("UAM mass and gravity must be positive".into());
        }
        if !(self.joint_rate_limit > 0.0 && self.joint_time_constant > 0.0) {
            return Err("UAM joint servo parameters must be positive".into());
        }
        if !self.tool_offset.iter().all(|v| v.is_finite()) {
            return Err("UAM tool offset must be finite".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UamState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub attitude: EulerAngles,
    /// Arm joints: roll compensation, pitch compensation, gripper.
    pub joints: Vec3,
    pub mass: f64,
    pub gravity: f64,
}

impl UamState {
    pub fn hover(position: Vec3, params: &UamParams) -> Self {
        Self {
            position,
            velocity: Vec3::zeros(),
            attitude: EulerAngles::default(),
            joints: Vec3::zeros(),
            mass: params.mass,
            gravity: params.gravity,
        }
    }
}

/// World-frame thrust vector `F * Psi(yaw) * [c1 s2; s1; c1 c2]`.
pub fn applied_input(thrust: f64, att: &EulerAngles) -> Vec3 {
    thrust * psi_matrix(att.yaw) * tilt_direction(att.roll, att.pitch)
}

/// `p_ddot = -g e3 + (u_c + R_b f_ae) / m`, with `f_ae` in the body frame.
pub fn uam_accel(state: &UamState, thrust: f64, f_ae_body: &Vec3) -> Vec3 {
    let u = applied_input(thrust, &state.attitude);
    let f_world = rot_body(&state.attitude) * f_ae_body;
    -state.gravity * Vec3::z() + (u + f_world) / state.mass
}

/// Joint velocity of the rate-limited first-order arm servo.
///
/// `time_constant` is floored at `dt` for discrete stepping so a step never
/// passes the setpoint.
pub fn joint_servo_rate(
    joints: &Vec3,
    target: &Vec3,
    rate_limit: f64,
    time_constant: f64,
) -> Vec3 {
    (target - joints).map(|e| (e / time_constant).clamp(-rate_limit, rate_limit))
}

/// One explicit step of the attitude kinematics and the arm joint servo.
pub fn attitude_joint_servo(
    state: &UamState,
    params: &UamParams,
    omega_des: &Vec3,
    joints_des: &Vec3,
    dt: f64,
) -> Result<UamState> {
    let rates = euler_rates(&state.attitude, omega_des)?;
    let mut next = *state;
    next.attitude = EulerAngles::from_vector(&(state.attitude.to_vector() + dt * rates));
    let tau = params.joint_time_constant.max(dt);
    next.joints += dt * joint_servo_rate(&state.joints, joints_des, params.joint_rate_limit, tau);
    Ok(next)
}

/// World-frame offset from the centre of mass to the tool point.
pub fn tool_offset_world(att: &EulerAngles, joints: &Vec3, tool_offset: &Vec3) -> Vec3 {
    rot_body(att) * rot_x(joints.x) * rot_y(joints.y) * tool_offset
}

pub fn end_effector_position(state: &UamState, tool_offset: &Vec3) -> Vec3 {
    state.position + tool_offset_world(&state.attitude, &state.joints, tool_offset)
}

/// Tool-point velocity given the attitude and joint rates.
pub fn end_effector_velocity(
    state: &UamState,
    tool_offset: &Vec3,
    attitude_rates: &Vec3,
    joint_rates: &Vec3,
) -> Vec3 {
    let h = 1e-6;
    let att = state.attitude.to_vector();
    let plus = tool_offset_world(
        &EulerAngles::from_vector(&(att + h * attitude_rates)),
        &(state.joints + h * joint_rates),
        tool_offset,
    );
    let minus = tool_offset_world(
        &EulerAngles::from_vector(&(att - h * attitude_rates)),
        &(state.joints - h * joint_rates),
        tool_offset,
    );
    state.velocity + (plus - minus) / (2.0 * h)
}
