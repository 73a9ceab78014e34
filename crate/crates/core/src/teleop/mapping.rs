//! Haptic-to-UAM reference mapping used during nominal flight.

use serde::{Deserialize, Serialize};

use crate::plant::Joint4;
use crate::spatial::{rot_z, EulerAngles, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TeleopParams {
    /// Maximum commanded body-frame speed per axis (m/s).
    pub max_speed: Vec3,
    /// Handle displacement giving tanh(1) of the maximum speed, per axis (m).
    pub max_handle_offset: Vec3,
    /// Detection threshold on the force-rate norm (N/s).
    pub force_rate_threshold: f64,
    /// Recovery flight duration (s).
    pub recovery_duration: f64,
    /// Minimum estimated force before detection arms (N).
    pub arming_force: f64,
    /// How long the arming condition must hold (s).
    pub arming_debounce: f64,
    /// Require a closed gripper and a sustained pull before detecting.
    pub arming_guard: bool,
    /// Only fire while the estimated force magnitude is falling.
    pub decrease_only: bool,
}

impl Default for TeleopParams {
    fn default() -> Self {
        Self {
            max_speed: Vec3::new(0.4, 0.4, 0.4),
            max_handle_offset: Vec3::new(0.2, 0.2, 0.2),
            force_rate_threshold: 7.50,
            recovery_duration: 5.0,
            arming_force: 3.0,
            arming_debounce: 0.1,
            arming_guard: true,
            decrease_only: true,
        }
    }
}

impl TeleopParams {
    pub fn validate(&self) -> Result<(), String> {
        let pos = |v: &Vec3| v.iter().all(|x| x.is_finite() && *x > 0.0);
        if !(pos(&self.max_speed) && pos(&self.max_handle_offset)) {
            return Err("teleop speed and handle limits must be positive".into());
        }
        if !(self.force_rate_threshold > 0.0
            && self.recovery_duration > 0.0
            && self.arming_force > 0.0
            && self.arming_debounce >= 0.0)
        {
            return Err("teleop detection and recovery parameters must be positive".into());
        }
        Ok(())
    }
}

/// Body-frame velocity command `v_max * tanh(p_H / p_H_max)` per axis.
pub fn velocity_mapping(params: &TeleopParams, handle_offset: &Vec3) -> Vec3 {
    Vec3::from_fn(|i, _| {
        params.max_speed[i] * (handle_offset[i] / params.max_handle_offset[i]).tanh()
    })
}

/// Position reference integrated from the velocity command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceIntegrator {
    pub position: Vec3,
    pub velocity: Vec3,
}

impl ReferenceIntegrator {
    pub fn new(start: Vec3) -> Self {
        Self {
            position: start,
            velocity: Vec3::zeros(),
        }
    }
}

/// Rotates the body command by yaw and advances the position reference by
/// trapezoidal integration.
pub fn integrate_reference(
    reference: &ReferenceIntegrator,
    velocity_body: &Vec3,
    yaw: f64,
    dt: f64,
) -> ReferenceIntegrator {
    let velocity = rot_z(yaw) * velocity_body;
    ReferenceIntegrator {
        position: reference.position + 0.5 * dt * (reference.velocity + velocity),
        velocity,
    }
}

/// Arm joint targets that keep the tool level and pass the gripper through.
pub fn desired_joint_angles(att: &EulerAngles, grip: f64) -> Vec3 {
    Vec3::new(-att.roll, -att.pitch, grip)
}

/// Joint-rate command returning the haptic arm to its home pose.
pub fn haptic_recovery_rate(gains: &Joint4, theta: &Joint4, theta0: &Joint4) -> Joint4 {
    -gains.component_mul(&(theta - theta0))
}
