use serde::{Deserialize, Serialize};

/// Haptic gripper: a single rotary joint between hard stops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GripperParams {
    /// Servo rotor inertia about the joint axis (kg m^2).
    pub inertia: f64,
    pub angle_open: f64,
    pub angle_closed: f64,
    /// Position servo gains tracking the compliant setpoint.
    pub servo_kp: f64,
    pub servo_kd: f64,
}

impl Default for GripperParams {
    fn default() -> Self {
        Self {
            inertia: 0.01,
            angle_open: 0.0,
            angle_closed: 0.8,
            servo_kp: 2.0,
            servo_kd: 0.2,
        }
    }
}

impl GripperParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.inertia > 0.0 && self.servo_kp > 0.0 && self.servo_kd > 0.0) {
            return Err("gripper inertia and servo gains must be positive".into());
        }
        if !(self.angle_closed > self.angle_open) {
            return Err("gripper closed angle must exceed open angle".into());
        }
        Ok(())
    }

    /// Servo torque toward `setpoint`.
    pub fn servo_torque(&self, state: &GripperState, setpoint: f64, setpoint_rate: f64) -> f64 {
        self.servo_kp * (setpoint - state.angle) + self.servo_kd * (setpoint_rate - state.rate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GripperState {
    pub angle: f64,
    pub rate: f64,
    pub inertia: f64,
}

pub fn gripper_accel(state: &GripperState, torque: f64) -> f64 {
    torque / state.inertia
}
