//! Feedback laws for the UAM and the haptic device.

pub mod haptic;
pub mod uam;

pub use haptic::{
    admittance_step, admittance_torque, arm_joint_servo, gain_matrix, gripper_compliance_step,
    recentering_torque, AdmittanceGains, HapticSetpoint, ServoGains,
};
pub use uam::{
    attitude_rate_control, extract_thrust_attitude, limited_thrust_attitude, position_control,
    ThrustAttitude, UamGains,
};
