//! Continuous-time plant models.

pub mod arm;
pub mod gripper;
pub mod plug;
pub mod uam;

pub use arm::{arm_accel, ArmDynamics, HapticArmModel, HapticArmState, Jacobian, Joint4};
pub use gripper::{gripper_accel, GripperParams, GripperState};
pub use plug::{plug_force, AttachState, PlugAttachment, PlugParams};
pub use uam::{
    applied_input, attitude_joint_servo, end_effector_position, end_effector_velocity,
    joint_servo_rate, tool_offset_world, uam_accel, UamParams, UamState,
};
