//! Teleoperation logic: reference mapping, extraction detection, phase
//! switching and recovery trajectories.

pub mod mapping;
pub mod minsnap;
pub mod phase;

pub use mapping::{
    desired_joint_angles, haptic_recovery_rate, integrate_reference, velocity_mapping,
    ReferenceIntegrator, TeleopParams,
};
pub use minsnap::{minsnap_eval, minsnap_solve, RecoveryTrajectory};
pub use phase::{detect_extraction, phase_step, Phase, PhaseEvent, PhaseState};
