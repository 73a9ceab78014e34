//! Haptic bilateral teleoperation of an aerial manipulator that extracts a
//! wedged object (plug pulling).
//!
//! The crate is split along the control loop:
//!
//! - [`spatial`]: rotations, Euler-rate kinematics and the thrust-direction
//!   matrix used by the multirotor model.
//! - [`plant`]: haptic arm and gripper dynamics, UAM translational dynamics,
//!   attitude/joint servos and the plug-socket breakaway model.
//! - [`estimators`]: disturbance observer for the UAM, momentum observer for
//!   the haptic arm, and the Kalman filter that differentiates the force
//!   estimate.
//! - [`controllers`]: position/attitude control, admittance control of the
//!   haptic device, recentering and gripper compliance.
//! - [`teleop`]: haptic-to-UAM reference mapping, extraction detection, the
//!   nominal/recovery phase machine and the minimum-snap recovery solver.
//! - [`sim`]: fixed-step coupled simulation, scripted operator, CSV logs and
//!   metrics.

pub mod controllers;
pub mod error;
pub mod estimators;
pub mod plant;
pub mod sim;
pub mod spatial;
pub mod teleop;

pub use error::{Error, Result};
pub use spatial::{EulerAngles, Vec3};
