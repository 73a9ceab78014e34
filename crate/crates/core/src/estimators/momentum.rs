//! Generalized-momentum observer for the torque the operator applies to the
//! haptic arm.

use nalgebra::Matrix4;

use crate::plant::{ArmDynamics, Joint4};

#[derive(Debug, Clone, PartialEq)]
pub struct MomentumObserverState {
    /// Running integral of `tau_h - C qd - G + tau_hat` (N m s).
    pub integral: Joint4,
    pub estimate: Joint4,
    pub gain: Matrix4<f64>,
    /// `M(q0) qd0` at start.
    pub initial_momentum: Joint4,
}

impl MomentumObserverState {
    pub fn new(gain: Matrix4<f64>, initial_momentum: Joint4) -> Self {
        Self {
            integral: Joint4::zeros(),
            estimate: Joint4::zeros(),
            gain,
            initial_momentum,
        }
    }
}

/// One observer step. `tau_joint` is the joint torque applied over the step.
pub fn momentum_observer_step(
    state: &MomentumObserverState,
    dynamics: &ArmDynamics,
    theta_dot: &Joint4,
    tau_joint: &Joint4,
    dt: f64,
) -> (MomentumObserverState, Joint4) {
    let mut next = state.clone();
    next.integral += dt
        * (tau_joint - dynamics.coriolis * theta_dot - dynamics.gravity + state.estimate);
    let momentum = dynamics.mass * theta_dot;
    next.estimate = state.gain * (momentum - next.integral - state.initial_momentum);
    let est = next.estimate;
    (next, est)
}
