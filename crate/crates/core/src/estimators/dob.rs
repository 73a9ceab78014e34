//! Disturbance observer for the external force on the UAM.
//!
//! Two first-order filters track the measured velocity and the applied
//! input; their mismatch is the unmodelled force. Taking `a = Gamma / nu`,
//! the estimate is a first-order low-pass of the true force with pole `a`.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::spatial::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DobParams {
    /// Diagonal of the velocity-filter gain.
    pub gamma_zeta: Vec3,
    /// Diagonal of the input-filter gain.
    pub gamma_chi: Vec3,
    /// Bandwidth divisor, in (0, 1).
    pub nu: f64,
}

impl Default for DobParams {
    fn default() -> Self {
        Self {
            gamma_zeta: Vec3::new(1.0, 1.0, 1.0),
            gamma_chi: Vec3::new(1.0, 1.0, 1.0),
            nu: 0.20,
        }
    }
}

impl DobParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return Err(format!("DOB nu must lie in (0, 1), got {}", self.nu));
        }
        if !self
            .gamma_zeta
            .iter()
            .chain(self.gamma_chi.iter())
            .all(|g| g.is_finite() && *g > 0.0)
        {
            return Err("DOB gains must be positive definite".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DobState {
    /// Filtered velocity (m/s).
    pub zeta: Vec3,
    /// Filtered specific input (m/s^2).
    pub chi: Vec3,
    pub gamma_zeta: Matrix3<f64>,
    pub gamma_chi: Matrix3<f64>,
    pub nu: f64,
    pub mass: f64,
    pub gravity: f64,
}

impl DobState {
    /// Starts the velocity filter at the current velocity and the input
    /// filter at gravity, so a hovering vehicle reads zero force.
    pub fn new(params: &DobParams, mass: f64, gravity: f64, velocity: Vec3) -> Self {
        Self {
            zeta: velocity,
            chi: gravity * Vec3::z(),
            gamma_zeta: Matrix3::from_diagonal(&params.gamma_zeta),
            gamma_chi: Matrix3::from_diagonal(&params.gamma_chi),
            nu: params.nu,
            mass,
            gravity,
        }
    }

    /// Slowest filter pole (1/s).
    pub fn slowest_pole(&self) -> f64 {
        let g = self.gamma_zeta.diagonal().min().min(self.gamma_chi.diagonal().min());
        g / self.nu
    }

    fn estimate(&self, velocity: &Vec3) -> Vec3 {
        -(self.mass / self.nu) * self.gamma_zeta * (self.zeta - velocity)
            + self.mass * self.gravity * Vec3::z()
            - self.mass * self.chi
    }
}

/// Advances both filters by one explicit Euler step and returns the
/// world-frame force estimate. `applied_input` must be the thrust vector
/// actually produced, not the commanded one.
pub fn dob_step(
    state: &DobState,
    velocity: &Vec3,
    applied_input: &Vec3,
    dt: f64,
) -> (DobState, Vec3) {
    let mut next = state.clone();
    let inv_nu = 1.0 / state.nu;
    next.zeta += dt * (-inv_nu * state.gamma_zeta * (state.zeta - velocity));
    next.chi += dt * (-inv_nu * state.gamma_chi * (state.chi - applied_input / state.mass));
    let f_hat = next.estimate(velocity);
    (next, f_hat)
}
