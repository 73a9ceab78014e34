//! Per-axis constant-derivative Kalman filter used to differentiate the
//! force estimate.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::spatial::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KfParams {
    /// White-noise intensity on the force derivative (N^2/s^3).
    pub process_noise: f64,
    /// Measurement noise variance on the force (N^2).
    pub measurement_noise: f64,
    /// Initial variance of both state components.
    pub initial_variance: f64,
}

impl Default for KfParams {
    fn default() -> Self {
        Self {
            process_noise: 100.0,
            measurement_noise: 0.01,
            initial_variance: 1.0,
        }
    }
}

impl KfParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.process_noise > 0.0 && self.measurement_noise > 0.0 && self.initial_variance >= 0.0)
        {
            return Err("Kalman filter noise parameters must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisFilter {
    /// (force, force rate)
    pub x: Vector2<f64>,
    pub p: Matrix2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForceDerivativeKf {
    pub axes: [AxisFilter; 3],
    pub process_noise: f64,
    pub measurement_noise: f64,
}

impl ForceDerivativeKf {
    pub fn new(params: &KfParams, initial_force: Vec3) -> Self {
        let axis = |f: f64| AxisFilter {
            x: Vector2::new(f, 0.0),
            p: Matrix2::identity() * params.initial_variance,
        };
        Self {
            axes: [axis(initial_force.x), axis(initial_force.y), axis(initial_force.z)],
            process_noise: params.process_noise,
            measurement_noise: params.measurement_noise,
        }
    }

    pub fn rate(&self) -> Vec3 {
        Vec3::new(self.axes[0].x[1], self.axes[1].x[1], self.axes[2].x[1])
    }
}

impl AxisFilter {
    fn step(&mut self, z: f64, dt: f64, q: f64, r: f64) {
        let f = Matrix2::new(1.0, dt, 0.0, 1.0);
        let qd = q * Matrix2::new(dt.powi(3) / 3.0, dt * dt / 2.0, dt * dt / 2.0, dt);
        let x_pred = f * self.x;
        let p_pred = f * self.p * f.transpose() + qd;

        let s = p_pred[(0, 0)] + r;
        let k = Vector2::new(p_pred[(0, 0)] / s, p_pred[(1, 0)] / s);
        self.x = x_pred + k * (z - x_pred[0]);

        // Joseph form keeps P symmetric positive semidefinite.
        let i_kh = Matrix2::new(1.0 - k[0], 0.0, -k[1], 1.0);
        let p = i_kh * p_pred * i_kh.transpose() + k * k.transpose() * r;
        self.p = 0.5 * (p + p.transpose());
    }
}

/// Feeds one force sample per axis and returns the filtered force rate.
pub fn kf_derivative_step(
    state: &ForceDerivativeKf,
    force: &Vec3,
    dt: f64,
) -> (ForceDerivativeKf, Vec3) {
    let mut next = state.clone();
    for (axis, z) in next.axes.iter_mut().zip(force.iter()) {
        axis.step(*z, dt, state.process_noise, state.measurement_noise);
    }
    let rate = next.rate();
    (next, rate)
}
