//! Admittance control, recentering and gripper compliance for the haptic
//! device, plus the inner joint servo that tracks the admittance setpoint.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::plant::{Jacobian, Joint4};
use crate::spatial::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdmittanceGains {
    /// Diagonal of the desired inertia.
    pub inertia: Joint4,
    /// Diagonal of the desired damping.
    pub damping: Joint4,
    /// Diagonal of the momentum-observer gain.
    pub observer_gain: Joint4,
    /// Diagonal of the recentering stiffness.
    pub recentering: Joint4,
    /// Diagonal of the recovery-phase return rate.
    pub recovery: Joint4,
    pub grip_damping: f64,
    pub grip_recentering: f64,
    pub grip_torque_gain: f64,
    /// Scale on the estimated UAM force before it is reflected to the arm.
    pub force_reflection_scale: f64,
}

impl Default for AdmittanceGains {
    fn default() -> Self {
        Self {
            inertia: Joint4::new(0.20, 0.20, 0.20, 0.20),
            damping: Joint4::new(0.10, 0.50, 0.10, 0.10),
            observer_gain: Joint4::new(30.0, 30.0, 30.0, 30.0),
            recentering: Joint4::new(3.00, 1.00, 7.50, 7.50),
            recovery: Joint4::new(6.00, 2.00, 15.0, 15.0),
            grip_damping: 0.50,
            grip_recentering: 8.00,
            grip_torque_gain: 15.0,
            force_reflection_scale: 0.25,
        }
    }
}

impl AdmittanceGains {
    pub fn validate(&self) -> Result<(), String> {
        let pd = |v: &Joint4| v.iter().all(|x| x.is_finite() && *x > 0.0);
        if ![
            &self.inertia,
            &self.damping,
            &self.observer_gain,
            &self.recentering,
            &self.recovery,
        ]
        .iter()
        .all(|v| pd(v))
        {
            return Err("haptic gain matrices must be positive definite".into());
        }
        if !(self.grip_damping > 0.0 && self.grip_recentering > 0.0 && self.grip_torque_gain > 0.0)
        {
            return Err("gripper compliance gains must be positive".into());
        }
        if !(self.force_reflection_scale.is_finite() && self.force_reflection_scale >= 0.0) {
            return Err("force reflection scale must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServoGains {
    pub kp: f64,
    pub kd: f64,
}

impl Default for ServoGains {
    fn default() -> Self {
        Self { kp: 50.0, kd: 5.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HapticSetpoint {
    pub theta: Joint4,
    pub theta_dot: Joint4,
    pub grip: f64,
    pub grip_dot: f64,
}

/// Net admittance torque `tau_hat + tau_fb + J^T (scale * f_hat)`.
pub fn admittance_torque(
    gains: &AdmittanceGains,
    tau_hat: &Joint4,
    tau_fb: &Joint4,
    jacobian: &Jacobian,
    f_hat_body: &Vec3,
) -> Joint4 {
    tau_hat + tau_fb + jacobian.transpose() * (gains.force_reflection_scale * f_hat_body)
}

/// Integrates `M_d th_dd + D_d th_d = tau` one semi-implicit Euler step.
pub fn admittance_step(
    gains: &AdmittanceGains,
    setpoint: &HapticSetpoint,
    tau_hat: &Joint4,
    tau_fb: &Joint4,
    jacobian: &Jacobian,
    f_hat_body: &Vec3,
    dt: f64,
) -> HapticSetpoint {
    let tau = admittance_torque(gains, tau_hat, tau_fb, jacobian, f_hat_body);
    let accel = (tau - gains.damping.component_mul(&setpoint.theta_dot))
        .component_div(&gains.inertia);
    let mut next = *setpoint;
    next.theta_dot += dt * accel;
    next.theta += dt * next.theta_dot;
    next
}

pub fn recentering_torque(gains: &AdmittanceGains, theta: &Joint4, theta0: &Joint4) -> Joint4 {
    -gains.recentering.component_mul(&(theta - theta0))
}

/// Gripper setpoint update driven by the operator's grip torque. Returns
/// `(angle, rate)`.
pub fn gripper_compliance_step(
    gains: &AdmittanceGains,
    grip_des: f64,
    grip_des_rate: f64,
    grip_measured: f64,
    grip_initial: f64,
    grip_torque: f64,
    dt: f64,
) -> (f64, f64) {
    let accel = -gains.grip_damping * grip_des_rate
        - gains.grip_recentering * (grip_measured - grip_initial)
        + gains.grip_torque_gain * grip_torque;
    let rate = grip_des_rate + dt * accel;
    (grip_des + dt * rate, rate)
}

/// PD plus gravity compensation around the admittance setpoint.
pub fn arm_joint_servo(
    gains: &ServoGains,
    theta: &Joint4,
    theta_dot: &Joint4,
    setpoint: &HapticSetpoint,
    gravity: &Joint4,
) -> Joint4 {
    gravity - gains.kp * (theta - setpoint.theta) - gains.kd * (theta_dot - setpoint.theta_dot)
}

pub fn gain_matrix(diag: &Joint4) -> Matrix4<f64> {
    Matrix4::from_diagonal(diag)
}
