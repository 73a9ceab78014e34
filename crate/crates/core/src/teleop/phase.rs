//! Extraction detection and the nominal/recovery phase machine.

use crate::spatial::Vec3;
use crate::teleop::mapping::TeleopParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Nominal,
    Recovery,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Nominal => "NOMINAL",
            Phase::Recovery => "RECOVERY",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "NOMINAL" => Some(Phase::Nominal),
            "RECOVERY" => Some(Phase::Recovery),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseEvent {
    EnterRecovery,
    ExitRecovery,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub phase: Phase,
    /// Extraction instant (s).
    pub t_e: f64,
    pub p_e: Vec3,
    pub v_e: Vec3,
    /// Gripper angle held during recovery.
    pub frozen_grip: f64,
    pub recovery_duration: f64,
    pub armed: bool,
    /// Start of the current run of the arming condition.
    pub arming_since: Option<f64>,
}

impl PhaseState {
    pub fn new(recovery_duration: f64) -> Self {
        Self {
            phase: Phase::Nominal,
            t_e: 0.0,
            p_e: Vec3::zeros(),
            v_e: Vec3::zeros(),
            frozen_grip: 0.0,
            recovery_duration,
            armed: false,
            arming_since: None,
        }
    }

    /// Arms once the gripper is closed and the estimated force has stayed
    /// above the arming level for the debounce window.
    pub fn update_arming(&mut self, params: &TeleopParams, f_hat: &Vec3, grip_closed: bool, t: f64) {
        if self.phase == Phase::Recovery {
            self.armed = false;
            self.arming_since = None;
            return;
        }
        if grip_closed && f_hat.norm() > params.arming_force {
            let since = *self.arming_since.get_or_insert(t);
            self.armed = t - since >= params.arming_debounce - 1e-12;
        } else {
            self.arming_since = None;
            self.armed = false;
        }
    }
}

/// `threshold <= |f_dot|`, gated by the arming and decreasing-force guards
/// when they are enabled. Never fires outside nominal flight.
pub fn detect_extraction(
    params: &TeleopParams,
    phase: &PhaseState,
    f_dot: &Vec3,
    f_hat: &Vec3,
    grip_closed: bool,
) -> bool {
    if phase.phase != Phase::Nominal {
        return false;
    }
    if f_dot.norm() < params.force_rate_threshold {
        return false;
    }
    if params.arming_guard && !(phase.armed && grip_closed) {
        return false;
    }
    if params.decrease_only && f_hat.dot(f_dot) >= 0.0 {
        return false;
    }
    true
}

/// Advances the phase machine at `t`.
pub fn phase_step(
    state: &PhaseState,
    detection: bool,
    t: f64,
    position: &Vec3,
    velocity: &Vec3,
    grip: f64,
) -> (PhaseState, Option<PhaseEvent>) {
    let mut next = *state;
    match state.phase {
        Phase::Nominal if detection => {
            next.phase = Phase::Recovery;
            next.t_e = t;
            next.p_e = *position;
            next.v_e = *velocity;
            next.frozen_grip = grip;
            next.armed = false;
            next.arming_since = None;
            (next, Some(PhaseEvent::EnterRecovery))
        }
        Phase::Recovery if t >= state.t_e + state.recovery_duration - 1e-9 => {
            next.phase = Phase::Nominal;
            (next, Some(PhaseEvent::ExitRecovery))
        }
        _ => (next, None),
    }
}
