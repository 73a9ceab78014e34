//! Spring-breakaway model of a plug wedged in a socket.
//!
//! Once grasped, the plug ties the tool point to the grip point through a
//! spring-damper. When the spring tension along the wedge axis exceeds the
//! breakaway force the plug releases and the force decays exponentially
//! from its value at the release instant.

use serde::{Deserialize, Serialize};

use crate::spatial::{RotationMatrix, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AttachState {
    Free,
    Grasped,
    Extracted,
}

impl AttachState {
    pub fn as_str(self) -> &'static str {
        match self {
            AttachState::Free => "FREE",
            AttachState::Grasped => "GRASPED",
            AttachState::Extracted => "EXTRACTED",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "FREE" => Some(AttachState::Free),
            "GRASPED" => Some(AttachState::Grasped),
            "EXTRACTED" => Some(AttachState::Extracted),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlugParams {
    /// Socket point in the world frame (m).
    pub anchor: Vec3,
    /// Extraction direction, normalised on use.
    pub wedge_axis: Vec3,
    pub stiffness: f64,
    pub damping: f64,
    pub break_force: f64,
    pub release_time_constant: f64,
    pub capture_radius: f64,
}

impl Default for PlugParams {
    fn default() -> Self {
        Self {
            anchor: Vec3::new(0.6, 0.0, 1.45),
            wedge_axis: Vec3::new(-1.0, 1.0, 1.0).normalize(),
            stiffness: 2000.0,
            damping: 20.0,
            break_force: 15.0,
            release_time_constant: 0.01,
            capture_radius: 0.05,
        }
    }
}

impl PlugParams {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            self.stiffness,
            self.damping,
            self.break_force,
            self.release_time_constant,
            self.capture_radius,
        ];
        if !positive.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err("plug stiffness, damping, break force, release time and capture radius must be positive".into());
        }
        if !(self.wedge_axis.norm() > 1e-9) {
            return Err("plug wedge axis must be non-zero".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlugAttachment {
    pub state: AttachState,
    pub anchor: Vec3,
    pub wedge_axis: Vec3,
    pub stiffness: f64,
    pub damping: f64,
    pub break_force: f64,
    pub release_time_constant: f64,
    pub capture_radius: f64,
    /// Spring rest point, set to the tool position at capture.
    pub hold_point: Vec3,
    pub release_start: Option<f64>,
    /// World-frame force at the release instant.
    pub release_force: Vec3,
}

impl PlugAttachment {
    pub fn new(params: &PlugParams) -> Self {
        Self {
            state: AttachState::Free,
            anchor: params.anchor,
            wedge_axis: params.wedge_axis.normalize(),
            stiffness: params.stiffness,
            damping: params.damping,
            break_force: params.break_force,
            release_time_constant: params.release_time_constant,
            capture_radius: params.capture_radius,
            hold_point: params.anchor,
            release_start: None,
            release_force: Vec3::zeros(),
        }
    }

    fn spring_damper(&self, p_ee: &Vec3, v_ee: &Vec3) -> Vec3 {
        -self.stiffness * (p_ee - self.hold_point) - self.damping * v_ee
    }

    /// Spring pull along the wedge axis.
    pub fn axial_tension(&self, p_ee: &Vec3) -> f64 {
        self.stiffness * (p_ee - self.hold_point).dot(&self.wedge_axis)
    }

    /// World-frame force on the tool point for the current mode.
    pub fn force_world(&self, p_ee: &Vec3, v_ee: &Vec3, t: f64) -> Vec3 {
        match self.state {
            AttachState::Free => Vec3::zeros(),
            AttachState::Grasped => self.spring_damper(p_ee, v_ee),
            AttachState::Extracted => {
                let t0 = self.release_start.unwrap_or(t);
                let elapsed = (t - t0).max(0.0);
                self.release_force * (-elapsed / self.release_time_constant).exp()
            }
        }
    }

    /// Mode transitions at time `t`. Returns true when the plug broke away.
    pub fn update(&mut self, p_ee: &Vec3, v_ee: &Vec3, grip_closed: bool, t: f64) -> bool {
        match self.state {
            AttachState::Free => {
                if grip_closed && (p_ee - self.anchor).norm() < self.capture_radius {
                    self.state = AttachState::Grasped;
                    self.hold_point = *p_ee;
                }
                false
            }
            AttachState::Grasped => {
                if self.axial_tension(p_ee) > self.break_force {
                    self.release_force = self.spring_damper(p_ee, v_ee);
                    self.release_start = Some(t);
                    self.state = AttachState::Extracted;
                    true
                } else {
                    false
                }
            }
            AttachState::Extracted => false,
        }
    }
}

/// Applies transitions at `t` and returns the body-frame force with the
/// updated attachment.
pub fn plug_force(
    attach: &PlugAttachment,
    rot_body: &RotationMatrix,
    p_ee: &Vec3,
    v_ee: &Vec3,
    grip_closed: bool,
    t: f64,
) -> (Vec3, PlugAttachment) {
    let mut next = attach.clone();
    next.update(p_ee, v_ee, grip_closed, t);
    let f_world = next.force_world(p_ee, v_ee, t);
    (rot_body.transpose() * f_world, next)
}
