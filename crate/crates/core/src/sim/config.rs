//! Scenario configuration. Every field has a default, so `{}` is a valid
//! config and any subset of fields can be overridden from JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::controllers::{AdmittanceGains, ServoGains, UamGains};
use crate::error::{Error, Result};
use crate::estimators::{DobParams, KfParams};
use crate::plant::{GripperParams, HapticArmModel, Joint4, PlugParams, UamParams};
use crate::spatial::Vec3;
use crate::teleop::TeleopParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Teleoperation only; detection and recovery are disabled.
    Baseline,
    /// Detection plus autonomous recovery flight.
    Proposed,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::Proposed => "proposed",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Mode::Baseline),
            "proposed" => Ok(Mode::Proposed),
            other => Err(format!("unknown mode {other:?} (expected baseline or proposed)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorParams {
    /// Disable to get an operator that never touches the device.
    pub enabled: bool,
    /// Delay between the true separation and the operator's reaction (s).
    pub reaction_time: f64,
    /// First-order time constant of the hand force (s).
    pub hand_time_constant: f64,
    /// Pull direction on the handle (haptic base frame), normalised on use.
    pub pull_direction: Vec3,
    /// Steady pull force on the handle (N).
    pub pull_force: f64,
    /// Hand stiffness while steering the handle (N/m).
    pub hand_stiffness: f64,
    /// Hand damping, active whenever the hand is on the handle (N s/m).
    pub hand_damping: f64,
    /// Handle offset per metre of tool-point error during approach (m/m).
    pub approach_gain: f64,
    /// Largest handle offset the operator commands during approach (m).
    pub approach_max_offset: f64,
    /// Tool-point targets visited before the socket (world frame, m).
    pub approach_waypoints: Vec<Vec3>,
    /// Distance at which a waypoint counts as reached (m).
    pub approach_tolerance: f64,
    /// Time the tool must stay within tolerance of the socket (s).
    pub approach_settle: f64,
    /// Grip torque held once the gripper is closed (N m).
    pub grip_torque: f64,
    /// Damping of the fingers on the haptic gripper (N m s/rad).
    pub grip_damping: f64,
    /// Ramp time of the grip torque (s).
    pub grip_ramp: f64,
    /// Pause between a confirmed grasp and the start of the pull (s).
    pub grasp_hold: f64,
    /// Time spent in REACT before letting go of the device (s).
    pub release_after: f64,
    /// Relative amplitude of the seeded perturbations.
    pub variation: f64,
}

impl Default for OperatorParams {
    fn default() -> Self {
        Self {
            enabled: true,
            reaction_time: 0.4,
            hand_time_constant: 0.15,
            pull_direction: Vec3::new(-1.0, 1.0, 1.0),
            pull_force: 8.0,
            hand_stiffness: 400.0,
            hand_damping: 15.0,
            approach_gain: 0.5,
            approach_max_offset: 0.1,
            approach_waypoints: vec![Vec3::new(0.45, 0.0, 1.45)],
            approach_tolerance: 0.01,
            approach_settle: 0.5,
            grip_torque: 0.45,
            grip_damping: 0.3,
            grip_ramp: 0.5,
            grasp_hold: 0.5,
            release_after: 10.0,
            variation: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConditions {
    /// UAM centre of mass at start (m).
    pub uam_position: Vec3,
    /// Yaw at start, also the initial yaw setpoint (rad).
    pub yaw: f64,
    /// Haptic arm home pose (rad).
    pub haptic_home: Joint4,
    /// Haptic gripper angle at start (rad).
    pub grip_angle: f64,
}

impl Default for InitialConditions {
    fn default() -> Self {
        Self {
            uam_position: Vec3::new(0.0, 0.0, 1.5),
            yaw: 0.0,
            haptic_home: Joint4::new(0.0, -1.2, 2.0, 1.2),
            grip_angle: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub seed: u64,
    /// Simulated time (s).
    pub duration: f64,
    /// Physics step (s).
    pub physics_step: f64,
    /// Control and estimation period (s), an integer multiple of the
    /// physics step.
    pub control_period: f64,
    /// Telemetry rate for live mode and replay (Hz).
    pub telemetry_rate: f64,
    /// UAM gripper angle above which the gripper counts as closed (rad).
    pub grip_closed_angle: f64,
    pub initial: InitialConditions,
    pub uam: UamParams,
    pub uam_gains: UamGains,
    pub dob: DobParams,
    pub kf: KfParams,
    pub haptic_arm: HapticArmModel,
    pub gripper: GripperParams,
    pub admittance: AdmittanceGains,
    pub servo: ServoGains,
    pub teleop: TeleopParams,
    pub plug: PlugParams,
    pub operator: OperatorParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Proposed,
            seed: 0,
            duration: 30.0,
            physics_step: 0.001,
            control_period: 0.002,
            telemetry_rate: 30.0,
            grip_closed_angle: 0.7,
            initial: InitialConditions::default(),
            uam: UamParams::default(),
            uam_gains: UamGains::default(),
            dob: DobParams::default(),
            kf: KfParams::default(),
            haptic_arm: HapticArmModel::default(),
            gripper: GripperParams::default(),
            admittance: AdmittanceGains::default(),
            servo: ServoGains::default(),
            teleop: TeleopParams::default(),
            plug: PlugParams::default(),
            operator: OperatorParams::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Number of physics steps per control period.
    pub fn substeps(&self) -> usize {
        (self.control_period / self.physics_step).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.physics_step > 0.0 && self.control_period >= self.physics_step) {
            return bad("physics step must be positive and no larger than the control period".into());
        }
        let ratio = self.control_period / self.physics_step;
        if (ratio - ratio.round()).abs() > 1e-9 {
            return bad("control period must be an integer multiple of the physics step".into());
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad("duration must be positive".into());
        }
        if !(self.telemetry_rate > 0.0) {
            return bad("telemetry rate must be positive".into());
        }
        for result in [
            self.uam.validate(),
            self.uam_gains.validate(),
            self.dob.validate(),
            self.kf.validate(),
            self.haptic_arm.validate(),
            self.gripper.validate(),
            self.admittance.validate(),
            self.teleop.validate(),
            self.plug.validate(),
        ] {
            result.map_err(Error::Config)?;
        }
        if !(self.servo.kp > 0.0 && self.servo.kd > 0.0) {
            return bad("haptic servo gains must be positive".into());
        }
        let op = &self.operator;
        let positive = [
            op.reaction_time,
            op.hand_time_constant,
            op.hand_stiffness,
            op.hand_damping,
            op.approach_gain,
            op.approach_max_offset,
            op.approach_tolerance,
            op.grip_ramp,
            op.grip_damping,
        ];
        if !positive.iter().all(|v| v.is_finite() && *v > 0.0) {
            return bad("operator timing, hand and approach parameters must be positive".into());
        }
        if !(op.pull_direction.norm() > 1e-9) {
            return bad("operator pull direction must be non-zero".into());
        }
        if !(0.0..1.0).contains(&op.variation) {
            return bad("operator variation must lie in [0, 1)".into());
        }
        if !self.initial.uam_position.iter().all(|v| v.is_finite()) {
            return bad("initial UAM position must be finite".into());
        }
        Ok(())
    }
}
