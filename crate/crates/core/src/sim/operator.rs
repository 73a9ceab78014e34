//! Scripted human operator.
//!
//! The operator steers the handle so the tool point reaches the socket,
//! closes the gripper, pulls along a fixed direction and, after a reaction
//! delay following the true separation, relaxes the hand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::plant::AttachState;
use crate::sim::config::OperatorParams;
use crate::spatial::{rot_z, Vec3};

/// What the operator can see and feel at one control tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorObservation {
    pub t: f64,
    /// Handle displacement from its home position (haptic base frame, m).
    pub handle_offset: Vec3,
    pub handle_velocity: Vec3,
    /// Tool point of the UAM (world, m).
    pub tool_position: Vec3,
    /// Socket location (world, m).
    pub socket: Vec3,
    pub yaw: f64,
    pub attach: AttachState,
    pub grip_closed: bool,
    /// Haptic gripper rate (rad/s).
    pub grip_rate: f64,
    /// True separation instant, once it has happened.
    pub separated_at: Option<f64>,
}

/// Hand wrench on the device: Cartesian force on the handle and torque on
/// the haptic gripper.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HandInput {
    pub force: Vec3,
    pub grip_torque: f64,
}

pub trait Operator {
    fn act(&mut self, obs: &OperatorObservation, dt: f64) -> HandInput;
}

/// Never touches the device.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdleOperator;

impl Operator for IdleOperator {
    fn act(&mut self, _obs: &OperatorObservation, _dt: f64) -> HandInput {
        HandInput::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorSubstate {
    Approach,
    Grasp,
    Pull,
    React,
    Idle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorState {
    pub substate: OperatorSubstate,
    /// When the current substate was entered (s).
    pub since: f64,
    /// Next approach waypoint; equal to the waypoint count once heading for
    /// the socket.
    pub waypoint: usize,
    pub settle_since: Option<f64>,
    /// When the operator noticed the separation (s).
    pub perceived_separation: Option<f64>,
    /// Active hand force, excluding hand damping (N).
    pub hand_force: Vec3,
    /// Magnitude of the first-order pull force (N).
    pub pull_level: f64,
    pub grip_torque: f64,
}

impl OperatorState {
    pub fn new(params: &OperatorParams) -> Self {
        Self {
            substate: if params.enabled {
                OperatorSubstate::Approach
            } else {
                OperatorSubstate::Idle
            },
            since: 0.0,
            waypoint: 0,
            settle_since: None,
            perceived_separation: None,
            hand_force: Vec3::zeros(),
            pull_level: 0.0,
            grip_torque: 0.0,
        }
    }

    fn enter(&mut self, substate: OperatorSubstate, t: f64) {
        self.substate = substate;
        self.since = t;
    }
}

fn clamp_norm(v: Vec3, max: f64) -> Vec3 {
    let n = v.norm();
    if n > max {
        v * (max / n)
    } else {
        v
    }
}

/// One operator update. Returns the new state and the hand input,
/// including hand damping.
pub fn operator_step(
    params: &OperatorParams,
    op: &OperatorState,
    obs: &OperatorObservation,
    dt: f64,
) -> (OperatorState, HandInput) {
    use OperatorSubstate::*;

    let mut next = op.clone();
    let t = obs.t;
    let relax = 1.0 - (-dt / params.hand_time_constant).exp();
    let pull_dir = params.pull_direction.normalize();
    let damping = -params.hand_damping * obs.handle_velocity;
    let grip_damping = -params.grip_damping * obs.grip_rate;
    let spring_to = |target: Vec3| params.hand_stiffness * (target - obs.handle_offset);

    match op.substate {
        Approach => {
            let target = params
                .approach_waypoints
                .get(op.waypoint)
                .copied()
                .unwrap_or(obs.socket);
            let err = target - obs.tool_position;
            let err_body = rot_z(obs.yaw).transpose() * err;
            let desired = clamp_norm(params.approach_gain * err_body, params.approach_max_offset);
            next.hand_force = spring_to(desired);
            next.grip_torque = 0.0;
            if err.norm() < params.approach_tolerance {
                if op.waypoint < params.approach_waypoints.len() {
                    next.waypoint += 1;
                } else {
                    let since = *next.settle_since.get_or_insert(t);
                    if t - since >= params.approach_settle {
                        next.settle_since = None;
                        next.enter(Grasp, t);
                    }
                }
            } else {
                next.settle_since = None;
            }
        }
        Grasp => {
            let elapsed = t - op.since;
            next.hand_force = spring_to(Vec3::zeros());
            next.grip_torque = params.grip_torque * (elapsed / params.grip_ramp).min(1.0);
            let grasped = obs.attach == AttachState::Grasped && obs.grip_closed;
            if grasped && elapsed >= params.grip_ramp + params.grasp_hold {
                next.enter(Pull, t);
            } else if !grasped && elapsed > params.grip_ramp + 5.0 {
                // Missed the socket: open up and steer again.
                next.grip_torque = 0.0;
                next.waypoint = params.approach_waypoints.len();
                next.enter(Approach, t);
            }
        }
        Pull => {
            next.pull_level += relax * (params.pull_force - op.pull_level);
            next.hand_force = next.pull_level * pull_dir;
            if let Some(sep) = obs.separated_at {
                if t >= sep + params.reaction_time {
                    next.perceived_separation = Some(t);
                    next.enter(React, t);
                }
            }
        }
        React => {
            next.pull_level -= relax * op.pull_level;
            next.hand_force = next.pull_level * pull_dir;
            if t - op.since >= params.release_after {
                next.enter(Idle, t);
            }
        }
        Idle => {
            next.hand_force = Vec3::zeros();
            next.pull_level = 0.0;
            next.grip_torque = 0.0;
            return (next, HandInput::default());
        }
    }
    let input = HandInput {
        force: next.hand_force + damping,
        grip_torque: next.grip_torque + grip_damping,
    };
    (next, input)
}

/// Scripted operator with seeded perturbations of its pull force, reaction
/// time and hand time constant.
#[derive(Debug, Clone)]
pub struct ScriptedOperator {
    pub params: OperatorParams,
    pub state: OperatorState,
}

impl ScriptedOperator {
    pub fn new(params: &OperatorParams, seed: u64) -> Self {
        let mut params = params.clone();
        if params.variation > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = params.variation;
            let mut scale = || 1.0 + a * rng.gen_range(-1.0..=1.0);
            params.pull_force *= scale();
            params.reaction_time *= scale();
            params.hand_time_constant *= scale();
        }
        let state = OperatorState::new(&params);
        Self { params, state }
    }
}

impl Operator for ScriptedOperator {
    fn act(&mut self, obs: &OperatorObservation, dt: f64) -> HandInput {
        let (next, input) = operator_step(&self.params, &self.state, obs, dt);
        self.state = next;
        input
    }
}
