//! The coupled simulation loop.
//!
//! Continuous state (integrated with RK4 at the physics step):
//!
//! | slice   | quantity                                   |
//! |---------|--------------------------------------------|
//! | 0..4    | haptic joint angles                        |
//! | 4..8    | haptic joint rates                         |
//! | 8, 9    | haptic gripper angle and rate              |
//! | 10..13  | UAM position                               |
//! | 13..16  | UAM velocity                               |
//! | 16..19  | UAM Euler angles                           |
//! | 19..22  | UAM arm joints (roll, pitch, gripper)      |
//! | 22..26  | integral of the haptic servo torque        |
//!
//! Controllers and estimators run once per control period and their outputs
//! are held constant over the physics substeps. The haptic joint servo is
//! the exception: it is part of the device and runs inside the derivative.

use nalgebra::SVector;

use crate::controllers::{
    admittance_step, arm_joint_servo, attitude_rate_control, gain_matrix,
    gripper_compliance_step, limited_thrust_attitude, position_control, recentering_torque,
    HapticSetpoint,
};
use crate::error::{Error, Result};
use crate::estimators::{
    dob_step, kf_derivative_step, momentum_observer_step, DobState, ForceDerivativeKf,
    MomentumObserverState,
};
use crate::plant::arm::accel_from_dynamics;
use crate::plant::{
    applied_input, end_effector_position, end_effector_velocity, joint_servo_rate, uam_accel,
    AttachState, GripperState, HapticArmState, Joint4, PlugAttachment, UamState,
};
use crate::sim::config::{Mode, ScenarioConfig};
use crate::sim::log::{LogRow, SimLog};
use crate::sim::operator::{HandInput, Operator, OperatorObservation, ScriptedOperator};
use crate::sim::rk4::rk4_step;
use crate::spatial::{euler_rates, rot_body, EulerAngles, Vec3};
use crate::teleop::{
    desired_joint_angles, detect_extraction, haptic_recovery_rate, integrate_reference,
    minsnap_eval, minsnap_solve, phase_step, velocity_mapping, Phase, PhaseEvent, PhaseState,
    RecoveryTrajectory, ReferenceIntegrator,
};

pub const STATE_DIM: usize = 26;
pub type SimVector = SVector<f64, STATE_DIM>;

/// Sanity bounds far outside the physical envelope.
pub const MAX_POSITION: f64 = 100.0;
pub const MAX_HAPTIC_RATE: f64 = 100.0;

/// Inputs held constant over one control period.
#[derive(Debug, Clone, Copy, PartialEq)]
struct HeldInputs {
    setpoint: HapticSetpoint,
    hand_torque: Joint4,
    grip_torque: f64,
    thrust: f64,
    omega: Vec3,
    joints_des: Vec3,
}

/// Everything the control loop computed at one tick, for logging and
/// telemetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSnapshot {
    pub t: f64,
    pub p_c: Vec3,
    pub p_cd: Vec3,
    pub v_c: Vec3,
    pub attitude: EulerAngles,
    pub theta_h: Joint4,
    pub theta_hd: Joint4,
    pub theta_g: f64,
    pub f_hat: Vec3,
    pub f_dot: Vec3,
    pub f_true: Vec3,
    pub p_h: Vec3,
    pub phase: Phase,
    pub attach: AttachState,
}

impl ControlSnapshot {
    pub fn to_row(&self) -> LogRow {
        LogRow {
            t: self.t,
            p_c: self.p_c,
            p_cd: self.p_cd,
            v_c: self.v_c,
            attitude: self.attitude,
            theta_h: self.theta_h,
            theta_hd: self.theta_hd,
            theta_g: self.theta_g,
            f_hat: self.f_hat,
            f_dot_norm: self.f_dot.norm(),
            f_true: self.f_true,
            p_h: self.p_h,
            phase: self.phase,
            attach: self.attach,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub cfg: ScenarioConfig,
    tick: u64,
    x: SimVector,
    plug: PlugAttachment,
    dob: DobState,
    kf: ForceDerivativeKf,
    momentum: MomentumObserverState,
    tau_hat: Joint4,
    /// Servo-torque integral at the previous tick.
    last_torque_integral: Joint4,
    thrust: f64,
    setpoint: HapticSetpoint,
    reference: ReferenceIntegrator,
    phase: PhaseState,
    trajectory: Option<RecoveryTrajectory>,
    yaw_setpoint: f64,
    home_tip: Vec3,
    breakaway_time: Option<f64>,
    transitions: Vec<(f64, PhaseEvent)>,
    last: Option<ControlSnapshot>,
}

// Slices of the continuous state.
fn arm_state(x: &SimVector) -> HapticArmState {
    HapticArmState {
        theta: x.fixed_rows::<4>(0).into(),
        theta_dot: x.fixed_rows::<4>(4).into(),
    }
}

fn v3(x: &SimVector, k: usize) -> Vec3 {
    x.fixed_rows::<3>(k).into()
}

impl Simulation {
    pub fn new(cfg: ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let init = &cfg.initial;
        let mut x = SimVector::zeros();
        x.fixed_rows_mut::<4>(0).copy_from(&init.haptic_home);
        x[8] = init.grip_angle;
        x.fixed_rows_mut::<3>(10).copy_from(&init.uam_position);
        x[18] = init.yaw;
        x[21] = init.grip_angle;

        let home_tip = cfg.haptic_arm.forward_kinematics(&init.haptic_home).0;
        let mass0 = cfg.haptic_arm.mass_matrix(&init.haptic_home);
        let momentum = MomentumObserverState::new(
            gain_matrix(&cfg.admittance.observer_gain),
            mass0 * Joint4::zeros(),
        );
        let setpoint = HapticSetpoint {
            theta: init.haptic_home,
            theta_dot: Joint4::zeros(),
            grip: init.grip_angle,
            grip_dot: 0.0,
        };
        Ok(Self {
            tick: 0,
            x,
            plug: PlugAttachment::new(&cfg.plug),
            dob: DobState::new(&cfg.dob, cfg.uam_gains.mass, cfg.uam_gains.gravity, Vec3::zeros()),
            kf: ForceDerivativeKf::new(&cfg.kf, Vec3::zeros()),
            momentum,
            tau_hat: Joint4::zeros(),
            last_torque_integral: Joint4::zeros(),
            thrust: cfg.uam.mass * cfg.uam.gravity,
            setpoint,
            reference: ReferenceIntegrator::new(init.uam_position),
            phase: PhaseState::new(cfg.teleop.recovery_duration),
            trajectory: None,
            yaw_setpoint: init.yaw,
            home_tip,
            breakaway_time: None,
            transitions: Vec::new(),
            last: None,
            cfg,
        })
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.cfg.control_period
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn phase(&self) -> &PhaseState {
        &self.phase
    }

    pub fn attach_state(&self) -> AttachState {
        self.plug.state
    }

    pub fn breakaway_time(&self) -> Option<f64> {
        self.breakaway_time
    }

    /// Phase transitions so far, with their times.
    pub fn transitions(&self) -> &[(f64, PhaseEvent)] {
        &self.transitions
    }

    pub fn trajectory(&self) -> Option<&RecoveryTrajectory> {
        self.trajectory.as_ref()
    }

    /// Snapshot computed at the most recent tick.
    pub fn last_snapshot(&self) -> Option<&ControlSnapshot> {
        self.last.as_ref()
    }

    pub fn yaw_setpoint(&self) -> f64 {
        self.yaw_setpoint
    }

    pub fn set_yaw_setpoint(&mut self, yaw: f64) {
        self.yaw_setpoint = yaw;
    }

    pub fn uam_state(&self) -> UamState {
        UamState {
            position: v3(&self.x, 10),
            velocity: v3(&self.x, 13),
            attitude: EulerAngles::from_vector(&v3(&self.x, 16)),
            joints: v3(&self.x, 19),
            mass: self.cfg.uam.mass,
            gravity: self.cfg.uam.gravity,
        }
    }

    pub fn haptic_state(&self) -> HapticArmState {
        arm_state(&self.x)
    }

    /// Continuous state, for tests and diagnostics.
    pub fn state_vector(&self) -> &SimVector {
        &self.x
    }

    /// Overwrites one haptic joint angle (test hook for dataflow checks).
    pub fn perturb_haptic_joint(&mut self, joint: usize, delta: f64) {
        self.x[joint] += delta;
    }

    fn grip_closed(&self) -> bool {
        self.x[21] >= self.cfg.grip_closed_angle
    }

    /// Handle offset and velocity in the haptic base frame.
    fn handle(&self, arm: &HapticArmState) -> (Vec3, Vec3, crate::plant::Jacobian) {
        let (tip, jac) = self.cfg.haptic_arm.forward_kinematics(&arm.theta);
        (tip - self.home_tip, jac * arm.theta_dot, jac)
    }

    fn tool_rates(&self, uam: &UamState, omega: &Vec3, joints_des: &Vec3) -> Result<(Vec3, Vec3)> {
        let att_rates = euler_rates(&uam.attitude, omega)?;
        let p = &self.cfg.uam;
        let tau = p.joint_time_constant.max(self.cfg.physics_step);
        let joint_rates = joint_servo_rate(&uam.joints, joints_des, p.joint_rate_limit, tau);
        Ok((att_rates, joint_rates))
    }

    fn derivative(&self, t: f64, x: &SimVector, held: &HeldInputs) -> Result<SimVector> {
        let cfg = &self.cfg;
        let mut dx = SimVector::zeros();

        let arm = arm_state(x);
        let dynamics = cfg.haptic_arm.dynamics(&arm);
        let servo = arm_joint_servo(&cfg.servo, &arm.theta, &arm.theta_dot, &held.setpoint, &dynamics.gravity);
        let accel = accel_from_dynamics(&dynamics, &arm, &servo, &held.hand_torque);
        dx.fixed_rows_mut::<4>(0).copy_from(&arm.theta_dot);
        dx.fixed_rows_mut::<4>(4).copy_from(&accel);
        dx.fixed_rows_mut::<4>(22).copy_from(&servo);

        let grip = GripperState {
            angle: x[8],
            rate: x[9],
            inertia: cfg.gripper.inertia,
        };
        let grip_torque = cfg.gripper.servo_torque(&grip, held.setpoint.grip, held.setpoint.grip_dot)
            + held.grip_torque;
        dx[8] = grip.rate;
        dx[9] = grip_torque / grip.inertia;

        let uam = UamState {
            position: v3(x, 10),
            velocity: v3(x, 13),
            attitude: EulerAngles::from_vector(&v3(x, 16)),
            joints: v3(x, 19),
            mass: cfg.uam.mass,
            gravity: cfg.uam.gravity,
        };
        let (att_rates, joint_rates) = self.tool_rates(&uam, &held.omega, &held.joints_des)?;
        let f_body = if self.plug.state == AttachState::Free {
            Vec3::zeros()
        } else {
            let p_ee = end_effector_position(&uam, &cfg.uam.tool_offset);
            let v_ee = end_effector_velocity(&uam, &cfg.uam.tool_offset, &att_rates, &joint_rates);
            rot_body(&uam.attitude).transpose() * self.plug.force_world(&p_ee, &v_ee, t)
        };
        dx.fixed_rows_mut::<3>(10).copy_from(&uam.velocity);
        dx.fixed_rows_mut::<3>(13).copy_from(&uam_accel(&uam, held.thrust, &f_body));
        dx.fixed_rows_mut::<3>(16).copy_from(&att_rates);
        dx.fixed_rows_mut::<3>(19).copy_from(&joint_rates);
        Ok(dx)
    }

    /// True external force on the UAM in the body frame at the current state.
    fn true_force_body(&self, uam: &UamState, held: Option<&HeldInputs>, t: f64) -> Vec3 {
        if self.plug.state == AttachState::Free {
            return Vec3::zeros();
        }
        let (att_rates, joint_rates) = held
            .and_then(|h| self.tool_rates(uam, &h.omega, &h.joints_des).ok())
            .unwrap_or((Vec3::zeros(), Vec3::zeros()));
        let tool = &self.cfg.uam.tool_offset;
        let p_ee = end_effector_position(uam, tool);
        let v_ee = end_effector_velocity(uam, tool, &att_rates, &joint_rates);
        rot_body(&uam.attitude).transpose() * self.plug.force_world(&p_ee, &v_ee, t)
    }

    /// Runs one control period: sense, estimate, decide, control, then
    /// integrate the plant over the period.
    pub fn step(&mut self, operator: &mut dyn Operator) -> Result<ControlSnapshot> {
        let cfg = self.cfg.clone();
        let dt = cfg.control_period;
        let t = self.time();

        // Sense.
        let uam = self.uam_state();
        let arm = arm_state(&self.x);
        let r_b = rot_body(&uam.attitude);
        let (p_h, v_h, jac) = self.handle(&arm);
        let theta_g = self.x[8];
        let grip_closed = self.grip_closed();
        let attach = self.plug.state;

        // Estimate.
        let u_applied = applied_input(self.thrust, &uam.attitude);
        let (dob, f_hat_world) = dob_step(&self.dob, &uam.velocity, &u_applied, dt);
        self.dob = dob;
        let f_hat = r_b.transpose() * f_hat_world;
        let (kf, f_dot) = kf_derivative_step(&self.kf, &f_hat, dt);
        self.kf = kf;
        let dynamics = cfg.haptic_arm.dynamics(&arm);
        let integral: Joint4 = self.x.fixed_rows::<4>(22).into();
        if self.tick > 0 {
            let tau_avg = (integral - self.last_torque_integral) / dt;
            let (m, est) = momentum_observer_step(&self.momentum, &dynamics, &arm.theta_dot, &tau_avg, dt);
            self.momentum = m;
            self.tau_hat = est;
        }
        self.last_torque_integral = integral;

        // Operator.
        let obs = OperatorObservation {
            t,
            handle_offset: p_h,
            handle_velocity: v_h,
            tool_position: end_effector_position(&uam, &cfg.uam.tool_offset),
            socket: self.plug.anchor,
            yaw: uam.attitude.yaw,
            attach,
            grip_closed,
            grip_rate: self.x[9],
            separated_at: self.breakaway_time,
        };
        let hand: HandInput = operator.act(&obs, dt);

        // Phase logic.
        if cfg.mode == Mode::Proposed {
            self.phase.update_arming(&cfg.teleop, &f_hat, grip_closed, t);
            let detected = detect_extraction(&cfg.teleop, &self.phase, &f_dot, &f_hat, grip_closed);
            let (next, event) =
                phase_step(&self.phase, detected, t, &uam.position, &uam.velocity, self.x[21]);
            self.phase = next;
            match event {
                Some(PhaseEvent::EnterRecovery) => {
                    self.trajectory = Some(minsnap_solve(
                        &self.phase.p_e,
                        &self.phase.v_e,
                        self.phase.t_e,
                        self.phase.recovery_duration,
                    )?);
                }
                Some(PhaseEvent::ExitRecovery) => {
                    self.trajectory = None;
                    self.reference = ReferenceIntegrator::new(uam.position);
                    self.setpoint.theta = arm.theta;
                    self.setpoint.theta_dot = Joint4::zeros();
                }
                None => {}
            }
            if let Some(ev) = event {
                self.transitions.push((t, ev));
            }
        }

        // References.
        let home = cfg.initial.haptic_home;
        let (p_cd, v_cd, grip_target) = match self.phase.phase {
            Phase::Nominal => {
                let v_body = velocity_mapping(&cfg.teleop, &p_h);
                self.reference = integrate_reference(&self.reference, &v_body, self.yaw_setpoint, dt);
                let tau_fb = recentering_torque(&cfg.admittance, &arm.theta, &home);
                let grip = self.setpoint;
                self.setpoint = admittance_step(
                    &cfg.admittance,
                    &self.setpoint,
                    &self.tau_hat,
                    &tau_fb,
                    &jac,
                    &f_hat,
                    dt,
                );
                let (g, gd) = gripper_compliance_step(
                    &cfg.admittance,
                    grip.grip,
                    grip.grip_dot,
                    theta_g,
                    cfg.initial.grip_angle,
                    hand.grip_torque,
                    dt,
                );
                self.setpoint.grip = g;
                self.setpoint.grip_dot = gd;
                (self.reference.position, self.reference.velocity, theta_g)
            }
            Phase::Recovery => {
                let traj = self.trajectory.as_ref().expect("trajectory exists during recovery");
                let (p, v) = minsnap_eval(traj, t)?;
                let rate = haptic_recovery_rate(&cfg.admittance.recovery, &arm.theta, &home);
                self.setpoint.theta += dt * rate;
                self.setpoint.theta_dot = rate;
                (p, v, self.phase.frozen_grip)
            }
        };

        // UAM control.
        let u = position_control(&cfg.uam_gains, &uam.position, &uam.velocity, &p_cd, &v_cd, &f_hat, &r_b);
        let ta = limited_thrust_attitude(&cfg.uam_gains, &u, &uam.attitude);
        let desired = EulerAngles::new(ta.roll, ta.pitch, self.yaw_setpoint);
        let omega = attitude_rate_control(&cfg.uam_gains, &desired, &uam.attitude);
        let joints_des = desired_joint_angles(&uam.attitude, grip_target);
        self.thrust = ta.thrust;

        let held = HeldInputs {
            setpoint: self.setpoint,
            hand_torque: jac.transpose() * hand.force,
            grip_torque: hand.grip_torque,
            thrust: ta.thrust,
            omega,
            joints_des,
        };

        let snapshot = ControlSnapshot {
            t,
            p_c: uam.position,
            p_cd,
            v_c: uam.velocity,
            attitude: uam.attitude,
            theta_h: arm.theta,
            theta_hd: self.setpoint.theta,
            theta_g,
            f_hat,
            f_dot,
            f_true: self.true_force_body(&uam, Some(&held), t),
            p_h,
            phase: self.phase.phase,
            attach,
        };

        // Plant.
        let h = cfg.physics_step;
        for k in 0..cfg.substeps() {
            let ts = t + k as f64 * h;
            let mut failure = None;
            let next = rk4_step(
                |tt, xx| match self.derivative(tt, xx, &held) {
                    Ok(d) => d,
                    Err(e) => {
                        failure.get_or_insert(e);
                        SimVector::zeros()
                    }
                },
                &self.x,
                ts,
                h,
            );
            if let Some(e) = failure {
                return Err(Error::NumericalDivergence { t: ts, what: e.to_string() });
            }
            self.x = next;
            let after = ts + h;
            let uam = self.uam_state();
            let (att_rates, joint_rates) = self
                .tool_rates(&uam, &held.omega, &held.joints_des)
                .map_err(|e| Error::NumericalDivergence { t: after, what: e.to_string() })?;
            let tool = &cfg.uam.tool_offset;
            let p_ee = end_effector_position(&uam, tool);
            let v_ee = end_effector_velocity(&uam, tool, &att_rates, &joint_rates);
            let closed = self.grip_closed();
            if self.plug.update(&p_ee, &v_ee, closed, after) {
                self.breakaway_time = Some(after);
            }
        }
        self.tick += 1;
        self.check_bounds()?;
        self.last = Some(snapshot);
        Ok(snapshot)
    }

    fn check_bounds(&self) -> Result<()> {
        let t = self.time();
        if !self.x.iter().all(|v| v.is_finite()) {
            return Err(Error::NumericalDivergence { t, what: "non-finite state".into() });
        }
        let p = v3(&self.x, 10).norm();
        if p > MAX_POSITION {
            return Err(Error::NumericalDivergence { t, what: format!("|p_c| = {p} m") });
        }
        let w = self.haptic_state().theta_dot.norm();
        if w > MAX_HAPTIC_RATE {
            return Err(Error::NumericalDivergence { t, what: format!("|haptic joint rate| = {w} rad/s") });
        }
        Ok(())
    }
}

/// Runs the configured scenario with the scripted operator.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<SimLog> {
    let mut operator = ScriptedOperator::new(&cfg.operator, cfg.seed);
    run_with_operator(cfg, &mut operator)
}

pub fn run_with_operator(cfg: &ScenarioConfig, operator: &mut dyn Operator) -> Result<SimLog> {
    let mut sim = Simulation::new(cfg.clone())?;
    let ticks = (cfg.duration / cfg.control_period).round() as u64;
    let mut rows = Vec::with_capacity(ticks as usize);
    for _ in 0..ticks {
        rows.push(sim.step(operator)?.to_row());
    }
    Ok(SimLog {
        rows,
        breakaway_time: sim.breakaway_time(),
    })
}
