//! Independent oracles and harnesses shared by the integration tests and
//! the acceptance runner.
#![allow(dead_code)]

use plugpull::controllers::{arm_joint_servo, gain_matrix, HapticSetpoint, ServoGains};
use plugpull::estimators::{dob_step, momentum_observer_step, DobParams, DobState, MomentumObserverState};
use plugpull::plant::{arm_accel, HapticArmModel, HapticArmState, Joint4};
use plugpull::sim::{rk4_step, LogRow, Mode, ScenarioConfig, SimLog};
use plugpull::teleop::Phase;
use plugpull::Vec3;

// ---------------------------------------------------------------------------
// Polynomials (ascending coefficients)

pub fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn poly_deriv(a: &[f64], k: usize) -> Vec<f64> {
    let mut p = a.to_vec();
    for _ in 0..k {
        p = p.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect();
        if p.is_empty() {
            p.push(0.0);
        }
    }
    p
}

pub fn poly_eval(a: &[f64], x: f64) -> f64 {
    a.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// `tau^2 (1 - tau)^4`, the common factor of every polynomial that vanishes
/// on all six boundary conditions.
fn null_factor() -> Vec<f64> {
    let one_minus = [1.0, -1.0];
    let mut p = vec![0.0, 0.0, 1.0];
    for _ in 0..4 {
        p = poly_mul(&p, &one_minus);
    }
    p
}

/// Four-point Gauss-Legendre rule on `[0, 1]`; exact up to degree 7.
pub fn gauss_legendre_unit() -> [(f64, f64); 4] {
    let a = (3.0 / 7.0 - 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
    let b = (3.0 / 7.0 + 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
    let wa = (18.0 + 30.0f64.sqrt()) / 36.0;
    let wb = (18.0 - 30.0f64.sqrt()) / 36.0;
    [(-b, wb), (-a, wa), (a, wa), (b, wb)].map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
}

/// `int_0^T (d^4 p / ds^4)^2 ds` by quadrature, for coefficients in `s`.
pub fn snap_cost_quadrature(coeffs: &[f64], duration: f64) -> f64 {
    let snap = poly_deriv(coeffs, 4);
    gauss_legendre_unit()
        .iter()
        .map(|(x, w)| {
            let v = poly_eval(&snap, x * duration);
            w * v * v
        })
        .sum::<f64>()
        * duration
}

/// Maps coefficients in normalised time `tau = s / T` to coefficients in `s`.
pub fn unscale(tau_coeffs: &[f64], duration: f64) -> Vec<f64> {
    tau_coeffs.iter().enumerate().map(|(i, c)| c / duration.powi(i as i32)).collect()
}

/// `tau^2 (1 - tau)^4 (a + b tau)` in `s` coefficients: a feasible
/// direction that leaves every boundary value untouched.
pub fn null_perturbation(a: f64, b: f64, duration: f64) -> Vec<f64> {
    unscale(&poly_mul(&null_factor(), &[a, b]), duration)
}

/// Minimum-snap polynomial for one axis, found without the KKT system:
/// start from a feasible polynomial, then minimise the quadrature snap cost
/// over the two-dimensional null space of the constraints.
pub fn minsnap_oracle(p_e: f64, v_e: f64, duration: f64) -> Vec<f64> {
    // p0(tau) = p_e + v_e T tau (1 - tau)^4 meets all six conditions.
    let mut shape = vec![0.0, 1.0];
    for _ in 0..4 {
        shape = poly_mul(&shape, &[1.0, -1.0]);
    }
    let mut p0: Vec<f64> = shape.iter().map(|c| c * v_e * duration).collect();
    p0[0] += p_e;
    let q1 = poly_mul(&null_factor(), &[1.0]);
    let q2 = poly_mul(&null_factor(), &[0.0, 1.0]);

    let snaps = [poly_deriv(&p0, 4), poly_deriv(&q1, 4), poly_deriv(&q2, 4)];
    let inner = |i: usize, j: usize| -> f64 {
        gauss_legendre_unit()
            .iter()
            .map(|(x, w)| w * poly_eval(&snaps[i], *x) * poly_eval(&snaps[j], *x))
            .sum()
    };
    let (g11, g12, g22) = (inner(1, 1), inner(1, 2), inner(2, 2));
    let (r1, r2) = (-inner(0, 1), -inner(0, 2));
    let det = g11 * g22 - g12 * g12;
    let a = (r1 * g22 - r2 * g12) / det;
    let b = (g11 * r2 - g12 * r1) / det;

    let mut p = vec![0.0; 8];
    for (k, c) in p0.iter().enumerate() {
        p[k] += c;
    }
    for (k, c) in q1.iter().enumerate() {
        p[k] += a * c;
    }
    for (k, c) in q2.iter().enumerate() {
        p[k] += b * c;
    }
    unscale(&p, duration)
}

// ---------------------------------------------------------------------------
// Estimator harnesses

/// DOB on a point mass that hovers on exactly `m g` of thrust while a
/// constant force acts on it. The velocity is integrated in closed form.
pub fn dob_step_response(force: Vec3, dt: f64, duration: f64) -> Vec<(f64, Vec3)> {
    let params = DobParams::default();
    let (m, g) = (2.5, 9.81);
    let mut s = DobState::new(&params, m, g, Vec3::zeros());
    let u = m * g * Vec3::z();
    let steps = (duration / dt).round() as usize;
    let mut out = Vec::with_capacity(steps);
    for k in 1..=steps {
        let t = k as f64 * dt;
        let v = force / m * t;
        let (next, f_hat) = dob_step(&s, &v, &u, dt);
        s = next;
        out.push((t, f_hat));
    }
    out
}

/// Momentum observer on the haptic arm. The arm is held near `home` by the
/// PD-plus-gravity servo while `tau_ext` acts on it; the plant runs RK4 at
/// `h`, the observer at `dt` with the period-average servo torque.
pub fn momentum_step_response(
    gain: f64,
    tau_ext: Joint4,
    h: f64,
    dt: f64,
    duration: f64,
) -> Vec<(f64, Joint4)> {
    let model = HapticArmModel::default();
    let servo = ServoGains { kp: 50.0, kd: 5.0 };
    let home = Joint4::new(0.0, -1.2, 2.0, 1.2);
    let setpoint = HapticSetpoint { theta: home, ..Default::default() };

    // x = [theta, theta_dot, int servo torque]
    type X = nalgebra::SVector<f64, 12>;
    let split = |x: &X| HapticArmState {
        theta: x.fixed_rows::<4>(0).into(),
        theta_dot: x.fixed_rows::<4>(4).into(),
    };
    let f = |_t: f64, x: &X| -> X {
        let arm = split(x);
        let g = model.gravity_vector(&arm.theta);
        let tau = arm_joint_servo(&servo, &arm.theta, &arm.theta_dot, &setpoint, &g);
        let acc = arm_accel(&model, &arm, &tau, &tau_ext);
        let mut dx = X::zeros();
        dx.fixed_rows_mut::<4>(0).copy_from(&arm.theta_dot);
        dx.fixed_rows_mut::<4>(4).copy_from(&acc);
        dx.fixed_rows_mut::<4>(8).copy_from(&tau);
        dx
    };

    let mut x = X::zeros();
    x.fixed_rows_mut::<4>(0).copy_from(&home);
    let mut obs = MomentumObserverState::new(gain_matrix(&Joint4::repeat(gain)), Joint4::zeros());
    let sub = (dt / h).round() as usize;
    let steps = (duration / dt).round() as usize;
    let mut t = 0.0;
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let before: Joint4 = x.fixed_rows::<4>(8).into();
        let start = x;
        for _ in 0..sub {
            x = rk4_step(f, &x, t, h);
            t += h;
        }
        let after: Joint4 = x.fixed_rows::<4>(8).into();
        let avg_tau = (after - before) / dt;
        // Observer sees the state at the start of the period, as in the loop.
        let arm = split(&start);
        let dynamics = model.dynamics(&arm);
        let (next, est) = momentum_observer_step(&obs, &dynamics, &arm.theta_dot, &avg_tau, dt);
        obs = next;
        out.push((t, est));
    }
    out
}

// ---------------------------------------------------------------------------
// Scenario helpers

pub fn with_mode(cfg: &ScenarioConfig, mode: Mode) -> ScenarioConfig {
    ScenarioConfig { mode, ..cfg.clone() }
}

/// Times of the rows where the phase switches NOMINAL -> RECOVERY.
pub fn recovery_entries(log: &SimLog) -> Vec<f64> {
    log.rows
        .windows(2)
        .filter(|w| w[0].phase == Phase::Nominal && w[1].phase == Phase::Recovery)
        .map(|w| w[1].t)
        .collect()
}

pub fn first_recovery_row(log: &SimLog) -> Option<&LogRow> {
    log.rows.iter().find(|r| r.phase == Phase::Recovery)
}

pub fn row_at(log: &SimLog, t: f64) -> &LogRow {
    log.rows
        .iter()
        .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
        .expect("non-empty log")
}
