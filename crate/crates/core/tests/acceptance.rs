//! Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if
//! any fails. Run with `cargo test -p plugpull --test acceptance`.

mod common;

use std::time::Instant;

use common::{
    dob_step_response, first_recovery_row, gauss_legendre_unit, minsnap_oracle, momentum_step_response,
    null_perturbation, poly_deriv, poly_eval, recovery_entries, row_at, with_mode,
};
use nalgebra::Matrix4;
use plugpull::plant::{HapticArmModel, HapticArmState, Joint4};
use plugpull::sim::{compute_metrics, rk4_step, run_scenario, Mode, ScenarioConfig, SimLog};
use plugpull::teleop::minsnap_solve;
use plugpull::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Pinned tolerances.
const MIN_OVERSHOOT_REDUCTION: f64 = 0.25;
const MAX_PAIR_RUNTIME_S: f64 = 30.0;
const TERMINAL_POSITION_TOL: f64 = 0.05;
const TERMINAL_SPEED_TOL: f64 = 0.05;
const RECENTERED_RADIUS: f64 = 0.01;
const RECENTER_DELAY: f64 = 2.0;
const BASELINE_HANDLE_MIN: f64 = 0.05;
const BASELINE_HANDLE_DELAY: f64 = 1.0;
const MINSNAP_INSTANCES: usize = 1000;
const MINSNAP_PERTURBATIONS: usize = 1000;
const MINSNAP_RESIDUAL: f64 = 1e-9;
const MINSNAP_ORACLE_TOL: f64 = 1e-8;
const MINSNAP_BUDGET_S: f64 = 5.0;
const ESTIMATOR_REL_TOL: f64 = 0.02;
const DOB_FORCE: f64 = 2.0;
const DOB_POLE: f64 = 5.0;
const MO_TORQUE: f64 = 0.5;
const MO_GAIN: f64 = 30.0;
const SKEW_TOL: f64 = 1e-8;
const GRAVITY_GRAD_TOL: f64 = 1e-6;
const DYNAMICS_STATES: usize = 1000;
const RK4_ORDER_TOL: f64 = 0.1;
const DETECTION_WINDOW: f64 = 0.05;
const DETECTION_SEEDS: u64 = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn comparative() -> Outcome {
    let cfg = ScenarioConfig::default();
    let start = Instant::now();
    let base = run_scenario(&with_mode(&cfg, Mode::Baseline));
    let prop = run_scenario(&with_mode(&cfg, Mode::Proposed));
    let elapsed = start.elapsed().as_secs_f64();
    let (Ok(base), Ok(prop)) = (base, prop) else {
        return outcome(false, "simulation error".into());
    };
    let window = cfg.teleop.recovery_duration;
    let (Some(mb), Some(mp)) = (compute_metrics(&base, window), compute_metrics(&prop, window)) else {
        return outcome(false, "no extraction in one of the runs".into());
    };
    let reduction = 1.0 - mp.overshoot / mb.overshoot;
    outcome(
        reduction >= MIN_OVERSHOOT_REDUCTION && elapsed < MAX_PAIR_RUNTIME_S,
        format!(
            "overshoot baseline {:.4} m, proposed {:.4} m, reduction {:.1}% (>= {:.0}%); two runs in {:.2} s (< {MAX_PAIR_RUNTIME_S} s)",
            mb.overshoot,
            mp.overshoot,
            100.0 * reduction,
            100.0 * MIN_OVERSHOOT_REDUCTION,
            elapsed
        ),
    )
}

fn terminal(prop: &SimLog, duration: f64) -> Outcome {
    let Some(first) = first_recovery_row(prop) else {
        return outcome(false, "recovery never entered".into());
    };
    let end = row_at(prop, first.t + duration);
    let dp = (end.p_c - first.p_c).norm();
    let v = end.v_c.norm();
    outcome(
        dp <= TERMINAL_POSITION_TOL && v <= TERMINAL_SPEED_TOL,
        format!(
            "at t_e + T_e = {:.3} s: |p_c - p_e| = {dp:.4} m (<= {TERMINAL_POSITION_TOL}), |v_c| = {v:.4} m/s (<= {TERMINAL_SPEED_TOL})",
            end.t
        ),
    )
}

fn recentering(base: &SimLog, prop: &SimLog, duration: f64) -> Outcome {
    let Some(first) = first_recovery_row(prop) else {
        return outcome(false, "recovery never entered".into());
    };
    let t_e = first.t;
    let worst = prop
        .rows
        .iter()
        .filter(|r| r.t >= t_e + RECENTER_DELAY - 1e-9 && r.t <= t_e + duration + 1e-9)
        .map(|r| r.p_h.norm())
        .fold(0.0, f64::max);
    let Some(mb) = compute_metrics(base, duration) else {
        return outcome(false, "baseline never extracted".into());
    };
    let held = row_at(base, mb.t_e + BASELINE_HANDLE_DELAY).p_h.norm();
    outcome(
        worst <= RECENTERED_RADIUS && held > BASELINE_HANDLE_MIN,
        format!(
            "proposed max |p_H| over [t_e+{RECENTER_DELAY}, t_e+T_e] = {worst:.5} m (<= {RECENTERED_RADIUS}); baseline |p_H(t_e+{BASELINE_HANDLE_DELAY})| = {held:.4} m (> {BASELINE_HANDLE_MIN})"
        ),
    )
}

fn minsnap_qp() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let nodes = gauss_legendre_unit();
    let mut worst_residual: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    let mut violations = 0usize;
    let mut errors = 0usize;
    for _ in 0..MINSNAP_INSTANCES {
        let p_e = Vec3::from_fn(|_, _| rng.gen_range(-5.0..5.0));
        let v_e = Vec3::from_fn(|_, _| rng.gen_range(-2.0..2.0));
        let t_e = rng.gen_range(0.0..60.0);
        let duration = rng.gen_range(1.0..10.0);
        let Ok(traj) = minsnap_solve(&p_e, &v_e, t_e, duration) else {
            errors += 1;
            continue;
        };
        let end = traj.end();
        let residuals = [
            (traj.derivative_unchecked(t_e, 0) - p_e).norm(),
            (traj.derivative_unchecked(t_e, 1) - v_e).norm(),
            (traj.derivative_unchecked(end, 0) - p_e).norm(),
            traj.derivative_unchecked(end, 1).norm(),
            traj.derivative_unchecked(end, 2).norm(),
            traj.derivative_unchecked(end, 3).norm(),
        ];
        worst_residual = residuals.iter().fold(worst_residual, |a, b| a.max(*b));

        // Snap values at the quadrature nodes, for the optimum and for the
        // two null-space directions; the cost is quadratic in them.
        let snap_at = |c: &[f64]| -> [f64; 4] {
            let d4 = poly_deriv(c, 4);
            nodes.map(|(x, _)| poly_eval(&d4, x * duration))
        };
        let q1 = snap_at(&null_perturbation(1.0, 0.0, duration));
        let q2 = snap_at(&null_perturbation(0.0, 1.0, duration));
        for axis in 0..3 {
            let c = traj.coeffs[axis];
            let oracle = minsnap_oracle(p_e[axis], v_e[axis], duration);
            for (a, b) in c.iter().zip(&oracle) {
                worst_oracle = worst_oracle.max((a - b).abs());
            }
            let s0 = snap_at(&c);
            let cost = |da: f64, db: f64| -> f64 {
                nodes
                    .iter()
                    .enumerate()
                    .map(|(k, (_, w))| {
                        let s = s0[k] + da * q1[k] + db * q2[k];
                        w * s * s
                    })
                    .sum::<f64>()
                    * duration
            };
            let j0 = cost(0.0, 0.0);
            for _ in 0..MINSNAP_PERTURBATIONS / 3 + 1 {
                let eps = 10f64.powf(rng.gen_range(-6.0..0.0)) * (1.0 + p_e.norm());
                let (da, db) = (eps * rng.gen_range(-1.0..1.0), eps * rng.gen_range(-1.0..1.0));
                if cost(da, db) < j0 - 1e-12 * (1.0 + j0) {
                    violations += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        errors == 0
            && worst_residual <= MINSNAP_RESIDUAL
            && worst_oracle <= MINSNAP_ORACLE_TOL
            && violations == 0
            && elapsed < MINSNAP_BUDGET_S,
        format!(
            "{MINSNAP_INSTANCES} instances x {MINSNAP_PERTURBATIONS} perturbations: max boundary residual {worst_residual:.2e} (<= {MINSNAP_RESIDUAL:.0e}), max deviation from null-space oracle {worst_oracle:.2e} (<= {MINSNAP_ORACLE_TOL:.0e}), {violations} cost decreases, {errors} solver errors, {elapsed:.2} s (< {MINSNAP_BUDGET_S} s)"
        ),
    )
}

fn estimators() -> Outcome {
    let tau_dob = 1.0 / DOB_POLE;
    let dob = dob_step_response(Vec3::new(DOB_FORCE, 0.0, 0.0), 0.002, 3.0);
    let dob_err = dob
        .iter()
        .filter(|(t, _)| *t >= 5.0 * tau_dob)
        .map(|(_, f)| (f - Vec3::new(DOB_FORCE, 0.0, 0.0)).norm() / DOB_FORCE)
        .fold(0.0, f64::max);

    let tau_ext = Joint4::new(0.0, MO_TORQUE, 0.0, 0.0);
    let mo = momentum_step_response(MO_GAIN, tau_ext, 0.001, 0.002, 1.5);
    let mo_err = mo
        .iter()
        .filter(|(t, _)| *t >= 5.0 / MO_GAIN)
        .map(|(_, est)| (est - tau_ext).amax() / MO_TORQUE)
        .fold(0.0, f64::max);
    outcome(
        dob_err <= ESTIMATOR_REL_TOL && mo_err <= ESTIMATOR_REL_TOL,
        format!(
            "DOB {DOB_FORCE} N step: max rel. error after {:.2} s = {:.2}%; momentum observer {MO_TORQUE} N m step: max rel. error after {:.3} s = {:.2}% (each <= {:.0}%)",
            5.0 * tau_dob,
            100.0 * dob_err,
            5.0 / MO_GAIN,
            100.0 * mo_err,
            100.0 * ESTIMATOR_REL_TOL
        ),
    )
}

fn rk4_observed_orders() -> Vec<f64> {
    let lambda = -2.0;
    let err = |n: usize| {
        let h = 1.0 / n as f64;
        let mut y = nalgebra::SVector::<f64, 1>::new(1.0);
        for k in 0..n {
            y = rk4_step(|_, y| lambda * y, &y, k as f64 * h, h);
        }
        (y[0] - lambda.exp()).abs()
    };
    let errs: Vec<f64> = [20, 40, 80, 160].iter().map(|n| err(*n)).collect();
    errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn dynamics() -> Outcome {
    let model = HapticArmModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_skew: f64 = 0.0;
    let mut worst_grad: f64 = 0.0;
    let h = 1e-6;
    for _ in 0..DYNAMICS_STATES {
        let s = HapticArmState {
            theta: Joint4::from_fn(|_, _| rng.gen_range(-3.0..3.0)),
            theta_dot: Joint4::from_fn(|_, _| rng.gen_range(-3.0..3.0)),
        };
        let partials = model.mass_matrix_partials(&s.theta);
        let m_dot = (0..4).fold(Matrix4::zeros(), |acc, i| acc + partials[i] * s.theta_dot[i]);
        let n = m_dot - 2.0 * model.dynamics(&s).coriolis;
        worst_skew = worst_skew.max((s.theta_dot.transpose() * n * s.theta_dot)[0].abs());

        let g = model.gravity_vector(&s.theta);
        for i in 0..4 {
            let mut e = Joint4::zeros();
            e[i] = h;
            let grad = (model.potential_energy(&(s.theta + e)) - model.potential_energy(&(s.theta - e)))
                / (2.0 * h);
            worst_grad = worst_grad.max((grad - g[i]).abs());
        }
    }
    let orders = rk4_observed_orders();
    let orders_ok = orders.iter().all(|p| (p - 4.0).abs() <= RK4_ORDER_TOL);
    outcome(
        worst_skew <= SKEW_TOL && worst_grad <= GRAVITY_GRAD_TOL && orders_ok,
        format!(
            "{DYNAMICS_STATES} states: max |qd^T (Mdot - 2C) qd| = {worst_skew:.2e} (<= {SKEW_TOL:.0e}), max |G - dV/dq| = {worst_grad:.2e} (<= {GRAVITY_GRAD_TOL:.0e}); RK4 observed orders {}",
            orders.iter().map(|p| format!("{p:.3}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn detection() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for seed in 0..DETECTION_SEEDS {
        let cfg = ScenarioConfig { seed, mode: Mode::Proposed, ..Default::default() };
        let Ok(log) = run_scenario(&cfg) else {
            bad.push(format!("seed {seed}: simulation error"));
            continue;
        };
        let Some(tb) = log.breakaway_time else {
            bad.push(format!("seed {seed}: no breakaway"));
            continue;
        };
        let entries = recovery_entries(&log);
        if entries.len() != 1 {
            bad.push(format!("seed {seed}: {} detections", entries.len()));
            continue;
        }
        let lag = entries[0] - tb;
        worst = worst.max(lag.abs());
        if lag.abs() > DETECTION_WINDOW {
            bad.push(format!("seed {seed}: lag {:.1} ms", 1000.0 * lag));
        }
    }
    let detail = if bad.is_empty() {
        format!(
            "{DETECTION_SEEDS} seeds, one detection each, worst lag {:.1} ms (<= {:.0} ms)",
            1000.0 * worst,
            1000.0 * DETECTION_WINDOW
        )
    } else {
        bad.join("; ")
    };
    outcome(bad.is_empty(), detail)
}

fn determinism(base: &SimLog, prop: &SimLog) -> Outcome {
    let cfg = ScenarioConfig::default();
    let again = run_scenario(&with_mode(&cfg, Mode::Proposed));
    let repeat_ok = again.map(|l| l.to_csv() == prop.to_csv()).unwrap_or(false);
    let Some(tb) = base.breakaway_time else {
        return outcome(false, "no breakaway".into());
    };
    let prefix = |log: &SimLog| -> Vec<String> {
        let csv = log.to_csv();
        let n = log.rows.iter().take_while(|r| r.t < tb).count();
        csv.lines().take(n + 1).map(str::to_owned).collect()
    };
    let (pb, pp) = (prefix(base), prefix(prop));
    let prefix_ok = pb == pp && prop.breakaway_time == Some(tb);
    outcome(
        repeat_ok && prefix_ok,
        format!(
            "repeat run byte-identical: {repeat_ok}; baseline and proposed identical for the {} rows before breakaway at {tb:.3} s: {prefix_ok}",
            pb.len() - 1
        ),
    )
}

fn main() {
    let cfg = ScenarioConfig::default();
    let duration = cfg.teleop.recovery_duration;
    let base = run_scenario(&with_mode(&cfg, Mode::Baseline)).expect("baseline run");
    let prop = run_scenario(&with_mode(&cfg, Mode::Proposed)).expect("proposed run");

    let checks: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("comparative overshoot", Box::new(comparative)),
        ("recovery terminal condition", Box::new(|| terminal(&prop, duration))),
        ("haptic auto-recentering", Box::new(|| recentering(&base, &prop, duration))),
        ("min-snap QP", Box::new(minsnap_qp)),
        ("estimator convergence", Box::new(estimators)),
        ("dynamics correctness", Box::new(dynamics)),
        ("detection alignment", Box::new(detection)),
        ("determinism", Box::new(|| determinism(&base, &prop))),
    ];

    let mut failed = 0;
    for (name, check) in &checks {
        let o = check();
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
