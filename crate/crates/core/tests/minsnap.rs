mod common;

use common::{minsnap_oracle, null_perturbation, poly_deriv, poly_eval, snap_cost_quadrature};
use plugpull::teleop::{minsnap_eval, minsnap_solve};
use plugpull::{Error, Vec3};
use proptest::prelude::*;

fn vec3() -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-3.0f64..3.0).prop_map(Vec3::from)
}

#[test]
fn quadrature_cost_matches_closed_form() {
    let traj = minsnap_solve(&Vec3::new(0.6, 0.0, 1.45), &Vec3::new(-0.4, 0.4, 0.4), 10.0, 5.0).unwrap();
    let quad: f64 = traj.coeffs.iter().map(|c| snap_cost_quadrature(c, traj.duration)).sum();
    assert!((quad - traj.snap_integral()).abs() <= 1e-12 * quad.max(1e-12));
}

#[test]
fn matches_null_space_oracle() {
    let p_e = Vec3::new(0.6, -0.1, 1.45);
    let v_e = Vec3::new(-0.45, 0.3, 0.52);
    for duration in [0.5, 1.0, 5.0, 12.0] {
        let traj = minsnap_solve(&p_e, &v_e, 3.0, duration).unwrap();
        for axis in 0..3 {
            let oracle = minsnap_oracle(p_e[axis], v_e[axis], duration);
            for k in 0..=50 {
                let s = duration * k as f64 / 50.0;
                for d in 0..2 {
                    let expect = poly_eval(&poly_deriv(&oracle, d), s);
                    let got = traj.derivative_unchecked(3.0 + s, d)[axis];
                    assert!((got - expect).abs() <= 1e-8, "T={duration} axis={axis} d={d}: {got} vs {expect}");
                }
            }
        }
    }
}

#[test]
fn evaluation_outside_window_fails() {
    let traj = minsnap_solve(&Vec3::zeros(), &Vec3::x(), 1.0, 5.0).unwrap();
    assert!(matches!(minsnap_eval(&traj, 0.99), Err(Error::OutOfWindow { .. })));
    assert!(matches!(minsnap_eval(&traj, 6.01), Err(Error::OutOfWindow { .. })));
    assert!(minsnap_eval(&traj, 6.0).is_ok());
}

proptest! {
    #[test]
    fn boundary_conditions_hold(p_e in vec3(), v_e in vec3(), t_e in 0.0f64..100.0, duration in 0.2f64..20.0) {
        let traj = minsnap_solve(&p_e, &v_e, t_e, duration).unwrap();
        let end = traj.end();
        let scale = 1.0 + p_e.norm() + v_e.norm();
        prop_assert!((traj.derivative(t_e, 0).unwrap() - p_e).norm() <= 1e-9 * scale);
        prop_assert!((traj.derivative(t_e, 1).unwrap() - v_e).norm() <= 1e-9 * scale);
        prop_assert!((traj.derivative(end, 0).unwrap() - p_e).norm() <= 1e-9 * scale);
        for k in 1..4 {
            prop_assert!(traj.derivative(end, k).unwrap().norm() <= 1e-9 * scale / duration.min(1.0).powi(k as i32));
        }
    }

    #[test]
    fn feasible_perturbations_never_lower_the_cost(
        p_e in vec3(), v_e in vec3(), duration in 0.5f64..10.0,
        a in -1.0f64..1.0, b in -1.0f64..1.0, log_eps in -4.0f64..0.0,
    ) {
        let traj = minsnap_solve(&p_e, &v_e, 0.0, duration).unwrap();
        let eps = 10f64.powf(log_eps);
        let delta = null_perturbation(eps * a, eps * b, duration);
        for axis in 0..3 {
            let c = traj.coeffs[axis];
            let perturbed: Vec<f64> = c.iter().zip(&delta).map(|(x, d)| x + d).collect();
            let j0 = snap_cost_quadrature(&c, duration);
            let j1 = snap_cost_quadrature(&perturbed, duration);
            prop_assert!(j1 >= j0 - 1e-10 * (1.0 + j0));
        }
    }

    #[test]
    fn shifting_the_start_time_translates_the_trajectory(
        p_e in vec3(), v_e in vec3(), shift in 0.0f64..50.0, s in 0.0f64..1.0,
    ) {
        let a = minsnap_solve(&p_e, &v_e, 0.0, 5.0).unwrap();
        let b = minsnap_solve(&p_e, &v_e, shift, 5.0).unwrap();
        let (pa, va) = minsnap_eval(&a, 5.0 * s).unwrap();
        let (pb, vb) = minsnap_eval(&b, shift + 5.0 * s).unwrap();
        prop_assert!((pa - pb).norm() < 1e-9 && (va - vb).norm() < 1e-9);
    }
}
