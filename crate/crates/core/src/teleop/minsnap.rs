//! Minimum-snap recovery trajectory.
//!
//! Each axis is a degree-7 polynomial over the window `[t_e, t_e + T]` that
//! minimises the integrated squared snap subject to
//!
//! - position equal to `p_e` at both ends,
//! - velocity `v_e` at the start and zero at the end,
//! - zero acceleration and jerk at the end.
//!
//! The QP is solved in normalised time `tau = (t - t_e) / T` through its KKT
//! system (8 coefficients plus 6 multipliers), then mapped back to SI
//! coefficients in `s = t - t_e`.

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::spatial::Vec3;

pub const DEGREE: usize = 7;
pub const NUM_COEFFS: usize = DEGREE + 1;
const NUM_CONSTRAINTS: usize = 6;
const KKT: usize = NUM_COEFFS + NUM_CONSTRAINTS;

pub const MIN_WINDOW: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryTrajectory {
    /// Per axis, `c_0..c_7` of `p(s) = sum c_i s^i` with `s = t - start`.
    pub coeffs: [[f64; NUM_COEFFS]; 3],
    pub start: f64,
    pub duration: f64,
}

/// `i! / (i - k)!`, zero when `k > i`.
fn falling(i: usize, k: usize) -> f64 {
    if k > i {
        return 0.0;
    }
    ((i - k + 1)..=i).map(|x| x as f64).product()
}

/// Snap Hessian on the unit interval: `H_ij = int_0^1 d4(tau^i) d4(tau^j)`.
fn unit_snap_hessian() -> SMatrix<f64, NUM_COEFFS, NUM_COEFFS> {
    SMatrix::from_fn(|i, j| {
        if i < 4 || j < 4 {
            0.0
        } else {
            falling(i, 4) * falling(j, 4) / (i + j - 7) as f64
        }
    })
}

/// Scaled coefficients `a_i` of `p(tau) = sum a_i tau^i` for one axis.
fn solve_axis(p_e: f64, v_e: f64, duration: f64) -> Result<[f64; NUM_COEFFS]> {
    let h = unit_snap_hessian();
    let mut a = SMatrix::<f64, NUM_CONSTRAINTS, NUM_COEFFS>::zeros();
    let mut b = SVector::<f64, NUM_CONSTRAINTS>::zeros();

    a[(0, 0)] = 1.0;
    b[0] = p_e;
    for i in 0..NUM_COEFFS {
        a[(1, i)] = 1.0;
        a[(3, i)] = falling(i, 1);
        a[(4, i)] = falling(i, 2);
        a[(5, i)] = falling(i, 3);
    }
    b[1] = p_e;
    a[(2, 1)] = 1.0;
    b[2] = v_e * duration;

    let mut kkt = SMatrix::<f64, KKT, KKT>::zeros();
    kkt.fixed_view_mut::<NUM_COEFFS, NUM_COEFFS>(0, 0).copy_from(&(2.0 * h));
    kkt.fixed_view_mut::<NUM_COEFFS, NUM_CONSTRAINTS>(0, NUM_COEFFS)
        .copy_from(&a.transpose());
    kkt.fixed_view_mut::<NUM_CONSTRAINTS, NUM_COEFFS>(NUM_COEFFS, 0).copy_from(&a);
    let mut rhs = SVector::<f64, KKT>::zeros();
    rhs.fixed_rows_mut::<NUM_CONSTRAINTS>(NUM_COEFFS).copy_from(&b);

    let sol = kkt
        .full_piv_lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem("minimum-snap KKT matrix".into()))?;
    let mut out = [0.0; NUM_COEFFS];
    out.copy_from_slice(&sol.as_slice()[..NUM_COEFFS]);
    Ok(out)
}

pub fn minsnap_solve(p_e: &Vec3, v_e: &Vec3, t_e: f64, duration: f64) -> Result<RecoveryTrajectory> {
    if !(duration >= MIN_WINDOW) {
        return Err(Error::DegenerateWindow { duration });
    }
    let mut coeffs = [[0.0; NUM_COEFFS]; 3];
    for axis in 0..3 {
        let scaled = solve_axis(p_e[axis], v_e[axis], duration)?;
        for (i, c) in coeffs[axis].iter_mut().enumerate() {
            *c = scaled[i] / duration.powi(i as i32);
        }
    }
    Ok(RecoveryTrajectory {
        coeffs,
        start: t_e,
        duration,
    })
}

impl RecoveryTrajectory {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end()
    }

    /// `k`-th time derivative at `t`, no window check.
    pub fn derivative_unchecked(&self, t: f64, k: usize) -> Vec3 {
        let s = t - self.start;
        Vec3::from_fn(|axis, _| {
            let c = &self.coeffs[axis];
            (k..NUM_COEFFS)
                .rev()
                .fold(0.0, |acc, i| acc * s + falling(i, k) * c[i])
        })
    }

    pub fn derivative(&self, t: f64, k: usize) -> Result<Vec3> {
        if !self.contains(t) {
            return Err(Error::OutOfWindow {
                t,
                start: self.start,
                end: self.end(),
            });
        }
        Ok(self.derivative_unchecked(t, k))
    }

    /// Exact integral of the squared snap over the window, summed over axes.
    pub fn snap_integral(&self) -> f64 {
        let t = self.duration;
        let mut total = 0.0;
        for c in &self.coeffs {
            for i in 4..NUM_COEFFS {
                for j in 4..NUM_COEFFS {
                    let n = (i + j - 7) as i32;
                    total += c[i] * c[j] * falling(i, 4) * falling(j, 4) * t.powi(n) / n as f64;
                }
            }
        }
        total
    }
}

/// Desired position and velocity at `t` (Horner evaluation).
pub fn minsnap_eval(traj: &RecoveryTrajectory, t: f64) -> Result<(Vec3, Vec3)> {
    Ok((traj.derivative(t, 0)?, traj.derivative(t, 1)?))
}
