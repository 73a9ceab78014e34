//! Post-separation metrics computed from a log.

use crate::plant::AttachState;
use crate::sim::log::SimLog;
use crate::spatial::Vec3;

/// Distance that counts as "back at the extraction point" (m).
pub const RETURN_RADIUS: f64 = 0.05;
/// How long the UAM must stay inside the return radius (s).
pub const RETURN_HOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Time of the first row showing the plug extracted (s).
    pub t_e: f64,
    pub p_e: Vec3,
    /// `max |p_c - p_e|` over `[t_e, t_e + window]` (m).
    pub overshoot: f64,
    /// Seconds after `t_e` at which the UAM is back within
    /// [`RETURN_RADIUS`] of `p_e` for [`RETURN_HOLD`], counted from the
    /// largest excursion. `None` if it never returns.
    pub time_to_return: Option<f64>,
    /// Peak force-rate norm over the whole log (N/s).
    pub peak_force_rate: f64,
}

/// Metrics, or `None` when the log has no separation.
pub fn compute_metrics(log: &SimLog, window: f64) -> Option<Metrics> {
    let rows = &log.rows;
    let peak_force_rate = rows.iter().map(|r| r.f_dot_norm).fold(0.0, f64::max);
    let k_e = rows.iter().position(|r| r.attach == AttachState::Extracted)?;
    let t_e = rows[k_e].t;
    let p_e = rows[k_e].p_c;

    let mut overshoot = 0.0;
    let mut k_peak = k_e;
    for (k, r) in rows.iter().enumerate().skip(k_e) {
        if r.t > t_e + window + 1e-9 {
            break;
        }
        let d = (r.p_c - p_e).norm();
        if d > overshoot {
            overshoot = d;
            k_peak = k;
        }
    }

    let mut inside_since: Option<f64> = None;
    let mut time_to_return = None;
    for r in &rows[k_peak..] {
        if (r.p_c - p_e).norm() <= RETURN_RADIUS {
            let since = *inside_since.get_or_insert(r.t);
            if r.t - since >= RETURN_HOLD - 1e-9 {
                time_to_return = Some(since - t_e);
                break;
            }
        } else {
            inside_since = None;
        }
    }

    Some(Metrics {
        t_e,
        p_e,
        overshoot,
        time_to_return,
        peak_force_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::Joint4;
    use crate::sim::log::LogRow;
    use crate::spatial::EulerAngles;
    use crate::teleop::Phase;

    fn log_from(positions: &[Vec3], extract_at: usize, dt: f64) -> SimLog {
        let rows = positions
            .iter()
            .enumerate()
            .map(|(k, p)| LogRow {
                t: k as f64 * dt,
                p_c: *p,
                p_cd: *p,
                v_c: Vec3::zeros(),
                attitude: EulerAngles::default(),
                theta_h: Joint4::zeros(),
                theta_hd: Joint4::zeros(),
                theta_g: 0.0,
                f_hat: Vec3::zeros(),
                f_dot_norm: k as f64,
                f_true: Vec3::zeros(),
                p_h: Vec3::zeros(),
                phase: Phase::Nominal,
                attach: if k >= extract_at {
                    AttachState::Extracted
                } else {
                    AttachState::Grasped
                },
            })
            .collect();
        SimLog { rows, breakaway_time: None }
    }

    #[test]
    fn no_separation_means_no_metrics() {
        let log = log_from(&[Vec3::zeros(); 10], 100, 0.1);
        assert!(compute_metrics(&log, 5.0).is_none());
    }

    #[test]
    fn constant_position_has_zero_overshoot() {
        let log = log_from(&[Vec3::new(1.0, 2.0, 3.0); 100], 10, 0.1);
        let m = compute_metrics(&log, 5.0).unwrap();
        assert_eq!(m.overshoot, 0.0);
        assert_eq!(m.t_e, 1.0);
        assert_eq!(m.time_to_return, Some(0.0));
        assert_eq!(m.peak_force_rate, 99.0);
    }

    #[test]
    fn single_excursion() {
        let dt = 0.01;
        let mut pos = vec![Vec3::zeros(); 1000];
        // Triangular excursion peaking at 0.8934 m, 1 s after separation.
        for (k, p) in pos.iter_mut().enumerate().skip(100).take(200) {
            let s = (k as f64 - 100.0) / 100.0;
            p.x = 0.8934 * (1.0 - (s - 1.0).abs());
        }
        let log = log_from(&pos, 100, dt);
        let m = compute_metrics(&log, 5.0).unwrap();
        assert!((m.overshoot - 0.8934).abs() < 1e-12);
        // Back below 0.05 m from k = 295 onward (x = 0.04467).
        let ttr = m.time_to_return.unwrap();
        assert!((ttr - 1.95).abs() < 1e-9, "{ttr}");

        // Rigid translation of everything leaves the metric unchanged.
        let shift = Vec3::new(3.0, -2.0, 1.0);
        let moved: Vec<Vec3> = pos.iter().map(|p| p + shift).collect();
        let m2 = compute_metrics(&log_from(&moved, 100, dt), 5.0).unwrap();
        assert!((m2.overshoot - m.overshoot).abs() < 1e-12);
    }

    #[test]
    fn excursions_after_the_window_are_ignored() {
        let mut pos = vec![Vec3::zeros(); 1000];
        pos[900].x = 2.0;
        let m = compute_metrics(&log_from(&pos, 100, 0.01), 5.0).unwrap();
        assert_eq!(m.overshoot, 0.0);
    }
}
