//! Simulation log and its CSV form.
//!
//! One row per control period. Numbers are written with 6 significant
//! digits, so a parsed log differs from the in-memory one by at most the
//! rounding of the last digit.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::plant::{AttachState, Joint4};
use crate::spatial::{EulerAngles, Vec3};
use crate::teleop::Phase;

#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub p_c: Vec3,
    pub p_cd: Vec3,
    pub v_c: Vec3,
    pub attitude: EulerAngles,
    pub theta_h: Joint4,
    pub theta_hd: Joint4,
    pub theta_g: f64,
    /// Estimated external force, body frame (N).
    pub f_hat: Vec3,
    pub f_dot_norm: f64,
    /// True external force, body frame (N).
    pub f_true: Vec3,
    /// Handle displacement from home (m).
    pub p_h: Vec3,
    pub phase: Phase,
    pub attach: AttachState,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimLog {
    pub rows: Vec<LogRow>,
    /// Exact plant breakaway instant; not part of the CSV.
    pub breakaway_time: Option<f64>,
}

pub const CSV_COLUMNS: [&str; 34] = [
    "t", "pc_x", "pc_y", "pc_z", "pcd_x", "pcd_y", "pcd_z", "vc_x", "vc_y", "vc_z", "roll",
    "pitch", "yaw", "thetaH_1", "thetaH_2", "thetaH_3", "thetaH_4", "thetaHd_1", "thetaHd_2",
    "thetaHd_3", "thetaHd_4", "thetag", "fhat_x", "fhat_y", "fhat_z", "fdot_norm", "ftrue_x",
    "ftrue_y", "ftrue_z", "pH_x", "pH_y", "pH_z", "phase", "attach",
];

fn columns() -> &'static [&'static str] {
    &CSV_COLUMNS
}

/// `%g`-style formatting with 6 significant digits.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("float formatting round-trips");
    let exp = rounded.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn push_num(line: &mut String, x: f64) {
    line.push_str(&format_sig6(x));
    line.push(',');
}

impl SimLog {
    pub fn header() -> String {
        columns().join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut out = Self::header();
        out.push('\n');
        for r in &self.rows {
            let mut line = String::with_capacity(400);
            push_num(&mut line, r.t);
            for v in [&r.p_c, &r.p_cd, &r.v_c] {
                v.iter().for_each(|x| push_num(&mut line, *x));
            }
            r.attitude.to_vector().iter().for_each(|x| push_num(&mut line, *x));
            r.theta_h.iter().for_each(|x| push_num(&mut line, *x));
            r.theta_hd.iter().for_each(|x| push_num(&mut line, *x));
            push_num(&mut line, r.theta_g);
            r.f_hat.iter().for_each(|x| push_num(&mut line, *x));
            push_num(&mut line, r.f_dot_norm);
            r.f_true.iter().for_each(|x| push_num(&mut line, *x));
            r.p_h.iter().for_each(|x| push_num(&mut line, *x));
            let _ = write!(line, "{},{}", r.phase.as_str(), r.attach.as_str());
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::LogParse("empty log".into()))?;
        if header.trim_end() != Self::header() {
            return Err(Error::LogParse("unexpected header".into()));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let lineno = i + 2;
            let fields: Vec<&str> = line.trim_end().split(',').collect();
            if fields.len() != columns().len() {
                return Err(Error::LogParse(format!(
                    "line {lineno}: expected {} fields, got {}",
                    columns().len(),
                    fields.len()
                )));
            }
            let num = |k: usize| -> Result<f64> {
                fields[k]
                    .parse::<f64>()
                    .map_err(|_| Error::LogParse(format!("line {lineno}: bad number {:?}", fields[k])))
            };
            let v3 = |k: usize| -> Result<Vec3> { Ok(Vec3::new(num(k)?, num(k + 1)?, num(k + 2)?)) };
            let j4 = |k: usize| -> Result<Joint4> {
                Ok(Joint4::new(num(k)?, num(k + 1)?, num(k + 2)?, num(k + 3)?))
            };
            let phase = Phase::parse(fields[32])
                .ok_or_else(|| Error::LogParse(format!("line {lineno}: bad phase {:?}", fields[32])))?;
            let attach = AttachState::parse(fields[33])
                .ok_or_else(|| Error::LogParse(format!("line {lineno}: bad attach {:?}", fields[33])))?;
            rows.push(LogRow {
                t: num(0)?,
                p_c: v3(1)?,
                p_cd: v3(4)?,
                v_c: v3(7)?,
                attitude: EulerAngles::from_vector(&v3(10)?),
                theta_h: j4(13)?,
                theta_hd: j4(17)?,
                theta_g: num(21)?,
                f_hat: v3(22)?,
                f_dot_norm: num(25)?,
                f_true: v3(26)?,
                p_h: v3(29)?,
                phase,
                attach,
            });
        }
        Ok(Self { rows, breakaway_time: None })
    }
}
