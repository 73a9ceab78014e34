//! Telemetry frames sent to live clients and emitted by `replay`.
//!
//! Frames are flat JSON objects with a fixed key order and numbers at 6
//! significant digits, so encoding is canonical: decode then encode gives
//! back the same bytes.

use std::fmt::Write as _;

use plugpull::plant::AttachState;
use plugpull::sim::{format_sig6, ControlSnapshot, LogRow};
use plugpull::teleop::Phase;
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TelemetryFrame {
    pub t: f64,
    pub pc: [f64; 3],
    pub pcd: [f64; 3],
    pub fhat: [f64; 3],
    pub fdot_norm: f64,
    pub phase: String,
    #[serde(rename = "thetaH")]
    pub theta_h: [f64; 4],
    pub thetag: f64,
    pub attach: String,
}

fn arr<const N: usize>(v: impl Iterator<Item = f64>) -> [f64; N] {
    let mut out = [0.0; N];
    for (o, x) in out.iter_mut().zip(v) {
        *o = x;
    }
    out
}

fn phase_name(p: Phase) -> String {
    p.as_str().to_owned()
}

fn attach_name(a: AttachState) -> String {
    a.as_str().to_owned()
}

impl TelemetryFrame {
    pub fn from_snapshot(s: &ControlSnapshot) -> Self {
        Self::from_row(&s.to_row())
    }

    pub fn from_row(r: &LogRow) -> Self {
        Self {
            t: r.t,
            pc: arr(r.p_c.iter().copied()),
            pcd: arr(r.p_cd.iter().copied()),
            fhat: arr(r.f_hat.iter().copied()),
            fdot_norm: r.f_dot_norm,
            phase: phase_name(r.phase),
            theta_h: arr(r.theta_h.iter().copied()),
            thetag: r.theta_g,
            attach: attach_name(r.attach),
        }
    }

    pub fn encode(&self) -> String {
        fn nums(out: &mut String, key: &str, xs: &[f64]) {
            let _ = write!(out, "\"{key}\":[");
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&format_sig6(*x));
            }
            out.push_str("],");
        }
        let mut out = String::with_capacity(256);
        let _ = write!(out, "{{\"t\":{},", format_sig6(self.t));
        nums(&mut out, "pc", &self.pc);
        nums(&mut out, "pcd", &self.pcd);
        nums(&mut out, "fhat", &self.fhat);
        let _ = write!(out, "\"fdot_norm\":{},", format_sig6(self.fdot_norm));
        let _ = write!(out, "\"phase\":{},", serde_json::to_string(&self.phase).expect("string"));
        nums(&mut out, "thetaH", &self.theta_h);
        let _ = write!(out, "\"thetag\":{},", format_sig6(self.thetag));
        let _ = write!(out, "\"attach\":{}}}", serde_json::to_string(&self.attach).expect("string"));
        out
    }

    pub fn decode(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// Picks the rows to publish at a fixed rate: the first row at or after
/// each multiple of the telemetry period.
#[derive(Debug, Clone)]
pub struct Decimator {
    period: f64,
    next: u64,
}

impl Decimator {
    pub fn new(rate_hz: f64) -> Self {
        Self { period: 1.0 / rate_hz, next: 0 }
    }

    pub fn reset(&mut self) {
        self.next = 0;
    }

    pub fn accept(&mut self, t: f64) -> bool {
        if t + 1e-9 < self.next as f64 * self.period {
            return false;
        }
        self.next = (t / self.period + 1e-9).floor() as u64 + 1;
        true
    }
}

/// Frames for a whole log at `rate_hz`.
pub fn frames_from_rows(rows: &[LogRow], rate_hz: f64) -> Vec<TelemetryFrame> {
    let mut dec = Decimator::new(rate_hz);
    rows.iter()
        .filter(|r| dec.accept(r.t))
        .map(TelemetryFrame::from_row)
        .collect()
}
