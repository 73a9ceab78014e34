//! Commands sent by live clients.

use plugpull::Vec3;
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CommandFrame {
    /// Hand force on the handle, haptic base frame (N).
    HandleWrench(Vec3),
    /// Torque on the haptic gripper (N m).
    GripTorque(f64),
    /// UAM yaw setpoint (rad).
    YawSetpoint(f64),
    /// Restart the scenario from its initial state.
    Reset,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CommandError {
    #[error("malformed frame")]
    Malformed,
    #[error("unknown kind")]
    UnknownKind,
    #[error("invalid payload: {0}")]
    InvalidPayload(&'static str),
}

impl CommandError {
    /// JSON reply sent back to the client.
    pub fn reply(&self) -> String {
        serde_json::json!({ "error": self.to_string() }).to_string()
    }
}

fn finite(v: Option<&Value>) -> Option<f64> {
    v.and_then(Value::as_f64).filter(|x| x.is_finite())
}

impl CommandFrame {
    pub fn parse(text: &str) -> Result<Self, CommandError> {
        let v: Value = serde_json::from_str(text).map_err(|_| CommandError::Malformed)?;
        let obj = v.as_object().ok_or(CommandError::Malformed)?;
        let kind = obj.get("kind").and_then(Value::as_str).ok_or(CommandError::Malformed)?;
        match kind {
            "handle_wrench" => {
                let arr = obj
                    .get("force")
                    .and_then(Value::as_array)
                    .filter(|a| a.len() == 3)
                    .ok_or(CommandError::InvalidPayload("force must be an array of 3 numbers"))?;
                let mut f = Vec3::zeros();
                for (i, x) in arr.iter().enumerate() {
                    f[i] = finite(Some(x)).ok_or(CommandError::InvalidPayload("force must be finite"))?;
                }
                Ok(Self::HandleWrench(f))
            }
            "grip_torque" => finite(obj.get("torque"))
                .map(Self::GripTorque)
                .ok_or(CommandError::InvalidPayload("torque must be a finite number")),
            "yaw_setpoint" => finite(obj.get("yaw"))
                .map(Self::YawSetpoint)
                .ok_or(CommandError::InvalidPayload("yaw must be a finite number")),
            "reset" => Ok(Self::Reset),
            _ => Err(CommandError::UnknownKind),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_kind() {
        assert_eq!(
            CommandFrame::parse(r#"{"kind":"handle_wrench","force":[1,0,-2.5]}"#),
            Ok(CommandFrame::HandleWrench(Vec3::new(1.0, 0.0, -2.5)))
        );
        assert_eq!(
            CommandFrame::parse(r#"{"kind":"grip_torque","torque":0.4}"#),
            Ok(CommandFrame::GripTorque(0.4))
        );
        assert_eq!(
            CommandFrame::parse(r#"{"kind":"yaw_setpoint","yaw":0.5}"#),
            Ok(CommandFrame::YawSetpoint(0.5))
        );
        assert_eq!(CommandFrame::parse(r#"{"kind":"reset"}"#), Ok(CommandFrame::Reset));
    }

    #[test]
    fn rejects_bad_frames() {
        let err = CommandFrame::parse(r#"{"kind":"teleport"}"#).unwrap_err();
        assert_eq!(err.reply(), r#"{"error":"unknown kind"}"#);
        assert_eq!(CommandFrame::parse("not json"), Err(CommandError::Malformed));
        assert_eq!(CommandFrame::parse("[1,2]"), Err(CommandError::Malformed));
        assert!(matches!(
            CommandFrame::parse(r#"{"kind":"handle_wrench","force":[1,2]}"#),
            Err(CommandError::InvalidPayload(_))
        ));
        assert!(matches!(
            CommandFrame::parse(r#"{"kind":"grip_torque","torque":"lots"}"#),
            Err(CommandError::InvalidPayload(_))
        ));
        // 1e999 parses to infinity.
        assert!(matches!(
            CommandFrame::parse(r#"{"kind":"yaw_setpoint","yaw":1e999}"#),
            Err(_)
        ));
    }
}
