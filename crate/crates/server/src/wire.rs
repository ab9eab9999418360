//! JSON messages exchanged with the operator client. Every message is an
//! object with an `"op"` discriminator.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use fwpd_core::session::LogEntry;
use fwpd_core::waypoint::{ColorState, WaypointId, WaypointKind};
use fwpd_core::{ArmTarget, Pose2, RobotState};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Inbound {
    CreateWaypoint {
        kind: WaypointKind,
        #[serde(default)]
        target: Option<ArmTarget>,
        #[serde(default)]
        pose: Option<Pose2>,
        #[serde(default)]
        gripper_command: Option<f64>,
        #[serde(default)]
        height_command: Option<f64>,
        #[serde(default)]
        collision_toggle: Option<bool>,
        /// Label of the waypoint to insert after; appended when absent.
        #[serde(default)]
        insert_after: Option<usize>,
    },
    MoveWaypoint {
        id: WaypointId,
        #[serde(default)]
        target: Option<ArmTarget>,
        #[serde(default)]
        pose: Option<Pose2>,
    },
    DuplicateAfter {
        id: WaypointId,
        #[serde(default)]
        target: Option<ArmTarget>,
        #[serde(default)]
        pose: Option<Pose2>,
    },
    RemoveLast {
        kind: WaypointKind,
    },
    SetGripper {
        id: WaypointId,
        value: f64,
    },
    SetHeight {
        id: WaypointId,
        value: f64,
    },
    SetCollisionToggle {
        id: WaypointId,
        enabled: bool,
    },
    RequestPlan {
        kind: WaypointKind,
    },
    Approve,
    Deny,
    ImmediateHeight {
        value: f64,
    },
    ImmediateGripper {
        value: f64,
    },
    LookAt {
        x: f64,
        y: f64,
        z: f64,
    },
}

pub const INBOUND_OPS: &[&str] = &[
    "create_waypoint",
    "move_waypoint",
    "duplicate_after",
    "remove_last",
    "set_gripper",
    "set_height",
    "set_collision_toggle",
    "request_plan",
    "approve",
    "deny",
    "immediate_height",
    "immediate_gripper",
    "look_at",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    UnknownOp,
    BadMessage,
    KindMismatch,
    BadPosition,
    NotFound,
    PlacementBlocked,
    Busy,
    BadState,
    EmptyList,
    InvalidValue,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message}")]
pub struct WireError {
    pub code: ErrorCode,
    pub message: String,
}

impl WireError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

/// Decodes one inbound text frame.
pub fn parse_inbound(text: &str) -> Result<Inbound, WireError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| WireError::new(ErrorCode::BadMessage, format!("invalid JSON: {e}")))?;
    let op = value
        .as_object()
        .ok_or_else(|| WireError::new(ErrorCode::BadMessage, "message must be a JSON object"))?
        .get("op")
        .and_then(Value::as_str)
        .ok_or_else(|| WireError::new(ErrorCode::BadMessage, "message has no string \"op\""))?;
    if !INBOUND_OPS.contains(&op) {
        return Err(WireError::new(ErrorCode::UnknownOp, format!("unknown op {op:?}")));
    }
    serde_json::from_value(value).map_err(|e| WireError::new(ErrorCode::BadMessage, e.to_string()))
}

/// Current view of one waypoint, or its removal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaypointUpdate {
    pub list: WaypointKind,
    pub id: WaypointId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pose: Option<Pose2>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<ArmTarget>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub color_state: Option<ColorState>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gripper_command: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub height_command: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collision_toggle: Option<bool>,
    pub removed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Outbound {
    RobotState {
        t: f64,
        #[serde(flatten)]
        state: RobotState,
    },
    WaypointUpdate(WaypointUpdate),
    Status {
        text: String,
    },
    PlanProposal {
        kind: WaypointKind,
        ghost: Vec<RobotState>,
        path_markers: Vec<[f64; 2]>,
    },
    Event(LogEntry),
    Error {
        code: ErrorCode,
        message: String,
    },
}

impl From<WireError> for Outbound {
    fn from(e: WireError) -> Self {
        Outbound::Error { code: e.code, message: e.message }
    }
}

impl Outbound {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("outbound messages serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_errors() {
        assert_eq!(parse_inbound("{not json").unwrap_err().code, ErrorCode::BadMessage);
        assert_eq!(parse_inbound("[1,2]").unwrap_err().code, ErrorCode::BadMessage);
        assert_eq!(parse_inbound(r#"{"kind":"navigation"}"#).unwrap_err().code, ErrorCode::BadMessage);
        assert_eq!(parse_inbound(r#"{"op":"fly"}"#).unwrap_err().code, ErrorCode::UnknownOp);
        assert_eq!(parse_inbound(r#"{"op":"remove_last"}"#).unwrap_err().code, ErrorCode::BadMessage);
    }

    #[test]
    fn parse_ops() {
        assert_eq!(parse_inbound(r#"{"op":"approve"}"#).unwrap(), Inbound::Approve);
        let m = parse_inbound(r#"{"op":"create_waypoint","kind":"navigation","pose":{"x":1,"y":2,"heading":0.5}}"#).unwrap();
        assert!(matches!(m, Inbound::CreateWaypoint { kind: WaypointKind::Navigation, pose: Some(_), .. }));
    }

    #[test]
    fn every_listed_op_is_known() {
        for op in INBOUND_OPS {
            let err = parse_inbound(&format!(r#"{{"op":"{op}","bogus":true}}"#)).err();
            assert_ne!(err.map(|e| e.code), Some(ErrorCode::UnknownOp), "{op}");
        }
    }

    #[test]
    fn status_serializes_with_op() {
        let s = Outbound::Status { text: "Ready to plan!".into() }.to_json();
        assert_eq!(s, r#"{"op":"status","text":"Ready to plan!"}"#);
    }
}
