//! Message handling shared by the WebSocket server and headless replay.
//!
//! A `Host` owns one session, turns inbound frames into session calls and
//! reports every observable change as outbound messages. It also keeps the
//! trace: each inbound and outbound message with the simulated time.

use std::collections::BTreeMap;

use serde_json::Value;

use fwpd_core::session::{ImmediateCommand, Session, SessionConfig, SessionError};
use fwpd_core::waypoint::{Location, StateCommand, Waypoint, WaypointError, WaypointId, WaypointKind, WaypointPayload};
use fwpd_core::{PlannerStatus, RobotModel, Scene};

use crate::wire::{parse_inbound, ErrorCode, Inbound, Outbound, WaypointUpdate, WireError};

/// Receives each outbound frame as soon as it is produced.
pub type Sink<'a> = dyn FnMut(&str) + 'a;

pub struct Host {
    session: Session,
    dt: f64,
    ticks: u64,
    views: BTreeMap<(WaypointKind, WaypointId), WaypointUpdate>,
    sent_statuses: usize,
    sent_events: usize,
    proposal_sent: bool,
    trace: Vec<String>,
}

impl Host {
    pub fn new(model: RobotModel, scene: Scene, config: SessionConfig, tick_hz: f64) -> Self {
        assert!(tick_hz > 0.0 && tick_hz.is_finite(), "tick rate must be positive");
        Self {
            session: Session::new(model, scene, config),
            dt: 1.0 / tick_hz,
            ticks: 0,
            views: BTreeMap::new(),
            sent_statuses: 0,
            sent_events: 0,
            proposal_sent: false,
            trace: Vec::new(),
        }
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn time(&self) -> f64 {
        self.session.time()
    }

    pub fn tick_period(&self) -> f64 {
        self.dt
    }

    pub fn is_idle(&self) -> bool {
        self.session.is_idle()
    }

    /// Trace lines recorded so far, one JSON object each.
    pub fn trace(&self) -> &[String] {
        &self.trace
    }

    /// The session event log as JSONL lines.
    pub fn event_log_lines(&self) -> Vec<String> {
        self.session.log().iter().map(|e| serde_json::to_string(e).expect("log entries serialize")).collect()
    }

    /// First messages of a connection: the robot state and the planner status.
    pub fn greeting(&mut self, sink: &mut Sink<'_>) {
        self.send_robot_state(sink);
        self.flush(sink);
    }

    pub fn tick(&mut self, sink: &mut Sink<'_>) {
        // t = n * dt rather than a running sum, so times do not drift
        self.ticks += 1;
        self.session.advance_to(self.ticks as f64 * self.dt);
        self.send_robot_state(sink);
        self.flush(sink);
    }

    pub fn handle(&mut self, text: &str, sink: &mut Sink<'_>) {
        self.record("in", &inbound_value(text).to_string());
        match parse_inbound(text) {
            Err(e) => self.send(&e.into(), sink),
            Ok(msg) => {
                let subject = subject_of(&msg);
                if let Err(e) = self.dispatch(msg, sink) {
                    self.send(&e.into(), sink);
                    // Re-send the authoritative view so a rejected drag snaps back.
                    if let Some(update) = subject.and_then(|id| self.current_view(id)) {
                        self.send(&Outbound::WaypointUpdate(update), sink);
                    }
                }
            }
        }
        self.flush(sink);
    }

    fn dispatch(&mut self, msg: Inbound, sink: &mut Sink<'_>) -> Result<(), WireError> {
        let s = &mut self.session;
        match msg {
            Inbound::CreateWaypoint { kind, target, pose, gripper_command, height_command, collision_toggle, insert_after } => {
                let payload = match kind {
                    WaypointKind::Manipulation => WaypointPayload::Manipulation {
                        target: target.ok_or_else(|| missing("target"))?,
                        gripper_command,
                    },
                    WaypointKind::Navigation => WaypointPayload::Navigation {
                        pose: pose.ok_or_else(|| missing("pose"))?,
                        height_command,
                        collision_toggle: collision_toggle.unwrap_or(true),
                    },
                };
                s.create_waypoint(payload, insert_after).map(drop).map_err(session_error)
            }
            Inbound::MoveWaypoint { id, target, pose } => {
                s.move_waypoint(id, location(target, pose)?).map_err(session_error)
            }
            Inbound::DuplicateAfter { id, target, pose } => {
                s.duplicate_after(id, location(target, pose)?).map(drop).map_err(session_error)
            }
            Inbound::RemoveLast { kind } => s.remove_last(kind).map(drop).map_err(session_error),
            Inbound::SetGripper { id, value } => s.set_waypoint_state(id, StateCommand::Gripper(value)).map_err(session_error),
            Inbound::SetHeight { id, value } => s.set_waypoint_state(id, StateCommand::Height(value)).map_err(session_error),
            Inbound::SetCollisionToggle { id, enabled } => {
                s.set_waypoint_state(id, StateCommand::CollisionToggle(enabled)).map_err(session_error)
            }
            Inbound::RequestPlan { kind } => {
                let job = s.begin_plan(kind).map_err(session_error)?;
                // The operator sees "Planning..." before the planner starts.
                self.flush(sink);
                let outcome = job.run();
                self.session.finish_plan(kind, outcome).map(drop).map_err(session_error)
            }
            Inbound::Approve => s.approve().map(drop).map_err(session_error),
            Inbound::Deny => s.deny().map(drop).map_err(session_error),
            Inbound::ImmediateHeight { value } => s.immediate(ImmediateCommand::Height { value }).map_err(session_error),
            Inbound::ImmediateGripper { value } => s.immediate(ImmediateCommand::Gripper { value }).map_err(session_error),
            Inbound::LookAt { x, y, z } => s.immediate(ImmediateCommand::LookAt { x, y, z }).map_err(session_error),
        }
    }

    /// Sends everything that changed since the last flush.
    fn flush(&mut self, sink: &mut Sink<'_>) {
        let current = self.all_views();
        let mut updates = Vec::new();
        for (key, view) in &current {
            if self.views.get(key) != Some(view) {
                updates.push(view.clone());
            }
        }
        for (key, old) in &self.views {
            if !current.contains_key(key) {
                updates.push(WaypointUpdate {
                    list: old.list,
                    id: old.id,
                    label: None,
                    pose: None,
                    target: None,
                    color_state: None,
                    gripper_command: None,
                    height_command: None,
                    collision_toggle: None,
                    removed: true,
                });
            }
        }
        self.views = current;
        for u in updates {
            self.send(&Outbound::WaypointUpdate(u), sink);
        }

        match self.session.proposal() {
            Some(p) if !self.proposal_sent => {
                let msg = Outbound::PlanProposal {
                    kind: p.kind(),
                    ghost: p.ghost().to_vec(),
                    path_markers: p.path_markers().to_vec(),
                };
                self.proposal_sent = true;
                self.send(&msg, sink);
            }
            Some(_) => {}
            None => self.proposal_sent = false,
        }

        // Every transition is reported, even when several happen within one tick.
        let statuses: Vec<PlannerStatus> = self.session.status_history()[self.sent_statuses..].to_vec();
        self.sent_statuses = self.session.status_history().len();
        for status in statuses {
            self.send(&Outbound::Status { text: status.to_string() }, sink);
        }

        let new_events: Vec<_> = self.session.log()[self.sent_events..].to_vec();
        self.sent_events = self.session.log().len();
        for e in new_events {
            self.send(&Outbound::Event(e), sink);
        }
    }

    fn all_views(&self) -> BTreeMap<(WaypointKind, WaypointId), WaypointUpdate> {
        let mut out = BTreeMap::new();
        for kind in [WaypointKind::Manipulation, WaypointKind::Navigation] {
            for (label, wp) in self.session.list(kind).labeled() {
                out.insert((kind, wp.id()), view_of(kind, label, wp));
            }
        }
        out
    }

    fn current_view(&self, id: WaypointId) -> Option<WaypointUpdate> {
        let kind = self.session.kind_of(id).ok()?;
        let list = self.session.list(kind);
        let label = list.label_of(id)?;
        Some(view_of(kind, label, list.get(id)?))
    }

    fn send_robot_state(&mut self, sink: &mut Sink<'_>) {
        let msg = Outbound::RobotState { t: self.session.time(), state: self.session.state().clone() };
        self.send(&msg, sink);
    }

    fn send(&mut self, msg: &Outbound, sink: &mut Sink<'_>) {
        let json = msg.to_json();
        self.record("out", &json);
        sink(&json);
    }

    fn record(&mut self, dir: &str, msg_json: &str) {
        let t = serde_json::to_string(&self.session.time()).expect("finite time");
        self.trace.push(format!(r#"{{"t":{t},"dir":"{dir}","msg":{msg_json}}}"#));
    }
}

/// The inbound frame as it appears in the trace: parsed JSON, or the raw text as a string.
pub fn inbound_value(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|_| Value::String(text.to_owned()))
}

/// Inverse of [`inbound_value`].
pub fn inbound_text(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn view_of(kind: WaypointKind, label: usize, wp: &Waypoint) -> WaypointUpdate {
    let mut u = WaypointUpdate {
        list: kind,
        id: wp.id(),
        label: Some(label),
        pose: None,
        target: None,
        color_state: Some(wp.color_state()),
        gripper_command: None,
        height_command: None,
        collision_toggle: None,
        removed: false,
    };
    match wp {
        Waypoint::Manipulation(w) => {
            u.target = Some(w.target);
            u.gripper_command = w.gripper_command;
        }
        Waypoint::Navigation(w) => {
            u.pose = Some(w.pose);
            u.height_command = w.height_command;
            u.collision_toggle = Some(w.collision_toggle);
        }
    }
    u
}

fn subject_of(msg: &Inbound) -> Option<WaypointId> {
    match msg {
        Inbound::MoveWaypoint { id, .. }
        | Inbound::DuplicateAfter { id, .. }
        | Inbound::SetGripper { id, .. }
        | Inbound::SetHeight { id, .. }
        | Inbound::SetCollisionToggle { id, .. } => Some(*id),
        _ => None,
    }
}

fn missing(field: &str) -> WireError {
    WireError::new(ErrorCode::BadMessage, format!("missing field {field:?}"))
}

fn location(target: Option<fwpd_core::ArmTarget>, pose: Option<fwpd_core::Pose2>) -> Result<Location, WireError> {
    match (target, pose) {
        (Some(t), None) => Ok(Location::Arm(t)),
        (None, Some(p)) => Ok(Location::Floor(p)),
        _ => Err(WireError::new(ErrorCode::BadMessage, "exactly one of \"target\" or \"pose\" is required")),
    }
}

fn session_error(e: SessionError) -> WireError {
    let code = match &e {
        SessionError::Busy(_) => ErrorCode::Busy,
        SessionError::BadState(_) => ErrorCode::BadState,
        SessionError::EmptyList(_) => ErrorCode::EmptyList,
        SessionError::Waypoint(w) => match w {
            WaypointError::KindMismatch { .. } => ErrorCode::KindMismatch,
            WaypointError::BadPosition { .. } => ErrorCode::BadPosition,
            WaypointError::NotFound(_) => ErrorCode::NotFound,
            WaypointError::PlacementBlocked => ErrorCode::PlacementBlocked,
            WaypointError::InvalidValue(_) => ErrorCode::InvalidValue,
        },
    };
    WireError::new(code, e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use fwpd_core::Interval;

    fn host() -> Host {
        let scene = Scene::empty("open", Interval::new(-3.0, 3.0), Interval::new(-3.0, 3.0));
        Host::new(RobotModel::default(), scene, SessionConfig::default(), 20.0)
    }

    fn collect(h: &mut Host, text: &str) -> Vec<Value> {
        let mut out = Vec::new();
        h.handle(text, &mut |s: &str| out.push(serde_json::from_str(s).unwrap()));
        out
    }

    #[test]
    fn greeting_is_state_then_status() {
        let mut h = host();
        let mut out = Vec::new();
        h.greeting(&mut |s: &str| out.push(serde_json::from_str::<Value>(s).unwrap()));
        assert_eq!(out.len(), 2);
        assert_eq!(out[0]["op"], "robot_state");
        assert_eq!(out[1]["op"], "status");
        assert_eq!(out[1]["text"], "Ready to plan!");
    }

    #[test]
    fn unknown_op_does_not_touch_the_session() {
        let mut h = host();
        h.greeting(&mut |_| {});
        let out = collect(&mut h, r#"{"op":"teleport"}"#);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0]["code"], "unknown_op");
        assert!(h.session().log().is_empty());
    }

    #[test]
    fn create_then_remove() {
        let mut h = host();
        h.greeting(&mut |_| {});
        let out = collect(&mut h, r#"{"op":"create_waypoint","kind":"navigation","pose":{"x":1,"y":0,"heading":0}}"#);
        let ups: Vec<_> = out.iter().filter(|m| m["op"] == "waypoint_update").collect();
        assert_eq!(ups.len(), 1);
        assert_eq!(ups[0]["label"], 1);
        assert_eq!(ups[0]["color_state"], "default");
        let out = collect(&mut h, r#"{"op":"remove_last","kind":"navigation"}"#);
        let ups: Vec<_> = out.iter().filter(|m| m["op"] == "waypoint_update").collect();
        assert_eq!(ups.len(), 1);
        assert_eq!(ups[0]["removed"], true);
        let out = collect(&mut h, r#"{"op":"remove_last","kind":"navigation"}"#);
        assert_eq!(out[0]["code"], "empty_list");
    }

    #[test]
    fn plan_request_reports_planning_first() {
        let mut h = host();
        h.greeting(&mut |_| {});
        collect(&mut h, r#"{"op":"create_waypoint","kind":"navigation","pose":{"x":1,"y":0,"heading":0}}"#);
        let out = collect(&mut h, r#"{"op":"request_plan","kind":"navigation"}"#);
        let statuses: Vec<_> = out.iter().filter(|m| m["op"] == "status").map(|m| m["text"].clone()).collect();
        assert_eq!(statuses, vec!["Planning...", "Plan Successful!"]);
        assert!(out.iter().any(|m| m["op"] == "plan_proposal"));
    }
}
