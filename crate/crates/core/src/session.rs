//! Operator session: two waypoint lists, the plan lifecycle and execution.
//!
//! Planning is split into `begin_plan` / `PlanJob::run` / `finish_plan` so a
//! host can report the planning status before the planner starts. Execution
//! is advanced by `tick`, which consumes simulated time.

use serde::{Deserialize, Serialize};

use crate::geometry::{angle_diff, Pose2};
use crate::ghost::{base_step_duration, gripper_duration, joint_step_duration, lerp_joints, lerp_pose, torso_duration};
use crate::manip::{plan_manipulation, ManipConfig};
use crate::nav::{plan_navigation, NavConfig};
use crate::plan::{FailureReason, PlanFailure, PlanOutcome, Proposal};
use crate::robot::{RobotModel, RobotState};
use crate::scene::Scene;
use crate::status::PlannerStatus;
use crate::waypoint::{
    Location, PrecheckEnv, StateCommand, Waypoint, WaypointError, WaypointId, WaypointKind, WaypointList,
    WaypointPayload,
};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub seed: u64,
    pub manip: ManipConfig,
    pub nav: NavConfig,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SessionError {
    #[error("the planner is busy ({0})")]
    Busy(String),
    #[error("not allowed while {0}")]
    BadState(String),
    #[error("the {0} list is empty")]
    EmptyList(WaypointKind),
    #[error(transparent)]
    Waypoint(#[from] WaypointError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SessionEvent {
    WaypointCreated { kind: WaypointKind, id: WaypointId, label: usize },
    WaypointMoved { kind: WaypointKind, id: WaypointId, label: usize },
    WaypointRemoved { kind: WaypointKind, id: WaypointId },
    WaypointStateSet { kind: WaypointKind, id: WaypointId, command: StateCommand },
    PlanRequested { kind: WaypointKind },
    PlanSucceeded { kind: WaypointKind, segments: usize },
    PlanFailed { kind: WaypointKind, label: usize, reason: FailureReason },
    PlanApproved { kind: WaypointKind },
    PlanDenied { kind: WaypointKind },
    ProposalDiscarded { kind: WaypointKind },
    SegmentStarted { kind: WaypointKind, index: usize, total: usize },
    WaypointReached { kind: WaypointKind, label: usize },
    StateCommandApplied { kind: WaypointKind, label: usize, command: StateCommand },
    PlanCompleted { kind: WaypointKind },
    ImmediateCommand { command: ImmediateCommand },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum ImmediateCommand {
    Height { value: f64 },
    Gripper { value: f64 },
    LookAt { x: f64, y: f64, z: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub t: f64,
    #[serde(flatten)]
    pub event: SessionEvent,
}

/// Snapshot of everything a planner run needs; independent of the session.
#[derive(Debug, Clone)]
pub struct PlanJob {
    kind: WaypointKind,
    model: RobotModel,
    state: RobotState,
    scene: Scene,
    waypoints: Vec<Waypoint>,
    seed: u64,
    config: SessionConfig,
}

impl PlanJob {
    pub fn kind(&self) -> WaypointKind {
        self.kind
    }

    pub fn run(&self) -> PlanOutcome {
        match self.kind {
            WaypointKind::Manipulation => {
                let wps: Vec<_> = self.waypoints.iter().filter_map(|w| w.as_manipulation().cloned()).collect();
                plan_manipulation(&self.model, &self.state, &self.scene, &wps, self.seed, &self.config.manip)
                    .map(Proposal::Manipulation)
                    .map_err(|f| PlanFailure { label: f.label, reason: f.reason })
            }
            WaypointKind::Navigation => {
                let wps: Vec<_> = self.waypoints.iter().filter_map(|w| w.as_navigation().cloned()).collect();
                plan_navigation(&self.scene, &self.model, &self.state, &wps, &self.config.nav)
                    .map(Proposal::Navigation)
                    .map_err(|f| PlanFailure { label: f.label, reason: f.reason })
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Step {
    Joints(Vec<f64>),
    Base(Pose2),
    Gripper(f64),
    Torso(f64),
}

impl Step {
    fn duration(&self, model: &RobotModel, from: &RobotState) -> f64 {
        match self {
            Step::Joints(q) => joint_step_duration(model, &from.joints, q),
            Step::Base(p) => base_step_duration(model, &from.base_pose, p),
            Step::Gripper(g) => gripper_duration(model, from.gripper_aperture, *g),
            Step::Torso(h) => torso_duration(model, from.torso_height, *h),
        }
    }

    /// Writes the state `frac` of the way from `from` to this step's target.
    fn apply(&self, from: &RobotState, frac: f64, to: &mut RobotState) {
        match self {
            Step::Joints(q) => to.joints = lerp_joints(&from.joints, q, frac),
            Step::Base(p) => to.base_pose = lerp_pose(&from.base_pose, p, frac),
            Step::Gripper(g) => to.gripper_aperture = from.gripper_aperture + (g - from.gripper_aperture) * frac,
            Step::Torso(h) => to.torso_height = from.torso_height + (h - from.torso_height) * frac,
        }
    }

    fn finish(&self, to: &mut RobotState) {
        match self {
            Step::Joints(q) => to.joints.clone_from(q),
            Step::Base(p) => to.base_pose = *p,
            Step::Gripper(g) => to.gripper_aperture = *g,
            Step::Torso(h) => to.torso_height = *h,
        }
    }

    fn command(&self) -> Option<StateCommand> {
        match self {
            Step::Gripper(g) => Some(StateCommand::Gripper(*g)),
            Step::Torso(h) => Some(StateCommand::Height(*h)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
struct ExecSegment {
    steps: Vec<Step>,
    command: Option<Step>,
}

#[derive(Debug, Clone)]
struct Execution {
    kind: WaypointKind,
    segments: Vec<ExecSegment>,
    seg: usize,
    step: usize,
    /// The path is done and the waypoint's state command is running.
    commanding: bool,
    /// State at the start of the current step.
    from: RobotState,
    elapsed: f64,
}

impl Execution {
    fn new(proposal: &Proposal, state: &RobotState) -> Self {
        let segments = match proposal {
            Proposal::Manipulation(p) => p
                .segments
                .iter()
                .map(|s| ExecSegment {
                    steps: s.path.iter().cloned().map(Step::Joints).collect(),
                    command: s.terminal_gripper.map(Step::Gripper),
                })
                .collect(),
            Proposal::Navigation(p) => p
                .segments
                .iter()
                .map(|s| ExecSegment {
                    steps: s.poses.iter().copied().map(Step::Base).collect(),
                    command: s.terminal_height.map(Step::Torso),
                })
                .collect(),
        };
        Self { kind: proposal.kind(), segments, seg: 0, step: 0, commanding: false, from: state.clone(), elapsed: 0.0 }
    }
}

/// Rate-limited targets set by immediate commands.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Pending {
    torso: Option<f64>,
    gripper: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Session {
    model: RobotModel,
    scene: Scene,
    config: SessionConfig,
    state: RobotState,
    manipulation: WaypointList,
    navigation: WaypointList,
    status: PlannerStatus,
    /// Every status the session has been in, in order.
    status_history: Vec<PlannerStatus>,
    proposal: Option<Proposal>,
    execution: Option<Execution>,
    pending: Pending,
    next_id: WaypointId,
    plans_requested: u64,
    time: f64,
    log: Vec<LogEntry>,
}

impl Session {
    pub fn new(model: RobotModel, scene: Scene, config: SessionConfig) -> Self {
        let state = RobotState::initial(&model);
        Self::with_state(model, scene, config, state)
    }

    pub fn with_state(model: RobotModel, scene: Scene, config: SessionConfig, state: RobotState) -> Self {
        Self {
            model,
            scene,
            config,
            state,
            manipulation: WaypointList::new(WaypointKind::Manipulation),
            navigation: WaypointList::new(WaypointKind::Navigation),
            status: PlannerStatus::Ready,
            status_history: vec![PlannerStatus::Ready],
            proposal: None,
            execution: None,
            pending: Pending::default(),
            next_id: 1,
            plans_requested: 0,
            time: 0.0,
            log: Vec::new(),
        }
    }

    pub fn model(&self) -> &RobotModel {
        &self.model
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn state(&self) -> &RobotState {
        &self.state
    }

    pub fn status(&self) -> PlannerStatus {
        self.status
    }

    /// Statuses in the order they were entered, starting with the initial one.
    pub fn status_history(&self) -> &[PlannerStatus] {
        &self.status_history
    }

    fn set_status(&mut self, status: PlannerStatus) {
        if status != self.status {
            self.status = status;
            self.status_history.push(status);
        }
    }

    pub fn proposal(&self) -> Option<&Proposal> {
        self.proposal.as_ref()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn list(&self, kind: WaypointKind) -> &WaypointList {
        match kind {
            WaypointKind::Manipulation => &self.manipulation,
            WaypointKind::Navigation => &self.navigation,
        }
    }

    /// Nothing is planning, executing or moving toward an immediate target.
    pub fn is_idle(&self) -> bool {
        !self.status.is_busy() && self.pending == Pending::default()
    }

    fn emit(&mut self, event: SessionEvent) {
        self.log.push(LogEntry { t: self.time, event });
    }

    fn split(&mut self, kind: WaypointKind) -> (&mut WaypointList, PrecheckEnv<'_>) {
        let list = match kind {
            WaypointKind::Manipulation => &mut self.manipulation,
            WaypointKind::Navigation => &mut self.navigation,
        };
        (list, PrecheckEnv { model: &self.model, state: &self.state, scene: &self.scene })
    }

    fn refresh_all_colors(&mut self) {
        for kind in [WaypointKind::Manipulation, WaypointKind::Navigation] {
            let (list, env) = self.split(kind);
            list.refresh_colors(&env);
        }
    }

    /// Gate for anything that edits waypoints or moves the robot directly.
    fn before_edit(&mut self) -> Result<(), SessionError> {
        if self.status.is_busy() {
            return Err(SessionError::Busy(self.status.to_string()));
        }
        if let Some(p) = self.proposal.take() {
            self.emit(SessionEvent::ProposalDiscarded { kind: p.kind() });
        }
        self.set_status(PlannerStatus::Ready);
        Ok(())
    }

    pub fn create_waypoint(&mut self, payload: WaypointPayload, insert_after: Option<usize>) -> Result<WaypointId, SessionError> {
        let kind = payload.kind();
        self.before_edit()?;
        let id = self.next_id;
        let (list, env) = self.split(kind);
        list.create(id, payload, insert_after, &env)?;
        let label = list.label_of(id).expect("just created");
        self.next_id += 1;
        self.emit(SessionEvent::WaypointCreated { kind, id, label });
        Ok(id)
    }

    pub fn duplicate_after(&mut self, held: WaypointId, location: Location) -> Result<WaypointId, SessionError> {
        let kind = self.kind_of(held)?;
        self.before_edit()?;
        let id = self.next_id;
        let (list, env) = self.split(kind);
        list.duplicate_after(held, id, location, &env)?;
        let label = list.label_of(id).expect("just created");
        self.next_id += 1;
        self.emit(SessionEvent::WaypointCreated { kind, id, label });
        Ok(id)
    }

    pub fn remove_last(&mut self, kind: WaypointKind) -> Result<WaypointId, SessionError> {
        if self.list(kind).is_empty() {
            return Err(SessionError::EmptyList(kind));
        }
        self.before_edit()?;
        let (list, _) = self.split(kind);
        let id = list.remove_last().expect("checked nonempty");
        self.emit(SessionEvent::WaypointRemoved { kind, id });
        Ok(id)
    }

    pub fn move_waypoint(&mut self, id: WaypointId, location: Location) -> Result<(), SessionError> {
        let kind = self.kind_of(id)?;
        self.before_edit()?;
        let (list, env) = self.split(kind);
        list.move_waypoint(id, location, &env)?;
        let label = list.label_of(id).expect("present");
        self.emit(SessionEvent::WaypointMoved { kind, id, label });
        Ok(())
    }

    pub fn set_waypoint_state(&mut self, id: WaypointId, command: StateCommand) -> Result<(), SessionError> {
        let kind = self.kind_of(id)?;
        self.before_edit()?;
        let (list, env) = self.split(kind);
        list.set_state(id, command, &env)?;
        self.emit(SessionEvent::WaypointStateSet { kind, id, command });
        Ok(())
    }

    /// Which list holds `id`.
    pub fn kind_of(&self, id: WaypointId) -> Result<WaypointKind, SessionError> {
        [WaypointKind::Manipulation, WaypointKind::Navigation]
            .into_iter()
            .find(|k| self.list(*k).get(id).is_some())
            .ok_or(SessionError::Waypoint(WaypointError::NotFound(id)))
    }

    /// Moves to Planning and snapshots the inputs for a planner run.
    pub fn begin_plan(&mut self, kind: WaypointKind) -> Result<PlanJob, SessionError> {
        if self.status.is_busy() {
            return Err(SessionError::Busy(self.status.to_string()));
        }
        if self.pending != Pending::default() {
            return Err(SessionError::Busy("the robot is still moving".into()));
        }
        if self.list(kind).is_empty() {
            return Err(SessionError::EmptyList(kind));
        }
        if let Some(p) = self.proposal.take() {
            self.emit(SessionEvent::ProposalDiscarded { kind: p.kind() });
        }
        let (list, env) = self.split(kind);
        list.clear_plan_errors(&env);
        let waypoints = list.iter().cloned().collect();
        let seed = self.config.seed.wrapping_add(self.plans_requested);
        self.plans_requested += 1;
        self.set_status(PlannerStatus::Planning);
        self.emit(SessionEvent::PlanRequested { kind });
        Ok(PlanJob {
            kind,
            model: self.model.clone(),
            state: self.state.clone(),
            scene: self.scene.clone(),
            waypoints,
            seed,
            config: self.config,
        })
    }

    /// Records the outcome of the job started by the last `begin_plan`.
    pub fn finish_plan(&mut self, kind: WaypointKind, outcome: PlanOutcome) -> Result<PlannerStatus, SessionError> {
        if self.status != PlannerStatus::Planning {
            return Err(SessionError::BadState(self.status.to_string()));
        }
        match outcome {
            Ok(proposal) => {
                self.emit(SessionEvent::PlanSucceeded { kind, segments: proposal.segment_count() });
                self.proposal = Some(proposal);
                self.set_status(PlannerStatus::Successful);
            }
            Err(f) => {
                let (list, _) = self.split(kind);
                list.mark_plan_failure(f.label);
                self.emit(SessionEvent::PlanFailed { kind, label: f.label, reason: f.reason });
                self.set_status(PlannerStatus::FailedAt { label: f.label });
            }
        }
        Ok(self.status)
    }

    /// Plans inline: `begin_plan`, run, `finish_plan`.
    pub fn request_plan(&mut self, kind: WaypointKind) -> Result<PlannerStatus, SessionError> {
        let job = self.begin_plan(kind)?;
        let outcome = job.run();
        self.finish_plan(kind, outcome)
    }

    pub fn approve(&mut self) -> Result<PlannerStatus, SessionError> {
        if self.status != PlannerStatus::Successful {
            return Err(SessionError::BadState(self.status.to_string()));
        }
        let proposal = self.proposal.take().expect("successful status carries a proposal");
        let kind = proposal.kind();
        let total = proposal.segment_count();
        self.execution = Some(Execution::new(&proposal, &self.state));
        self.emit(SessionEvent::PlanApproved { kind });
        self.set_status(PlannerStatus::Executing { current: 1, total });
        self.emit(SessionEvent::SegmentStarted { kind, index: 1, total });
        Ok(self.status)
    }

    pub fn deny(&mut self) -> Result<PlannerStatus, SessionError> {
        if self.status != PlannerStatus::Successful {
            return Err(SessionError::BadState(self.status.to_string()));
        }
        let proposal = self.proposal.take().expect("successful status carries a proposal");
        self.emit(SessionEvent::PlanDenied { kind: proposal.kind() });
        self.set_status(PlannerStatus::Ready);
        Ok(self.status)
    }

    pub fn immediate(&mut self, command: ImmediateCommand) -> Result<(), SessionError> {
        let finite = match command {
            ImmediateCommand::Height { value } | ImmediateCommand::Gripper { value } => value.is_finite(),
            ImmediateCommand::LookAt { x, y, z } => x.is_finite() && y.is_finite() && z.is_finite(),
        };
        if !finite {
            return Err(WaypointError::InvalidValue("immediate command values must be finite".into()).into());
        }
        self.before_edit()?;
        match command {
            ImmediateCommand::Height { value } => self.pending.torso = Some(self.model.torso_range.clamp(value)),
            ImmediateCommand::Gripper { value } => self.pending.gripper = Some(value.clamp(0.0, 1.0)),
            ImmediateCommand::LookAt { x, y, z } => {
                let (pan, tilt) = look_at_angles(&self.model, &self.state, x, y, z);
                self.state.head_pan = pan;
                self.state.head_tilt = tilt;
            }
        }
        self.emit(SessionEvent::ImmediateCommand { command });
        Ok(())
    }

    /// Advances simulated time by `dt` seconds.
    pub fn tick(&mut self, dt: f64) {
        self.advance_to(self.time + dt);
    }

    /// Advances simulated time to `t`. Events are stamped with the moment
    /// inside the interval at which they happen.
    pub fn advance_to(&mut self, t: f64) {
        assert!(t.is_finite() && t >= self.time, "time must be finite and must not run backwards");
        let dt = t - self.time;
        if self.execution.is_some() {
            self.advance_execution(dt);
        } else if self.pending != Pending::default() {
            self.advance_pending(dt);
        }
        self.time = t;
    }

    fn advance_pending(&mut self, dt: f64) {
        if let Some(target) = self.pending.torso {
            let h = &mut self.state.torso_height;
            *h = approach(*h, target, self.model.torso_max_speed * dt);
            if *h == target {
                self.pending.torso = None;
            }
        }
        if let Some(target) = self.pending.gripper {
            let g = &mut self.state.gripper_aperture;
            *g = approach(*g, target, self.model.gripper_rate * dt);
            if *g == target {
                self.pending.gripper = None;
            }
        }
        self.refresh_all_colors();
    }

    fn advance_execution(&mut self, dt: f64) {
        let start = self.time;
        let mut budget = dt;
        let mut exec = self.execution.take().expect("checked by caller");
        let kind = exec.kind;
        loop {
            let seg = &exec.segments[exec.seg];
            let label = exec.seg + 1;
            let current = if exec.commanding { seg.command.as_ref() } else { seg.steps.get(exec.step) };
            if let Some(step) = current {
                let duration = step.duration(&self.model, &exec.from);
                let remaining = duration - exec.elapsed;
                if budget < remaining {
                    exec.elapsed += budget;
                    step.apply(&exec.from, exec.elapsed / duration, &mut self.state);
                    break;
                }
                budget -= remaining.max(0.0);
                self.time = start + (dt - budget);
                step.finish(&mut self.state);
                exec.from = self.state.clone();
                exec.elapsed = 0.0;
                if !exec.commanding {
                    exec.step += 1;
                    continue;
                }
                let command = step.command().expect("command steps carry a state command");
                self.emit(SessionEvent::StateCommandApplied { kind, label, command });
            } else if !exec.commanding {
                self.emit(SessionEvent::WaypointReached { kind, label });
                if seg.command.is_some() {
                    exec.commanding = true;
                    continue;
                }
            }

            // Segment finished.
            exec.seg += 1;
            exec.step = 0;
            exec.commanding = false;
            let total = exec.segments.len();
            if exec.seg == total {
                self.emit(SessionEvent::PlanCompleted { kind });
                self.set_status(PlannerStatus::Ready);
                self.refresh_all_colors();
                return;
            }
            self.set_status(PlannerStatus::Executing { current: exec.seg + 1, total });
            self.emit(SessionEvent::SegmentStarted { kind, index: exec.seg + 1, total });
        }
        self.execution = Some(exec);
        self.refresh_all_colors();
    }
}

fn approach(current: f64, target: f64, max_delta: f64) -> f64 {
    if (target - current).abs() <= max_delta {
        target
    } else {
        current + max_delta.copysign(target - current)
    }
}

/// Head pan and tilt that point the camera at a world point, clamped to the head limits.
pub fn look_at_angles(model: &RobotModel, state: &RobotState, x: f64, y: f64, z: f64) -> (f64, f64) {
    let pose = &state.base_pose;
    let (dx, dy) = (x - pose.x, y - pose.y);
    let dz = z - model.head_height(state.torso_height);
    let pan = angle_diff(dy.atan2(dx), pose.heading);
    let tilt = dz.atan2(dx.hypot(dy));
    (model.head_pan_limits.clamp(pan), model.head_tilt_limits.clamp(tilt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Interval;
    use crate::kinematics::{fk, ArmTarget};

    fn session() -> Session {
        let scene = Scene::empty("open", Interval::new(-3.0, 3.0), Interval::new(-3.0, 3.0));
        Session::new(RobotModel::default(), scene, SessionConfig::default())
    }

    fn run_until_idle(s: &mut Session) {
        for _ in 0..100_000 {
            if s.is_idle() {
                return;
            }
            s.tick(0.05);
        }
        panic!("session never became idle");
    }

    #[test]
    fn navigation_lifecycle() {
        let mut s = session();
        s.create_waypoint(WaypointPayload::navigation(Pose2::new(1.0, 0.0, 0.0)), None).unwrap();
        s.create_waypoint(
            WaypointPayload::Navigation { pose: Pose2::new(1.0, 1.0, 1.0), height_command: Some(0.2), collision_toggle: true },
            None,
        )
        .unwrap();
        assert_eq!(s.request_plan(WaypointKind::Navigation).unwrap(), PlannerStatus::Successful);
        assert_eq!(s.approve().unwrap(), PlannerStatus::Executing { current: 1, total: 2 });
        let mut seen = vec![s.status()];
        while !s.is_idle() {
            s.tick(0.05);
            if seen.last() != Some(&s.status()) {
                seen.push(s.status());
            }
        }
        assert_eq!(
            seen,
            vec![
                PlannerStatus::Executing { current: 1, total: 2 },
                PlannerStatus::Executing { current: 2, total: 2 },
                PlannerStatus::Ready
            ]
        );
        assert_eq!(s.state().base_pose, Pose2::new(1.0, 1.0, 1.0));
        assert_eq!(s.state().torso_height, 0.2);
    }

    #[test]
    fn busy_rejections() {
        let mut s = session();
        s.create_waypoint(WaypointPayload::navigation(Pose2::new(1.0, 0.0, 0.0)), None).unwrap();
        let job = s.begin_plan(WaypointKind::Navigation).unwrap();
        assert!(matches!(s.remove_last(WaypointKind::Navigation), Err(SessionError::Busy(_))));
        assert!(matches!(s.immediate(ImmediateCommand::Height { value: 0.1 }), Err(SessionError::Busy(_))));
        assert!(matches!(s.approve(), Err(SessionError::BadState(_))));
        s.finish_plan(job.kind(), job.run()).unwrap();
        s.approve().unwrap();
        assert!(matches!(
            s.create_waypoint(WaypointPayload::navigation(Pose2::new(0.0, 1.0, 0.0)), None),
            Err(SessionError::Busy(_))
        ));
        run_until_idle(&mut s);
        assert_eq!(s.status(), PlannerStatus::Ready);
    }

    #[test]
    fn edit_after_success_discards_proposal() {
        let mut s = session();
        s.create_waypoint(WaypointPayload::navigation(Pose2::new(1.0, 0.0, 0.0)), None).unwrap();
        s.request_plan(WaypointKind::Navigation).unwrap();
        s.create_waypoint(WaypointPayload::navigation(Pose2::new(1.0, 1.0, 0.0)), None).unwrap();
        assert_eq!(s.status(), PlannerStatus::Ready);
        assert!(s.proposal().is_none());
    }

    #[test]
    fn failure_then_fix() {
        let mut s = session();
        let m = s.model().clone();
        let reachable = fk(&m, &[0.3, -0.4, 0.1], s.state().torso_height);
        s.create_waypoint(WaypointPayload::manipulation(reachable), None).unwrap();
        let far = s.create_waypoint(WaypointPayload::manipulation(ArmTarget::new(2.0, 0.7, 0.0)), None).unwrap();
        assert_eq!(s.request_plan(WaypointKind::Manipulation).unwrap(), PlannerStatus::FailedAt { label: 2 });
        assert_eq!(s.status().to_string(), "Plan Failed at Waypoint 2");
        s.move_waypoint(far, Location::Arm(reachable)).unwrap();
        assert_eq!(s.status(), PlannerStatus::Ready);
        assert_eq!(s.request_plan(WaypointKind::Manipulation).unwrap(), PlannerStatus::Successful);
    }

    #[test]
    fn immediate_height_is_rate_limited() {
        let mut s = session();
        s.immediate(ImmediateCommand::Height { value: 0.2 }).unwrap();
        s.tick(1.0);
        assert!((s.state().torso_height - 0.1).abs() < 1e-12);
        assert!(!s.is_idle());
        s.tick(1.0);
        assert_eq!(s.state().torso_height, 0.2);
        assert!(s.is_idle());
    }

    #[test]
    fn look_at_points_the_head() {
        let mut s = session();
        let h = s.model().head_height(s.state().torso_height);
        s.immediate(ImmediateCommand::LookAt { x: 0.0, y: 1.0, z: h - 1.0 }).unwrap();
        assert!((s.state().head_pan - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((s.state().head_tilt + std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn empty_list_cannot_plan() {
        let mut s = session();
        assert_eq!(s.request_plan(WaypointKind::Manipulation), Err(SessionError::EmptyList(WaypointKind::Manipulation)));
        assert_eq!(s.remove_last(WaypointKind::Navigation), Err(SessionError::EmptyList(WaypointKind::Navigation)));
    }
}
