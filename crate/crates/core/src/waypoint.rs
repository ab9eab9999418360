//! Functional waypoints and the ordered waypoint-list algebra.
//!
//! Labels are 1-based positions in the list and are never stored; ids are
//! opaque and stable across renumbering.

use serde::{Deserialize, Serialize};

use crate::geometry::Pose2;
use crate::kinematics::{reach_precheck, ArmTarget, Reach};
use crate::nav::{placement_check, Placement};
use crate::robot::{RobotModel, RobotState};
use crate::scene::Scene;

pub type WaypointId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaypointKind {
    Manipulation,
    Navigation,
}

impl std::fmt::Display for WaypointKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Manipulation => "manipulation",
            Self::Navigation => "navigation",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorState {
    /// Plannable.
    #[default]
    Default,
    /// The placement pre-check failed.
    Warning,
    /// The last planning attempt failed at this waypoint.
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManipulationWaypoint {
    pub id: WaypointId,
    pub target: ArmTarget,
    /// Gripper slider value to apply after arriving, 0 closed .. 1 open.
    pub gripper_command: Option<f64>,
    pub color_state: ColorState,
    #[serde(skip)]
    plan_failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavigationWaypoint {
    pub id: WaypointId,
    pub pose: Pose2,
    /// Torso height to adopt after arriving.
    pub height_command: Option<f64>,
    /// When on, the waypoint cannot be moved into a colliding pose.
    pub collision_toggle: bool,
    pub color_state: ColorState,
    #[serde(skip)]
    plan_failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Waypoint {
    Manipulation(ManipulationWaypoint),
    Navigation(NavigationWaypoint),
}

impl Waypoint {
    pub fn id(&self) -> WaypointId {
        match self {
            Self::Manipulation(w) => w.id,
            Self::Navigation(w) => w.id,
        }
    }

    pub fn kind(&self) -> WaypointKind {
        match self {
            Self::Manipulation(_) => WaypointKind::Manipulation,
            Self::Navigation(_) => WaypointKind::Navigation,
        }
    }

    pub fn color_state(&self) -> ColorState {
        match self {
            Self::Manipulation(w) => w.color_state,
            Self::Navigation(w) => w.color_state,
        }
    }

    pub fn as_manipulation(&self) -> Option<&ManipulationWaypoint> {
        match self {
            Self::Manipulation(w) => Some(w),
            Self::Navigation(_) => None,
        }
    }

    pub fn as_navigation(&self) -> Option<&NavigationWaypoint> {
        match self {
            Self::Navigation(w) => Some(w),
            Self::Manipulation(_) => None,
        }
    }

    fn plan_failed(&self) -> bool {
        match self {
            Self::Manipulation(w) => w.plan_failed,
            Self::Navigation(w) => w.plan_failed,
        }
    }

    fn set_plan_failed(&mut self, failed: bool) {
        match self {
            Self::Manipulation(w) => w.plan_failed = failed,
            Self::Navigation(w) => w.plan_failed = failed,
        }
    }

    fn set_color(&mut self, c: ColorState) {
        match self {
            Self::Manipulation(w) => w.color_state = c,
            Self::Navigation(w) => w.color_state = c,
        }
    }
}

/// Waypoint contents supplied by the operator on creation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WaypointPayload {
    Manipulation {
        target: ArmTarget,
        #[serde(default)]
        gripper_command: Option<f64>,
    },
    Navigation {
        pose: Pose2,
        #[serde(default)]
        height_command: Option<f64>,
        #[serde(default = "default_toggle")]
        collision_toggle: bool,
    },
}

fn default_toggle() -> bool {
    true
}

impl WaypointPayload {
    pub fn manipulation(target: ArmTarget) -> Self {
        Self::Manipulation { target, gripper_command: None }
    }

    pub fn navigation(pose: Pose2) -> Self {
        Self::Navigation { pose, height_command: None, collision_toggle: true }
    }

    pub fn kind(&self) -> WaypointKind {
        match self {
            Self::Manipulation { .. } => WaypointKind::Manipulation,
            Self::Navigation { .. } => WaypointKind::Navigation,
        }
    }
}

/// New location for a waypoint being dragged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Location {
    Arm(ArmTarget),
    Floor(Pose2),
}

impl Location {
    fn kind(&self) -> WaypointKind {
        match self {
            Self::Arm(_) => WaypointKind::Manipulation,
            Self::Floor(_) => WaypointKind::Navigation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateCommand {
    Gripper(f64),
    Height(f64),
    CollisionToggle(bool),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WaypointError {
    #[error("expected a {expected} waypoint, got {found}")]
    KindMismatch { expected: WaypointKind, found: WaypointKind },
    #[error("position {position} is outside 1..={len}")]
    BadPosition { position: usize, len: usize },
    #[error("waypoint {0} not found")]
    NotFound(WaypointId),
    #[error("placement blocked: the footprint collides with the scene")]
    PlacementBlocked,
    #[error("invalid value: {0}")]
    InvalidValue(String),
}

/// Everything the placement pre-checks read.
#[derive(Debug, Clone, Copy)]
pub struct PrecheckEnv<'a> {
    pub model: &'a RobotModel,
    pub state: &'a RobotState,
    pub scene: &'a Scene,
}

impl PrecheckEnv<'_> {
    pub fn precheck(&self, wp: &Waypoint) -> ColorState {
        let failed = match wp {
            Waypoint::Manipulation(w) => reach_precheck(self.model, self.state, &w.target) == Reach::OutOfReach,
            Waypoint::Navigation(w) => self.pose_collides(&w.pose),
        };
        if failed {
            ColorState::Warning
        } else {
            ColorState::Default
        }
    }

    /// Color as a function of placement and the last plan result.
    pub fn color(&self, wp: &Waypoint) -> ColorState {
        if wp.plan_failed() {
            ColorState::Error
        } else {
            self.precheck(wp)
        }
    }

    fn pose_collides(&self, pose: &Pose2) -> bool {
        placement_check(self.scene, self.model, pose) == Placement::Colliding
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointList {
    kind: WaypointKind,
    items: Vec<Waypoint>,
}

impl WaypointList {
    pub fn new(kind: WaypointKind) -> Self {
        Self { kind, items: Vec::new() }
    }

    pub fn kind(&self) -> WaypointKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Waypoint> {
        self.items.iter()
    }

    /// `(label, waypoint)` pairs in execution order.
    pub fn labeled(&self) -> impl Iterator<Item = (usize, &Waypoint)> {
        self.items.iter().enumerate().map(|(i, w)| (i + 1, w))
    }

    pub fn labels(&self) -> Vec<usize> {
        (1..=self.items.len()).collect()
    }

    pub fn ids(&self) -> Vec<WaypointId> {
        self.items.iter().map(Waypoint::id).collect()
    }

    pub fn get(&self, id: WaypointId) -> Option<&Waypoint> {
        self.items.iter().find(|w| w.id() == id)
    }

    pub fn at_label(&self, label: usize) -> Option<&Waypoint> {
        label.checked_sub(1).and_then(|i| self.items.get(i))
    }

    pub fn label_of(&self, id: WaypointId) -> Option<usize> {
        self.index_of(id).map(|i| i + 1)
    }

    fn index_of(&self, id: WaypointId) -> Option<usize> {
        self.items.iter().position(|w| w.id() == id)
    }

    fn check_kind(&self, found: WaypointKind) -> Result<(), WaypointError> {
        if found == self.kind {
            Ok(())
        } else {
            Err(WaypointError::KindMismatch { expected: self.kind, found })
        }
    }

    /// Appends, or inserts right after the waypoint labeled `insert_after`.
    pub fn create(
        &mut self,
        id: WaypointId,
        payload: WaypointPayload,
        insert_after: Option<usize>,
        env: &PrecheckEnv<'_>,
    ) -> Result<WaypointId, WaypointError> {
        self.check_kind(payload.kind())?;
        debug_assert!(self.get(id).is_none(), "waypoint ids are unique");
        let index = match insert_after {
            None => self.items.len(),
            Some(pos) if (1..=self.items.len()).contains(&pos) => pos,
            Some(position) => return Err(WaypointError::BadPosition { position, len: self.items.len() }),
        };
        let mut wp = match payload {
            WaypointPayload::Manipulation { target, gripper_command } => {
                check_finite_target(&target)?;
                Waypoint::Manipulation(ManipulationWaypoint {
                    id,
                    target,
                    gripper_command: gripper_command.map(clamp_gripper).transpose()?,
                    color_state: ColorState::Default,
                    plan_failed: false,
                })
            }
            WaypointPayload::Navigation { pose, height_command, collision_toggle } => {
                check_finite_pose(&pose)?;
                Waypoint::Navigation(NavigationWaypoint {
                    id,
                    pose,
                    height_command: height_command.map(|h| clamp_height(env.model, h)).transpose()?,
                    collision_toggle,
                    color_state: ColorState::Default,
                    plan_failed: false,
                })
            }
        };
        wp.set_color(env.color(&wp));
        self.items.insert(index, wp);
        Ok(id)
    }

    /// Creates a waypoint at `location` immediately after the waypoint `held`.
    /// Navigation duplicates inherit the held waypoint's collision toggle.
    pub fn duplicate_after(
        &mut self,
        held: WaypointId,
        new_id: WaypointId,
        location: Location,
        env: &PrecheckEnv<'_>,
    ) -> Result<WaypointId, WaypointError> {
        self.check_kind(location.kind())?;
        let index = self.index_of(held).ok_or(WaypointError::NotFound(held))?;
        let payload = match (location, &self.items[index]) {
            (Location::Arm(target), _) => WaypointPayload::manipulation(target),
            (Location::Floor(pose), Waypoint::Navigation(h)) => {
                WaypointPayload::Navigation { pose, height_command: None, collision_toggle: h.collision_toggle }
            }
            (Location::Floor(pose), _) => WaypointPayload::navigation(pose),
        };
        self.create(new_id, payload, Some(index + 1), env)
    }

    pub fn remove_last(&mut self) -> Option<WaypointId> {
        self.items.pop().map(|w| w.id())
    }

    /// Moves a waypoint and refreshes its color. Any plan error on it is cleared.
    pub fn move_waypoint(
        &mut self,
        id: WaypointId,
        location: Location,
        env: &PrecheckEnv<'_>,
    ) -> Result<ColorState, WaypointError> {
        self.check_kind(location.kind())?;
        let index = self.index_of(id).ok_or(WaypointError::NotFound(id))?;
        let wp = &mut self.items[index];
        match (wp, location) {
            (Waypoint::Manipulation(w), Location::Arm(target)) => {
                check_finite_target(&target)?;
                w.target = target;
            }
            (Waypoint::Navigation(w), Location::Floor(pose)) => {
                check_finite_pose(&pose)?;
                if w.collision_toggle && env.pose_collides(&pose) {
                    return Err(WaypointError::PlacementBlocked);
                }
                w.pose = pose;
            }
            _ => unreachable!("kind checked above"),
        }
        let wp = &mut self.items[index];
        wp.set_plan_failed(false);
        let color = env.color(wp);
        wp.set_color(color);
        Ok(color)
    }

    /// Stores a per-waypoint state command, clamping numeric values to their legal range.
    pub fn set_state(&mut self, id: WaypointId, command: StateCommand, env: &PrecheckEnv<'_>) -> Result<(), WaypointError> {
        let index = self.index_of(id).ok_or(WaypointError::NotFound(id))?;
        match (&mut self.items[index], command) {
            (Waypoint::Manipulation(w), StateCommand::Gripper(g)) => w.gripper_command = Some(clamp_gripper(g)?),
            (Waypoint::Navigation(w), StateCommand::Height(h)) => w.height_command = Some(clamp_height(env.model, h)?),
            (Waypoint::Navigation(w), StateCommand::CollisionToggle(on)) => w.collision_toggle = on,
            (wp, _) => {
                let found = match command {
                    StateCommand::Gripper(_) => WaypointKind::Manipulation,
                    _ => WaypointKind::Navigation,
                };
                return Err(WaypointError::KindMismatch { expected: wp.kind(), found });
            }
        }
        let wp = &mut self.items[index];
        wp.set_color(env.color(wp));
        Ok(())
    }

    /// Recomputes every color from the current environment.
    pub fn refresh_colors(&mut self, env: &PrecheckEnv<'_>) {
        for wp in &mut self.items {
            let c = env.color(wp);
            wp.set_color(c);
        }
    }

    /// Forgets the previous plan result for every waypoint.
    pub fn clear_plan_errors(&mut self, env: &PrecheckEnv<'_>) {
        for wp in &mut self.items {
            wp.set_plan_failed(false);
        }
        self.refresh_colors(env);
    }

    /// Records a planner failure at `label` and colors that waypoint as an error.
    pub fn mark_plan_failure(&mut self, label: usize) {
        if let Some(wp) = label.checked_sub(1).and_then(|i| self.items.get_mut(i)) {
            wp.set_plan_failed(true);
            wp.set_color(ColorState::Error);
        }
    }
}

fn clamp_gripper(g: f64) -> Result<f64, WaypointError> {
    if g.is_finite() {
        Ok(g.clamp(0.0, 1.0))
    } else {
        Err(WaypointError::InvalidValue("gripper command must be finite".into()))
    }
}

fn clamp_height(model: &RobotModel, h: f64) -> Result<f64, WaypointError> {
    if h.is_finite() {
        Ok(model.torso_range.clamp(h))
    } else {
        Err(WaypointError::InvalidValue("height command must be finite".into()))
    }
}

fn check_finite_target(t: &ArmTarget) -> Result<(), WaypointError> {
    if !(t.d.is_finite() && t.z.is_finite() && t.pitch.is_finite()) {
        return Err(WaypointError::InvalidValue("arm target must be finite".into()));
    }
    if t.d < 0.0 {
        return Err(WaypointError::InvalidValue("arm target distance must be >= 0".into()));
    }
    Ok(())
}

fn check_finite_pose(p: &Pose2) -> Result<(), WaypointError> {
    if p.x.is_finite() && p.y.is_finite() && p.heading.is_finite() {
        Ok(())
    } else {
        Err(WaypointError::InvalidValue("pose must be finite".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Interval;
    use crate::scene::Obstacle;

    struct Fixture {
        model: RobotModel,
        state: RobotState,
        scene: Scene,
    }

    impl Fixture {
        fn new() -> Self {
            let model = RobotModel::default();
            let state = RobotState::initial(&model);
            let mut scene = Scene::empty("t", Interval::new(-5.0, 5.0), Interval::new(-5.0, 5.0));
            scene.obstacles.push(Obstacle::new(
                Interval::new(2.0, 3.0),
                Interval::new(-0.5, 0.5),
                Interval::new(0.0, 0.75),
                "table",
            ));
            scene.obstacles.push(Obstacle::new(
                Interval::new(-1.05, -0.95),
                Interval::new(-5.0, 5.0),
                Interval::new(0.0, 2.0),
                "wall",
            ));
            Self { model, state, scene }
        }

        fn env(&self) -> PrecheckEnv<'_> {
            PrecheckEnv { model: &self.model, state: &self.state, scene: &self.scene }
        }
    }

    fn arm(d: f64) -> WaypointPayload {
        WaypointPayload::manipulation(ArmTarget::new(d, 0.8, 0.0))
    }

    #[test]
    fn first_waypoint_gets_label_one() {
        let f = Fixture::new();
        let mut l = WaypointList::new(WaypointKind::Manipulation);
        let id = l.create(10, arm(0.5), None, &f.env()).unwrap();
        assert_eq!(l.label_of(id), Some(1));
    }

    #[test]
    fn duplicate_after_first_of_four_renumbers() {
        let f = Fixture::new();
        let mut l = WaypointList::new(WaypointKind::Manipulation);
        for id in 1..=4 {
            l.create(id, arm(0.3 + 0.05 * id as f64), None, &f.env()).unwrap();
        }
        let new = l.duplicate_after(1, 5, Location::Arm(ArmTarget::new(0.4, 0.9, 0.0)), &f.env()).unwrap();
        assert_eq!(l.label_of(new), Some(2));
        assert_eq!([l.label_of(2), l.label_of(3), l.label_of(4)], [Some(3), Some(4), Some(5)]);
        assert_eq!(l.ids(), vec![1, 5, 2, 3, 4]);
    }

    #[test]
    fn append_navigation_preserves_prefix() {
        let f = Fixture::new();
        let mut l = WaypointList::new(WaypointKind::Navigation);
        for id in 1..=3 {
            l.create(id, WaypointPayload::navigation(Pose2::new(id as f64 * 0.5, 1.5, 0.0)), None, &f.env()).unwrap();
        }
        l.create(4, WaypointPayload::navigation(Pose2::new(0.0, -2.0, 0.0)), None, &f.env()).unwrap();
        assert_eq!(l.labels(), vec![1, 2, 3, 4]);
        assert_eq!(l.ids(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn create_errors() {
        let f = Fixture::new();
        let mut l = WaypointList::new(WaypointKind::Manipulation);
        let err = l.create(1, WaypointPayload::navigation(Pose2::default()), None, &f.env()).unwrap_err();
        assert!(matches!(err, WaypointError::KindMismatch { .. }));
        assert_eq!(
            l.create(1, arm(0.5), Some(1), &f.env()).unwrap_err(),
            WaypointError::BadPosition { position: 1, len: 0 }
        );
        l.create(1, arm(0.5), None, &f.env()).unwrap();
        assert!(l.create(2, arm(0.5), Some(0), &f.env()).is_err());
        assert!(l.create(2, arm(0.5), Some(2), &f.env()).is_err());
        assert!(l.create(2, arm(0.5), Some(1), &f.env()).is_ok());
    }

    #[test]
    fn remove_last_is_lifo() {
        let f = Fixture::new();
        let mut l = WaypointList::new(WaypointKind::Manipulation);
        assert_eq!(l.remove_last(), None);
        l.create(1, arm(0.5), None, &f.env()).unwrap();
        l.create(2, arm(0.5), None, &f.env()).unwrap();
        assert_eq!(l.remove_last(), Some(2));
        assert_eq!(l.remove_last(), Some(1));
        assert!(l.is_empty());
        assert_eq!(l.remove_last(), None);
    }

    #[test]
    fn move_out_of_reach_warns() {
        let f = Fixture::new();
        let mut l = WaypointList::new(WaypointKind::Manipulation);
        l.create(1, arm(0.5), None, &f.env()).unwrap();
        let shoulder_z = f.model.shoulder_height(f.state.torso_height);
        let c = l.move_waypoint(1, Location::Arm(ArmTarget::new(f.model.reach() + 1.0, shoulder_z, 0.0)), &f.env()).unwrap();
        assert_eq!(c, ColorState::Warning);
        assert_eq!(l.move_waypoint(9, Location::Arm(ArmTarget::new(0.1, 1.0, 0.0)), &f.env()), Err(WaypointError::NotFound(9)));
    }

    #[test]
    fn move_clears_plan_error() {
        let f = Fixture::new();
        let mut l = WaypointList::new(WaypointKind::Manipulation);
        l.create(1, arm(0.5), None, &f.env()).unwrap();
        l.mark_plan_failure(1);
        assert_eq!(l.get(1).unwrap().color_state(), ColorState::Error);
        // recomputation keeps the error until the waypoint moves
        l.refresh_colors(&f.env());
        assert_eq!(l.get(1).unwrap().color_state(), ColorState::Error);
        assert_eq!(l.move_waypoint(1, Location::Arm(ArmTarget::new(0.4, 0.8, 0.0)), &f.env()), Ok(ColorState::Default));
    }

    #[test]
    fn toggle_on_blocks_colliding_move() {
        let f = Fixture::new();
        let mut l = WaypointList::new(WaypointKind::Navigation);
        l.create(1, WaypointPayload::navigation(Pose2::new(1.0, 0.0, 0.0)), None, &f.env()).unwrap();
        let into_table = Location::Floor(Pose2::new(1.85, 0.0, 0.0));
        assert_eq!(l.move_waypoint(1, into_table, &f.env()), Err(WaypointError::PlacementBlocked));
        assert_eq!(l.get(1).unwrap().as_navigation().unwrap().pose, Pose2::new(1.0, 0.0, 0.0));

        l.set_state(1, StateCommand::CollisionToggle(false), &f.env()).unwrap();
        assert_eq!(l.move_waypoint(1, into_table, &f.env()), Ok(ColorState::Warning));
    }

    #[test]
    fn move_through_wall_with_toggle_off() {
        let f = Fixture::new();
        let mut l = WaypointList::new(WaypointKind::Navigation);
        l.create(1, WaypointPayload::navigation(Pose2::new(0.0, 0.0, 0.0)), None, &f.env()).unwrap();
        l.set_state(1, StateCommand::CollisionToggle(false), &f.env()).unwrap();
        // drag into the wall, then re-enable the toggle while still colliding
        l.move_waypoint(1, Location::Floor(Pose2::new(-1.0, 0.0, 0.0)), &f.env()).unwrap();
        l.set_state(1, StateCommand::CollisionToggle(true), &f.env()).unwrap();
        assert_eq!(l.get(1).unwrap().color_state(), ColorState::Warning);
    }

    #[test]
    fn state_commands_clamp_and_check_kind() {
        let f = Fixture::new();
        let mut m = WaypointList::new(WaypointKind::Manipulation);
        m.create(1, arm(0.5), None, &f.env()).unwrap();
        m.set_state(1, StateCommand::Gripper(0.5), &f.env()).unwrap();
        assert_eq!(m.get(1).unwrap().as_manipulation().unwrap().gripper_command, Some(0.5));
        m.set_state(1, StateCommand::Gripper(1.7), &f.env()).unwrap();
        assert_eq!(m.get(1).unwrap().as_manipulation().unwrap().gripper_command, Some(1.0));
        assert!(matches!(m.set_state(1, StateCommand::Height(0.1), &f.env()), Err(WaypointError::KindMismatch { .. })));
        assert!(matches!(m.set_state(1, StateCommand::Gripper(f64::NAN), &f.env()), Err(WaypointError::InvalidValue(_))));
        assert_eq!(m.set_state(2, StateCommand::Gripper(0.1), &f.env()), Err(WaypointError::NotFound(2)));

        let mut n = WaypointList::new(WaypointKind::Navigation);
        n.create(1, WaypointPayload::navigation(Pose2::default()), None, &f.env()).unwrap();
        n.set_state(1, StateCommand::Height(f.model.torso_range.hi + 0.3), &f.env()).unwrap();
        assert_eq!(n.get(1).unwrap().as_navigation().unwrap().height_command, Some(f.model.torso_range.hi));
        assert!(matches!(n.set_state(1, StateCommand::Gripper(0.1), &f.env()), Err(WaypointError::KindMismatch { .. })));
    }

    #[test]
    fn color_recomputation_is_idempotent() {
        let f = Fixture::new();
        let mut l = WaypointList::new(WaypointKind::Navigation);
        let mut p = WaypointPayload::navigation(Pose2::new(2.5, 0.0, 0.0));
        if let WaypointPayload::Navigation { collision_toggle, .. } = &mut p {
            *collision_toggle = false;
        }
        l.create(1, p, None, &f.env()).unwrap();
        l.create(2, WaypointPayload::navigation(Pose2::new(0.0, 2.0, 0.0)), None, &f.env()).unwrap();
        l.mark_plan_failure(2);
        let before = l.clone();
        l.refresh_colors(&f.env());
        l.refresh_colors(&f.env());
        assert_eq!(before, l);
        assert_eq!(l.get(1).unwrap().color_state(), ColorState::Warning);
        assert_eq!(l.get(2).unwrap().color_state(), ColorState::Error);
    }
}
