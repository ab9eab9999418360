//! Planning engine for human-in-the-loop mobile manipulation with functional waypoints.
//!
//! Operators place ordered waypoints for the arm and for the base. Each list
//! is planned as a whole, previewed as a ghost robot, and executed only after
//! approval.

pub mod geometry;
pub mod ghost;
pub mod kinematics;
pub mod manip;
pub mod nav;
pub mod plan;
pub mod robot;
pub mod scene;
pub mod session;
pub mod status;
pub mod waypoint;

pub use geometry::{Interval, Pose2, Vec2};
pub use kinematics::ArmTarget;
pub use plan::{FailureReason, PlanFailure, PlanOutcome, Proposal};
pub use robot::{RobotModel, RobotState};
pub use scene::{Obstacle, Scene, SceneError};
pub use session::{ImmediateCommand, LogEntry, PlanJob, Session, SessionConfig, SessionError, SessionEvent};
pub use status::PlannerStatus;
pub use waypoint::{ColorState, Location, StateCommand, Waypoint, WaypointId, WaypointKind, WaypointList, WaypointPayload};
