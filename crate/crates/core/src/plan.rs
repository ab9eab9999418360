//! Planner outputs shared by the manipulation and navigation planners.

use serde::{Deserialize, Serialize};

use crate::manip::ManipPlan;
use crate::nav::NavPlan;
use crate::robot::RobotState;
use crate::waypoint::WaypointKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    IkUnreachable,
    PlanTimeout,
    NoPath,
}

/// Why and where a plan could not be produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanFailure {
    /// 1-based label of the failing waypoint.
    pub label: usize,
    pub reason: FailureReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Proposal {
    Manipulation(ManipPlan),
    Navigation(NavPlan),
}

impl Proposal {
    pub fn kind(&self) -> WaypointKind {
        match self {
            Self::Manipulation(_) => WaypointKind::Manipulation,
            Self::Navigation(_) => WaypointKind::Navigation,
        }
    }

    pub fn segment_count(&self) -> usize {
        match self {
            Self::Manipulation(p) => p.segments.len(),
            Self::Navigation(p) => p.segments.len(),
        }
    }

    pub fn ghost(&self) -> &[RobotState] {
        match self {
            Self::Manipulation(p) => &p.ghost,
            Self::Navigation(p) => &p.ghost,
        }
    }

    pub fn path_markers(&self) -> &[[f64; 2]] {
        match self {
            Self::Manipulation(_) => &[],
            Self::Navigation(p) => &p.path_markers,
        }
    }
}

pub type PlanOutcome = Result<Proposal, PlanFailure>;
