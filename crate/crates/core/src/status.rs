//! Planner status shown to the operator.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum PlannerStatus {
    Ready,
    Planning,
    Successful,
    Executing { current: usize, total: usize },
    FailedAt { label: usize },
}

impl PlannerStatus {
    /// Whether a job or an execution currently owns the session.
    pub fn is_busy(&self) -> bool {
        matches!(self, Self::Planning | Self::Executing { .. })
    }

    /// Legal lifecycle edges.
    pub fn can_transition_to(&self, next: &PlannerStatus) -> bool {
        use PlannerStatus::*;
        match (self, next) {
            (Ready, Planning) => true,
            (Planning, Successful | FailedAt { .. }) => true,
            (Successful, Ready | Planning) => true,
            (Successful, Executing { current: 1, .. }) => true,
            (Executing { current, total }, Executing { current: c2, total: t2 }) => t2 == total && *c2 == current + 1,
            (Executing { current, total }, Ready) => current == total,
            (FailedAt { .. }, Ready | Planning) => true,
            _ => false,
        }
    }
}

impl fmt::Display for PlannerStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ready => f.write_str("Ready to plan!"),
            Self::Planning => f.write_str("Planning..."),
            Self::Successful => f.write_str("Plan Successful!"),
            Self::Executing { current, total } => write!(f, "Executing Waypoint {current} / {total}"),
            Self::FailedAt { label } => write!(f, "Plan Failed at Waypoint {label}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_verbatim() {
        assert_eq!(PlannerStatus::Ready.to_string(), "Ready to plan!");
        assert_eq!(PlannerStatus::Planning.to_string(), "Planning...");
        assert_eq!(PlannerStatus::Successful.to_string(), "Plan Successful!");
        assert_eq!(PlannerStatus::Executing { current: 2, total: 4 }.to_string(), "Executing Waypoint 2 / 4");
        assert_eq!(PlannerStatus::FailedAt { label: 1 }.to_string(), "Plan Failed at Waypoint 1");
    }

    #[test]
    fn transitions() {
        use PlannerStatus::*;
        assert!(Ready.can_transition_to(&Planning));
        assert!(!Ready.can_transition_to(&Successful));
        assert!(!Planning.can_transition_to(&Ready));
        assert!(Executing { current: 1, total: 2 }.can_transition_to(&Executing { current: 2, total: 2 }));
        assert!(!Executing { current: 1, total: 2 }.can_transition_to(&Ready));
        assert!(Executing { current: 2, total: 2 }.can_transition_to(&Ready));
    }
}
