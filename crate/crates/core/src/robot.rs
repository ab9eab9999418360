//! Kinematic description and live configuration of the simulated mobile manipulator.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{Interval, Pose2};

/// Static description of the robot.
///
/// The arm is a planar revolute chain working in the vertical plane through
/// the base center along the base heading. Link lengths are ordered from the
/// shoulder to the effector; the last link covers the gripper, so its tip is
/// the effector point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RobotModel {
    pub base_radius: f64,
    /// Shoulder mount height above the floor with the torso fully retracted.
    pub torso_base_height: f64,
    pub torso_range: Interval,
    pub shoulder_forward_offset: f64,
    pub link_lengths: Vec<f64>,
    pub joint_limits: Vec<Interval>,
    /// Capsule radius of every arm link.
    pub link_radius: f64,
    pub gripper_max_opening: f64,
    /// Height of the head (camera) above the shoulder mount.
    pub head_height_offset: f64,
    pub head_pan_limits: Interval,
    pub head_tilt_limits: Interval,
    pub base_max_speed: f64,
    pub base_max_turn_rate: f64,
    pub joint_max_speed: f64,
    pub torso_max_speed: f64,
    /// Aperture change rate of the gripper, in slider units per second.
    pub gripper_rate: f64,
}

impl Default for RobotModel {
    fn default() -> Self {
        let limit = 170f64.to_radians();
        Self {
            base_radius: 0.30,
            torso_base_height: 0.70,
            torso_range: Interval::new(0.0, 0.40),
            shoulder_forward_offset: 0.10,
            link_lengths: vec![0.35, 0.30, 0.15],
            joint_limits: vec![Interval::symmetric(limit); 3],
            link_radius: 0.03,
            gripper_max_opening: 0.10,
            head_height_offset: 0.35,
            head_pan_limits: Interval::symmetric(PI / 2.0),
            head_tilt_limits: Interval::new(-1.2, 0.8),
            base_max_speed: 1.0,
            base_max_turn_rate: 1.5,
            joint_max_speed: 0.5,
            torso_max_speed: 0.1,
            gripper_rate: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid robot model: {0}")]
pub struct ModelError(pub String);

impl RobotModel {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("base_radius", self.base_radius),
            ("torso_base_height", self.torso_base_height),
            ("shoulder_forward_offset", self.shoulder_forward_offset),
            ("link_radius", self.link_radius),
            ("gripper_max_opening", self.gripper_max_opening),
            ("base_max_speed", self.base_max_speed),
            ("base_max_turn_rate", self.base_max_turn_rate),
            ("joint_max_speed", self.joint_max_speed),
            ("torso_max_speed", self.torso_max_speed),
            ("gripper_rate", self.gripper_rate),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError(format!("{name} must be finite and > 0")));
            }
        }
        if self.torso_range.is_empty() || self.torso_range.lo < 0.0 {
            return Err(ModelError("torso_range must be a nonempty interval at or above 0".into()));
        }
        if self.link_lengths.is_empty() {
            return Err(ModelError("link_lengths must not be empty".into()));
        }
        if let Some(i) = self.link_lengths.iter().position(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(ModelError(format!("link_lengths[{i}] must be finite and > 0")));
        }
        if self.joint_limits.len() != self.link_lengths.len() {
            return Err(ModelError("joint_limits must have one entry per link".into()));
        }
        if let Some(i) = self.joint_limits.iter().position(Interval::is_empty) {
            return Err(ModelError(format!("joint_limits[{i}] is empty")));
        }
        if self.head_pan_limits.is_empty() || self.head_tilt_limits.is_empty() {
            return Err(ModelError("head limits must be nonempty".into()));
        }
        Ok(())
    }

    pub fn dof(&self) -> usize {
        self.link_lengths.len()
    }

    /// Arm length: the sum of all link lengths.
    pub fn reach(&self) -> f64 {
        self.link_lengths.iter().sum()
    }

    /// Shoulder height above the floor for a given torso extension.
    pub fn shoulder_height(&self, torso_height: f64) -> f64 {
        self.torso_base_height + torso_height
    }

    pub fn head_height(&self, torso_height: f64) -> f64 {
        self.shoulder_height(torso_height) + self.head_height_offset
    }

    /// Vertical extent occupied by the robot body above the floor (torso fully raised).
    pub fn body_height(&self) -> f64 {
        self.head_height(self.torso_range.hi)
    }

    pub fn clamp_joints(&self, joints: &mut [f64]) {
        for (q, lim) in joints.iter_mut().zip(&self.joint_limits) {
            *q = lim.clamp(*q);
        }
    }

    pub fn joints_within_limits(&self, joints: &[f64]) -> bool {
        joints.len() == self.dof() && joints.iter().zip(&self.joint_limits).all(|(q, l)| l.contains(*q))
    }

    /// Joint configuration used when the robot boots: arm folded up above the shoulder.
    pub fn tucked_joints(&self) -> Vec<f64> {
        let mut q = match self.dof() {
            3 => vec![1.5, -2.9, 1.4],
            n => {
                let mut q = vec![0.0; n];
                q[0] = PI / 2.0;
                q
            }
        };
        self.clamp_joints(&mut q);
        q
    }
}

/// Live configuration of the robot. Every value stays within the model's limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub base_pose: Pose2,
    pub torso_height: f64,
    pub joints: Vec<f64>,
    /// Gripper slider value, 0 closed .. 1 fully open.
    pub gripper_aperture: f64,
    pub head_pan: f64,
    pub head_tilt: f64,
}

impl RobotState {
    /// Robot at the origin facing +x with the torso retracted, arm tucked and gripper open.
    pub fn initial(model: &RobotModel) -> Self {
        Self {
            base_pose: Pose2::default(),
            torso_height: model.torso_range.lo,
            joints: model.tucked_joints(),
            gripper_aperture: 1.0,
            head_pan: model.head_pan_limits.clamp(0.0),
            head_tilt: model.head_tilt_limits.clamp(0.0),
        }
    }

    pub fn is_within_limits(&self, model: &RobotModel) -> bool {
        model.torso_range.contains(self.torso_height)
            && model.joints_within_limits(&self.joints)
            && (0.0..=1.0).contains(&self.gripper_aperture)
            && model.head_pan_limits.contains(self.head_pan)
            && model.head_tilt_limits.contains(self.head_tilt)
    }

    /// Physical finger opening in meters for the current slider value.
    pub fn gripper_opening(&self, model: &RobotModel) -> f64 {
        self.gripper_aperture * model.gripper_max_opening
    }
}
