//! Time parameterization of planned paths and ghost-robot sampling.
//!
//! Execution and preview share the same per-step durations, so the ghost
//! replays the motion at the speed the robot will actually move. Gripper and
//! torso commands are ramps of their own, after the arrival they belong to.

use crate::geometry::{angle_diff, Pose2};
use crate::robot::{RobotModel, RobotState};

/// Time to move between two joint vectors with every joint capped at `joint_max_speed`.
pub fn joint_step_duration(model: &RobotModel, a: &[f64], b: &[f64]) -> f64 {
    max_abs_diff(a, b) / model.joint_max_speed
}

/// Time to move the base between two poses, limited by linear and turn rates.
pub fn base_step_duration(model: &RobotModel, a: &Pose2, b: &Pose2) -> f64 {
    let lin = a.position().distance(b.position()) / model.base_max_speed;
    let ang = angle_diff(b.heading, a.heading).abs() / model.base_max_turn_rate;
    lin.max(ang)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn lerp_joints(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + (y - x) * s).collect()
}

pub fn lerp_pose(a: &Pose2, b: &Pose2, s: f64) -> Pose2 {
    Pose2::new(a.x + (b.x - a.x) * s, a.y + (b.y - a.y) * s, a.heading + angle_diff(b.heading, a.heading) * s)
}

/// Time for the gripper to move between two apertures.
pub fn gripper_duration(model: &RobotModel, a: f64, b: f64) -> f64 {
    (b - a).abs() / model.gripper_rate
}

/// Time for the torso to move between two heights.
pub fn torso_duration(model: &RobotModel, a: f64, b: f64) -> f64 {
    (b - a).abs() / model.torso_max_speed
}

/// One continuous channel moving between two values.
#[derive(Debug, Clone)]
pub(crate) enum Motion {
    Joints(Vec<f64>, Vec<f64>),
    Base(Pose2, Pose2),
    Gripper(f64, f64),
    Torso(f64, f64),
}

impl Motion {
    fn apply(&self, s: &mut RobotState, frac: f64) {
        match self {
            Motion::Joints(a, b) => s.joints = lerp_joints(a, b, frac),
            Motion::Base(a, b) => s.base_pose = lerp_pose(a, b, frac),
            Motion::Gripper(a, b) => s.gripper_aperture = a + (b - a) * frac,
            Motion::Torso(a, b) => s.torso_height = a + (b - a) * frac,
        }
    }

    fn finish(&self, s: &mut RobotState) {
        match self {
            Motion::Joints(_, b) => s.joints.clone_from(b),
            Motion::Base(_, b) => s.base_pose = *b,
            Motion::Gripper(_, b) => s.gripper_aperture = *b,
            Motion::Torso(_, b) => s.torso_height = *b,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Piece {
    pub t0: f64,
    pub t1: f64,
    pub motion: Motion,
}

/// Sequential motion pieces from a start state; one channel moves at a time.
#[derive(Debug, Clone)]
pub(crate) struct Timeline {
    start: RobotState,
    pieces: Vec<Piece>,
    end: RobotState,
    duration: f64,
}

impl Timeline {
    pub fn new(start: RobotState) -> Self {
        Self { end: start.clone(), start, pieces: Vec::new(), duration: 0.0 }
    }

    fn push(&mut self, dt: f64, motion: Motion) {
        if dt > 0.0 {
            let t0 = self.duration;
            self.duration += dt;
            self.pieces.push(Piece { t0, t1: self.duration, motion: motion.clone() });
        }
        motion.finish(&mut self.end);
    }

    pub fn push_joints(&mut self, model: &RobotModel, to: &[f64]) {
        let from = self.end.joints.clone();
        let dt = joint_step_duration(model, &from, to);
        self.push(dt, Motion::Joints(from, to.to_vec()));
    }

    pub fn push_base(&mut self, model: &RobotModel, to: &Pose2) {
        let from = self.end.base_pose;
        self.push(base_step_duration(model, &from, to), Motion::Base(from, *to));
    }

    pub fn push_gripper(&mut self, model: &RobotModel, to: f64) {
        let from = self.end.gripper_aperture;
        self.push(gripper_duration(model, from, to), Motion::Gripper(from, to));
    }

    pub fn push_torso(&mut self, model: &RobotModel, to: f64) {
        let from = self.end.torso_height;
        self.push(torso_duration(model, from, to), Motion::Torso(from, to));
    }

    #[cfg(test)]
    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// State at time `t`.
    pub fn state_at(&self, t: f64) -> RobotState {
        let mut s = self.start.clone();
        let idx = self.pieces.partition_point(|p| p.t0 <= t);
        if idx == 0 {
            return s;
        }
        for q in &self.pieces[..idx - 1] {
            q.motion.finish(&mut s);
        }
        let p = &self.pieces[idx - 1];
        p.motion.apply(&mut s, ((t - p.t0) / (p.t1 - p.t0)).clamp(0.0, 1.0));
        s
    }

    /// Samples every `dt` seconds from the start; the last sample is the end state.
    pub fn sample(&self, dt: f64) -> Vec<RobotState> {
        assert!(dt > 0.0, "sample period must be positive");
        if self.duration <= 0.0 {
            let mut out = vec![self.start.clone()];
            if self.end != self.start {
                out.push(self.end.clone());
            }
            return out;
        }
        let n = (self.duration / dt - 1e-9).ceil() as usize;
        let mut out: Vec<RobotState> = (0..n).map(|k| self.state_at(k as f64 * dt)).collect();
        out.push(self.end.clone());
        out
    }
}
