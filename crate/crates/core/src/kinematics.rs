//! Planar arm kinematics, the reach pre-check, scene slicing into the arm
//! plane, and capsule-vs-rectangle arm collision tests.
//!
//! Arm-plane coordinates: `d` is the forward distance from the shoulder's
//! ground projection along the base heading, `z` is height above the floor.

use nalgebra::{Matrix3, Matrix3xX, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{angle_diff, Interval, Pose2, Rect, Vec2};
use crate::robot::{RobotModel, RobotState};
use crate::scene::Scene;

/// One angle (rad) per arm joint, shoulder first.
pub type JointVector = Vec<f64>;

/// Effector goal in arm-plane coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmTarget {
    /// Forward distance from the shoulder, meters (>= 0 for operator targets).
    pub d: f64,
    /// Height above the floor, meters.
    pub z: f64,
    /// Effector orientation in the arm plane, radians from horizontal.
    pub pitch: f64,
}

impl ArmTarget {
    pub const fn new(d: f64, z: f64, pitch: f64) -> Self {
        Self { d, z, pitch }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.d, self.z)
    }
}

/// Obstacle cross-section in the arm plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmPlaneObstacle {
    pub d: Interval,
    pub z: Interval,
    pub label: String,
}

impl ArmPlaneObstacle {
    pub fn rect(&self) -> Rect {
        Rect::new(self.d, self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reach {
    InReach,
    OutOfReach,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no inverse kinematics solution")]
pub struct NoSolution;

/// Joint positions of the chain in arm-plane coordinates: shoulder first, effector last.
pub fn chain_points(model: &RobotModel, joints: &[f64], torso_height: f64) -> Vec<Vec2> {
    let mut pts = Vec::with_capacity(joints.len() + 1);
    let mut p = Vec2::new(0.0, model.shoulder_height(torso_height));
    pts.push(p);
    let mut angle = 0.0;
    for (q, len) in joints.iter().zip(&model.link_lengths) {
        angle += q;
        p = p + Vec2::new(angle.cos(), angle.sin()) * *len;
        pts.push(p);
    }
    pts
}

pub fn fk(model: &RobotModel, joints: &[f64], torso_height: f64) -> ArmTarget {
    let tip = *chain_points(model, joints, torso_height).last().expect("chain has a shoulder point");
    ArmTarget::new(tip.x, tip.y, joints.iter().sum())
}

/// Position and orientation error of `joints` against `target`.
pub fn target_error(model: &RobotModel, joints: &[f64], torso_height: f64, target: &ArmTarget) -> (f64, f64) {
    let at = fk(model, joints, torso_height);
    (at.position().distance(target.position()), angle_diff(target.pitch, at.pitch).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IkConfig {
    pub restarts: usize,
    pub iterations: usize,
    pub damping: f64,
    pub tol_pos: f64,
    pub tol_ang: f64,
    /// Largest joint update per iteration (max-norm, rad).
    pub max_step: f64,
}

impl Default for IkConfig {
    fn default() -> Self {
        Self { restarts: 20, iterations: 200, damping: 0.05, tol_pos: 1e-3, tol_ang: 1e-3, max_step: 0.5 }
    }
}

/// Damped least-squares IK with random restarts.
///
/// The first attempt starts from `seed`; restarts draw uniform joint vectors
/// from the limits using `rng_seed`.
pub fn ik(
    model: &RobotModel,
    target: &ArmTarget,
    torso_height: f64,
    seed: &[f64],
    rng_seed: u64,
    cfg: &IkConfig,
) -> Result<JointVector, NoSolution> {
    ik_filtered(model, target, torso_height, seed, rng_seed, cfg, |_| true)
}

/// Like [`ik`], but keeps restarting while `accept` rejects a converged solution.
pub fn ik_filtered(
    model: &RobotModel,
    target: &ArmTarget,
    torso_height: f64,
    seed: &[f64],
    rng_seed: u64,
    cfg: &IkConfig,
    mut accept: impl FnMut(&[f64]) -> bool,
) -> Result<JointVector, NoSolution> {
    // Beyond the arm length no configuration reaches the target exactly; the
    // tolerance band must not turn an out-of-reach goal into a "solution".
    if beyond_reach(model, torso_height, target) {
        return Err(NoSolution);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut start: JointVector = seed.to_vec();
    start.resize(model.dof(), 0.0);
    for attempt in 0..=cfg.restarts {
        if attempt > 0 {
            start = model.joint_limits.iter().map(|l| rng.random_range(l.lo..=l.hi)).collect();
        }
        if let Some(q) = dls_solve(model, target, torso_height, &start, cfg) {
            if accept(&q) {
                return Ok(q);
            }
        }
    }
    Err(NoSolution)
}

fn dls_solve(model: &RobotModel, target: &ArmTarget, torso_height: f64, start: &[f64], cfg: &IkConfig) -> Option<JointVector> {
    let n = model.dof();
    let mut q = start.to_vec();
    model.clamp_joints(&mut q);
    let lambda2 = cfg.damping * cfg.damping;
    // Iterate well past the acceptance tolerance; accept against it at the end.
    let (fine_pos, fine_ang) = (cfg.tol_pos * 1e-3, cfg.tol_ang * 1e-3);

    for _ in 0..cfg.iterations {
        let at = fk(model, &q, torso_height);
        let err = Vector3::new(target.d - at.d, target.z - at.z, angle_diff(target.pitch, at.pitch));
        if err.xy().norm() <= fine_pos && err.z.abs() <= fine_ang {
            break;
        }

        let mut jac = Matrix3xX::<f64>::zeros(n);
        let mut angle = 0.0;
        let mut angles = Vec::with_capacity(n);
        for qi in &q {
            angle += qi;
            angles.push(angle);
        }
        // Column j accumulates every link at or beyond joint j.
        let (mut sd, mut sz) = (0.0, 0.0);
        for j in (0..n).rev() {
            let len = model.link_lengths[j];
            sd -= len * angles[j].sin();
            sz += len * angles[j].cos();
            jac[(0, j)] = sd;
            jac[(1, j)] = sz;
            jac[(2, j)] = 1.0;
        }

        let jjt = &jac * jac.transpose() + Matrix3::identity() * lambda2;
        let inv = jjt.try_inverse()?;
        let mut dq = jac.transpose() * (inv * err);
        let big = dq.amax();
        if big > cfg.max_step {
            dq *= cfg.max_step / big;
        }
        for (qi, d) in q.iter_mut().zip(dq.iter()) {
            *qi += d;
        }
        model.clamp_joints(&mut q);
    }

    let (pos, ang) = target_error(model, &q, torso_height, target);
    (pos <= cfg.tol_pos && ang <= cfg.tol_ang).then_some(q)
}

/// Farther from the shoulder than the fully stretched arm. The slack absorbs
/// rounding in the link-length sum so a straight arm counts as in reach.
fn beyond_reach(model: &RobotModel, torso_height: f64, target: &ArmTarget) -> bool {
    let shoulder = Vec2::new(0.0, model.shoulder_height(torso_height));
    shoulder.distance(target.position()) > model.reach() + 1e-9
}

/// Distance-only reach test from the shoulder. Does not plan.
pub fn reach_precheck(model: &RobotModel, state: &RobotState, target: &ArmTarget) -> Reach {
    if beyond_reach(model, state.torso_height, target) {
        Reach::OutOfReach
    } else {
        Reach::InReach
    }
}

/// Cross-sections of the scene's obstacles in the vertical plane through the
/// base center along its heading.
///
/// The whole line through the base is used (negative `d` lies behind the
/// shoulder), so boxes the arm can swing into from behind are kept. Heights
/// are measured from the scene floor.
pub fn slice_scene(scene: &Scene, model: &RobotModel, base_pose: &Pose2) -> Vec<ArmPlaneObstacle> {
    let (c, s) = (base_pose.heading.cos(), base_pose.heading.sin());
    scene
        .obstacles
        .iter()
        .filter_map(|ob| {
            let tx = line_slab(base_pose.x, c, &ob.x)?;
            let ty = line_slab(base_pose.y, s, &ob.y)?;
            let t = Interval::new(tx.lo.max(ty.lo), tx.hi.min(ty.hi));
            if t.is_empty() {
                return None;
            }
            let off = model.shoulder_forward_offset;
            Some(ArmPlaneObstacle {
                d: Interval::new(t.lo - off, t.hi - off),
                z: Interval::new(ob.z.lo - scene.floor_z, ob.z.hi - scene.floor_z),
                label: ob.label.clone(),
            })
        })
        .collect()
}

/// Parameter range where `origin + t * dir` lies inside `slab`.
fn line_slab(origin: f64, dir: f64, slab: &Interval) -> Option<Interval> {
    if dir.abs() < 1e-12 {
        return slab.contains(origin).then_some(Interval::new(f64::NEG_INFINITY, f64::INFINITY));
    }
    let a = (slab.lo - origin) / dir;
    let b = (slab.hi - origin) / dir;
    Some(Interval::new(a.min(b), a.max(b)))
}

/// True when any link capsule touches any obstacle rectangle.
pub fn arm_collides(model: &RobotModel, joints: &[f64], torso_height: f64, obstacles: &[ArmPlaneObstacle]) -> bool {
    arm_collides_with_margin(model, joints, torso_height, obstacles, 0.0)
}

/// Collision test with every link capsule inflated by `margin`.
pub fn arm_collides_with_margin(
    model: &RobotModel,
    joints: &[f64],
    torso_height: f64,
    obstacles: &[ArmPlaneObstacle],
    margin: f64,
) -> bool {
    if obstacles.is_empty() {
        return false;
    }
    let radius = model.link_radius + margin;
    let pts = chain_points(model, joints, torso_height);
    pts.windows(2).any(|seg| obstacles.iter().any(|ob| ob.rect().distance_to_segment(seg[0], seg[1]) <= radius))
}

/// Upper bound on how far any arm point moves per radian of max-norm joint motion.
pub fn lever_sum(model: &RobotModel) -> f64 {
    let n = model.dof();
    (0..n).map(|j| model.link_lengths[j..].iter().sum::<f64>()).sum()
}
