//! Joint-space manipulation planning: IK per waypoint, RRT-Connect between
//! consecutive goals, shortcut smoothing and densification.
//!
//! Edge validity is checked at `edge_resolution` with link capsules inflated
//! by the largest distance any arm point can travel between two checks, so a
//! validated edge is collision-free at every intermediate configuration.

use std::time::{Duration, Instant};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ghost::{lerp_joints, max_abs_diff, Timeline};
use crate::kinematics::{arm_collides_with_margin, ik_filtered, lever_sum, slice_scene, ArmPlaneObstacle, IkConfig, JointVector};
use crate::plan::FailureReason;
use crate::robot::{RobotModel, RobotState};
use crate::scene::Scene;
use crate::waypoint::ManipulationWaypoint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ManipConfig {
    /// RRT extension step (Euclidean, rad).
    pub step: f64,
    /// Total node budget across both trees per segment.
    pub node_cap: usize,
    pub goal_bias: f64,
    pub smoothing_attempts: usize,
    /// Largest per-joint change between consecutive output states.
    pub step_max: f64,
    /// Max-norm spacing of collision checks along an edge.
    pub edge_resolution: f64,
    /// Wall-clock budget per segment, seconds.
    pub timeout_s: f64,
    pub ghost_dt: f64,
    pub ik: IkConfig,
}

impl Default for ManipConfig {
    fn default() -> Self {
        Self {
            step: 0.1,
            node_cap: 5000,
            goal_bias: 0.05,
            smoothing_attempts: 100,
            step_max: 0.05,
            edge_resolution: 0.01,
            timeout_s: 2.0,
            ghost_dt: 0.05,
            ik: IkConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManipSegment {
    pub start_joints: JointVector,
    pub end_joints: JointVector,
    pub path: Vec<JointVector>,
    pub terminal_gripper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManipPlan {
    pub start_state: RobotState,
    pub segments: Vec<ManipSegment>,
    pub ghost: Vec<RobotState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManipFailure {
    /// 1-based label of the waypoint that failed.
    pub label: usize,
    pub reason: FailureReason,
    /// Segments that were planned before the failure.
    pub completed: Vec<ManipSegment>,
}

/// Validity oracle used while planning at a fixed torso height and base pose.
pub struct ArmChecker<'a> {
    model: &'a RobotModel,
    torso_height: f64,
    obstacles: Vec<ArmPlaneObstacle>,
    margin: f64,
    resolution: f64,
}

impl<'a> ArmChecker<'a> {
    pub fn new(model: &'a RobotModel, state: &RobotState, scene: &Scene, edge_resolution: f64) -> Self {
        Self {
            model,
            torso_height: state.torso_height,
            obstacles: slice_scene(scene, model, &state.base_pose),
            margin: 0.5 * edge_resolution * lever_sum(model),
            resolution: edge_resolution,
        }
    }

    pub fn obstacles(&self) -> &[ArmPlaneObstacle] {
        &self.obstacles
    }

    pub fn is_valid(&self, q: &[f64]) -> bool {
        self.model.joints_within_limits(q)
            && !arm_collides_with_margin(self.model, q, self.torso_height, &self.obstacles, self.margin)
    }

    /// Checks the straight joint-space edge; `a` is assumed already valid.
    pub fn edge_valid(&self, a: &[f64], b: &[f64]) -> bool {
        let steps = (max_abs_diff(a, b) / self.resolution).ceil().max(1.0) as usize;
        (1..=steps).all(|i| self.is_valid(&lerp_joints(a, b, i as f64 / steps as f64)))
    }
}

/// Plans every waypoint in label order from the live joint configuration.
pub fn plan_manipulation(
    model: &RobotModel,
    state: &RobotState,
    scene: &Scene,
    waypoints: &[ManipulationWaypoint],
    rng_seed: u64,
    cfg: &ManipConfig,
) -> Result<ManipPlan, ManipFailure> {
    let checker = ArmChecker::new(model, state, scene, cfg.edge_resolution);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut segments: Vec<ManipSegment> = Vec::with_capacity(waypoints.len());
    let mut prev = state.joints.clone();

    for (i, wp) in waypoints.iter().enumerate() {
        let label = i + 1;
        let fail = |reason, completed| ManipFailure { label, reason, completed };
        let ik_seed = rng.next_u64();
        let goal = match ik_filtered(model, &wp.target, state.torso_height, &prev, ik_seed, &cfg.ik, |q| checker.is_valid(q)) {
            Ok(q) => q,
            Err(_) => return Err(fail(FailureReason::IkUnreachable, segments)),
        };
        let deadline = Instant::now() + Duration::from_secs_f64(cfg.timeout_s);
        let path = if goal == prev {
            vec![prev.clone()]
        } else {
            if !checker.is_valid(&prev) {
                return Err(fail(FailureReason::PlanTimeout, segments));
            }
            let Some(mut path) = rrt_connect(&checker, &prev, &goal, &mut rng, cfg, deadline) else {
                return Err(fail(FailureReason::PlanTimeout, segments));
            };
            shortcut(&checker, &mut path, &mut rng, cfg.smoothing_attempts);
            densify(&path, cfg.step_max)
        };
        segments.push(ManipSegment {
            start_joints: prev.clone(),
            end_joints: goal.clone(),
            path,
            terminal_gripper: wp.gripper_command,
        });
        prev = goal;
    }

    let ghost = manip_timeline(model, state, &segments).sample(cfg.ghost_dt);
    Ok(ManipPlan { start_state: state.clone(), segments, ghost })
}

struct Tree {
    nodes: Vec<JointVector>,
    parents: Vec<usize>,
}

impl Tree {
    fn new(root: JointVector) -> Self {
        Self { nodes: vec![root], parents: vec![usize::MAX] }
    }

    fn nearest(&self, q: &[f64]) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, n) in self.nodes.iter().enumerate() {
            let d: f64 = n.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }

    fn path_to_root(&self, mut i: usize) -> Vec<JointVector> {
        let mut out = Vec::new();
        while i != usize::MAX {
            out.push(self.nodes[i].clone());
            i = self.parents[i];
        }
        out
    }
}

enum Extend {
    Trapped,
    Advanced(usize),
    Reached(usize),
}

fn extend(checker: &ArmChecker<'_>, tree: &mut Tree, target: &[f64], step: f64) -> Extend {
    let near = tree.nearest(target);
    let from = &tree.nodes[near];
    let dist = from.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let (next, reached) = if dist <= step {
        (target.to_vec(), true)
    } else {
        (lerp_joints(from, target, step / dist), false)
    };
    if !checker.edge_valid(from, &next) {
        return Extend::Trapped;
    }
    tree.nodes.push(next);
    tree.parents.push(near);
    let idx = tree.nodes.len() - 1;
    if reached {
        Extend::Reached(idx)
    } else {
        Extend::Advanced(idx)
    }
}

/// Bidirectional RRT-Connect. Returns a path from `start` to `goal` or `None`
/// once the node budget or deadline is exhausted.
fn rrt_connect(
    checker: &ArmChecker<'_>,
    start: &[f64],
    goal: &[f64],
    rng: &mut ChaCha8Rng,
    cfg: &ManipConfig,
    deadline: Instant,
) -> Option<Vec<JointVector>> {
    if checker.edge_valid(start, goal) {
        return Some(vec![start.to_vec(), goal.to_vec()]);
    }
    let limits = &checker.model.joint_limits;
    let mut a = Tree::new(start.to_vec());
    let mut b = Tree::new(goal.to_vec());
    // true while `a` is rooted at the start
    let mut a_is_start = true;
    while a.nodes.len() + b.nodes.len() < cfg.node_cap {
        if Instant::now() > deadline {
            return None;
        }
        let sample: JointVector = if rng.random::<f64>() < cfg.goal_bias {
            b.nodes[0].clone()
        } else {
            limits.iter().map(|l| rng.random_range(l.lo..=l.hi)).collect()
        };
        let new_idx = match extend(checker, &mut a, &sample, cfg.step) {
            Extend::Trapped => None,
            Extend::Advanced(i) | Extend::Reached(i) => Some(i),
        };
        if let Some(ai) = new_idx {
            let q_new = a.nodes[ai].clone();
            loop {
                match extend(checker, &mut b, &q_new, cfg.step) {
                    Extend::Advanced(_) => continue,
                    Extend::Trapped => break,
                    Extend::Reached(bi) => {
                        let mut from_a = a.path_to_root(ai);
                        from_a.reverse();
                        let from_b = b.path_to_root(bi);
                        // q_new appears at the end of from_a and the start of from_b
                        from_a.extend(from_b.into_iter().skip(1));
                        if !a_is_start {
                            from_a.reverse();
                        }
                        return Some(from_a);
                    }
                }
            }
        }
        std::mem::swap(&mut a, &mut b);
        a_is_start = !a_is_start;
    }
    None
}

fn shortcut(checker: &ArmChecker<'_>, path: &mut Vec<JointVector>, rng: &mut ChaCha8Rng, attempts: usize) {
    for _ in 0..attempts {
        if path.len() < 3 {
            return;
        }
        let i = rng.random_range(0..path.len() - 2);
        let j = rng.random_range(i + 2..path.len());
        if checker.edge_valid(&path[i], &path[j]) {
            path.drain(i + 1..j);
        }
    }
}

/// Inserts interpolated states so consecutive states differ by at most `step_max` per joint.
pub fn densify(path: &[JointVector], step_max: f64) -> Vec<JointVector> {
    let mut out = vec![path[0].clone()];
    for w in path.windows(2) {
        let steps = (max_abs_diff(&w[0], &w[1]) / step_max - 1e-9).ceil().max(1.0) as usize;
        for s in 1..steps {
            out.push(lerp_joints(&w[0], &w[1], s as f64 / steps as f64));
        }
        out.push(w[1].clone());
    }
    out
}

pub(crate) fn manip_timeline(model: &RobotModel, start: &RobotState, segments: &[ManipSegment]) -> Timeline {
    let mut tl = Timeline::new(start.clone());
    for seg in segments {
        for q in &seg.path {
            tl.push_joints(model, q);
        }
        if let Some(g) = seg.terminal_gripper {
            tl.push_gripper(model, g);
        }
    }
    tl
}

/// Ghost samples of a plan every `dt` seconds at the model's joint speed.
pub fn sample_ghost(model: &RobotModel, plan: &ManipPlan, dt: f64) -> Vec<RobotState> {
    manip_timeline(model, &plan.start_state, &plan.segments).sample(dt)
}
