//! Navigation planning: occupancy grid rasterization, 8-connected A*, exact
//! footprint placement checks and multi-waypoint path assembly.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::geometry::{angle_diff, Pose2, Vec2};
use crate::ghost::Timeline;
use crate::plan::FailureReason;
use crate::robot::{RobotModel, RobotState};
use crate::scene::Scene;
use crate::waypoint::NavigationWaypoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Placement {
    Free,
    Colliding,
}

/// Exact test of the base disc at `pose` against every obstacle tall enough to hit the body.
pub fn placement_check(scene: &Scene, model: &RobotModel, pose: &Pose2) -> Placement {
    let p = pose.position();
    if scene
        .obstacles_below(model.body_height())
        .any(|o| o.footprint().distance_to_point(p) <= model.base_radius)
    {
        Placement::Colliding
    } else {
        Placement::Free
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub ix: usize,
    pub iy: usize,
}

impl Cell {
    pub const fn new(ix: usize, iy: usize) -> Self {
        Self { ix, iy }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyGrid {
    pub resolution: f64,
    pub origin: (f64, f64),
    pub width: usize,
    pub height: usize,
    /// Obstacle inflation radius baked into `cells`.
    pub inflation: f64,
    cells: Vec<bool>,
}

impl OccupancyGrid {
    /// Grid with every cell free.
    pub fn new_free(width: usize, height: usize, resolution: f64, origin: (f64, f64)) -> Self {
        Self { resolution, origin, width, height, inflation: 0.0, cells: vec![false; width * height] }
    }

    /// Builds a grid from rows of `'#'` (occupied) and anything else (free); row 0 is `iy = 0`.
    pub fn from_rows(rows: &[&str]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut g = Self::new_free(width, height, 1.0, (0.0, 0.0));
        for (iy, row) in rows.iter().enumerate() {
            for (ix, ch) in row.chars().enumerate() {
                g.set_occupied(Cell::new(ix, iy), ch == '#');
            }
        }
        g
    }

    fn index(&self, c: Cell) -> usize {
        c.iy * self.width + c.ix
    }

    pub fn contains_cell(&self, c: Cell) -> bool {
        c.ix < self.width && c.iy < self.height
    }

    pub fn is_occupied(&self, c: Cell) -> bool {
        !self.contains_cell(c) || self.cells[self.index(c)]
    }

    pub fn set_occupied(&mut self, c: Cell, occupied: bool) {
        let i = self.index(c);
        self.cells[i] = occupied;
    }

    pub fn center(&self, c: Cell) -> Vec2 {
        Vec2::new(
            self.origin.0 + (c.ix as f64 + 0.5) * self.resolution,
            self.origin.1 + (c.iy as f64 + 0.5) * self.resolution,
        )
    }

    pub fn cell_at(&self, x: f64, y: f64) -> Option<Cell> {
        let fx = ((x - self.origin.0) / self.resolution).floor();
        let fy = ((y - self.origin.1) / self.resolution).floor();
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let c = Cell::new(fx as usize, fy as usize);
        self.contains_cell(c).then_some(c)
    }

    pub fn free_count(&self) -> usize {
        self.cells.iter().filter(|o| !**o).count()
    }
}

/// Occupancy grid over the scene bounds with obstacles inflated by the base radius.
pub fn rasterize(scene: &Scene, model: &RobotModel, resolution: f64) -> OccupancyGrid {
    assert!(resolution > 0.0, "grid resolution must be positive");
    let b = &scene.bounds;
    let width = (b.x.width() / resolution - 1e-9).ceil().max(1.0) as usize;
    let height = (b.y.width() / resolution - 1e-9).ceil().max(1.0) as usize;
    let mut grid = OccupancyGrid::new_free(width, height, resolution, (b.x.lo, b.y.lo));
    grid.inflation = model.base_radius;
    let blocking: Vec<_> = scene.obstacles_below(model.body_height()).map(|o| o.footprint()).collect();
    for iy in 0..height {
        for ix in 0..width {
            let c = Cell::new(ix, iy);
            let p = grid.center(c);
            let occupied =
                !b.contains(p.x, p.y) || blocking.iter().any(|r| r.distance_to_point(p) <= model.base_radius);
            grid.set_occupied(c, occupied);
        }
    }
    grid
}

/// Path cost as exact counts of straight and diagonal moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PathCost {
    pub straight: u32,
    pub diagonal: u32,
}

impl PathCost {
    pub fn value(&self) -> f64 {
        self.straight as f64 + self.diagonal as f64 * SQRT_2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    pub cells: Vec<Cell>,
    pub cost: PathCost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no path between the requested cells")]
pub struct NoPath;

/// Neighbors of `c` with move type; diagonals need both adjacent cardinal cells free.
pub fn neighbors(grid: &OccupancyGrid, c: Cell) -> impl Iterator<Item = (Cell, bool)> + '_ {
    const DIRS: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
    DIRS.iter().filter_map(move |&(dx, dy)| {
        let step = |cx: usize, cy: usize, dx: i64, dy: i64| {
            let nx = cx as i64 + dx;
            let ny = cy as i64 + dy;
            (nx >= 0 && ny >= 0).then(|| Cell::new(nx as usize, ny as usize))
        };
        let n = step(c.ix, c.iy, dx, dy)?;
        if grid.is_occupied(n) {
            return None;
        }
        let diagonal = dx != 0 && dy != 0;
        if diagonal {
            let a = step(c.ix, c.iy, dx, 0)?;
            let b = step(c.ix, c.iy, 0, dy)?;
            if grid.is_occupied(a) || grid.is_occupied(b) {
                return None;
            }
        }
        Some((n, diagonal))
    })
}

fn octile(a: Cell, b: Cell) -> f64 {
    let dx = a.ix.abs_diff(b.ix) as f64;
    let dy = a.iy.abs_diff(b.iy) as f64;
    let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
    (hi - lo) + lo * SQRT_2
}

#[derive(Debug, Clone, Copy)]
struct Open {
    f: f64,
    g: f64,
    cell: Cell,
}

impl PartialEq for Open {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Open {}
impl PartialOrd for Open {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Open {
    // Min-heap on f; ties prefer deeper nodes, then a fixed cell order.
    fn cmp(&self, o: &Self) -> Ordering {
        o.f.total_cmp(&self.f).then(self.g.total_cmp(&o.g)).then(o.cell.cmp(&self.cell))
    }
}

/// 8-connected A* with the octile heuristic; unit straight cost, √2 diagonal.
pub fn astar(grid: &OccupancyGrid, start: Cell, goal: Cell) -> Result<GridPath, NoPath> {
    if grid.is_occupied(start) || grid.is_occupied(goal) {
        return Err(NoPath);
    }
    let n = grid.width * grid.height;
    let mut best: Vec<Option<PathCost>> = vec![None; n];
    let mut parent: Vec<Option<Cell>> = vec![None; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    best[grid.index(start)] = Some(PathCost::default());
    open.push(Open { f: octile(start, goal), g: 0.0, cell: start });

    while let Some(Open { cell, .. }) = open.pop() {
        let ci = grid.index(cell);
        if closed[ci] {
            continue;
        }
        closed[ci] = true;
        let g = best[ci].expect("opened cells have a cost");
        if cell == goal {
            let mut cells = vec![goal];
            let mut cur = goal;
            while let Some(p) = parent[grid.index(cur)] {
                cells.push(p);
                cur = p;
            }
            cells.reverse();
            return Ok(GridPath { cells, cost: g });
        }
        for (nb, diagonal) in neighbors(grid, cell) {
            let ni = grid.index(nb);
            if closed[ni] {
                continue;
            }
            let mut cand = g;
            if diagonal {
                cand.diagonal += 1;
            } else {
                cand.straight += 1;
            }
            if best[ni].is_none_or(|b| cand.value() < b.value()) {
                best[ni] = Some(cand);
                parent[ni] = Some(cell);
                open.push(Open { f: cand.value() + octile(nb, goal), g: cand.value(), cell: nb });
            }
        }
    }
    Err(NoPath)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NavConfig {
    pub resolution: f64,
    /// Spacing of the displayed path markers.
    pub marker_spacing: f64,
    /// Largest heading change between consecutive in-place rotation poses.
    pub rotation_step: f64,
    pub ghost_dt: f64,
}

impl Default for NavConfig {
    fn default() -> Self {
        Self { resolution: 0.05, marker_spacing: 0.25, rotation_step: 0.1, ghost_dt: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavSegment {
    pub poses: Vec<Pose2>,
    pub terminal_height: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavPlan {
    pub start_state: RobotState,
    pub segments: Vec<NavSegment>,
    pub path_markers: Vec<[f64; 2]>,
    pub ghost: Vec<RobotState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NavFailure {
    /// 1-based label of the waypoint that could not be reached.
    pub label: usize,
    pub reason: FailureReason,
    pub completed: Vec<NavSegment>,
}

/// Plans through `waypoints` in order, starting from the robot's base pose.
pub fn plan_navigation(
    scene: &Scene,
    model: &RobotModel,
    state: &RobotState,
    waypoints: &[NavigationWaypoint],
    cfg: &NavConfig,
) -> Result<NavPlan, NavFailure> {
    let grid = rasterize(scene, model, cfg.resolution);
    let mut segments: Vec<NavSegment> = Vec::with_capacity(waypoints.len());
    let mut from = state.base_pose;
    for (i, wp) in waypoints.iter().enumerate() {
        let fail = |segments: Vec<NavSegment>| NavFailure { label: i + 1, reason: FailureReason::NoPath, completed: segments };
        let Some(poses) = plan_leg(scene, model, &grid, &from, &wp.pose, cfg) else {
            return Err(fail(segments));
        };
        let valid = poses
            .iter()
            .all(|p| scene.bounds.contains(p.x, p.y) && placement_check(scene, model, p) == Placement::Free);
        if !valid {
            return Err(fail(segments));
        }
        from = *poses.last().expect("legs are nonempty");
        segments.push(NavSegment { poses, terminal_height: wp.height_command });
    }
    let path_markers = decimate_markers(&segments, cfg.marker_spacing);
    let ghost = nav_timeline(model, state, &segments).sample(cfg.ghost_dt);
    Ok(NavPlan { start_state: state.clone(), segments, path_markers, ghost })
}

fn plan_leg(
    scene: &Scene,
    model: &RobotModel,
    grid: &OccupancyGrid,
    from: &Pose2,
    to: &Pose2,
    cfg: &NavConfig,
) -> Option<Vec<Pose2>> {
    let mut poses = vec![*from];
    let start = from.position();
    let goal = to.position();
    if start.distance(goal) > 1e-9 {
        let sc = grid.cell_at(start.x, start.y)?;
        let gc = grid.cell_at(goal.x, goal.y)?;
        // Exact goal check first: the grid is only an approximation of the footprint.
        if placement_check(scene, model, to) == Placement::Colliding {
            return None;
        }
        let path = astar(grid, sc, gc).ok()?;
        let mut pts = vec![start];
        if path.cells.len() > 2 {
            pts.extend(path.cells[1..path.cells.len() - 1].iter().map(|c| grid.center(*c)));
        }
        pts.push(goal);
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let dist = a.distance(b);
            if dist <= 1e-12 {
                continue;
            }
            let heading = (b.y - a.y).atan2(b.x - a.x);
            rotate_to(&mut poses, heading, cfg.rotation_step);
            let steps = (dist / cfg.resolution - 1e-9).ceil().max(1.0) as usize;
            for s in 1..=steps {
                let p = a.lerp(b, s as f64 / steps as f64);
                poses.push(Pose2::new(p.x, p.y, heading));
            }
        }
    }
    rotate_to(&mut poses, to.heading, cfg.rotation_step);
    if let Some(last) = poses.last_mut() {
        // land exactly on the operator's pose
        *last = Pose2::new(to.x, to.y, last.heading);
    }
    Some(poses)
}

/// Appends in-place rotation poses from the last pose's heading to `heading`.
fn rotate_to(poses: &mut Vec<Pose2>, heading: f64, max_step: f64) {
    let last = *poses.last().expect("nonempty");
    let delta = angle_diff(heading, last.heading);
    if delta.abs() <= 1e-12 {
        return;
    }
    let steps = (delta.abs() / max_step - 1e-9).ceil().max(1.0) as usize;
    for s in 1..steps {
        poses.push(Pose2::new(last.x, last.y, last.heading + delta * s as f64 / steps as f64));
    }
    poses.push(Pose2::new(last.x, last.y, heading));
}

fn decimate_markers(segments: &[NavSegment], spacing: f64) -> Vec<[f64; 2]> {
    let mut markers = Vec::new();
    let mut prev: Option<Vec2> = None;
    let mut since = 0.0;
    for p in segments.iter().flat_map(|s| s.poses.iter()).map(Pose2::position) {
        match prev {
            None => markers.push([p.x, p.y]),
            Some(q) => {
                since += q.distance(p);
                if since >= spacing {
                    markers.push([p.x, p.y]);
                    since = 0.0;
                }
            }
        }
        prev = Some(p);
    }
    if let Some(p) = prev {
        if markers.last() != Some(&[p.x, p.y]) {
            markers.push([p.x, p.y]);
        }
    }
    markers
}

pub(crate) fn nav_timeline(model: &RobotModel, start: &RobotState, segments: &[NavSegment]) -> Timeline {
    let mut tl = Timeline::new(start.clone());
    for seg in segments {
        for p in &seg.poses {
            tl.push_base(model, p);
        }
        if let Some(h) = seg.terminal_height {
            tl.push_torso(model, h);
        }
    }
    tl
}

/// Rebuilds the ghost of a plan at a different sample period.
pub fn sample_nav_ghost(model: &RobotModel, plan: &NavPlan, dt: f64) -> Vec<RobotState> {
    nav_timeline(model, &plan.start_state, &plan.segments).sample(dt)
}
