//! Preloaded geometric world model: scene bounds and axis-aligned obstacle boxes.

use serde::{Deserialize, Serialize};

use crate::geometry::{Interval, Rect};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub x: Interval,
    pub y: Interval,
}

impl Bounds {
    pub fn rect(&self) -> Rect {
        Rect::new(self.x, self.y)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.x.contains(x) && self.y.contains(y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub x: Interval,
    pub y: Interval,
    pub z: Interval,
    #[serde(default)]
    pub label: String,
}

impl Obstacle {
    pub fn new(x: Interval, y: Interval, z: Interval, label: impl Into<String>) -> Self {
        Self { x, y, z, label: label.into() }
    }

    pub fn footprint(&self) -> Rect {
        Rect::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    #[serde(default)]
    pub name: String,
    pub bounds: Bounds,
    #[serde(default)]
    pub floor_z: f64,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
}

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error("malformed scene JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scene at `{path}`: {reason}")]
    Invalid { path: String, reason: String },
}

impl Scene {
    /// Scene with bounds only.
    pub fn empty(name: impl Into<String>, x: Interval, y: Interval) -> Self {
        Self { name: name.into(), bounds: Bounds { x, y }, floor_z: 0.0, obstacles: Vec::new() }
    }

    pub fn from_json(text: &str) -> Result<Self, SceneError> {
        let scene: Scene = serde_json::from_str(text)?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN bounds too
    pub fn validate(&self) -> Result<(), SceneError> {
        let invalid = |path: String, reason: &str| SceneError::Invalid { path, reason: reason.to_owned() };
        if !self.floor_z.is_finite() {
            return Err(invalid("floor_z".into(), "must be finite"));
        }
        for (name, i) in [("bounds.x", &self.bounds.x), ("bounds.y", &self.bounds.y)] {
            if !(i.lo.is_finite() && i.hi.is_finite()) {
                return Err(invalid(name.into(), "must be finite"));
            }
            if !(i.lo < i.hi) {
                return Err(invalid(name.into(), "bounds must be a nonempty interval"));
            }
        }
        for (idx, ob) in self.obstacles.iter().enumerate() {
            for (axis, i) in [("x", &ob.x), ("y", &ob.y), ("z", &ob.z)] {
                if !(i.lo.is_finite() && i.hi.is_finite()) || i.is_empty() {
                    return Err(invalid(format!("obstacles[{idx}].{axis}"), "interval must be finite and nonempty"));
                }
            }
            if !self.bounds.x.contains_interval(&ob.x) {
                return Err(invalid(format!("obstacles[{idx}].x"), "obstacle lies outside the scene bounds"));
            }
            if !self.bounds.y.contains_interval(&ob.y) {
                return Err(invalid(format!("obstacles[{idx}].y"), "obstacle lies outside the scene bounds"));
            }
        }
        Ok(())
    }

    /// Obstacles whose vertical extent overlaps `[floor_z, floor_z + height]`.
    pub fn obstacles_below(&self, height: f64) -> impl Iterator<Item = &Obstacle> {
        let band = Interval::new(self.floor_z, self.floor_z + height);
        self.obstacles.iter().filter(move |o| o.z.intersects(&band))
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Scene {
        let shift = |i: Interval, d: f64| Interval::new(i.lo + d, i.hi + d);
        Scene {
            name: self.name.clone(),
            bounds: Bounds { x: shift(self.bounds.x, dx), y: shift(self.bounds.y, dy) },
            floor_z: self.floor_z,
            obstacles: self
                .obstacles
                .iter()
                .map(|o| Obstacle { x: shift(o.x, dx), y: shift(o.y, dy), z: o.z, label: o.label.clone() })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scene_loads() {
        let s = Scene::from_json(r#"{"bounds":{"x":[0,4],"y":[-1,1]}}"#).unwrap();
        assert!(s.obstacles.is_empty());
        assert_eq!(s.floor_z, 0.0);
        assert_eq!(s.name, "");
    }

    #[test]
    fn out_of_bounds_obstacle_names_index() {
        let text = r#"{"name":"t","bounds":{"x":[0,4],"y":[0,4]},"floor_z":0,
            "obstacles":[
              {"x":[1,2],"y":[1,2],"z":[0,1],"label":"ok"},
              {"x":[3,5],"y":[1,2],"z":[0,1],"label":"bad"}]}"#;
        let err = Scene::from_json(text).unwrap_err();
        match err {
            SceneError::Invalid { path, .. } => assert_eq!(path, "obstacles[1].x"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_bounds_rejected() {
        let err = Scene::from_json(r#"{"bounds":{"x":[1,1],"y":[0,1]}}"#).unwrap_err();
        assert!(err.to_string().contains("bounds.x"), "{err}");
    }

    #[test]
    fn malformed_json_rejected() {
        assert!(matches!(Scene::from_json("{\"bounds\":"), Err(SceneError::Parse(_))));
    }

    #[test]
    fn json_round_trip() {
        let mut s = Scene::empty("t", Interval::new(0.0, 2.0), Interval::new(0.0, 2.0));
        s.obstacles.push(Obstacle::new(Interval::new(0.5, 1.0), Interval::new(0.5, 1.0), Interval::new(0.0, 0.7), "table"));
        assert_eq!(Scene::from_json(&s.to_json()).unwrap(), s);
    }
}
