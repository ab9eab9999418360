//! Process configuration, loaded from TOML and overridden by command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use fwpd_core::manip::ManipConfig;
use fwpd_core::nav::NavConfig;
use fwpd_core::{RobotModel, Scene, SessionConfig};

pub const DEFAULT_PORT: u16 = 8765;
pub const DEFAULT_TICK_HZ: f64 = 20.0;
pub const LOG_DIR_ENV: &str = "FWPD_LOG_DIR";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub scene: Option<PathBuf>,
    pub port: u16,
    pub tick_hz: f64,
    pub seed: u64,
    /// Where traces and event logs are written when a session closes.
    pub log_dir: PathBuf,
    pub robot: RobotModel,
    pub planner: PlannerConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub manipulation: ManipConfig,
    pub navigation: NavConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            scene: None,
            port: DEFAULT_PORT,
            tick_hz: DEFAULT_TICK_HZ,
            seed: 0,
            log_dir: PathBuf::from("fwpd-logs"),
            robot: RobotModel::default(),
            planner: PlannerConfig::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Toml { path: PathBuf, source: toml::de::Error },
    #[error("invalid scene {path}: {source}")]
    Scene { path: PathBuf, source: fwpd_core::SceneError },
    #[error("invalid robot model: {0}")]
    Model(String),
    #[error("{0}")]
    Invalid(String),
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = read(path)?;
        Self::from_toml(&text).map_err(|source| ConfigError::Toml { path: path.to_owned(), source })
    }

    /// Applies the log-directory environment override.
    pub fn with_env(mut self) -> Self {
        if let Some(dir) = std::env::var_os(LOG_DIR_ENV) {
            self.log_dir = PathBuf::from(dir);
        }
        self
    }

    pub fn session_config(&self) -> SessionConfig {
        SessionConfig { seed: self.seed, manip: self.planner.manipulation, nav: self.planner.navigation }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.robot.validate().map_err(|e| ConfigError::Model(e.0))?;
        if !(self.tick_hz > 0.0 && self.tick_hz.is_finite()) {
            return Err(ConfigError::Invalid(format!("tick_hz must be positive, got {}", self.tick_hz)));
        }
        Ok(())
    }

    pub fn load_scene(&self) -> Result<Scene, ConfigError> {
        let path = self.scene.as_deref().ok_or_else(|| ConfigError::Invalid("no scene given (use --scene)".into()))?;
        load_scene(path)
    }
}

pub fn load_scene(path: &Path) -> Result<Scene, ConfigError> {
    let text = read(path)?;
    Scene::from_json(&text).map_err(|source| ConfigError::Scene { path: path.to_owned(), source })
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_defaults() {
        assert_eq!(Config::from_toml("").unwrap(), Config::default());
    }

    #[test]
    fn partial_overrides() {
        let c = Config::from_toml(
            r#"
            port = 9000
            seed = 7
            [robot]
            base_radius = 0.25
            [planner.manipulation]
            timeout_s = 1.0
            "#,
        )
        .unwrap();
        assert_eq!(c.port, 9000);
        assert_eq!(c.robot.base_radius, 0.25);
        assert_eq!(c.robot.link_lengths, RobotModel::default().link_lengths);
        assert_eq!(c.planner.manipulation.timeout_s, 1.0);
        assert_eq!(c.planner.manipulation.node_cap, 5000);
        assert_eq!(c.session_config().seed, 7);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Config::from_toml("prot = 1").is_err());
    }
}
