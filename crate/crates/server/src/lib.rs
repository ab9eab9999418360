//! Operator-facing entry points: the wire protocol, session hosting over
//! WebSocket, headless replay and configuration.

pub mod config;
pub mod host;
pub mod replay;
pub mod serve;
pub mod wire;

pub use config::Config;
pub use host::Host;
pub use replay::{ReplayReport, ScriptEntry};
pub use serve::ServeOptions;
