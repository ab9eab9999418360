//! Headless replay of a timestamped script in simulated time.
//!
//! A script is a JSON list of entries `{"t": seconds, "msg": {...}}` or
//! `{"t": seconds, "expect": "<status text>"}`. Expectations are checked in
//! order against the status messages that follow the latest scripted message.
//! An entry with neither field only extends the run to its time.

use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use crate::host::{inbound_text, Host};

/// Simulated time allowed after the last entry for execution to finish.
pub const SETTLE_LIMIT_S: f64 = 600.0;

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ScriptEntry {
    pub t: f64,
    #[serde(default)]
    pub msg: Option<Value>,
    #[serde(default)]
    pub expect: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ScriptError {
    #[error("cannot read script: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed script: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("entry {index}: {reason}")]
    Invalid { index: usize, reason: String },
}

pub fn parse_script(text: &str) -> Result<Vec<ScriptEntry>, ScriptError> {
    let entries: Vec<ScriptEntry> = serde_json::from_str(text)?;
    let mut last = 0.0;
    for (index, e) in entries.iter().enumerate() {
        if !e.t.is_finite() || e.t < last {
            return Err(ScriptError::Invalid { index, reason: "times must be finite, nonnegative and nondecreasing".into() });
        }
        if e.msg.is_some() && e.expect.is_some() {
            return Err(ScriptError::Invalid { index, reason: "an entry holds a message or an expectation, not both".into() });
        }
        last = e.t;
    }
    Ok(entries)
}

pub fn load_script(path: &Path) -> Result<Vec<ScriptEntry>, ScriptError> {
    parse_script(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationFailure {
    pub index: usize,
    pub expected: String,
    pub found: Option<String>,
}

impl std::fmt::Display for ExpectationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.found {
            Some(found) => write!(f, "entry {}: expected status {:?}, got {:?}", self.index, self.expected, found),
            None => write!(f, "entry {}: expected status {:?}, none arrived", self.index, self.expected),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReplayReport {
    pub trace: Vec<String>,
    pub event_log: Vec<String>,
    pub statuses: Vec<String>,
    pub failures: Vec<ExpectationFailure>,
    /// Simulated seconds at the end of the run.
    pub end_time: f64,
}

impl ReplayReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn trace_text(&self) -> String {
        let mut s = self.trace.join("\n");
        s.push('\n');
        s
    }
}

/// Runs `script` against `host` until every entry is consumed and the session is idle.
pub fn run(mut host: Host, script: &[ScriptEntry]) -> ReplayReport {
    let mut statuses: Vec<String> = Vec::new();
    let record = |statuses: &mut Vec<String>, frame: &str| {
        if let Ok(v) = serde_json::from_str::<Value>(frame) {
            if v["op"] == "status" {
                statuses.push(v["text"].as_str().unwrap_or_default().to_owned());
            }
        }
    };
    host.greeting(&mut |f| record(&mut statuses, f));

    // (script index, status index it must match)
    let mut expectations: Vec<(usize, usize, String)> = Vec::new();
    let mut cursor = 0;
    let mut next = 0;
    let eps = 1e-9;
    let last_t = script.last().map_or(0.0, |e| e.t);
    loop {
        while next < script.len() && script[next].t <= host.time() + eps {
            let entry = &script[next];
            if let Some(msg) = &entry.msg {
                cursor = statuses.len();
                host.handle(&inbound_text(msg), &mut |f| record(&mut statuses, f));
            } else if let Some(text) = &entry.expect {
                expectations.push((next, cursor, text.clone()));
                cursor += 1;
            }
            next += 1;
        }
        let done = next == script.len() && host.is_idle();
        if done || host.time() > last_t + SETTLE_LIMIT_S {
            break;
        }
        host.tick(&mut |f| record(&mut statuses, f));
    }

    let failures = expectations
        .into_iter()
        .filter_map(|(index, at, expected)| {
            let found = statuses.get(at).cloned();
            (found.as_deref() != Some(expected.as_str())).then_some(ExpectationFailure { index, expected, found })
        })
        .collect();
    ReplayReport {
        trace: host.trace().to_vec(),
        event_log: host.event_log_lines(),
        statuses,
        failures,
        end_time: host.time(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use fwpd_core::{Interval, RobotModel, Scene, SessionConfig};

    fn host() -> Host {
        let scene = Scene::empty("open", Interval::new(-3.0, 3.0), Interval::new(-3.0, 3.0));
        Host::new(RobotModel::default(), scene, SessionConfig::default(), 20.0)
    }

    #[test]
    fn empty_script_traces_only_the_greeting() {
        let r = run(host(), &[]);
        assert_eq!(r.statuses, vec!["Ready to plan!"]);
        assert_eq!(r.trace.len(), 2);
        assert!(r.passed());
        assert_eq!(r.end_time, 0.0);
    }

    #[test]
    fn expectation_mismatch_is_reported() {
        let script = parse_script(r#"[{"t":0,"expect":"Planning..."}]"#).unwrap();
        let r = run(host(), &script);
        assert_eq!(r.failures.len(), 1);
        assert_eq!(r.failures[0].found.as_deref(), Some("Ready to plan!"));
    }

    #[test]
    fn rejects_decreasing_times() {
        assert!(matches!(parse_script(r#"[{"t":1},{"t":0.5}]"#), Err(ScriptError::Invalid { index: 1, .. })));
    }
}
