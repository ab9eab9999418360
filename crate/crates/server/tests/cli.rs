//! The `fwpd` binary: exit codes and output files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn asset(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn fwpd(args: &[&std::ffi::OsStr]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fwpd")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

#[test]
fn replay_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let scene = asset("scenes/bin_scene.json");
    let out = dir.path().join("trace.jsonl");

    let ok = fwpd(&["replay".as_ref(), asset("scripts/pick_and_place.json").as_os_str(), "--scene".as_ref(), scene.as_os_str(), "--out".as_ref(), out.as_os_str()]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let trace = std::fs::read_to_string(&out).unwrap();
    assert!(trace.lines().all(|l| serde_json::from_str::<serde_json::Value>(l).is_ok()));
    assert!(trace.contains(r#""text":"Executing Waypoint 4 / 4""#));

    let wrong = dir.path().join("wrong.json");
    std::fs::write(&wrong, r#"[{"t":0,"expect":"Plan Successful!"}]"#).unwrap();
    let failed = fwpd(&["replay".as_ref(), wrong.as_os_str(), "--scene".as_ref(), scene.as_os_str(), "--out".as_ref(), out.as_os_str()]);
    assert_eq!(failed.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&failed.stderr).contains("expected status"));

    let missing = dir.path().join("missing.json");
    let unreadable = fwpd(&["replay".as_ref(), missing.as_os_str(), "--scene".as_ref(), scene.as_os_str()]);
    assert_eq!(unreadable.status.code(), Some(1));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"[{"t":1},{"t":0}]"#).unwrap();
    let malformed = fwpd(&["replay".as_ref(), bad.as_os_str(), "--scene".as_ref(), scene.as_os_str()]);
    assert_eq!(malformed.status.code(), Some(1));
}

#[test]
fn replay_writes_to_stdout_without_out() {
    let r = fwpd(&["replay".as_ref(), asset("scripts/pick_and_place_blocked.json").as_os_str(), "--scene".as_ref(), asset("scenes/bin_scene.json").as_os_str()]);
    assert_eq!(r.status.code(), Some(0));
    let text = String::from_utf8(r.stdout).unwrap();
    assert!(text.starts_with(r#"{"t":0.0,"dir":"out","msg":{"op":"robot_state""#), "{}", &text[..80.min(text.len())]);
    assert!(text.contains("Plan Failed at Waypoint 2"));
}

#[test]
fn check_scene_summarizes_the_arena() {
    let r = fwpd(&["check-scene".as_ref(), asset("scenes/fetchit_arena.json").as_os_str()]);
    assert_eq!(r.status.code(), Some(0));
    let text = String::from_utf8(r.stdout).unwrap();
    assert!(text.contains("5 obstacles"), "{text}");
    for table in ["table_parts_1", "table_parts_2", "table_parts_3", "table_caddy", "table_inspection"] {
        assert!(text.contains(table));
    }

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, r#"{"bounds":{"x":[0,1],"y":[0,1]},"obstacles":[{"x":[5,6],"y":[0,1],"z":[0,1]}]}"#).unwrap();
    let r = fwpd(&["check-scene".as_ref(), broken.as_os_str()]);
    assert_ne!(r.status.code(), Some(0));
}

#[test]
fn serve_refuses_an_occupied_port() {
    let taken = std::net::TcpListener::bind("0.0.0.0:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let r = fwpd(&["serve".as_ref(), "--port".as_ref(), port.as_ref(), "--scene".as_ref(), asset("scenes/bin_scene.json").as_os_str()]);
    assert_ne!(r.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&r.stderr).contains("cannot listen"));
}
