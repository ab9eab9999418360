//! Session lifecycle: proposal, approval, execution order and immediate commands.

use fwpd_core::kinematics::{fk, target_error};
use fwpd_core::session::look_at_angles;
use fwpd_core::{
    ArmTarget, ImmediateCommand, Interval, PlannerStatus, Pose2, RobotModel, Scene, Session, SessionConfig, SessionError,
    SessionEvent, StateCommand, WaypointKind, WaypointPayload,
};

const DT: f64 = 0.05;

fn open_scene() -> Scene {
    Scene::empty("open", Interval::new(-3.0, 3.0), Interval::new(-3.0, 3.0))
}

fn session() -> Session {
    Session::new(RobotModel::default(), open_scene(), SessionConfig::default())
}

fn run_until_idle(s: &mut Session) {
    for _ in 0..200_000 {
        if s.is_idle() {
            return;
        }
        s.tick(DT);
    }
    panic!("session never became idle");
}

fn arm(d: f64, z: f64, gripper: Option<f64>) -> WaypointPayload {
    WaypointPayload::Manipulation { target: ArmTarget::new(d, z, 0.0), gripper_command: gripper }
}

fn grasp_session() -> Session {
    let mut s = session();
    s.create_waypoint(arm(0.55, 0.85, None), None).unwrap();
    s.create_waypoint(arm(0.55, 0.65, Some(0.3)), None).unwrap();
    s.create_waypoint(arm(0.45, 0.90, None), None).unwrap();
    s.create_waypoint(arm(0.35, 0.75, Some(1.0)), None).unwrap();
    s
}

fn events(s: &Session) -> Vec<SessionEvent> {
    s.log().iter().map(|e| e.event.clone()).collect()
}

#[test]
fn approved_plan_ends_on_the_final_goal() {
    let mut s = grasp_session();
    assert_eq!(s.request_plan(WaypointKind::Manipulation).unwrap(), PlannerStatus::Successful);
    let last_goal = match s.proposal().unwrap() {
        fwpd_core::Proposal::Manipulation(p) => p.segments.last().unwrap().end_joints.clone(),
        _ => unreachable!(),
    };
    s.approve().unwrap();
    run_until_idle(&mut s);
    assert_eq!(s.status(), PlannerStatus::Ready);
    for (q, g) in s.state().joints.iter().zip(&last_goal) {
        assert!((q - g).abs() <= 1e-9);
    }
    let target = ArmTarget::new(0.35, 0.75, 0.0);
    let (pos, ang) = target_error(s.model(), &s.state().joints, s.state().torso_height, &target);
    assert!(pos <= 1e-3 && ang <= 1e-3);
    assert_eq!(s.state().gripper_aperture, 1.0);
}

#[test]
fn deny_leaves_the_robot_untouched() {
    let mut s = grasp_session();
    let before = s.state().clone();
    s.request_plan(WaypointKind::Manipulation).unwrap();
    for _ in 0..100 {
        s.tick(DT);
    }
    assert_eq!(s.deny().unwrap(), PlannerStatus::Ready);
    for _ in 0..100 {
        s.tick(DT);
    }
    assert_eq!(serde_json::to_string(s.state()).unwrap(), serde_json::to_string(&before).unwrap());
    assert!(s.proposal().is_none());
}

#[test]
fn proposing_never_moves_the_robot() {
    let mut s = grasp_session();
    let before = s.state().clone();
    s.request_plan(WaypointKind::Manipulation).unwrap();
    assert_eq!(s.state(), &before);
    for _ in 0..400 {
        s.tick(DT);
        assert_eq!(s.state(), &before);
    }
    assert_eq!(s.status(), PlannerStatus::Successful);
}

#[test]
fn state_commands_interleave_with_arrivals() {
    let mut s = grasp_session();
    s.request_plan(WaypointKind::Manipulation).unwrap();
    let from = s.log().len();
    s.approve().unwrap();
    run_until_idle(&mut s);
    let kind = WaypointKind::Manipulation;
    let order: Vec<SessionEvent> = events(&s)[from..].to_vec();
    let expected = vec![
        SessionEvent::PlanApproved { kind },
        SessionEvent::SegmentStarted { kind, index: 1, total: 4 },
        SessionEvent::WaypointReached { kind, label: 1 },
        SessionEvent::SegmentStarted { kind, index: 2, total: 4 },
        SessionEvent::WaypointReached { kind, label: 2 },
        SessionEvent::StateCommandApplied { kind, label: 2, command: StateCommand::Gripper(0.3) },
        SessionEvent::SegmentStarted { kind, index: 3, total: 4 },
        SessionEvent::WaypointReached { kind, label: 3 },
        SessionEvent::SegmentStarted { kind, index: 4, total: 4 },
        SessionEvent::WaypointReached { kind, label: 4 },
        SessionEvent::StateCommandApplied { kind, label: 4, command: StateCommand::Gripper(1.0) },
        SessionEvent::PlanCompleted { kind },
    ];
    assert_eq!(order, expected);
    // Closing from 1.0 to 0.3 at one unit per second takes 0.7 s.
    let t_of = |e: &SessionEvent| s.log().iter().find(|l| &l.event == e).unwrap().t;
    let reached = t_of(&SessionEvent::WaypointReached { kind, label: 2 });
    let applied = t_of(&SessionEvent::StateCommandApplied { kind, label: 2, command: StateCommand::Gripper(0.3) });
    assert!((applied - reached - 0.7).abs() < 1e-9, "{reached} -> {applied}");
    let times: Vec<f64> = s.log().iter().map(|e| e.t).collect();
    assert!(times.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn height_command_is_clamped_to_the_torso_range() {
    let mut s = session();
    s.create_waypoint(
        WaypointPayload::Navigation { pose: Pose2::new(1.0, 0.0, 0.0), height_command: Some(9.0), collision_toggle: true },
        None,
    )
    .unwrap();
    s.request_plan(WaypointKind::Navigation).unwrap();
    s.approve().unwrap();
    run_until_idle(&mut s);
    assert_eq!(s.state().torso_height, s.model().torso_range.hi);

    s.immediate(ImmediateCommand::Height { value: -5.0 }).unwrap();
    run_until_idle(&mut s);
    assert_eq!(s.state().torso_height, s.model().torso_range.lo);
}

#[test]
fn look_at_level_point_straight_ahead() {
    let model = RobotModel::default();
    let mut s = Session::new(model.clone(), open_scene(), SessionConfig::default());
    let h = model.head_height(s.state().torso_height);
    s.immediate(ImmediateCommand::LookAt { x: 2.0, y: 0.0, z: h }).unwrap();
    assert_eq!((s.state().head_pan, s.state().head_tilt), (0.0, 0.0));
    // Quarter turn to the left and 45 degrees down.
    let (pan, tilt) = look_at_angles(&model, s.state(), 0.0, 1.0, h - 1.0);
    assert!((pan - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    assert!((tilt + std::f64::consts::FRAC_PI_4).abs() < 1e-12);
}

#[test]
fn requests_during_execution_are_rejected_without_side_effects() {
    let run = |interrupt: bool| {
        let mut s = grasp_session();
        s.request_plan(WaypointKind::Manipulation).unwrap();
        s.approve().unwrap();
        for _ in 0..20 {
            s.tick(DT);
        }
        if interrupt {
            assert!(matches!(s.request_plan(WaypointKind::Manipulation), Err(SessionError::Busy(_))));
            assert!(matches!(s.remove_last(WaypointKind::Manipulation), Err(SessionError::Busy(_))));
            assert!(matches!(s.immediate(ImmediateCommand::Gripper { value: 0.0 }), Err(SessionError::Busy(_))));
            assert!(matches!(s.approve(), Err(SessionError::BadState(_))));
        }
        run_until_idle(&mut s);
        (s.state().clone(), serde_json::to_string(s.log()).unwrap())
    };
    assert_eq!(run(true), run(false));
}

#[test]
fn identical_sessions_log_identically() {
    let run = || {
        let mut s = grasp_session();
        s.request_plan(WaypointKind::Manipulation).unwrap();
        s.approve().unwrap();
        run_until_idle(&mut s);
        serde_json::to_string(s.log()).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn replanning_reaches_the_same_goals() {
    let mut s = grasp_session();
    s.request_plan(WaypointKind::Manipulation).unwrap();
    let a = s.proposal().unwrap().ghost().to_vec();
    s.deny().unwrap();
    s.request_plan(WaypointKind::Manipulation).unwrap();
    let b = s.proposal().unwrap().ghost().to_vec();
    // Both proposals reach the same goals from the same start.
    let tip = |g: &[fwpd_core::RobotState]| {
        let last = g.last().unwrap();
        fk(&RobotModel::default(), &last.joints, last.torso_height)
    };
    let (ta, tb) = (tip(&a), tip(&b));
    assert!((ta.d - tb.d).abs() < 2e-3 && (ta.z - tb.z).abs() < 2e-3);
}
