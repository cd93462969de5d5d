use std::ffi::{c_char, CStr, CString};
use std::ptr;

use thastar_ffi::*;

fn last_error() -> String {
    let p = tha_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn bundled(name: &str) -> *mut ThaScenario {
    let name = CString::new(name).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { tha_scenario_bundled(name.as_ptr(), &mut s) }, ThaStatus::Ok);
    s
}

#[test]
fn plans_a_bundled_scenario() {
    unsafe {
        let scn = bundled("angle_head_in");
        let (mut start, mut goal) = (ThaState::default(), ThaState::default());
        assert_eq!(tha_scenario_endpoints(scn, &mut start, &mut goal), ThaStatus::Ok);
        let mut map = ptr::null_mut();
        assert_eq!(tha_map_from_scenario(scn, &mut map), ThaStatus::Ok);
        assert!(tha_map_point_count(map) > 100);

        let mut preds = ptr::null_mut();
        assert_eq!(tha_predictions_new(120.0, &mut preds), ThaStatus::Ok);
        let walker = ThaObstacle {
            x: 25.0,
            y: 16.0,
            vx: -0.2,
            vy: 0.0,
            radius: 0.5,
        };
        assert_eq!(tha_predictions_add(preds, walker), ThaStatus::Ok);

        let mut path = ptr::null_mut();
        let status = tha_plan(map, preds, start, goal, ThaHeuristic::Grid, 500, &mut path);
        assert_eq!(status, ThaStatus::Ok);
        assert!(tha_path_reached_goal(path));
        let n = tha_path_len(path);
        assert!(n > 2);
        assert!(tha_path_iterations(path) <= 500);

        let mut first = ThaSample::default();
        assert_eq!(tha_path_sample(path, 0, &mut first), ThaStatus::Ok);
        assert_eq!(first.state, start);
        let mut last = ThaSample::default();
        assert_eq!(tha_path_sample(path, n - 1, &mut last), ThaStatus::Ok);
        assert!((last.state.x - goal.x).hypot(last.state.y - goal.y) < 1e-3);
        assert!((last.time - 0.1 * (n - 1) as f64).abs() < 1e-9);

        let mut safety = ThaSafety::default();
        assert_eq!(tha_path_verify(path, map, preds, 0.01, &mut safety), ThaStatus::Ok);
        assert_eq!(safety.violations, 0);
        assert!(safety.min_clearance >= 0.5);
        assert!(safety.checked_states > n);

        assert_eq!(tha_path_sample(path, n, &mut last), ThaStatus::OutOfRange);
        assert!(last_error().contains("out of range"));

        tha_path_free(path);
        tha_predictions_free(preds);
        tha_map_free(map);
        tha_scenario_free(scn);
    }
}

#[test]
fn raw_points_and_empty_predictions() {
    unsafe {
        let pts = [ThaPoint { x: 30.0, y: 0.0 }];
        let b = ThaBounds {
            min_x: -10.0,
            min_y: -10.0,
            max_x: 40.0,
            max_y: 10.0,
        };
        let mut map = ptr::null_mut();
        assert_eq!(tha_map_from_points(pts.as_ptr(), 1, b, 2.0, &mut map), ThaStatus::Ok);
        let start = ThaState::default();
        let goal = ThaState { x: 10.0, y: 0.0, theta: 0.0 };
        let mut path = ptr::null_mut();
        assert_eq!(
            tha_plan(map, ptr::null(), start, goal, ThaHeuristic::Euclidean, 100, &mut path),
            ThaStatus::Ok
        );
        assert!(tha_path_reached_goal(path));
        assert_eq!(tha_path_len(path), 101);
        tha_path_free(path);

        // Zero budget gives the stationary single-sample path.
        assert_eq!(
            tha_plan(map, ptr::null(), start, goal, ThaHeuristic::Euclidean, 0, &mut path),
            ThaStatus::Ok
        );
        assert!(!tha_path_reached_goal(path));
        assert_eq!(tha_path_len(path), 1);
        tha_path_free(path);

        let blocked = ThaState { x: 28.0, y: 0.0, theta: 0.0 };
        assert_eq!(
            tha_plan(map, ptr::null(), blocked, goal, ThaHeuristic::Euclidean, 100, &mut path),
            ThaStatus::StartInCollision
        );
        assert!(last_error().contains("collision"));
        tha_map_free(map);
    }
}

#[test]
fn argument_errors() {
    unsafe {
        let mut scn = ptr::null_mut();
        assert_eq!(tha_scenario_bundled(ptr::null(), &mut scn), ThaStatus::NullPointer);
        let name = CString::new("missing").unwrap();
        assert_eq!(tha_scenario_bundled(name.as_ptr(), &mut scn), ThaStatus::InvalidArgument);
        assert!(last_error().contains("missing"));

        let bad = CString::new("{ not json").unwrap();
        assert_eq!(tha_scenario_from_json(bad.as_ptr(), name.as_ptr(), &mut scn), ThaStatus::ParseError);
        assert!(last_error().contains("line 1"));

        let mut map = ptr::null_mut();
        let b = ThaBounds::default();
        assert_eq!(tha_map_from_points(ptr::null(), 0, b, 1.0, &mut map), ThaStatus::InvalidArgument);
        assert_eq!(tha_map_from_points(ptr::null(), 3, b, 1.0, &mut map), ThaStatus::NullPointer);

        let mut preds = ptr::null_mut();
        assert_eq!(tha_predictions_new(-1.0, &mut preds), ThaStatus::InvalidArgument);
        assert_eq!(tha_plan(ptr::null(), ptr::null(), ThaState::default(), ThaState::default(), ThaHeuristic::Grid, 1, ptr::null_mut()), ThaStatus::NullPointer);

        // Freeing null is a no-op.
        tha_scenario_free(ptr::null_mut());
        tha_map_free(ptr::null_mut());
        tha_predictions_free(ptr::null_mut());
        tha_path_free(ptr::null_mut());
    }
}

#[test]
fn scenario_from_json_text() {
    let json = CString::new(
        r#"{ "name": "box", "mode": "one_time",
             "bounds": { "min_x": 0, "min_y": 0, "max_x": 30, "max_y": 20 },
             "start": [5, 10, 0], "goal": [20, 10, 0] }"#,
    )
    .unwrap();
    let name: *const c_char = c"box".as_ptr();
    unsafe {
        let mut scn = ptr::null_mut();
        assert_eq!(tha_scenario_from_json(json.as_ptr(), name, &mut scn), ThaStatus::Ok);
        let mut goal = ThaState::default();
        assert_eq!(tha_scenario_endpoints(scn, ptr::null_mut(), &mut goal), ThaStatus::Ok);
        assert_eq!(goal, ThaState { x: 20.0, y: 10.0, theta: 0.0 });
        tha_scenario_free(scn);
    }
}

#[test]
fn clearance_matches_footprint() {
    // Footprint spans x in [-1, 4] and y in [-1, 1] at the origin.
    let origin = ThaState::default();
    assert!((tha_clearance(origin, ThaPoint { x: 6.0, y: 0.0 }) - 2.0).abs() < 1e-12);
    assert!((tha_clearance(origin, ThaPoint { x: 1.5, y: -3.0 }) - 2.0).abs() < 1e-12);
    assert!(tha_clearance(origin, ThaPoint { x: 1.5, y: 0.0 }) < 0.0);
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/thastar.h")).unwrap();
    for name in [
        "tha_last_error",
        "tha_plan",
        "tha_path_sample",
        "tha_path_free",
        "tha_map_from_points",
        "tha_predictions_add",
        "THA_STATUS_START_IN_COLLISION",
        "typedef struct ThaMap ThaMap;",
    ] {
        assert!(header.contains(name), "{name} missing");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = std::env::temp_dir().join(format!("thastar-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("use.c");
    std::fs::write(
        &src,
        "#include \"thastar.h\"\nint main(void) { ThaState s = {0, 0, 0}; ThaPoint p = {6, 0}; return tha_clearance(s, p) > 1.0 ? 0 : 1; }\n",
    )
    .unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| std::process::Command::new(c).arg("--version").output().is_ok())
        .ok_or(())
}
