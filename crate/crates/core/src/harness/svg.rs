//! Top-down drawings of a run: drivable bounds, parked vehicles, obstacle
//! tracks and the ego trajectory with footprint snapshots.

use std::fmt::Write as _;

use super::scenario::Scenario;
use crate::geometry::{Point2, VehicleGeometry};
use crate::planner::TimedPath;
use crate::prediction::DynamicObstacle;

const PX_PER_M: f64 = 20.0;
/// Seconds between footprint snapshots.
const SNAPSHOT_EVERY: f64 = 2.0;

fn polygon(out: &mut String, pts: &[Point2], style: &str) {
    let coords: Vec<String> = pts.iter().map(|p| format!("{:.3},{:.3}", p.x, p.y)).collect();
    let _ = writeln!(out, r#"<polygon points="{}" {style}/>"#, coords.join(" "));
}

fn polyline(out: &mut String, pts: &[Point2], style: &str) {
    let coords: Vec<String> = pts.iter().map(|p| format!("{:.3},{:.3}", p.x, p.y)).collect();
    let _ = writeln!(out, r#"<polyline points="{}" fill="none" {style}/>"#, coords.join(" "));
}

pub fn render_run(s: &Scenario, path: &TimedPath, obstacles: &[DynamicObstacle]) -> String {
    let geom = VehicleGeometry::default();
    let b = s.bounds;
    let (w, h) = (b.width() * PX_PER_M, b.height() * PX_PER_M);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    // World coordinates, y up.
    let _ = writeln!(
        out,
        r#"<g transform="translate({:.3},{:.3}) scale({PX_PER_M},{})">"#,
        -b.min_x * PX_PER_M,
        b.max_y * PX_PER_M,
        -PX_PER_M
    );
    polygon(&mut out, &b.corners(), r##"fill="#f4f4f4" stroke="black" stroke-width="0.1""##);
    for v in s.parked_vehicles() {
        polygon(&mut out, &v.corners(), r##"fill="#8a8a8a" stroke="none""##);
    }

    let duration = path.duration().max(1.0);
    for o in obstacles {
        let track: Vec<Point2> = (0..=20).map(|k| o.position_at(duration * k as f64 / 20.0)).collect();
        polyline(&mut out, &track, r##"stroke="#d04040" stroke-width="0.05" stroke-dasharray="0.2,0.2""##);
        let _ = writeln!(
            out,
            r##"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="#d04040" fill-opacity="0.4"/>"##,
            o.p0.x, o.p0.y, o.radius
        );
    }

    let mut next_snapshot = 0.0;
    for sample in &path.samples {
        if sample.time + 1e-9 >= next_snapshot {
            polygon(
                &mut out,
                &geom.corners(&sample.state),
                r##"fill="none" stroke="#2060c0" stroke-width="0.04""##,
            );
            next_snapshot += SNAPSHOT_EVERY;
        }
    }
    if let Some(last) = path.samples.last() {
        polygon(
            &mut out,
            &geom.corners(&last.state),
            r##"fill="#2060c0" fill-opacity="0.3" stroke="#2060c0" stroke-width="0.06""##,
        );
    }
    let trace: Vec<Point2> = path.samples.iter().map(|p| p.state.position()).collect();
    polyline(&mut out, &trace, r##"stroke="#2060c0" stroke-width="0.08""##);
    polygon(
        &mut out,
        &geom.corners(&s.goal_state()),
        r##"fill="none" stroke="#20a040" stroke-width="0.08" stroke-dasharray="0.3,0.15""##,
    );
    out.push_str("</g>\n</svg>\n");
    out
}
