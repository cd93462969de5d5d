//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//!
//! Criteria that measure reproduction quality against published numbers are
//! reported without aborting; safety and property checks abort the run on
//! failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thastar::dynamics::{arc_closed_form, integrate, primitive_set};
use thastar::geometry::{clearance, normalize_angle, verify_path};
use thastar::harness::scenario::{Scenario, BUNDLED, ONE_TIME_SCENARIOS};
use thastar::harness::suite::{run_suite, Method, SuiteConfig, SuiteResult, CHECK_STEP, FIELD_CLEARANCE, FIELD_RESOLUTION};
use thastar::heuristic::precompute_field;
use thastar::online::EpisodeOutcome;
use thastar::reeds_shepp::{sample, solve};
use thastar::world::build_boundary_points;
use thastar::{
    plan, Bounds, DynamicObstacle, Heuristic, ParkedVehicle, PlannerConfig, Point2, PredictionSet, StaticMap,
    TimedPath, VehicleGeometry, VehicleState,
};

/// Reference means per scenario: (name, length, clearance).
const REFERENCE: [(&str, f64, f64); 4] = [
    ("perpendicular_head_in", 40.578, 2.983),
    ("perpendicular_reverse_in", 28.967, 1.75),
    ("angle_head_in", 27.08, 1.374),
    ("parallel", 32.713, 1.686),
];
const LENGTH_TOL: f64 = 0.30;
const CLEARANCE_TOL: f64 = 0.75;
const SPEEDUP_MIN: f64 = 5.0;
const SPEEDUP_SCENARIOS: [&str; 3] = ["perpendicular_reverse_in", "angle_head_in", "parallel"];
const ONLINE_FAILURE_MAX: f64 = 0.55;
const ONE_TIME_RUNTIME_MAX: f64 = 300.0;

struct Report {
    lines: Vec<String>,
    hard_failures: usize,
}

impl Report {
    /// A reproduction criterion: printed, not fatal.
    fn soft(&mut self, id: &str, ok: bool, detail: String) {
        let line = format!("[{}] {id}: {detail}", if ok { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push(line);
    }

    /// An invariant: printed and fatal.
    fn hard(&mut self, id: &str, ok: bool, detail: String) {
        if !ok {
            self.hard_failures += 1;
        }
        self.soft(id, ok, detail);
    }

    fn info(&mut self, id: &str, detail: String) {
        let line = format!("[INFO] {id}: {detail}");
        println!("{line}");
        self.lines.push(line);
    }
}

fn one_time_suite() -> SuiteResult {
    let scenarios = ONE_TIME_SCENARIOS.iter().map(|n| Scenario::bundled(n).unwrap()).collect();
    let mut cfg = SuiteConfig::new(scenarios);
    cfg.seed = 0;
    run_suite(&cfg).expect("one-time suite")
}

fn criterion_safety(rep: &mut Report, suite: &SuiteResult) {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ONE_TIME_SCENARIOS {
        let runs: Vec<_> = suite
            .runs
            .iter()
            .filter(|r| r.scenario == name && r.method == Method::GridAStar)
            .collect();
        let failed = runs.iter().filter(|r| r.failed).count();
        let collided = runs.iter().filter(|r| r.collision).count();
        ok &= runs.len() >= 50 && failed == 0 && collided == 0;
        parts.push(format!("{name} {failed}/{} failed {collided} collided", runs.len()));
    }
    let fast = suite.wall_time < ONE_TIME_RUNTIME_MAX;
    parts.push(format!("wall {:.1} s", suite.wall_time));
    rep.soft("1 one-time safety", ok && fast, parts.join(", "));

    let collisions = suite.collisions();
    rep.hard(
        "1 no returned path violates the margin",
        collisions == 0,
        format!("{collisions} flagged at {CHECK_STEP} s re-check over {} runs", suite.runs.len()),
    );
}

fn criterion_quality(rep: &mut Report, suite: &SuiteResult) {
    let d = VehicleGeometry::default().safety_margin;
    let mut len_ok = true;
    let mut clr_ok = true;
    let mut len_parts = Vec::new();
    let mut clr_parts = Vec::new();
    let mut obs_parts = Vec::new();
    for (name, length, clear) in REFERENCE {
        let row = suite.row(name, Method::GridAStar).unwrap();
        let lo = length * (1.0 - LENGTH_TOL);
        let hi = length * (1.0 + LENGTH_TOL);
        let l_in = row.length.0 >= lo && row.length.0 <= hi;
        let c_in = (row.clearance.0 - clear).abs() <= CLEARANCE_TOL;
        len_ok &= l_in;
        clr_ok &= c_in;
        len_parts.push(format!("{name} {:.2} in [{lo:.2}, {hi:.2}] {}", row.length.0, if l_in { "yes" } else { "no" }));
        clr_parts.push(format!("{name} {:.3} vs {clear} {}", row.clearance.0, if c_in { "yes" } else { "no" }));
        obs_parts.push(format!("{name} {:.3}", row.obstacle_clearance.0));
    }
    rep.soft("2 mean path length within 30%", len_ok, len_parts.join(", "));

    let reached: Vec<_> = suite.runs.iter().filter(|r| !r.failed).collect();
    let worst = reached.iter().map(|r| r.metrics.min_clearance).fold(f64::INFINITY, f64::min);
    rep.hard(
        "2 every run keeps clearance >= d",
        worst >= d - 1e-9,
        format!("lowest {worst:.4} over {} reached paths, d = {d}", reached.len()),
    );
    rep.soft("2 mean clearance within 0.75 m", clr_ok, clr_parts.join(", "));
    rep.info("2 moving-obstacle clearance means", obs_parts.join(", "));
}

fn criterion_speedup(rep: &mut Report, suite: &SuiteResult) {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in SPEEDUP_SCENARIOS {
        let grid = suite.row(name, Method::GridAStar).unwrap().runtime.0;
        let euclid = suite.row(name, Method::Euclidean).unwrap().runtime.0;
        let ratio = euclid / grid;
        ok &= ratio >= SPEEDUP_MIN;
        parts.push(format!("{name} {ratio:.2}x ({:.3} ms vs {:.3} ms)", euclid * 1e3, grid * 1e3));
    }
    rep.soft("3 grid heuristic at least 5x faster", ok, parts.join(", "));
}

fn criterion_online(rep: &mut Report) {
    let mut cfg = SuiteConfig::new(vec![Scenario::bundled("surface_lot").unwrap()]);
    cfg.methods = vec![Method::GridAStar];
    let suite = run_suite(&cfg).expect("online suite");
    let n = suite.runs.len();
    let failures: Vec<_> = suite.runs.iter().filter(|r| r.failed).collect();
    let rate = failures.len() as f64 / n as f64;
    let collisions = suite.collisions();
    let timeouts = failures.iter().filter(|r| r.outcome == EpisodeOutcome::Timeout.to_string()).count();
    rep.soft(
        "4 surface lot failure rate",
        n >= 20 && rate <= ONLINE_FAILURE_MAX,
        format!("{}/{n} failed ({:.0}%), limit {:.0}%", failures.len(), rate * 100.0, ONLINE_FAILURE_MAX * 100.0),
    );
    rep.soft(
        "4 surface lot collisions",
        collisions == 0 && timeouts == failures.len(),
        format!("{collisions} collisions, {timeouts} of {} failures are timeouts", failures.len()),
    );
}

/// Straight corridor with a pedestrian crossing ahead of the ego vehicle.
fn crossing() -> (StaticMap, VehicleState, VehicleState, PredictionSet) {
    let bounds = Bounds::new(-5.0, -2.5, 25.0, 2.5);
    let map = build_boundary_points(&[], bounds, 0.25, 2.0);
    let start = VehicleState::new(0.0, 0.0, 0.0);
    let goal = VehicleState::new(20.0, 0.0, 0.0);
    let walker = DynamicObstacle::new(Point2::new(8.0, -3.5), Point2::new(0.0, 0.5), 0.5);
    (map, start, goal, PredictionSet::new(vec![walker], PredictionSet::DEFAULT_HORIZON))
}

/// Longest run of consecutive samples that do not move, in seconds.
fn longest_hold(path: &TimedPath) -> (f64, f64) {
    let mut best = (0.0, 0.0);
    let mut start: Option<usize> = None;
    for i in 1..path.samples.len() {
        let still = path.samples[i].state.distance(&path.samples[i - 1].state) < 1e-9
            && normalize_angle(path.samples[i].state.theta - path.samples[i - 1].state.theta).abs() < 1e-9;
        match (still, start) {
            (true, None) => start = Some(i - 1),
            (false, Some(s)) => {
                let d = path.samples[i - 1].time - path.samples[s].time;
                if d > best.0 {
                    best = (d, path.samples[s].time);
                }
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        let d = path.samples.last().unwrap().time - path.samples[s].time;
        if d > best.0 {
            best = (d, path.samples[s].time);
        }
    }
    best
}

fn criterion_yield(rep: &mut Report) {
    let (map, start, goal, preds) = crossing();
    let cfg = PlannerConfig::default();
    let field = precompute_field(&map, &goal.position(), FIELD_RESOLUTION, FIELD_CLEARANCE).unwrap();
    let out = plan(&start, &goal, &map, &preds, &Heuristic::Grid(&field), 5000, &cfg).unwrap();
    let (hold, at) = longest_hold(&out.path);
    // The hold has to end before the final approach, i.e. the vehicle
    // moves again afterwards.
    let moves_after = out
        .path
        .samples
        .iter()
        .any(|s| s.time > at + hold + 1e-9 && s.state.distance(&goal) + 1e-9 < out.path.samples[0].state.distance(&goal));
    let reached = !out.path.is_stationary();
    let safe = verify_path(&out.path, &cfg.geometry, &map, &preds, CHECK_STEP).is_safe();
    rep.hard(
        "5 yields at a crossing",
        reached && safe && hold >= cfg.primitives.horizon - 1e-9 && moves_after,
        format!(
            "reached {reached}, safe {safe}, longest hold {hold:.1} s from t = {at:.1} s, {} pops",
            out.iterations
        ),
    );
}

fn random_state(rng: &mut ChaCha8Rng, extent: f64) -> VehicleState {
    VehicleState::new(
        rng.random_range(-extent..extent),
        rng.random_range(-extent..extent),
        rng.random_range(-PI..PI),
    )
}

fn criterion_properties(rep: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let cfg = PlannerConfig::default();
    let geom = cfg.geometry;
    let prim = cfg.primitives;
    let radius = cfg.min_turn_radius();

    // Dynamics against the exact arc.
    let mut worst = 0.0f64;
    for u in primitive_set(&prim) {
        let x0 = VehicleState::new(1.0, -2.0, 0.7);
        let states = integrate(&x0, &u, prim.horizon, prim.dt, geom.wheelbase);
        for (k, s) in states.iter().enumerate() {
            let exact = arc_closed_form(&x0, &u, k as f64 * prim.dt, geom.wheelbase);
            worst = worst.max(s.distance(&exact));
        }
    }
    rep.hard("6 RK4 matches the exact arc", worst < 1e-6, format!("max error {worst:.2e} m"));

    // Reeds-Shepp.
    let mut end_err = 0.0f64;
    let mut inv_err = 0.0f64;
    let mut shorter = 0;
    for _ in 0..1000 {
        let a = random_state(&mut rng, 15.0);
        let b = random_state(&mut rng, 15.0);
        let p = solve(&a, &b, radius).expect("a path always exists");
        let end = *sample(&p, &a, 0.1).last().unwrap();
        end_err = end_err
            .max(end.distance(&b))
            .max(normalize_angle(end.theta - b.theta).abs());
        if p.total_length < a.distance(&b) - 1e-9 {
            shorter += 1;
        }
        // Rotate and translate both poses together.
        let (dx, dy, rot) = (rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0), rng.random_range(-PI..PI));
        let (s, c) = rot.sin_cos();
        let tf = |v: &VehicleState| VehicleState::new(c * v.x - s * v.y + dx, s * v.x + c * v.y + dy, v.theta + rot);
        let q = solve(&tf(&a), &tf(&b), radius).unwrap();
        inv_err = inv_err.max((q.total_length - p.total_length).abs());
    }
    rep.hard("6 RS endpoint exact", end_err < 1e-6, format!("max error {end_err:.2e}"));
    rep.hard("6 RS rigid-motion invariant", inv_err < 1e-9, format!("max length change {inv_err:.2e} m"));
    rep.hard("6 RS never shorter than straight line", shorter == 0, format!("{shorter} of 1000 violate"));

    // Spatial index against a linear scan.
    let parked: Vec<ParkedVehicle> = (0..6)
        .map(|i| ParkedVehicle {
            x: 3.0 + 4.0 * i as f64,
            y: 6.0 + (i % 2) as f64,
            heading_deg: 15.0 * i as f64,
            length: 5.0,
            width: 2.0,
        })
        .collect();
    let map = build_boundary_points(&parked, Bounds::new(0.0, 0.0, 30.0, 15.0), 0.25, 2.0);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let c = Point2::new(rng.random_range(-2.0..32.0), rng.random_range(-2.0..17.0));
        let r = rng.random_range(0.1..6.0);
        let mut got = map.query_near(&c, r);
        let mut want: Vec<Point2> = map.points().iter().copied().filter(|p| p.distance_sq(&c) <= r * r).collect();
        let key = |p: &Point2| (p.x.to_bits(), p.y.to_bits());
        got.sort_by_key(key);
        want.sort_by_key(key);
        if got != want {
            mismatches += 1;
        }
    }
    rep.hard("6 spatial index equals linear scan", mismatches == 0, format!("{mismatches} of 1000 queries differ"));

    // Slab clearance against signed distances to the footprint edge lines.
    let mut clr_err = 0.0f64;
    for _ in 0..1000 {
        let s = random_state(&mut rng, 10.0);
        let p = Point2::new(rng.random_range(-15.0..15.0), rng.random_range(-15.0..15.0));
        let corners = geom.corners(&s);
        let oracle = (0..4)
            .map(|i| {
                let (a, b) = (corners[i], corners[(i + 1) % 4]);
                let (ex, ey) = (b.x - a.x, b.y - a.y);
                let len = ex.hypot(ey);
                // Counterclockwise corners: the outward normal is (ey, -ex).
                ((p.x - a.x) * ey - (p.y - a.y) * ex) / len
            })
            .fold(f64::NEG_INFINITY, f64::max);
        clr_err = clr_err.max((clearance(&s, &geom, &p).value() - oracle).abs());
    }
    rep.hard("6 clearance matches polygon oracle", clr_err < 1e-9, format!("max error {clr_err:.2e} m"));

    // Heuristic field consistency over 8-neighbors.
    let mut bad = 0usize;
    let mut pairs = 0usize;
    for (name, _) in BUNDLED {
        let s = Scenario::bundled(name).unwrap();
        let field = precompute_field(&s.build_map(), &s.goal_state().position(), FIELD_RESOLUTION, FIELD_CLEARANCE).unwrap();
        let (cols, rows) = field.dims();
        let g = field.grid();
        for r in 0..rows {
            for c in 0..cols {
                if !g.is_free(c, r) {
                    continue;
                }
                for (dc, dr) in [(1i64, 0i64), (0, 1), (1, 1), (1, -1)] {
                    let (nc, nr) = (c as i64 + dc, r as i64 + dr);
                    if nc < 0 || nr < 0 || nc >= cols as i64 || nr >= rows as i64 || !g.is_free(nc as usize, nr as usize) {
                        continue;
                    }
                    pairs += 1;
                    let (a, b) = (field.cost(c, r), field.cost(nc as usize, nr as usize));
                    let step = g.resolution * if dc != 0 && dr != 0 { 2f64.sqrt() } else { 1.0 };
                    let ok = if a.is_finite() || b.is_finite() { (a - b).abs() <= step + 1e-9 } else { true };
                    if !ok {
                        bad += 1;
                    }
                }
            }
        }
    }
    rep.hard("6 heuristic field consistent", bad == 0, format!("{bad} of {pairs} neighbor pairs violate"));

    // Planner output on a bundled scenario with moving obstacles.
    let s = Scenario::bundled("perpendicular_reverse_in").unwrap();
    let map = s.build_map();
    let field = precompute_field(&map, &s.goal_state().position(), FIELD_RESOLUTION, FIELD_CLEARANCE).unwrap();
    let preds = PredictionSet::new(
        vec![
            DynamicObstacle::new(Point2::new(18.0, 15.0), Point2::new(-0.3, 0.1), 0.5),
            DynamicObstacle::new(Point2::new(6.0, 13.0), Point2::new(0.2, -0.2), 0.5),
        ],
        PredictionSet::DEFAULT_HORIZON,
    );
    let run = || plan(&s.start_state(), &s.goal_state(), &map, &preds, &Heuristic::Grid(&field), s.max_iterations, &cfg).unwrap();
    let first = run();
    let mut hop_err = 0.0f64;
    for w in first.path.samples.windows(2) {
        let u = w[0].control.unwrap();
        let hop = w[1].time - w[0].time;
        let next = integrate(&w[0].state, &u, hop, hop, geom.wheelbase)[1];
        hop_err = hop_err.max(next.distance(&w[1].state));
    }
    rep.hard(
        "6 every hop reproduced by integration",
        !first.path.is_stationary() && hop_err < 1e-6,
        format!("{} hops, max error {hop_err:.2e} m", first.path.samples.len() - 1),
    );

    let mut over = 0;
    for budget in [0, 1, 7, 40, 300] {
        let out = plan(&s.start_state(), &s.goal_state(), &map, &preds, &Heuristic::Euclidean, budget, &cfg).unwrap();
        if out.iterations > budget {
            over += 1;
        }
    }
    rep.hard("6 pops within budget", over == 0, format!("{over} of 5 budgets exceeded"));

    let again = run();
    let same = first.path.to_csv() == again.path.to_csv();
    let suite_a = quick_suite();
    let suite_b = quick_suite();
    let strip = |r: &SuiteResult| r.runs.iter().map(|x| x.trajectory.to_csv()).collect::<Vec<_>>();
    rep.hard(
        "6 byte-exact determinism",
        same && strip(&suite_a) == strip(&suite_b),
        format!("single plan {same}, seeded suite of {} runs compared", suite_a.runs.len()),
    );
}

fn quick_suite() -> SuiteResult {
    let mut cfg = SuiteConfig::new(vec![Scenario::bundled("angle_head_in").unwrap()]);
    cfg.methods = vec![Method::GridAStar];
    cfg.seed = 11;
    run_suite(&cfg).unwrap()
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut rep = Report {
        lines: Vec::new(),
        hard_failures: 0,
    };
    let suite = one_time_suite();
    criterion_safety(&mut rep, &suite);
    criterion_quality(&mut rep, &suite);
    criterion_speedup(&mut rep, &suite);
    criterion_online(&mut rep);
    criterion_yield(&mut rep);
    criterion_properties(&mut rep);

    let failed = rep.lines.iter().filter(|l| l.starts_with("[FAIL]")).count();
    println!(
        "acceptance: {} checks, {failed} failed ({} fatal), {:.1} s",
        rep.lines.iter().filter(|l| !l.starts_with("[INFO]")).count(),
        rep.hard_failures,
        started.elapsed().as_secs_f64()
    );
    if rep.hard_failures > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
