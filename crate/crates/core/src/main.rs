use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use thastar::geometry::verify_path;
use thastar::harness::metrics::trajectory_metrics;
use thastar::harness::sampling::{sample_experiments, SampleCounts};
use thastar::harness::scenario::{load_scenario, Mode, Scenario, BUNDLED, ONE_TIME_SCENARIOS};
use thastar::harness::suite::{run_suite, write_outputs, Method, SuiteConfig, CHECK_STEP, FIELD_CLEARANCE, FIELD_RESOLUTION};
use thastar::harness::svg::render_run;
use thastar::heuristic::precompute_field;
use thastar::online::{plan_global, run_episode, EpisodeConfig, EpisodeOutcome, FieldCache};
use thastar::{plan, Heuristic, PlannerConfig, PredictionSet};

#[derive(Parser)]
#[command(name = "thastar", version, about = "Time-indexed Hybrid A* parking planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan one sampled run of a scenario and write its path and drawing.
    Plan(PlanArgs),
    /// Run the Monte-Carlo suite and write the summary tables.
    Suite(SuiteArgs),
    /// Plan against the static map only, for debugging.
    Global(GlobalArgs),
    /// List the bundled scenarios.
    List,
}

#[derive(Args)]
struct ScenarioArg {
    /// Bundled scenario name.
    #[arg(long, conflicts_with = "file")]
    scenario: Option<String>,
    /// Scenario JSON file.
    #[arg(long)]
    file: Option<PathBuf>,
}

impl ScenarioArg {
    fn load(&self) -> Result<Scenario, Box<dyn Error>> {
        match (&self.scenario, &self.file) {
            (_, Some(path)) => Ok(load_scenario(path)?),
            (Some(name), None) => Ok(Scenario::bundled(name)?),
            (None, None) => Err("pass --scenario NAME or --file PATH".into()),
        }
    }
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    source: ScenarioArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Index of the sampled run to plan.
    #[arg(long, default_value_t = 0)]
    run: usize,
    #[arg(long, default_value = "astar")]
    method: Method,
    /// Iteration budget per search.
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Global-path look-ahead for online scenarios.
    #[arg(long)]
    lookahead: Option<usize>,
    /// Use the large sample counts instead of the desk ones.
    #[arg(long)]
    full_scale: bool,
    /// Write one line per popped node to `trace.txt`.
    #[arg(long)]
    trace: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SuiteArgs {
    /// Scenarios to run; defaults to every bundled scenario.
    #[arg(long = "scenario")]
    scenarios: Vec<String>,
    /// Additional scenario files.
    #[arg(long = "file")]
    files: Vec<PathBuf>,
    /// Heuristics to compare; defaults to both.
    #[arg(long = "method")]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the large sample counts instead of the desk ones.
    #[arg(long)]
    full_scale: bool,
    /// Lattice points per obstacle box (one-time scenarios).
    #[arg(long)]
    lattice_points: Option<usize>,
    /// Velocity draws per lattice combination.
    #[arg(long)]
    velocity_draws: Option<usize>,
    /// Position draws (online scenarios).
    #[arg(long)]
    experiments: Option<usize>,
    /// Velocity draws per position draw (online scenarios).
    #[arg(long)]
    runs_per_experiment: Option<usize>,
    /// Iteration budget per search.
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Global-path look-ahead for online scenarios.
    #[arg(long)]
    lookahead: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Also draw every run.
    #[arg(long)]
    svg: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct GlobalArgs {
    #[command(flatten)]
    source: ScenarioArg,
    #[arg(long, default_value_t = 50_000)]
    max_iterations: usize,
    /// Also write the heuristic field to `field.csv`.
    #[arg(long)]
    field: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), Box<dyn Error>> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn cmd_plan(a: &PlanArgs) -> Result<ExitCode, Box<dyn Error>> {
    let s = a.source.load()?;
    let counts = if a.full_scale {
        SampleCounts::full(s.obstacle_count())
    } else {
        SampleCounts::desk(s.obstacle_count())
    };
    let experiments = sample_experiments(&s, &counts, a.seed);
    let obstacles = match experiments.get(a.run) {
        Some(e) => e.obstacles.clone(),
        None if experiments.is_empty() => Vec::new(),
        None => return Err(format!("run {} out of range (0..{})", a.run, experiments.len()).into()),
    };
    for (i, o) in obstacles.iter().enumerate() {
        println!(
            "obstacle {i}: p0 ({:.3}, {:.3}) v ({:.3}, {:.3}) r {:.2}",
            o.p0.x, o.p0.y, o.velocity.x, o.velocity.y, o.radius
        );
    }
    let planner = PlannerConfig {
        record_trace: a.trace,
        ..PlannerConfig::default()
    };
    let map = s.build_map();
    let goal = s.goal_state();
    let field = precompute_field(&map, &goal.position(), FIELD_RESOLUTION, FIELD_CLEARANCE)?;
    let truth = PredictionSet::new(obstacles.clone(), f64::INFINITY);
    let budget = a.max_iterations.unwrap_or(s.max_iterations);

    let (path, collided) = match s.mode {
        Mode::OneTime => {
            let preds = PredictionSet::new(obstacles.clone(), PredictionSet::DEFAULT_HORIZON);
            let heuristic = match a.method {
                Method::GridAStar => Heuristic::Grid(&field),
                Method::Euclidean => Heuristic::Euclidean,
            };
            let out = plan(&s.start_state(), &goal, &map, &preds, &heuristic, budget, &planner)?;
            println!(
                "{}: {:?} after {} iterations in {:.3} ms",
                s.name,
                out.termination,
                out.iterations,
                out.runtime.as_secs_f64() * 1e3
            );
            if a.trace {
                let lines: Vec<String> = out.trace.iter().map(|t| t.to_line()).collect();
                write(&a.out, "trace.txt", &(lines.join("\n") + "\n"))?;
            }
            let unsafe_path = !out.path.is_stationary()
                && !verify_path(&out.path, &planner.geometry, &map, &truth, CHECK_STEP).is_safe();
            (out.path, unsafe_path)
        }
        Mode::Online => {
            let global = plan_global(&s.start_state(), &goal, &map, &field, 50_000, &planner)?;
            let mut fields = match a.method {
                Method::GridAStar => FieldCache::new(Arc::new(field.grid().clone())),
                Method::Euclidean => FieldCache::euclidean(),
            };
            let episode = EpisodeConfig {
                max_iterations: budget,
                lookahead: a.lookahead.unwrap_or(s.lookahead),
                ..EpisodeConfig::default()
            };
            let r = run_episode(&global, &map, &truth, &mut fields, &planner, &episode);
            println!(
                "{}: {} after {} replans, {:.1} s simulated, {:.3} ms planning",
                s.name,
                r.outcome,
                r.replans,
                r.trajectory.duration(),
                r.total_runtime() * 1e3
            );
            let lines: Vec<String> = r.log.iter().map(|l| l.to_line()).collect();
            write(&a.out, "episode.log", &(lines.join("\n") + "\n"))?;
            (r.trajectory, r.outcome == EpisodeOutcome::Collision)
        }
    };
    let m = trajectory_metrics(&path, &planner.geometry, &map, &truth);
    println!(
        "length {:.3} m, min clearance {:.3} m, heading rate {:.3} deg/s, curvature {:.4} 1/m",
        m.length, m.min_clearance, m.heading_rate, m.curvature
    );
    write(&a.out, "path.csv", &path.to_csv())?;
    write(&a.out, "path.svg", &render_run(&s, &path, &obstacles))?;
    if collided {
        eprintln!("collision flagged by the fine-step checker");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_suite(a: &SuiteArgs) -> Result<ExitCode, Box<dyn Error>> {
    let mut scenarios = Vec::new();
    if a.scenarios.is_empty() && a.files.is_empty() {
        for (name, _) in BUNDLED {
            scenarios.push(Scenario::bundled(name)?);
        }
    }
    for name in &a.scenarios {
        scenarios.push(Scenario::bundled(name)?);
    }
    for f in &a.files {
        scenarios.push(load_scenario(f)?);
    }
    let mut cfg = SuiteConfig::new(scenarios);
    if !a.methods.is_empty() {
        cfg.methods = a.methods.clone();
    }
    cfg.seed = a.seed;
    cfg.full_scale = a.full_scale;
    cfg.max_iterations = a.max_iterations;
    cfg.lookahead = a.lookahead;
    cfg.threads = a.threads;
    if a.lattice_points.is_some() || a.velocity_draws.is_some() || a.experiments.is_some() || a.runs_per_experiment.is_some() {
        let base = if a.full_scale { SampleCounts::full(1) } else { SampleCounts::desk(1) };
        cfg.counts = Some(SampleCounts {
            lattice_points: a.lattice_points.unwrap_or(base.lattice_points),
            velocity_draws: a.velocity_draws.unwrap_or(base.velocity_draws),
            experiments: a.experiments.unwrap_or(base.experiments),
            runs_per_experiment: a.runs_per_experiment.unwrap_or(base.runs_per_experiment),
        });
    }
    let result = run_suite(&cfg)?;
    write_outputs(&result, &cfg.scenarios, &a.out, a.svg)?;
    print!("{}", result.summary_csv());
    eprintln!("{} runs in {:.1} s, outputs in {}", result.runs.len(), result.wall_time, a.out.display());
    let collisions = result.collisions();
    if collisions > 0 {
        eprintln!("{collisions} run(s) flagged as collisions");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_global(a: &GlobalArgs) -> Result<ExitCode, Box<dyn Error>> {
    let s = a.source.load()?;
    let map = s.build_map();
    let goal = s.goal_state();
    let planner = PlannerConfig::default();
    let field = precompute_field(&map, &goal.position(), FIELD_RESOLUTION, FIELD_CLEARANCE)?;
    let global = plan_global(&s.start_state(), &goal, &map, &field, a.max_iterations, &planner)?;
    println!(
        "{}: static path {:.3} m, {} samples, {} indexed states",
        s.name,
        global.source.length(),
        global.source.samples.len(),
        global.states.len()
    );
    write(&a.out, "global.csv", &global.source.to_csv())?;
    write(&a.out, "global.svg", &render_run(&s, &global.source, &[]))?;
    if a.field {
        write(&a.out, "field.csv", &field.to_csv())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Suite(a) => cmd_suite(a),
        Command::Global(a) => cmd_global(a),
        Command::List => {
            for (name, _) in BUNDLED {
                let kind = if ONE_TIME_SCENARIOS.contains(&name) { "one_time" } else { "online" };
                println!("{name}\t{kind}");
            }
            Ok(ExitCode::SUCCESS)
        }
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::FAILURE
    })
}
