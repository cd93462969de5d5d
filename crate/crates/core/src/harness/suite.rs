//! Monte-Carlo runs of every scenario under each heuristic, aggregated into
//! the summary and per-run tables.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{mean_sd, trajectory_metrics, TrajectoryMetrics};
use super::sampling::{sample_experiments, Experiment, SampleCounts};
use super::scenario::{Mode, Scenario};
use super::svg::render_run;
use crate::geometry::verify_path;
use crate::heuristic::{precompute_field, CostField, FreeGrid, HeuristicError};
use crate::online::{plan_global, run_episode, EpisodeConfig, EpisodeOutcome, FieldCache, GlobalPath, OnlineError};
use crate::planner::{plan, Heuristic, PlannerConfig, TimedPath};
use crate::prediction::{DynamicObstacle, PredictionSet};
use crate::world::StaticMap;

pub const FIELD_RESOLUTION: f64 = 0.5;
/// Half the vehicle width.
pub const FIELD_CLEARANCE: f64 = 1.0;
pub const CHECK_STEP: f64 = 0.01;

pub const SUMMARY_HEADER: &str = "scenario,method,n_runs,failure_rate,runtime_mean,runtime_sd,length_mean,length_sd,clearance_mean,clearance_sd,headrate_mean,headrate_sd,curvature_mean,curvature_sd";
pub const RUNS_HEADER: &str = "scenario,method,run,group,outcome,failed,runtime,iterations,replans,length,min_clearance,obstacle_clearance,heading_rate,curvature";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// Time-indexed search ordered by the grid shortest-path field.
    GridAStar,
    /// Time-indexed search ordered by straight-line distance.
    Euclidean,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::GridAStar, Method::Euclidean];

    pub fn label(&self) -> &'static str {
        match self {
            Method::GridAStar => "t-HA*+A*",
            Method::Euclidean => "t-HA*+Euclidean",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "astar" | "a*" | "grid" | "t-ha*+a*" => Ok(Method::GridAStar),
            "euclidean" | "euclid" | "t-ha*+euclidean" => Ok(Method::Euclidean),
            other => Err(format!("unknown method '{other}' (expected astar or euclidean)")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("{scenario}: {source}")]
    Field {
        scenario: String,
        #[source]
        source: HeuristicError,
    },
    #[error("{scenario}: {source}")]
    Global {
        scenario: String,
        #[source]
        source: OnlineError,
    },
    #[error("cannot build worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub scenarios: Vec<Scenario>,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub full_scale: bool,
    /// Replaces the per-scenario default counts when set.
    pub counts: Option<SampleCounts>,
    /// Replaces each scenario's iteration budget when set.
    pub max_iterations: Option<usize>,
    /// Replaces each online scenario's look-ahead when set.
    pub lookahead: Option<usize>,
    /// Worker threads; zero uses every core.
    pub threads: usize,
    pub planner: PlannerConfig,
    pub episode: EpisodeConfig,
}

impl SuiteConfig {
    pub fn new(scenarios: Vec<Scenario>) -> Self {
        Self {
            scenarios,
            methods: Method::ALL.to_vec(),
            seed: 0,
            full_scale: false,
            counts: None,
            max_iterations: None,
            lookahead: None,
            threads: 0,
            planner: PlannerConfig::default(),
            episode: EpisodeConfig::default(),
        }
    }

    pub fn counts_for(&self, s: &Scenario) -> SampleCounts {
        self.counts.unwrap_or_else(|| {
            if self.full_scale {
                SampleCounts::full(s.obstacle_count())
            } else {
                SampleCounts::desk(s.obstacle_count())
            }
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub scenario: String,
    pub method: Method,
    pub run: usize,
    pub group: usize,
    pub outcome: String,
    pub failed: bool,
    pub collision: bool,
    /// Planner wall-clock seconds; summed over replans for online runs.
    pub runtime: f64,
    pub iterations: usize,
    pub replans: usize,
    pub metrics: TrajectoryMetrics,
    pub trajectory: TimedPath,
    pub obstacles: Vec<DynamicObstacle>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scenario: String,
    pub method: Method,
    pub n_runs: usize,
    pub failure_rate: f64,
    pub runtime: (f64, f64),
    pub length: (f64, f64),
    pub clearance: (f64, f64),
    pub heading_rate: (f64, f64),
    pub curvature: (f64, f64),
    /// Not part of the summary table.
    pub obstacle_clearance: (f64, f64),
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        "nan".to_string()
    }
}

impl SummaryRow {
    fn from_runs(scenario: &str, method: Method, runs: &[&RunRecord]) -> Self {
        let ok: Vec<&&RunRecord> = runs.iter().filter(|r| !r.failed).collect();
        let pick = |f: fn(&TrajectoryMetrics) -> f64| mean_sd(&ok.iter().map(|r| f(&r.metrics)).collect::<Vec<_>>());
        let failures = runs.len() - ok.len();
        Self {
            scenario: scenario.to_string(),
            method,
            n_runs: runs.len(),
            failure_rate: if runs.is_empty() { f64::NAN } else { failures as f64 / runs.len() as f64 },
            runtime: mean_sd(&runs.iter().map(|r| r.runtime).collect::<Vec<_>>()),
            length: pick(|m| m.length),
            clearance: pick(|m| m.min_clearance),
            heading_rate: pick(|m| m.heading_rate),
            curvature: pick(|m| m.curvature),
            obstacle_clearance: pick(|m| m.obstacle_clearance),
        }
    }

    pub fn to_csv_line(&self) -> String {
        let pairs = [self.runtime, self.length, self.clearance, self.heading_rate, self.curvature];
        let mut line = format!("{},{},{},{}", self.scenario, self.method, self.n_runs, num(self.failure_rate));
        for (m, s) in pairs {
            line.push_str(&format!(",{},{}", num(m), num(s)));
        }
        line
    }
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    /// Sorted by scenario order, method, then run index.
    pub runs: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
    pub wall_time: f64,
}

impl SuiteResult {
    pub fn collisions(&self) -> usize {
        self.runs.iter().filter(|r| r.collision).count()
    }

    pub fn row(&self, scenario: &str, method: Method) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.scenario == scenario && r.method == method)
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from(SUMMARY_HEADER);
        out.push('\n');
        for row in &self.summary {
            out.push_str(&row.to_csv_line());
            out.push('\n');
        }
        out
    }

    pub fn runs_csv(&self) -> String {
        let mut out = String::from(RUNS_HEADER);
        out.push('\n');
        for r in &self.runs {
            let m = &r.metrics;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.scenario,
                r.method,
                r.run,
                r.group,
                r.outcome,
                r.failed,
                num(r.runtime),
                r.iterations,
                r.replans,
                num(m.length),
                num(m.min_clearance),
                num(m.obstacle_clearance),
                num(m.heading_rate),
                num(m.curvature)
            ));
        }
        out
    }
}

/// Everything a scenario's runs share.
struct Prepared {
    scenario: Scenario,
    map: StaticMap,
    field: CostField,
    global: Option<GlobalPath>,
    experiments: Vec<Experiment>,
}

fn prepare(s: &Scenario, cfg: &SuiteConfig) -> Result<Prepared, SuiteError> {
    let map = s.build_map();
    let goal = s.goal_state();
    let field = precompute_field(&map, &goal.position(), FIELD_RESOLUTION, FIELD_CLEARANCE).map_err(|source| {
        SuiteError::Field {
            scenario: s.name.clone(),
            source,
        }
    })?;
    let global = match s.mode {
        Mode::OneTime => None,
        Mode::Online => Some(
            plan_global(&s.start_state(), &goal, &map, &field, cfg.episode.global_iterations, &cfg.planner).map_err(
                |source| SuiteError::Global {
                    scenario: s.name.clone(),
                    source,
                },
            )?,
        ),
    };
    let experiments = sample_experiments(s, &cfg.counts_for(s), cfg.seed);
    Ok(Prepared {
        scenario: s.clone(),
        map,
        field,
        global,
        experiments,
    })
}

fn one_time_run(p: &Prepared, method: Method, e: &Experiment, cfg: &SuiteConfig) -> RunRecord {
    let s = &p.scenario;
    let truth = PredictionSet::new(e.obstacles.clone(), f64::INFINITY);
    let preds = PredictionSet::new(e.obstacles.clone(), PredictionSet::DEFAULT_HORIZON);
    let heuristic = match method {
        Method::GridAStar => Heuristic::Grid(&p.field),
        Method::Euclidean => Heuristic::Euclidean,
    };
    let budget = cfg.max_iterations.unwrap_or(s.max_iterations);
    let x0 = s.start_state();
    let result = plan(&x0, &s.goal_state(), &p.map, &preds, &heuristic, budget, &cfg.planner);
    let (trajectory, runtime, iterations, planned) = match result {
        Ok(out) => {
            let planned = !out.path.is_stationary();
            (out.path, out.runtime.as_secs_f64(), out.iterations, planned)
        }
        Err(_) => (TimedPath::stationary(x0), 0.0, 0, false),
    };
    let collision = planned && !verify_path(&trajectory, &cfg.planner.geometry, &p.map, &truth, CHECK_STEP).is_safe();
    let outcome = match (planned, collision) {
        (_, true) => "collision",
        (true, false) => "reached_goal",
        (false, _) => "stationary",
    };
    RunRecord {
        scenario: s.name.clone(),
        method,
        run: e.run,
        group: e.group,
        outcome: outcome.to_string(),
        failed: !planned || collision,
        collision,
        runtime,
        iterations,
        replans: 1,
        metrics: trajectory_metrics(&trajectory, &cfg.planner.geometry, &p.map, &truth),
        trajectory,
        obstacles: e.obstacles.clone(),
    }
}

fn online_run(p: &Prepared, grid: &Arc<FreeGrid>, method: Method, e: &Experiment, cfg: &SuiteConfig) -> RunRecord {
    let s = &p.scenario;
    let global = p.global.as_ref().expect("online scenarios carry a global path");
    let truth = PredictionSet::new(e.obstacles.clone(), f64::INFINITY);
    let mut fields = match method {
        Method::GridAStar => FieldCache::new(grid.clone()),
        Method::Euclidean => FieldCache::euclidean(),
    };
    let episode = EpisodeConfig {
        max_iterations: cfg.max_iterations.unwrap_or(s.max_iterations),
        lookahead: cfg.lookahead.unwrap_or(s.lookahead),
        ..cfg.episode
    };
    let r = run_episode(global, &p.map, &truth, &mut fields, &cfg.planner, &episode);
    RunRecord {
        scenario: s.name.clone(),
        method,
        run: e.run,
        group: e.group,
        outcome: r.outcome.to_string(),
        failed: r.outcome != EpisodeOutcome::ReachedGoal,
        collision: r.outcome == EpisodeOutcome::Collision,
        runtime: r.total_runtime(),
        iterations: r.log.iter().map(|l| l.iterations).sum(),
        replans: r.replans,
        metrics: trajectory_metrics(&r.trajectory, &cfg.planner.geometry, &p.map, &truth),
        trajectory: r.trajectory,
        obstacles: e.obstacles.clone(),
    }
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteResult, SuiteError> {
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build()?;
    let prepared: Vec<Prepared> = cfg.scenarios.iter().map(|s| prepare(s, cfg)).collect::<Result<_, _>>()?;

    let mut runs = Vec::new();
    let mut summary = Vec::new();
    for p in &prepared {
        let grid = Arc::new(p.field.grid().clone());
        for &method in &cfg.methods {
            let mut batch: Vec<RunRecord> = pool.install(|| {
                p.experiments
                    .par_iter()
                    .map(|e| match p.scenario.mode {
                        Mode::OneTime => one_time_run(p, method, e, cfg),
                        Mode::Online => online_run(p, &grid, method, e, cfg),
                    })
                    .collect()
            });
            batch.sort_by_key(|r| r.run);
            summary.push(SummaryRow::from_runs(&p.scenario.name, method, &batch.iter().collect::<Vec<_>>()));
            runs.extend(batch);
        }
    }
    Ok(SuiteResult {
        runs,
        summary,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

fn write(path: &Path, text: &str) -> Result<(), SuiteError> {
    fs::write(path, text).map_err(|source| SuiteError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes `summary.csv`, `runs.csv` and, when `svg` is set, one drawing per
/// run under `svg/`.
pub fn write_outputs(result: &SuiteResult, scenarios: &[Scenario], out_dir: &Path, svg: bool) -> Result<(), SuiteError> {
    let mkdir = |p: &Path| {
        fs::create_dir_all(p).map_err(|source| SuiteError::Io {
            path: p.display().to_string(),
            source,
        })
    };
    mkdir(out_dir)?;
    write(&out_dir.join("summary.csv"), &result.summary_csv())?;
    write(&out_dir.join("runs.csv"), &result.runs_csv())?;
    if svg {
        let dir = out_dir.join("svg");
        mkdir(&dir)?;
        for r in &result.runs {
            let Some(s) = scenarios.iter().find(|s| s.name == r.scenario) else { continue };
            let method = match r.method {
                Method::GridAStar => "astar",
                Method::Euclidean => "euclidean",
            };
            let name = format!("{}_{}_{:04}.svg", r.scenario, method, r.run);
            write(&dir.join(name), &render_run(s, &r.trajectory, &r.obstacles))?;
        }
    }
    Ok(())
}
