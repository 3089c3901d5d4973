//! Command-line front end: load or generate an instance, run
//! branch-and-price, the root LP alone, or a single pricing solve, and emit
//! a JSON report.

mod args;

use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use cgdp::problems::{
    BppInstance, GcpInstance, MraspInstance, PdptwInstance, PdptwProblem, PmsConfig, PmsInstance, RoutingInstance,
    RoutingProblem,
};
use cgdp::{
    solve_branch_and_price, BnpConfig, BnpStatus, Family, InstanceError, ProblemKind, SearchLimits,
    SearchOptions, SearchStats, SearchStatus, SolutionView, Solver,
};
use clap::Parser;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use args::{Cli, Command, GeneratorSpec, Mode, SolveArgs};

pub const EXIT_OPTIMAL: i32 = 0;
pub const EXIT_LIMIT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_SOFTWARE: i32 = 70;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("solver failure: {0}")]
    Solve(String),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Solve(_) => EXIT_SOFTWARE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

/// Everything that determines a run, echoed in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub instance: Option<PathBuf>,
    pub generate: Option<GeneratorSpec>,
    pub pricer: Solver,
    pub elementary: bool,
    pub mode: Mode,
    pub time_limit: Option<f64>,
    pub customers: Option<usize>,
    pub duals: Option<Vec<f64>>,
    pub dominance: bool,
    pub dual_bounds: bool,
    pub verbosity: u8,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_args(args: SolveArgs) -> Result<Self, CliError> {
        let generate = match (args.generate, args.seed) {
            (Some(mut spec), Some(seed)) => {
                if spec.seed.is_some_and(|s| s != seed) {
                    return Err(CliError::Usage("--seed disagrees with the seed in --generate".into()));
                }
                spec.seed = Some(seed);
                Some(spec)
            }
            (Some(mut spec), None) => {
                spec.seed.get_or_insert(0);
                Some(spec)
            }
            (None, _) => None,
        };
        if let Some(t) = args.time_limit {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(CliError::Usage("--time-limit must be a nonnegative number".into()));
            }
        }
        Ok(RunConfig {
            problem: args.problem,
            instance: args.instance,
            generate,
            pricer: args.pricer,
            elementary: !args.non_elementary,
            mode: args.mode,
            time_limit: args.time_limit,
            customers: args.customers,
            duals: args.duals,
            dominance: !args.no_dominance,
            dual_bounds: !args.no_dual_bounds,
            verbosity: args.verbose,
            output: args.output,
        })
    }

    fn search_options(&self) -> SearchOptions {
        SearchOptions {
            dominance: self.dominance,
            dual_bounds: self.dual_bounds,
            record_states: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Optimal,
    /// A limit was hit with a solution at hand.
    Feasible,
    /// A limit was hit before any solution was found.
    LimitReached,
    Infeasible,
    /// Root LP converged (root-lp mode).
    RootSolved,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Optimal | RunStatus::RootSolved => EXIT_OPTIMAL,
            RunStatus::Feasible | RunStatus::LimitReached => EXIT_LIMIT,
            RunStatus::Infeasible => EXIT_INFEASIBLE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub status: RunStatus,
    pub objective: Option<f64>,
    pub dual_bound: Option<f64>,
    pub gap: Option<f64>,
    pub root_lp: Option<f64>,
    pub nodes_explored: usize,
    pub colgen_iterations: usize,
    pub columns_generated: usize,
    pub pricer_stats: SearchStats,
    pub wall_time: f64,
    pub solution: Option<SolutionView>,
    pub config: RunConfig,
}

impl RunReport {
    fn empty(status: RunStatus, config: &RunConfig) -> Self {
        RunReport {
            status,
            objective: None,
            dual_bound: None,
            gap: None,
            root_lp: None,
            nodes_explored: 0,
            colgen_iterations: 0,
            columns_generated: 0,
            pricer_stats: SearchStats::default(),
            wall_time: 0.0,
            solution: None,
            config: config.clone(),
        }
    }

    fn fill_gap(&mut self) {
        self.gap = match (self.objective, self.dual_bound) {
            (Some(o), Some(b)) => Some((o - b) / o.abs().max(1.0)),
            _ => None,
        };
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn data_error(e: InstanceError) -> CliError {
    CliError::Data(e.to_string())
}

enum Loaded {
    Problem(Box<dyn Family>),
    Infeasible(String),
}

fn load(config: &RunConfig) -> Result<Loaded, CliError> {
    let elementary = config.elementary;
    let loaded: Result<Box<dyn Family>, InstanceError> = match (&config.instance, &config.generate) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
            match config.problem {
                ProblemKind::Bpp => BppInstance::parse(&text).map(|i| Box::new(i) as Box<dyn Family>),
                ProblemKind::Gcp => GcpInstance::parse(&text).map(|i| Box::new(i) as Box<dyn Family>),
                ProblemKind::Pms => PmsInstance::parse(&text).map(|i| Box::new(i) as Box<dyn Family>),
                ProblemKind::Mrasp => MraspInstance::parse(&text).map(|i| Box::new(i) as Box<dyn Family>),
                kind @ (ProblemKind::Vrptw | ProblemKind::CumVrptw) => RoutingInstance::parse_solomon(&text, config.customers)
                    .map(|i| Box::new(RoutingProblem::new(i, kind == ProblemKind::CumVrptw, elementary)) as Box<dyn Family>),
                ProblemKind::Pdptw => {
                    PdptwInstance::parse(&text).map(|i| Box::new(PdptwProblem::new(i, elementary)) as Box<dyn Family>)
                }
            }
        }
        (None, Some(spec)) => Ok(generate(config.problem, spec, elementary)?),
        (None, None) => return Err(CliError::Usage("either --instance or --generate is required".into())),
    };
    match loaded {
        Ok(p) => Ok(Loaded::Problem(p)),
        Err(InstanceError::Infeasible(msg)) => Ok(Loaded::Infeasible(msg)),
        Err(e) => Err(data_error(e)),
    }
}

fn generate(kind: ProblemKind, spec: &GeneratorSpec, elementary: bool) -> Result<Box<dyn Family>, CliError> {
    let seed = spec.seed.unwrap_or(0);
    let n = spec.n;
    Ok(match kind {
        ProblemKind::Bpp => match spec.config.unwrap_or(1) {
            1 => Box::new(BppInstance::random(n, seed)),
            2 => Box::new(BppInstance::falkenauer_uniform(n, seed)),
            c => return Err(CliError::Usage(format!("bpp generator config must be 1 or 2, got {c}"))),
        },
        ProblemKind::Gcp => Box::new(GcpInstance::random(n, spec.density.unwrap_or(0.5), seed)),
        ProblemKind::Pms => {
            let c = spec.config.unwrap_or(1);
            let config = PmsConfig::from_number(c)
                .ok_or_else(|| CliError::Usage(format!("pms generator config must be 1, 2 or 3, got {c}")))?;
            Box::new(PmsInstance::generate(n, spec.m.unwrap_or(2).max(1), config, seed))
        }
        ProblemKind::Mrasp => Box::new(MraspInstance::generate(n, spec.m.unwrap_or(2).max(1), seed)),
        ProblemKind::Vrptw | ProblemKind::CumVrptw => Box::new(RoutingProblem::new(
            RoutingInstance::random(n, seed),
            kind == ProblemKind::CumVrptw,
            elementary,
        )),
        ProblemKind::Pdptw => Box::new(PdptwProblem::new(PdptwInstance::random(n, seed), elementary)),
    })
}

/// Runs one configuration. The report's `wall_time` covers loading and
/// solving.
pub fn run(config: &RunConfig) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let problem = match load(config)? {
        Loaded::Problem(p) => p,
        Loaded::Infeasible(msg) => {
            log::info!("instance rejected by preprocessing: {msg}");
            let mut report = RunReport::empty(RunStatus::Infeasible, config);
            report.wall_time = start.elapsed().as_secs_f64();
            return Ok(report);
        }
    };
    let mut report = match config.mode {
        Mode::Bnp | Mode::RootLp => run_bnp(problem.as_ref(), config)?,
        Mode::PricingOnly => run_pricing(problem.as_ref(), config)?,
    };
    report.wall_time = start.elapsed().as_secs_f64();
    Ok(report)
}

fn time_limit(config: &RunConfig) -> Option<Duration> {
    config.time_limit.map(Duration::from_secs_f64)
}

fn run_bnp(problem: &dyn Family, config: &RunConfig) -> Result<RunReport, CliError> {
    let bnp = BnpConfig {
        pricer: config.pricer,
        time_limit: time_limit(config),
        search: config.search_options(),
        root_only: config.mode == Mode::RootLp,
        ..BnpConfig::default()
    };
    let res = solve_branch_and_price(problem, &bnp).map_err(|e| CliError::Solve(e.to_string()))?;
    let status = match res.status {
        BnpStatus::Optimal => RunStatus::Optimal,
        BnpStatus::Infeasible => RunStatus::Infeasible,
        BnpStatus::RootSolved => RunStatus::RootSolved,
        BnpStatus::TimeLimit if res.incumbent.is_some() => RunStatus::Feasible,
        BnpStatus::TimeLimit => RunStatus::LimitReached,
    };
    let mut report = RunReport::empty(status, config);
    report.objective = res.objective();
    report.dual_bound = finite(res.dual_bound);
    report.root_lp = res.root_lp;
    report.nodes_explored = res.nodes_explored;
    report.colgen_iterations = res.colgen_iterations;
    report.columns_generated = res.columns_generated;
    report.pricer_stats = res.pricer_stats;
    report.solution = res.incumbent.as_ref().map(|inc| problem.render(&inc.columns));
    report.fill_gap();
    Ok(report)
}

fn run_pricing(problem: &dyn Family, config: &RunConfig) -> Result<RunReport, CliError> {
    let rows = problem.master_rows().num_rows();
    let duals = config
        .duals
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("--mode pricing-only needs --duals with {rows} values")))?;
    if duals.len() != rows {
        return Err(CliError::Usage(format!(
            "--duals has {} values, the master has {rows} rows",
            duals.len()
        )));
    }
    let mut adapter = problem
        .adapter(&[])
        .ok_or_else(|| CliError::Solve("root pricing problem is contradictory".into()))?;
    let solve_err = |e: &dyn std::fmt::Display| CliError::Solve(e.to_string());
    let model = adapter.rebuild(duals).map_err(|e| solve_err(&e))?;
    let limits = SearchLimits {
        time_limit: time_limit(config),
        ..SearchLimits::default()
    };
    let res = config
        .pricer
        .solve(&model, &limits, &config.search_options())
        .map_err(|e| solve_err(&e))?;
    let offset = adapter.offset(duals);
    let status = match res.status {
        SearchStatus::Optimal => RunStatus::Optimal,
        SearchStatus::Infeasible => RunStatus::Infeasible,
        SearchStatus::Feasible => RunStatus::Feasible,
        SearchStatus::LimitReached if res.best().is_some() => RunStatus::Feasible,
        SearchStatus::LimitReached => RunStatus::LimitReached,
    };
    let mut report = RunReport::empty(status, config);
    report.objective = res.best_cost().map(|c| c + offset);
    report.dual_bound = finite(res.best_bound + offset);
    report.columns_generated = res.solutions.len();
    report.pricer_stats = res.stats.clone();
    if let Some(best) = res.best() {
        let column = adapter.extract(&model, &best.path).map_err(|e| solve_err(&e))?;
        report.solution = Some(problem.render(&[(column, 1)]));
    }
    report.fill_gap();
    Ok(report)
}

fn init_logging(verbosity: u8) {
    let level = match verbosity {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
}

/// Parses `argv`, runs, writes the report and returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OPTIMAL };
        }
    };
    let Command::Solve(args) = cli.command;
    init_logging(args.verbose);
    match RunConfig::from_args(args).and_then(|config| {
        let report = run(&config)?;
        write_report(&report, config.output.as_deref())?;
        Ok(report)
    }) {
        Ok(report) => report.status.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn write_report(report: &RunReport, path: Option<&std::path::Path>) -> Result<(), CliError> {
    let mut text = report.to_json();
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
