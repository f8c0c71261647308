use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use twoconn_core::oracle::ground_truth;
use twoconn_core::simulator::{
    default_round_budget, init_arbitrary, round_scale, run, Network, RunOptions,
};
use twoconn_core::{Graph, Scheduler};

use crate::dot::render_dot;
use crate::graph_file::{parse_graph, render_graph, ParseError};
use crate::report::{exit_code, GraphSummary, ReportDocument};
use crate::specs::{parse_faults, parse_graph_list, parse_seed_range, GraphSpec, SpecError};

pub const EXIT_USAGE: u8 = 64;
pub const EXIT_IO: u8 = 74;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            _ => EXIT_USAGE,
        }
    }
}

/// Simulator and verification harness for self-stabilizing bridge and
/// articulation-point detection.
#[derive(Debug, Parser)]
#[command(name = "twoconn", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation and print a JSON report.
    Run(RunArgs),
    /// Run a matrix of graphs, seeds and schedulers.
    Sweep(SweepArgs),
    /// Export an annotated DOT drawing of a stabilized configuration.
    Dot(DotArgs),
    /// Print a graph in the canonical file format.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Graph file.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Generated graph: random:n,m[,seed] | clustered:KxS[,seed] | figure1.
    #[arg(long)]
    pub generate: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum SchedulerKind {
    RoundRobin,
    Random,
    Weighted,
}

impl SchedulerKind {
    pub fn build(self, seed: u64, n: usize) -> Scheduler {
        match self {
            SchedulerKind::RoundRobin => Scheduler::RoundRobin,
            SchedulerKind::Random => Scheduler::UniformRandom { seed },
            SchedulerKind::Weighted => Scheduler::weighted_from_seed(seed, n),
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, value_enum, default_value = "round-robin")]
    pub scheduler: SchedulerKind,
    /// Seed for the scheduler and for generated graphs without one.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seed for the arbitrary initial configuration (defaults to --seed).
    #[arg(long)]
    pub init_seed: Option<u64>,
    /// Round budget per convergence phase (defaults to 10·d·n·Δ).
    #[arg(long)]
    pub max_rounds: Option<u64>,
    /// Faults, e.g. "post:random:3;1000:5.count=7;post:all".
    #[arg(long)]
    pub faults: Option<String>,
    #[arg(long, default_value_t = 50)]
    pub closure_rounds: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a DOT drawing of the final configuration.
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Graph specs separated by ';'. Specs without a seed take each sweep seed.
    #[arg(long)]
    pub graphs: String,
    /// Seeds: A, A..B or A..=B.
    #[arg(long)]
    pub seeds: String,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [SchedulerKind::RoundRobin, SchedulerKind::Random, SchedulerKind::Weighted])]
    pub schedulers: Vec<SchedulerKind>,
    #[arg(long, default_value_t = 50)]
    pub closure_rounds: u64,
    /// Also list every run in the report.
    #[arg(long)]
    pub verbose: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DotArgs {
    #[command(flatten)]
    pub source: Source,
    /// Simulate from an arbitrary state instead of drawing the ground truth.
    #[arg(long)]
    pub simulate: bool,
    #[arg(long, value_enum, default_value = "round-robin")]
    pub scheduler: SchedulerKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Loads the graph and returns it with a label describing where it came from.
pub fn load(source: &Source, seed: u64) -> Result<(String, Graph), CliError> {
    match (&source.graph, &source.generate) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            let g = parse_graph(&text).map_err(|source| CliError::Parse {
                path: path.clone(),
                source,
            })?;
            Ok((path.display().to_string(), g))
        }
        (None, Some(spec)) => {
            let spec = spec.parse::<GraphSpec>()?.with_seed(seed);
            Ok((spec.to_string(), spec.build(seed)?))
        }
        (None, None) => Err(CliError::Usage(
            "one of --graph or --generate is required".into(),
        )),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub fn execute(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Run(a) => cmd_run(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Dot(a) => cmd_dot(&a),
        Command::Render(a) => {
            let (_, g) = load(&a.source, a.seed)?;
            emit(a.out.as_deref(), &render_graph(&g))?;
            Ok(0)
        }
    }
}

pub fn cmd_run(a: &RunArgs) -> Result<u8, CliError> {
    let (label, g) = load(&a.source, a.seed)?;
    let faults = match &a.faults {
        Some(spec) => parse_faults(spec, a.seed)?,
        None => Vec::new(),
    };
    let max_rounds = a.max_rounds.unwrap_or_else(|| default_round_budget(&g));
    if max_rounds == 0 {
        return Err(CliError::Usage("--max-rounds must be at least 1".into()));
    }
    let init_seed = a.init_seed.unwrap_or(a.seed);
    let net = Network::new(g.clone());
    let opts = RunOptions {
        max_rounds,
        closure_rounds: a.closure_rounds,
        ..RunOptions::for_graph(&g)
    };
    let sched = a.scheduler.build(a.seed, g.n());
    let out = run(&g, &sched, init_arbitrary(&net, init_seed), &faults, &opts)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let doc = ReportDocument::new(&label, &g, init_seed, max_rounds, &out.report);
    emit(a.out.as_deref(), &to_json(&doc))?;
    if let Some(path) = &a.dot {
        let regs = out.final_configuration.registers();
        match render_dot(&g, &regs) {
            Ok(text) => emit(Some(path), &text)?,
            Err(e) => eprintln!("twoconn: no DOT written: {e}"),
        }
    }
    Ok(doc.exit_code())
}

pub fn cmd_dot(a: &DotArgs) -> Result<u8, CliError> {
    let (_, g) = load(&a.source, a.seed)?;
    let regs = if a.simulate {
        let net = Network::new(g.clone());
        let sched = a.scheduler.build(a.seed, g.n());
        let out = run(
            &g,
            &sched,
            init_arbitrary(&net, a.seed),
            &[],
            &RunOptions::for_graph(&g),
        )
        .map_err(|e| CliError::Usage(e.to_string()))?;
        if !out.report.stabilized {
            eprintln!("twoconn: run did not stabilize");
            return Ok(1);
        }
        out.final_configuration.registers()
    } else {
        ground_truth(&g).registers()
    };
    match render_dot(&g, &regs) {
        Ok(text) => {
            emit(a.out.as_deref(), &text)?;
            Ok(0)
        }
        Err(e) => {
            eprintln!("twoconn: {e}");
            Ok(1)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub graph: String,
    pub seed: u64,
    pub scheduler: String,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub delta: usize,
    pub stabilization_round: Option<u64>,
    pub round_ratio: Option<f64>,
    pub stabilized: bool,
    pub certified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub graphs: Vec<String>,
    pub seeds: [u64; 2],
    pub schedulers: Vec<String>,
    pub runs: usize,
    pub stabilized: usize,
    pub certified: usize,
    pub max_round_ratio: Option<f64>,
    pub worst: Option<SweepRecord>,
    pub failures: Vec<SweepRecord>,
    pub results: Option<Vec<SweepRecord>>,
}

fn scheduler_name(k: SchedulerKind) -> String {
    k.to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string()
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<u8, CliError> {
    let specs = parse_graph_list(&a.graphs)?;
    if specs.is_empty() {
        return Err(CliError::Usage("--graphs lists no graphs".into()));
    }
    let seeds = parse_seed_range(&a.seeds)?;
    let mut schedulers = a.schedulers.clone();
    schedulers.sort();
    schedulers.dedup();

    let mut jobs = Vec::new();
    for (gi, spec) in specs.iter().enumerate() {
        for seed in seeds.clone() {
            let spec = spec.with_seed(seed);
            let g = spec.build(seed)?;
            for &k in &schedulers {
                jobs.push((gi, seed, k, spec, g.clone()));
            }
        }
    }
    let closure_rounds = a.closure_rounds;
    let mut results: Vec<((usize, u64, SchedulerKind), SweepRecord)> = jobs
        .into_par_iter()
        .map(|(gi, seed, k, spec, g)| {
            let net = Network::new(g.clone());
            let opts = RunOptions {
                closure_rounds,
                ..RunOptions::for_graph(&g)
            };
            let out = run(
                &g,
                &k.build(seed, g.n()),
                init_arbitrary(&net, seed),
                &[],
                &opts,
            )
            .expect("fault-free runs cannot fail validation");
            let r = &out.report;
            let summary = GraphSummary::new(&spec.to_string(), &g);
            let record = SweepRecord {
                graph: summary.source,
                seed,
                scheduler: scheduler_name(k),
                n: summary.n,
                m: summary.m,
                d: summary.d,
                delta: summary.delta,
                stabilization_round: r.stabilization_round,
                round_ratio: r
                    .stabilization_round
                    .map(|s| s as f64 / round_scale(&g) as f64),
                stabilized: r.stabilized,
                certified: r.oracle_match,
            };
            ((gi, seed, k), record)
        })
        .collect();
    results.sort_by_key(|r| r.0);
    let records: Vec<SweepRecord> = results.into_iter().map(|(_, r)| r).collect();

    let worst = records
        .iter()
        .filter(|r| r.round_ratio.is_some())
        .max_by(|a, b| {
            a.round_ratio
                .partial_cmp(&b.round_ratio)
                .expect("finite ratios")
        })
        .cloned();
    let code = records
        .iter()
        .map(|r| exit_code(r.stabilized, r.certified))
        .max()
        .unwrap_or(0);
    let report = SweepReport {
        graphs: specs.iter().map(GraphSpec::to_string).collect(),
        seeds: [*seeds.start(), *seeds.end()],
        schedulers: schedulers.iter().map(|&k| scheduler_name(k)).collect(),
        runs: records.len(),
        stabilized: records.iter().filter(|r| r.stabilized).count(),
        certified: records.iter().filter(|r| r.certified).count(),
        max_round_ratio: worst.as_ref().and_then(|w| w.round_ratio),
        worst,
        failures: records
            .iter()
            .filter(|r| !(r.stabilized && r.certified))
            .cloned()
            .collect(),
        results: a.verbose.then(|| records.clone()),
    };
    emit(a.out.as_deref(), &to_json(&report))?;
    Ok(code)
}
