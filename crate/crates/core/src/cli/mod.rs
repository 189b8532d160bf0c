//! Command-line front end for the `cachecode` binary.
//!
//! [`run`] never touches the filesystem except to read `--input` and
//! `--overlay` files; the caller writes [`Outcome::body`] wherever `--out`
//! points.

mod render;

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::delivery::{
    generate_schedule_with, mn_rate, mn_subpacketization, plan_delivery, rate_for, DeliveryError,
    Strategy, TransmissionSchedule,
};
use crate::model::{build_cache_layout, CacheLayout, DemandVector, InstanceError, SystemParams};
use crate::multiaccess::{
    ccdn_bound_curve, ccdn_user_view, optimality_table, CcdnParams, MultiaccessError,
};
use crate::rational::Rational;
use crate::verifier::{
    simulate_schedule, verify_codewords, verify_instantaneous_decodability, FileStore,
    SimulationError,
};

pub use render::SCHEMA;

#[derive(Debug, Parser)]
#[command(
    name = "cachecode",
    version,
    about = "Linear sub-packetization coded caching"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a delivery schedule.
    Schedule(ScheduleArgs),
    /// Check a schedule for decodability and coverage.
    Verify(VerifyArgs),
    /// Run placement and delivery on random file contents and decode.
    Simulate(SimulateArgs),
    /// Rate and sub-packetization for every cache size.
    RateCurve(CurveArgs),
    /// Multi-access rate upper bound against memory.
    CcdnBound(BoundArgs),
    /// Optimal against achieved multi-access rates at M = N/K.
    OptimalityTable(TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum StrategyArg {
    #[default]
    Auto,
    ShiftReplace,
    Sweep,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Auto => Strategy::Auto,
            StrategyArg::ShiftReplace => Strategy::ShiftReplace,
            StrategyArg::Sweep => Strategy::Sweep,
        }
    }
}

/// `identity`, `random:<seed>` or a comma-separated list of file indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DemandSpec {
    Identity,
    Random(u64),
    Explicit(Vec<usize>),
}

impl FromStr for DemandSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "identity" {
            return Ok(Self::Identity);
        }
        if let Some(seed) = s.strip_prefix("random:") {
            return seed
                .parse()
                .map(Self::Random)
                .map_err(|e| format!("bad seed {seed:?}: {e}"));
        }
        s.split(',')
            .map(|f| f.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map(Self::Explicit)
            .map_err(|e| format!("expected identity, random:<seed> or a list like 1,2,3: {e}"))
    }
}

impl DemandSpec {
    fn resolve(&self, params: &SystemParams) -> Result<DemandVector, InstanceError> {
        match self {
            Self::Identity => Ok(DemandVector::identity(params)),
            Self::Random(seed) => Ok(DemandVector::random(params, *seed)),
            Self::Explicit(files) => DemandVector::new(files.clone(), params),
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Self::Random(seed) => Some(*seed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// Number of users (and sub-packets per file).
    #[arg(long = "K")]
    pub k: usize,
    /// Number of files; defaults to K.
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Cached sub-packets per file (per cache with --L).
    #[arg(long = "i")]
    pub i: usize,
    /// Caches each user reads; selects the multi-access network.
    #[arg(long = "L")]
    pub l: Option<usize>,
    #[arg(long, default_value = "identity")]
    pub demand: DemandSpec,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ScheduleArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_enum, default_value_t)]
    pub strategy: StrategyArg,
    /// Run the verifier on the result; failures exit with status 3.
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// JSON schedule written by `schedule`; generated when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Seed for the random file contents.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub slice_bytes: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[arg(long = "K")]
    pub k: usize,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    #[arg(long = "K")]
    pub k: usize,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "L")]
    pub l: usize,
    /// Evenly spaced samples on [0, 3N/K], on top of the breakpoints.
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    /// CSV with columns M and R (and optionally series) to pass through.
    #[arg(long)]
    pub overlay: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[arg(long = "K")]
    pub k: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl Command {
    pub fn output(&self) -> &OutputArgs {
        match self {
            Self::Schedule(a) => &a.output,
            Self::Verify(a) => &a.output,
            Self::Simulate(a) => &a.output,
            Self::RateCurve(a) => &a.output,
            Self::CcdnBound(a) => &a.output,
            Self::OptimalityTable(a) => &a.output,
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Self::RateCurve(_) | Self::CcdnBound(_) => Format::Csv,
            Self::OptimalityTable(_) => Format::Table,
            _ => Format::Json,
        }
    }

    pub fn format(&self) -> Format {
        self.output()
            .format
            .unwrap_or_else(|| self.default_format())
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Delivery(#[from] DeliveryError),
    #[error(transparent)]
    Multiaccess(#[from] MultiaccessError),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Instance(_) | Self::Usage(_) => 2,
            Self::Delivery(e) => delivery_code(e),
            Self::Multiaccess(MultiaccessError::Delivery(e)) => delivery_code(e),
            Self::Multiaccess(_) => 2,
            Self::Simulation(SimulationError::Delivery(e)) => delivery_code(e),
            Self::Simulation(SimulationError::Mismatch { .. }) => 3,
            Self::Simulation(_) => 2,
            Self::Io(_) => 1,
        }
    }
}

fn delivery_code(e: &DeliveryError) -> i32 {
    match e {
        DeliveryError::Instance(_) | DeliveryError::Regime { .. } => 2,
        _ => 3,
    }
}

/// What the binary prints and how it exits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub body: String,
    pub exit_code: i32,
    /// Diagnostic for standard error.
    pub message: Option<String>,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Self {
            body,
            exit_code: 0,
            message: None,
        }
    }

    fn failed(body: String, message: String) -> Self {
        Self {
            body,
            exit_code: 3,
            message: Some(message),
        }
    }
}

impl From<CliError> for Outcome {
    fn from(e: CliError) -> Self {
        Self {
            body: String::new(),
            exit_code: e.exit_code(),
            message: Some(e.to_string()),
        }
    }
}

pub fn run(cli: &Cli) -> Outcome {
    let format = cli.command.format();
    let result = match &cli.command {
        Command::Schedule(a) => cmd_schedule(a, format),
        Command::Verify(a) => cmd_verify(a, format),
        Command::Simulate(a) => cmd_simulate(a, format),
        Command::RateCurve(a) => cmd_rate_curve(a, format),
        Command::CcdnBound(a) => cmd_ccdn_bound(a, format),
        Command::OptimalityTable(a) => cmd_optimality_table(a, format),
    };
    result.unwrap_or_else(Outcome::from)
}

/// An instance resolved to the dedicated-cache problem it induces.
struct Resolved {
    /// Parameters the schedule is built for (`i_eff` under `--L`).
    params: SystemParams,
    layout: CacheLayout,
    demand: DemandVector,
}

fn resolve(args: &InstanceArgs) -> Result<Resolved, CliError> {
    let n = args.n.unwrap_or(args.k);
    match args.l {
        None => {
            let params = SystemParams::new(n, args.k, args.i)?;
            let demand = args.demand.resolve(&params)?;
            Ok(Resolved {
                layout: build_cache_layout(&params),
                params,
                demand,
            })
        }
        Some(l) => {
            let ccdn = CcdnParams::new(n, args.k, l, args.i)?;
            let params = ccdn.equivalent_dedicated()?;
            let demand = args.demand.resolve(&params)?;
            Ok(Resolved {
                layout: ccdn_user_view(&ccdn)?,
                params,
                demand,
            })
        }
    }
}

fn build_schedule(r: &Resolved, strategy: Strategy) -> Result<TransmissionSchedule, CliError> {
    let i = r.params.cache_units();
    if strategy == Strategy::Auto || i == 0 || i == r.params.n_users() {
        Ok(plan_delivery(&r.params, &r.demand)?)
    } else {
        Ok(generate_schedule_with(&r.params, &r.demand, strategy)?)
    }
}

fn cmd_schedule(a: &ScheduleArgs, format: Format) -> Result<Outcome, CliError> {
    let r = resolve(&a.instance)?;
    let schedule = build_schedule(&r, a.strategy.into())?;
    let report = a
        .verify
        .then(|| verify_instantaneous_decodability(&schedule, &r.layout));
    let doc = render::ScheduleDoc::new(&a.instance, &r.params, &schedule, report.clone());
    let body = render::schedule(&doc, format)?;
    match report {
        Some(rep) if !rep.is_ok() => Ok(Outcome::failed(
            body,
            format!("verification failed: {} violations", rep.violations.len()),
        )),
        _ => Ok(Outcome::ok(body)),
    }
}

fn cmd_verify(a: &VerifyArgs, format: Format) -> Result<Outcome, CliError> {
    let r = resolve(&a.instance)?;
    let (codewords, source) = match &a.input {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            (render::read_codewords(&text)?, "input")
        }
        None => (
            build_schedule(&r, Strategy::Auto)?.codewords().to_vec(),
            "generated",
        ),
    };
    let report = verify_codewords(&codewords, &r.layout);
    let body = render::verification(
        &a.instance,
        &r.params,
        source,
        codewords.len(),
        &report,
        format,
    )?;
    if report.is_ok() {
        Ok(Outcome::ok(body))
    } else {
        Ok(Outcome::failed(
            body,
            format!(
                "verification failed: {} violations",
                report.violations.len()
            ),
        ))
    }
}

fn cmd_simulate(a: &SimulateArgs, format: Format) -> Result<Outcome, CliError> {
    let r = resolve(&a.instance)?;
    if a.slice_bytes == 0 {
        return Err(CliError::Usage("--slice-bytes must be positive".into()));
    }
    let schedule = build_schedule(&r, Strategy::Auto)?;
    let store = FileStore::random(
        r.params.n_files(),
        r.params.n_users(),
        a.slice_bytes,
        a.seed,
    );
    let mut report = simulate_schedule(schedule.codewords(), &r.layout, &r.demand, &store)?;
    report.seed = a.seed;
    let body = render::simulation(&a.instance, &schedule, a.slice_bytes, &report, format)?;
    Ok(Outcome::ok(body))
}

fn cmd_rate_curve(a: &CurveArgs, format: Format) -> Result<Outcome, CliError> {
    let n = a.n.unwrap_or(a.k);
    let rows = (0..=a.k)
        .map(|i| {
            let params = SystemParams::new(n, a.k, i)?;
            Ok(render::CurveRow {
                i,
                memory: params.memory(),
                fraction: params.cache_fraction(),
                r_new: rate_for(a.k, i),
                r_mn: mn_rate(&params),
                subpacketization_new: a.k as u64,
                subpacketization_mn: mn_subpacketization(&params),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Outcome::ok(render::rate_curve(a.k, n, &rows, format)?))
}

fn cmd_ccdn_bound(a: &BoundArgs, format: Format) -> Result<Outcome, CliError> {
    let n = a.n.unwrap_or(a.k);
    let params = CcdnParams::new(n, a.k, a.l, 0)?;
    let curve = ccdn_bound_curve(&params)?;
    let span = Rational::new(3 * n as i64, a.k as i64);
    let samples = curve.sample(span, a.grid)?;
    let overlay = match &a.overlay {
        Some(path) => render::read_overlay(path)?,
        None => Vec::new(),
    };
    let body = render::ccdn_bound(&params, curve.breakpoints(), &samples, &overlay, format)?;
    Ok(Outcome::ok(body))
}

fn cmd_optimality_table(a: &TableArgs, format: Format) -> Result<Outcome, CliError> {
    let rows = optimality_table(a.k)?;
    Ok(Outcome::ok(render::optimality(a.k, &rows, format)?))
}
