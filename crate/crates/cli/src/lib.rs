//! Command-line front end: scenario files, simulation runs, sweeps and the
//! oracle self-check.

pub mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use lea_core::report::{write_rounds_csv, write_snapshots_csv, write_summary_text};
use lea_core::verify::{run_oracle_suite, SuiteSize};
use lea_core::{
    apply_function, decode, encode, run_simulation_with, CodingScheme, Dataset, Error, Fidelity,
    PrimeField, RunOptions, ScenarioConfig, StrategyKind, SummaryReport, WorkFunction,
    DEFAULT_MODULUS,
};

pub use config::{parse_config, parse_config_str, write_config, ConfigError};

#[derive(Debug, Parser)]
#[command(
    name = "lea",
    version,
    about = "Coded computation on Markov workers under a deadline"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write its round log or summary.
    Simulate(SimulateArgs),
    /// Run every (config, seed, strategy) cell and write one row per cell.
    Sweep(SweepArgs),
    /// Check the solvers against exhaustive oracles.
    Verify(VerifyArgs),
    /// Encode a dataset, drop shards, and decode from what is left.
    EncodeDemo(EncodeDemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Lea,
    Static,
    Genie,
}

impl From<StrategyArg> for StrategyKind {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Lea => StrategyKind::Lea,
            StrategyArg::Static => StrategyKind::Static,
            StrategyArg::Genie => StrategyKind::Genie,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FidelityArg {
    Analytic,
    Full,
}

impl From<FidelityArg> for Fidelity {
    fn from(f: FidelityArg) -> Self {
        match f {
            FidelityArg::Analytic => Fidelity::Analytic,
            FidelityArg::Full => Fidelity::Full,
        }
    }
}

#[derive(Debug, Args)]
pub struct Overrides {
    #[arg(long, value_name = "M")]
    pub rounds: Option<u64>,
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub fidelity: Option<FidelityArg>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyArg>,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
    /// Also write LEA estimator snapshots to this CSV file.
    #[arg(long, value_name = "PATH")]
    pub estimates: Option<PathBuf>,
    /// Rounds between estimator snapshots.
    #[arg(long, value_name = "N", default_value_t = 1000)]
    pub estimate_every: u64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_name = "PATH", required = true, num_args = 1..)]
    pub config: Vec<PathBuf>,
    /// First seed of the range.
    #[arg(long, value_name = "S", default_value_t = 0)]
    pub seed: u64,
    /// Number of consecutive seeds.
    #[arg(long, value_name = "N", default_value_t = 1)]
    pub seeds: u64,
    #[arg(long, value_name = "M")]
    pub rounds: Option<u64>,
    #[arg(long, value_enum)]
    pub fidelity: Option<FidelityArg>,
    /// Strategies to run; each config's own strategy when absent.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub strategy: Vec<StrategyArg>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_name = "S", default_value_t = 0)]
    pub seed: u64,
    /// Fewer random instances per check.
    #[arg(long)]
    pub quick: bool,
}

#[derive(Debug, Args)]
pub struct EncodeDemoArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub r: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub deg_f: usize,
    #[arg(long, default_value_t = DEFAULT_MODULUS)]
    pub modulus: u64,
    /// Dataset file, one chunk per line; random when absent.
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub chunk_len: usize,
    #[arg(long, value_name = "S", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Failure of a command, mapped to the process exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Io(_) => 1,
            Self::Verification(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(m) => write!(f, "config error: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
            Self::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

fn sim_error(e: Error) -> CliError {
    match e {
        Error::DecodeMismatch { .. } => CliError::Verification(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

/// Writes a report in the chosen format.
pub fn emit_results(
    report: &SummaryReport,
    out: Option<&Path>,
    format: OutputFormat,
) -> Result<(), CliError> {
    let w = open_out(out)?;
    match format {
        OutputFormat::Csv => write_rounds_csv(&report.records, w)?,
        OutputFormat::Text => write_summary_text(report, w)?,
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Verify(a) => verify(a),
        Command::EncodeDemo(a) => encode_demo(a),
    }
}

fn apply_overrides(cfg: &mut ScenarioConfig, o: &Overrides) -> Result<(), CliError> {
    if let Some(m) = o.rounds {
        cfg.rounds = m;
    }
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(f) = o.fidelity {
        cfg.fidelity = f.into();
    }
    config::check_scenario(cfg)?;
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let mut cfg = parse_config(&a.config)?;
    if let Some(s) = a.strategy {
        cfg.strategy = s.into();
    }
    apply_overrides(&mut cfg, &a.overrides)?;
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    let options = RunOptions {
        keep_records: a.format == OutputFormat::Csv,
        estimate_every: a.estimates.as_ref().map(|_| a.estimate_every.max(1)),
    };
    let report = run_simulation_with(cfg, &options).map_err(sim_error)?;
    emit_results(&report, a.out.as_deref(), a.format)?;
    if let Some(path) = &a.estimates {
        write_snapshots_csv(&report.snapshots, open_out(Some(path))?)?;
    }
    if a.out.is_some() {
        let mut stdout = io::stdout().lock();
        writeln!(
            stdout,
            "{}: throughput = {} ({} of {} rounds)",
            report.strategy, report.throughput, report.successes, report.rounds
        )?;
    }
    Ok(())
}

pub const SWEEP_CSV_HEADER: &str = "config,seed,strategy,rounds,k_star,successes,throughput";

fn sweep(a: SweepArgs) -> Result<(), CliError> {
    let mut cells = Vec::new();
    for path in &a.config {
        let mut base = parse_config(path)?;
        if let Some(m) = a.rounds {
            base.rounds = m;
        }
        if let Some(f) = a.fidelity {
            base.fidelity = f.into();
        }
        config::check_scenario(&base)?;
        let strategies: Vec<StrategyKind> = if a.strategy.is_empty() {
            vec![base.strategy]
        } else {
            a.strategy.iter().map(|&s| s.into()).collect()
        };
        for seed in a.seed..a.seed.saturating_add(a.seeds) {
            for &s in &strategies {
                cells.push((
                    path.display().to_string(),
                    base.clone().with_seed(seed).with_strategy(s),
                ));
            }
        }
    }
    let options = RunOptions {
        keep_records: false,
        estimate_every: None,
    };
    let results: Vec<_> = cells
        .par_iter()
        .map(|(_, cfg)| run_simulation_with(cfg.clone(), &options))
        .collect();
    let mut out = open_out(a.out.as_deref())?;
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for ((name, _), result) in cells.iter().zip(results) {
        let r = result.map_err(sim_error)?;
        writeln!(
            out,
            "{name},{},{},{},{},{},{}",
            r.seed, r.strategy, r.rounds, r.k_star, r.successes, r.throughput
        )?;
    }
    out.flush()?;
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<(), CliError> {
    let size = if a.quick {
        SuiteSize {
            success_model: 100,
            prefix: 50,
            general_loads: 50,
            coding: 5,
        }
    } else {
        SuiteSize::default()
    };
    let checks = run_oracle_suite(a.seed, size);
    let mut stdout = io::stdout().lock();
    for c in &checks {
        writeln!(stdout, "{c}")?;
    }
    let failed: Vec<_> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

fn encode_demo(a: EncodeDemoArgs) -> Result<(), CliError> {
    let field =
        PrimeField::new(a.modulus).map_err(|e| CliError::Config(format!("modulus: {e}")))?;
    let scheme = CodingScheme::new(field, a.n, a.r, a.k, a.deg_f)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let data = match &a.data {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Dataset::from_text(field, &text).map_err(|e| CliError::Config(format!("data: {e}")))?
        }
        None => Dataset::random(field, a.k, a.chunk_len, &mut rng)
            .map_err(|e| CliError::Config(e.to_string()))?,
    };
    if data.k() != a.k {
        return Err(CliError::Config(format!(
            "data: {} chunks, expected k = {}",
            data.k(),
            a.k
        )));
    }
    let shards = encode(&data, &scheme).map_err(|e| CliError::Config(e.to_string()))?;
    let f = WorkFunction::random(field, a.deg_f, data.chunk_len(), &mut rng)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let kept = sample(&mut rng, shards.len(), scheme.recovery_threshold()).into_vec();
    let mut kept_sorted = kept.clone();
    kept_sorted.sort_unstable();
    let results: Vec<_> = kept_sorted
        .iter()
        .map(|&i| {
            (
                i + 1,
                apply_function(&f, &shards[i]).expect("shard length matches f"),
            )
        })
        .collect();
    let decoded =
        decode(&results, &scheme, &f).map_err(|e| CliError::Verification(e.to_string()))?;
    let direct: Vec<_> = data
        .chunks()
        .iter()
        .map(|x| f.evaluate(x).expect("chunk length matches f"))
        .collect();

    let mut out = open_out(a.out.as_deref())?;
    writeln!(out, "modulus = {}", field.modulus())?;
    writeln!(out, "mode = {:?}", scheme.mode())?;
    writeln!(out, "recovery_threshold = {}", scheme.recovery_threshold())?;
    writeln!(out, "function = {f}")?;
    writeln!(out, "# data")?;
    write!(out, "{}", data.to_text())?;
    writeln!(out, "# shards (index, worker, payload)")?;
    for s in &shards {
        let payload: Vec<String> = s.payload.iter().map(|x| x.to_string()).collect();
        writeln!(out, "{} {} {}", s.index, s.owner, payload.join(" "))?;
    }
    let used: Vec<String> = kept_sorted.iter().map(|i| (i + 1).to_string()).collect();
    writeln!(out, "decoded_from = {}", used.join(" "))?;
    for (j, row) in decoded.iter().enumerate() {
        let vals: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        writeln!(out, "f(X_{}) = {}", j + 1, vals.join(" "))?;
    }
    let ok = decoded == direct;
    writeln!(out, "matches_direct = {ok}")?;
    out.flush()?;
    if ok {
        Ok(())
    } else {
        Err(CliError::Verification(
            "decoded values differ from direct evaluation".into(),
        ))
    }
}
