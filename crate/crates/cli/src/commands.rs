//! Subcommand definitions and dispatch for the `rmcorr` binary.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use rmcorr::ensembles::{clifford_table_json, EnsembleId};
use rmcorr::estimators::{
    estimate_concurrence, estimate_correlation, estimate_mes_fidelity, estimate_purity, estimate_t2_witness,
    estimate_tk,
};
use rmcorr::oracle::{
    criterion_report, exact_concurrence, exact_correlation, exact_genuine_correlation, exact_hs_distance,
    exact_mes_fidelity, exact_purity, exact_tk, FidelityVariant,
};
use rmcorr::sampler::{run_concurrence_protocol, run_global_protocol, run_local_protocol_with, run_mes_fidelity_protocol};
use rmcorr::{EstimateWithError, MeasurementDataset, Partition, Protocol};

use crate::config::SweepConfig;
use crate::error::{CliError, CliResult};
use crate::state_spec::StateSpec;
use crate::sweep::run_sweep;
use crate::verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "rmcorr", version, about = "Randomized-measurement estimation of multipartite correlations")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a measurement protocol and write a dataset file.
    Simulate(SimulateArgs),
    /// Postprocess a dataset file into an estimate record.
    Estimate(EstimateArgs),
    /// Exact value of a quantity for a named state.
    Oracle(OracleArgs),
    /// Run a configured sweep and write a CSV table.
    Sweep(SweepArgs),
    /// Run the identity suite; exits with status 2 if any check fails.
    Verify(VerifyArgs),
    /// Print the single-qubit Clifford enumeration as JSON lines.
    Cliffords(OutArgs),
}

#[derive(Debug, Clone, Args)]
pub struct StateArgs {
    /// State such as ghz3, w6, bell, mes4, pure_random3.
    #[arg(long)]
    pub state: String,
    /// Depolarizing weight in [0, 1].
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Seed for random state kinds.
    #[arg(long, default_value_t = 0)]
    pub state_seed: u64,
}

impl StateArgs {
    fn spec(&self) -> CliResult<StateSpec> {
        Ok(self.state.parse::<StateSpec>()?.with_noise(self.noise).with_seed(self.state_seed))
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ProtocolArg {
    LocalCro,
    GlobalCro,
    MesFidelity,
    Concurrence,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EnsembleArg {
    #[value(name = "clifford1q")]
    Clifford1q,
    #[value(name = "haar1q")]
    Haar1q,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub protocol: ProtocolArg,
    #[command(flatten)]
    pub state: StateArgs,
    /// Parties for the global protocol, e.g. 1|2 or 0,2;1.
    #[arg(long)]
    pub partition: Option<String>,
    /// Single-qubit ensemble for the local protocol.
    #[arg(long, value_enum, default_value = "clifford1q")]
    pub ensemble: EnsembleArg,
    #[arg(long = "n-u", alias = "N_U")]
    pub n_u: usize,
    #[arg(long = "n-m", alias = "N_M")]
    pub n_m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dataset path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum EstimatorArg {
    Tk,
    Purity,
    Correlation,
    MesFidelity,
    Concurrence,
    T2Witness,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_enum)]
    pub estimator: EstimatorArg,
    #[arg(long)]
    pub partition: Option<String>,
    /// Qubits for the purity estimator, e.g. 0,2.
    #[arg(long)]
    pub subset: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum QuantityArg {
    #[value(name = "t_k")]
    Tk,
    Purity,
    Correlation,
    CorrelationMax,
    GenuineCorrelation,
    HsDistance,
    MesFidelity,
    Concurrence,
    Criteria,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, value_enum)]
    pub quantity: QuantityArg,
    #[arg(long)]
    pub partition: Option<String>,
    #[arg(long)]
    pub subset: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV path; overrides the config's output. The summary goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Also write the checks as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Estimate plus the partition and the dataset it came from.
#[derive(Debug, Serialize)]
pub struct EstimateRecord {
    #[serde(flatten)]
    pub estimate: EstimateWithError,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition: Option<String>,
    pub dataset: DatasetRef,
}

#[derive(Debug, Serialize)]
pub struct DatasetRef {
    pub path: String,
    pub sha256: String,
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn parse_partition(spec: Option<&str>, what: &str) -> CliResult<Partition> {
    let spec = spec.ok_or_else(|| CliError::Usage(format!("{what} needs --partition")))?;
    Ok(Partition::parse(spec)?)
}

fn parse_subset(spec: Option<&str>) -> CliResult<Vec<usize>> {
    let spec = spec.ok_or_else(|| CliError::Usage("purity needs --subset, e.g. 0,2".into()))?;
    spec.split(',')
        .map(|q| q.trim().parse().map_err(|_| CliError::Usage(format!("bad qubit index '{q}' in --subset"))))
        .collect()
}

fn simulate(a: &SimulateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let state = a.state.spec()?.build()?;
    let ds = match a.protocol {
        ProtocolArg::LocalCro => {
            let ens = match a.ensemble {
                EnsembleArg::Clifford1q => EnsembleId::Clifford1q,
                EnsembleArg::Haar1q => EnsembleId::Haar1q,
            };
            run_local_protocol_with(&state, ens, a.n_u, a.n_m, a.seed)?
        }
        ProtocolArg::GlobalCro => {
            let p = parse_partition(a.partition.as_deref(), "the global protocol")?;
            run_global_protocol(&state, &p, a.n_u, a.n_m, a.seed)?
        }
        ProtocolArg::MesFidelity => run_mes_fidelity_protocol(&state, a.n_u, a.n_m, a.seed)?,
        ProtocolArg::Concurrence => run_concurrence_protocol(&state, a.n_u, a.n_m, a.seed)?,
    };
    emit(&ds.to_text(), a.out.as_deref(), stdout)
}

fn estimate(a: &EstimateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let bytes = fs::read(&a.dataset)
        .map_err(|e| CliError::Usage(format!("cannot read dataset {}: {e}", a.dataset.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| CliError::Usage("dataset is not UTF-8 text".into()))?;
    let ds = MeasurementDataset::from_text(&text)?;
    let mut partition = a.partition.as_deref().map(Partition::parse).transpose()?;
    if partition.is_none() && ds.protocol == Protocol::GlobalCro {
        partition = ds.partition_hint.clone();
    }
    let need = |what| partition.clone().ok_or_else(|| CliError::Usage(format!("{what} needs --partition")));
    let est = match a.estimator {
        EstimatorArg::Tk => estimate_tk(&ds, &need("tk")?)?,
        EstimatorArg::Correlation => estimate_correlation(&ds, &need("correlation")?)?,
        EstimatorArg::T2Witness => estimate_t2_witness(&ds, &need("t2_witness")?)?,
        EstimatorArg::Purity => estimate_purity(&ds, &parse_subset(a.subset.as_deref())?)?,
        EstimatorArg::MesFidelity => estimate_mes_fidelity(&ds)?,
        EstimatorArg::Concurrence => estimate_concurrence(&ds)?,
    };
    let record = EstimateRecord {
        estimate: est,
        partition: partition.map(|p| p.to_string()),
        dataset: DatasetRef {
            path: a.dataset.display().to_string(),
            sha256: format!("{:x}", Sha256::digest(&bytes)),
        },
    };
    emit(&(serde_json::to_string(&record)? + "\n"), a.out.as_deref(), stdout)
}

fn oracle(a: &OracleArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let state = a.state.spec()?.build()?;
    let part = || parse_partition(a.partition.as_deref(), "this quantity");
    let value = match a.quantity {
        QuantityArg::Tk => exact_tk(&state, &part()?)?,
        QuantityArg::Purity => exact_purity(&state, &parse_subset(a.subset.as_deref())?)?,
        QuantityArg::Correlation => exact_correlation(&state, &part()?, FidelityVariant::Gm)?,
        QuantityArg::CorrelationMax => exact_correlation(&state, &part()?, FidelityVariant::Max)?,
        QuantityArg::GenuineCorrelation => exact_genuine_correlation(&state, &part()?)?,
        QuantityArg::HsDistance => exact_hs_distance(&state, &part()?)?,
        QuantityArg::MesFidelity => exact_mes_fidelity(&state)?,
        QuantityArg::Concurrence => exact_concurrence(&state)?,
        QuantityArg::Criteria => {
            let report = criterion_report(&state, &part()?)?;
            return emit(&(serde_json::to_string(&report)? + "\n"), a.out.as_deref(), stdout);
        }
    };
    emit(&format!("{value}\n"), a.out.as_deref(), stdout)
}

fn sweep(a: &SweepArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let mut cfg = SweepConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let out = a.out.clone().or_else(|| cfg.output.clone());
    let result = run_sweep(&cfg)?;
    let csv = result.table.to_csv_string()?;
    match out {
        Some(p) => {
            fs::write(&p, csv)?;
            stdout.write_all((serde_json::to_string(&result.summary)? + "\n").as_bytes())?;
        }
        None => stdout.write_all(csv.as_bytes())?,
    }
    Ok(())
}

fn run_verify(a: &VerifyArgs, stdout: &mut dyn Write) -> CliResult<bool> {
    let checks = verify::run_all();
    for c in &checks {
        writeln!(stdout, "{} {} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
    }
    if let Some(p) = &a.out {
        fs::write(p, serde_json::to_string_pretty(&checks)? + "\n")?;
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> CliResult<i32> {
    match &cli.command {
        Command::Simulate(a) => simulate(a, stdout)?,
        Command::Estimate(a) => estimate(a, stdout)?,
        Command::Oracle(a) => oracle(a, stdout)?,
        Command::Sweep(a) => sweep(a, stdout)?,
        Command::Verify(a) => {
            return Ok(if run_verify(a, stdout)? { EXIT_OK } else { EXIT_VERIFY_FAILED });
        }
        Command::Cliffords(a) => emit(&clifford_table_json(), a.out.as_deref(), stdout)?,
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            let _ = writeln!(stderr, "error: --threads must be positive");
            return EXIT_USAGE;
        }
        builder = builder.num_threads(t);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot start worker threads: {e}");
            return EXIT_USAGE;
        }
    };
    let mut buf = Vec::new();
    let result = pool.install(|| dispatch(&cli, &mut buf));
    if let Err(e) = stdout.write_all(&buf) {
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        return EXIT_USAGE;
    }
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}
