//! Command-line front end.
//!
//! [`run`] parses arguments, executes one command and returns the process
//! exit code: 0 on success, 1 for usage errors, 2 for bad input data and
//! 3 for internal failures. Every command writes a JSON manifest next to
//! its outputs; `replay` re-runs a manifest and reproduces the outputs.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    cluster_composition, coalition_loyalty, detect_mediation, imbalance_report, leadership_strength,
    polarization_summary, LeaderConvention, LeaderMap, RatioBasis, DEFAULT_MEDIATION_THRESHOLD,
    DEFAULT_POLARIZATION_COVERAGE,
};
use crate::error::Error;
use crate::extract::{
    build_network, parse_vote_records, AgreementScheme, Denominator, ExtractionConfig, InputFormat, VoteData,
    DEFAULT_EDGE_THRESHOLD,
};
use crate::formats::{self, PartitionFile};
use crate::graph::SignedGraph;
use crate::imbalance::{relative_imbalance, srcc_imbalance, ImbalanceBreakdown, ProblemKind};
use crate::partition::Partition;
use crate::solver::{
    ils_solve, SolverParams, TracePoint, DEFAULT_CONSTRUCTION_ALPHA, DEFAULT_MAX_ITERATIONS, DEFAULT_MAX_NO_IMPROVE,
    DEFAULT_PERTURBATION_STRENGTH,
};
use crate::synth::{self, BlocSpec, StanceModel, SynthConfig, DEFAULT_CONSENSUS_RATE};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(Error),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Internal(msg) => f.write_str(msg),
            CliError::Data(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(msg) => CliError::Usage(msg),
            Error::InvalidMove(msg) => CliError::Internal(msg),
            other => CliError::Data(other),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

// ------------------------------------------------------------------ args

#[derive(Parser, Debug)]
#[command(name = "votebalance", version, about = "Signed voting networks and structural-balance clustering")]
struct Cli {
    /// Worker threads for extraction and solver restarts.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Build a signed agreement graph from a roll-call file.
    Extract(ExtractArgs),
    /// Partition a graph with iterated local search.
    Solve(SolveArgs),
    /// Write reports for a graph and a partition.
    Analyze(AnalyzeArgs),
    /// Generate a synthetic roll-call dataset with planted blocs.
    Generate(GenerateArgs),
    /// Extract, solve and analyze in one run directory.
    Pipeline(PipelineArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeArg {
    V1,
    V2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DenominatorArg {
    All,
    BothVoted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemArg {
    Cc,
    Srcc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisArg {
    Weight,
    Count,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConventionArg {
    Exclude,
    Include,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    Mediation,
    Loyalty,
    Leadership,
    Composition,
    Polarization,
    Sri,
}

impl ReportKind {
    fn name(self) -> &'static str {
        match self {
            ReportKind::Mediation => "mediation",
            ReportKind::Loyalty => "loyalty",
            ReportKind::Leadership => "leadership",
            ReportKind::Composition => "composition",
            ReportKind::Polarization => "polarization",
            ReportKind::Sri => "sri",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StanceArg {
    Independent,
    Opposed,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractOpts {
    /// Agreement scheme: v1 scores abstentions as half agreement, v2 as absence of opinion.
    #[arg(long, value_enum, default_value_t = SchemeArg::V1)]
    pub scheme: SchemeArg,
    /// Drop edges with |weight| below this value.
    #[arg(long, default_value_t = DEFAULT_EDGE_THRESHOLD)]
    pub threshold: f64,
    /// Keep propositions dated in this year (needs a `date` column).
    #[arg(long, conflicts_with_all = ["from", "to"])]
    pub year: Option<i32>,
    /// First day of the period, YYYY-MM-DD.
    #[arg(long)]
    pub from: Option<NaiveDate>,
    /// Last day of the period, YYYY-MM-DD.
    #[arg(long)]
    pub to: Option<NaiveDate>,
    /// Propositions counted when averaging agreement.
    #[arg(long, value_enum, default_value_t = DenominatorArg::All)]
    pub denominator: DenominatorArg,
    /// Vote file format; taken from the file extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOpts {
    #[arg(long, value_enum)]
    pub problem: ProblemArg,
    /// Number of clusters (required for srcc).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// ILS iterations per restart.
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    pub iterations: usize,
    /// Stop a restart after this many iterations without improvement.
    #[arg(long = "no-improve", default_value_t = DEFAULT_MAX_NO_IMPROVE)]
    pub no_improve: usize,
    /// Wall-clock budget in seconds (makes results timing dependent).
    #[arg(long = "time-limit")]
    pub time_limit: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    /// Fraction of vertices moved per perturbation.
    #[arg(long, default_value_t = DEFAULT_PERTURBATION_STRENGTH)]
    pub perturbation: f64,
    /// Construction randomness: 0 is greedy, 1 is uniform.
    #[arg(long, default_value_t = DEFAULT_CONSTRUCTION_ALPHA)]
    pub alpha: f64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeOpts {
    /// CSV with header `party,alliance`.
    #[arg(long)]
    pub coalitions: Option<PathBuf>,
    /// CSV with header `party,leader_deputy_id`.
    #[arg(long)]
    pub leaders: Option<PathBuf>,
    /// Alliance for parties missing from the coalition file.
    #[arg(long = "default-alliance")]
    pub default_alliance: Option<String>,
    #[arg(long = "mediation-threshold", default_value_t = DEFAULT_MEDIATION_THRESHOLD)]
    pub mediation_threshold: f64,
    #[arg(long = "ratio-basis", value_enum, default_value_t = BasisArg::Weight)]
    pub ratio_basis: BasisArg,
    /// Whether the leader counts in their own party's percentage.
    #[arg(long = "leader-convention", value_enum, default_value_t = ConventionArg::Exclude)]
    pub leader_convention: ConventionArg,
    #[arg(long = "polarization-coverage", default_value_t = DEFAULT_POLARIZATION_COVERAGE)]
    pub polarization_coverage: f64,
    /// Comma-separated reports; defaults to every report whose inputs are given.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub reports: Vec<ReportKind>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractArgs {
    /// Vote file (CSV or JSON).
    pub input: PathBuf,
    /// Graph file to write.
    #[arg(short, long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub opts: ExtractOpts,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveArgs {
    /// Graph file.
    pub graph: PathBuf,
    /// Output directory.
    #[arg(short, long, default_value = ".")]
    pub output: PathBuf,
    #[command(flatten)]
    pub opts: SolveOpts,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub partition: PathBuf,
    /// Output directory.
    #[arg(short, long, default_value = ".")]
    pub output: PathBuf,
    #[command(flatten)]
    pub opts: AnalyzeOpts,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 200)]
    pub deputies: usize,
    #[arg(long, default_value_t = 300)]
    pub propositions: usize,
    /// Number of equal-sized blocs.
    #[arg(long, default_value_t = 4, conflicts_with = "bloc_sizes")]
    pub blocs: usize,
    /// Explicit comma-separated bloc sizes.
    #[arg(long = "bloc-sizes", value_delimiter = ',')]
    pub bloc_sizes: Vec<usize>,
    /// Parties per bloc, sharing its seats equally.
    #[arg(long = "parties-per-bloc", default_value_t = 1)]
    pub parties_per_bloc: usize,
    #[arg(long, default_value_t = 0.95)]
    pub discipline: f64,
    #[arg(long = "abstain-rate", default_value_t = 0.0)]
    pub abstain_rate: f64,
    #[arg(long = "absent-rate", default_value_t = 0.0)]
    pub absent_rate: f64,
    #[arg(long = "obstruction-rate", default_value_t = 0.0)]
    pub obstruction_rate: f64,
    #[arg(long = "mediator-fraction", default_value_t = 0.0)]
    pub mediator_fraction: f64,
    #[arg(long = "stance-model", value_enum, default_value_t = StanceArg::Opposed)]
    pub stance_model: StanceArg,
    #[arg(long = "consensus-rate", default_value_t = DEFAULT_CONSENSUS_RATE)]
    pub consensus_rate: f64,
    /// Date the propositions across this year.
    #[arg(long)]
    pub year: Option<i32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Output directory.
    #[arg(short, long, default_value = ".")]
    pub output: PathBuf,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineArgs {
    /// Vote file (CSV or JSON).
    pub input: PathBuf,
    /// Run directory.
    #[arg(short, long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub extract: ExtractOpts,
    #[command(flatten)]
    pub solve: SolveOpts,
    #[command(flatten)]
    pub analyze: AnalyzeOpts,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write outputs here instead of the recorded location.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

// -------------------------------------------------------------- manifest

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileDigest {
    fn of(path: &Path, bytes: &[u8]) -> Self {
        Self {
            path: path.to_path_buf(),
            sha256: hex::encode(Sha256::digest(bytes)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub threads: usize,
    pub args: Command,
    /// Every parameter after defaults were applied.
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub wall_time_seconds: f64,
}

#[derive(Default)]
struct Io {
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

impl Io {
    fn read(&mut self, path: &Path) -> CliResult<Vec<u8>> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        self.inputs.push(FileDigest::of(path, &bytes));
        Ok(bytes)
    }

    fn write(&mut self, path: &Path, contents: &[u8]) -> CliResult<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(path, contents).map_err(|e| Error::io(path, e))?;
        self.outputs.push(FileDigest::of(path, contents));
        Ok(())
    }
}

// -------------------------------------------------------------------- run

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| execute(cli.command, cli.threads)));
    match outcome {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        Err(_) => {
            eprintln!("error: internal failure");
            EXIT_INTERNAL
        }
    }
}

fn execute(command: Command, threads: usize) -> CliResult<()> {
    if threads == 0 {
        return Err(usage("--threads must be at least 1"));
    }
    if let Command::Replay(args) = command {
        return replay(&args);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    pool.install(|| run_recorded(command, threads))
}

fn run_recorded(command: Command, threads: usize) -> CliResult<()> {
    let started = Instant::now();
    let mut io = Io::default();
    let (manifest_path, parameters, seed) = match &command {
        Command::Extract(args) => {
            let params = cmd_extract(args, &mut io)?;
            (sidecar_manifest(&args.output), params, None)
        }
        Command::Solve(args) => {
            let params = cmd_solve(args, threads, &mut io)?;
            let seed = params.seed;
            (args.output.join(MANIFEST_FILE), serde_json::to_value(params).expect("serializable"), Some(seed))
        }
        Command::Analyze(args) => {
            let params = cmd_analyze(args, &mut io)?;
            (args.output.join(MANIFEST_FILE), params, None)
        }
        Command::Generate(args) => {
            let config = cmd_generate(args, &mut io)?;
            (args.output.join(MANIFEST_FILE), serde_json::to_value(&config).expect("serializable"), Some(config.seed))
        }
        Command::Pipeline(args) => {
            let (params, seed) = cmd_pipeline(args, threads, &mut io)?;
            (args.output.join(MANIFEST_FILE), params, Some(seed))
        }
        Command::Replay(_) => unreachable!("handled before dispatch"),
    };
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command_name(&command).to_string(),
        threads,
        args: command,
        parameters,
        seed,
        inputs: io.inputs,
        outputs: io.outputs,
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(Error::from)? + "\n";
    fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(())
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Extract(_) => "extract",
        Command::Solve(_) => "solve",
        Command::Analyze(_) => "analyze",
        Command::Generate(_) => "generate",
        Command::Pipeline(_) => "pipeline",
        Command::Replay(_) => "replay",
    }
}

fn sidecar_manifest(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(OsString::from).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

// --------------------------------------------------------------- extract

#[derive(Serialize)]
struct ExtractParams {
    scheme: AgreementScheme,
    edge_threshold: f64,
    denominator: Denominator,
    format: &'static str,
    period: Option<(NaiveDate, NaiveDate)>,
    year: Option<i32>,
    propositions: usize,
    deputies: usize,
    vertices: usize,
    edges: usize,
}

fn extract_graph(input: &Path, opts: &ExtractOpts, io: &mut Io) -> CliResult<(SignedGraph, ExtractParams)> {
    if opts.threshold < 0.0 || !opts.threshold.is_finite() {
        return Err(usage(format!("--threshold must be non-negative, got {}", opts.threshold)));
    }
    let format = match opts.format {
        Some(FormatArg::Csv) => InputFormat::Csv,
        Some(FormatArg::Json) => InputFormat::Json,
        None => InputFormat::from_path(input),
    };
    let bytes = io.read(input)?;
    let data = parse_vote_records(bytes.as_slice(), format)?;
    let scheme = match opts.scheme {
        SchemeArg::V1 => AgreementScheme::V1HalfAgreement,
        SchemeArg::V2 => AgreementScheme::V2AbsenceOfOpinion,
    };
    let denominator = match opts.denominator {
        DenominatorArg::All => Denominator::AllPropositions,
        DenominatorArg::BothVoted => Denominator::BothVoted,
    };
    let mut config = ExtractionConfig::new(scheme)
        .with_threshold(opts.threshold)
        .with_denominator(denominator);

    let period = period_bounds(opts, &data)?;
    if let Some((from, to)) = period {
        let keep = data.propositions_between(from, to);
        config = config.with_period_filter(move |id| keep.contains(id));
    }
    let graph = build_network(&data.records, &data.deputies, &config)?;
    let params = ExtractParams {
        scheme,
        edge_threshold: opts.threshold,
        denominator,
        format: match format {
            InputFormat::Csv => "csv",
            InputFormat::Json => "json",
        },
        period,
        year: opts.year,
        propositions: data.propositions.len(),
        deputies: data.deputies.len(),
        vertices: graph.vertex_count(),
        edges: graph.edge_count(),
    };
    Ok((graph, params))
}

fn period_bounds(opts: &ExtractOpts, data: &VoteData) -> CliResult<Option<(NaiveDate, NaiveDate)>> {
    let bounds = match (opts.year, opts.from, opts.to) {
        (None, None, None) => return Ok(None),
        (Some(year), _, _) => {
            let from = NaiveDate::from_ymd_opt(year, 1, 1).ok_or_else(|| usage(format!("year {year} out of range")))?;
            (from, NaiveDate::from_ymd_opt(year, 12, 31).expect("same year"))
        }
        (None, from, to) => (from.unwrap_or(NaiveDate::MIN), to.unwrap_or(NaiveDate::MAX)),
    };
    if bounds.0 > bounds.1 {
        return Err(usage(format!("--from {} is after --to {}", bounds.0, bounds.1)));
    }
    if !data.has_dates() {
        return Err(CliError::Data(Error::Metadata(
            "period filtering needs a `date` on every proposition".into(),
        )));
    }
    Ok(Some(bounds))
}

fn cmd_extract(args: &ExtractArgs, io: &mut Io) -> CliResult<serde_json::Value> {
    let (graph, params) = extract_graph(&args.input, &args.opts, io)?;
    io.write(&args.output, formats::write_graph(&graph)?.as_bytes())?;
    Ok(serde_json::to_value(params).expect("serializable"))
}

// ----------------------------------------------------------------- solve

fn solver_params(opts: &SolveOpts, seed: u64, threads: usize) -> CliResult<SolverParams> {
    let problem = match (opts.problem, opts.k) {
        (ProblemArg::Cc, None) => ProblemKind::Cc,
        (ProblemArg::Cc, Some(_)) => return Err(usage("--k applies only to --problem srcc")),
        (ProblemArg::Srcc, Some(k)) => ProblemKind::Srcc { k },
        (ProblemArg::Srcc, None) => return Err(usage("--problem srcc requires --k")),
    };
    let params = SolverParams {
        problem,
        seed,
        max_iterations: opts.iterations,
        max_no_improve: opts.no_improve,
        time_limit_seconds: opts.time_limit,
        perturbation_strength: opts.perturbation,
        construction_alpha: opts.alpha,
        restarts: opts.restarts,
        threads,
        ..SolverParams::new(problem)
    };
    params.validate()?;
    Ok(params)
}

/// Solver output without timing, so identical runs give identical bytes.
#[derive(Serialize)]
struct ResultFile<'a> {
    problem: ProblemKind,
    best_value: f64,
    relative_imbalance_percent: Option<f64>,
    clusters: usize,
    cluster_sizes: Vec<usize>,
    iterations_run: usize,
    best_restart: usize,
    breakdown: &'a ImbalanceBreakdown,
    trace: &'a [TracePoint],
}

fn solve_into(graph: &SignedGraph, params: &SolverParams, dir: &Path, io: &mut Io) -> CliResult<Partition> {
    let result = ils_solve(graph, params)?;
    let percent = match relative_imbalance(graph, &result.breakdown) {
        Ok(p) => Some(p),
        Err(Error::EdgelessGraph) => None,
        Err(e) => return Err(e.into()),
    };
    let file = ResultFile {
        problem: params.problem,
        best_value: result.best_value,
        relative_imbalance_percent: percent,
        clusters: result.best_partition.k(),
        cluster_sizes: result.best_partition.cluster_sizes(),
        iterations_run: result.iterations_run,
        best_restart: result.best_restart,
        breakdown: &result.breakdown,
        trace: &result.trace,
    };
    io.write(
        &dir.join("partition.json"),
        formats::write_partition(&result.best_partition, Some(graph))?.as_bytes(),
    )?;
    io.write(&dir.join("result.json"), formats::to_json(&file)?.as_bytes())?;
    Ok(result.best_partition)
}

fn cmd_solve(args: &SolveArgs, threads: usize, io: &mut Io) -> CliResult<SolverParams> {
    let params = solver_params(&args.opts, args.opts.seed.unwrap_or(0), threads)?;
    let graph = formats::read_graph(io.read(&args.graph)?.as_slice())?;
    solve_into(&graph, &params, &args.output, io)?;
    Ok(params)
}

// --------------------------------------------------------------- analyze

#[derive(Serialize)]
struct AnalyzeParams {
    reports: Vec<ReportKind>,
    mediation_threshold: f64,
    ratio_basis: RatioBasis,
    leader_convention: LeaderConvention,
    polarization_coverage: f64,
    default_alliance: Option<String>,
}

fn analyze_into(
    graph: &SignedGraph,
    partition: &Partition,
    opts: &AnalyzeOpts,
    dir: &Path,
    io: &mut Io,
) -> CliResult<serde_json::Value> {
    let mut reports = opts.reports.clone();
    if reports.is_empty() {
        reports = vec![ReportKind::Mediation, ReportKind::Composition, ReportKind::Sri];
        if opts.coalitions.is_some() {
            reports.extend([ReportKind::Loyalty, ReportKind::Polarization]);
        }
        if opts.leaders.is_some() {
            reports.push(ReportKind::Leadership);
        }
    }
    reports.sort();
    reports.dedup();
    if !(opts.mediation_threshold > 0.0 && opts.mediation_threshold < 1.0) {
        return Err(usage(format!(
            "--mediation-threshold must lie in (0, 1), got {}",
            opts.mediation_threshold
        )));
    }
    if !(0.0..=1.0).contains(&opts.polarization_coverage) {
        return Err(usage(format!(
            "--polarization-coverage must lie in [0, 1], got {}",
            opts.polarization_coverage
        )));
    }

    let needs = |kind: ReportKind, file: &Option<PathBuf>, flag: &str| -> CliResult<()> {
        if reports.contains(&kind) && file.is_none() {
            return Err(usage(format!("the {} report needs {flag}", kind.name())));
        }
        Ok(())
    };
    needs(ReportKind::Loyalty, &opts.coalitions, "--coalitions")?;
    needs(ReportKind::Polarization, &opts.coalitions, "--coalitions")?;
    needs(ReportKind::Leadership, &opts.leaders, "--leaders")?;

    let coalitions = match &opts.coalitions {
        Some(path) => {
            let map = formats::read_coalitions(io.read(path)?.as_slice())?;
            Some(match &opts.default_alliance {
                Some(label) => map.with_default(label.clone()),
                None => map,
            })
        }
        None => None,
    };
    let leaders: Option<LeaderMap> = match &opts.leaders {
        Some(path) => Some(formats::read_leaders(io.read(path)?.as_slice())?),
        None => None,
    };
    let basis = match opts.ratio_basis {
        BasisArg::Weight => RatioBasis::Weight,
        BasisArg::Count => RatioBasis::Count,
    };
    let convention = match opts.leader_convention {
        ConventionArg::Exclude => LeaderConvention::ExcludeLeader,
        ConventionArg::Include => LeaderConvention::IncludeLeader,
    };
    let roster = graph.vertices();
    let coalition = || coalitions.as_ref().expect("checked above");

    for &kind in &reports {
        let (csv, json) = match kind {
            ReportKind::Mediation => {
                let rows = detect_mediation(graph, partition, opts.mediation_threshold, basis)?;
                (formats::mediation_csv(&rows)?, formats::to_json(&rows)?)
            }
            ReportKind::Loyalty => {
                let rows = coalition_loyalty(roster, partition, coalition())?;
                (formats::loyalty_csv(&rows, partition.k())?, formats::to_json(&rows)?)
            }
            ReportKind::Leadership => {
                let rows = leadership_strength(roster, partition, leaders.as_ref().expect("checked above"), convention)?;
                (formats::leadership_csv(&rows)?, formats::to_json(&rows)?)
            }
            ReportKind::Composition => {
                let rows = cluster_composition(roster, partition)?;
                (formats::composition_csv(&rows)?, formats::to_json(&rows)?)
            }
            ReportKind::Polarization => {
                let summary = polarization_summary(roster, partition, coalition(), opts.polarization_coverage)?;
                (formats::polarization_csv(&summary)?, formats::to_json(&summary)?)
            }
            ReportKind::Sri => {
                let breakdown = srcc_imbalance(graph, partition)?;
                let report = imbalance_report(graph, &breakdown)?;
                (formats::imbalance_csv(&report)?, formats::to_json(&report)?)
            }
        };
        io.write(&dir.join(format!("{}.csv", kind.name())), csv.as_bytes())?;
        io.write(&dir.join(format!("{}.json", kind.name())), json.as_bytes())?;
    }

    let params = AnalyzeParams {
        reports,
        mediation_threshold: opts.mediation_threshold,
        ratio_basis: basis,
        leader_convention: convention,
        polarization_coverage: opts.polarization_coverage,
        default_alliance: coalitions.and_then(|c| c.default_alliance),
    };
    Ok(serde_json::to_value(params).expect("serializable"))
}

fn cmd_analyze(args: &AnalyzeArgs, io: &mut Io) -> CliResult<serde_json::Value> {
    let graph = formats::read_graph(io.read(&args.graph)?.as_slice())?;
    let partition = formats::read_partition(io.read(&args.partition)?.as_slice(), Some(&graph))?;
    analyze_into(&graph, &partition, &args.opts, &args.output, io)
}

// -------------------------------------------------------------- generate

fn synth_config(args: &GenerateArgs) -> CliResult<SynthConfig> {
    let sizes: Vec<usize> = if args.bloc_sizes.is_empty() {
        if args.blocs == 0 {
            return Err(usage("--blocs must be at least 1"));
        }
        (0..args.blocs)
            .map(|b| args.deputies / args.blocs + usize::from(b < args.deputies % args.blocs))
            .collect()
    } else {
        args.bloc_sizes.clone()
    };
    if args.parties_per_bloc == 0 || args.parties_per_bloc > 26 {
        return Err(usage("--parties-per-bloc must lie in 1..=26"));
    }
    let blocs = sizes
        .iter()
        .enumerate()
        .map(|(b, &size)| BlocSpec {
            size,
            parties: (0..args.parties_per_bloc)
                .map(|p| {
                    let name = if args.parties_per_bloc == 1 {
                        format!("P{}", b + 1)
                    } else {
                        format!("P{}{}", b + 1, (b'A' + p as u8) as char)
                    };
                    (name, 1.0)
                })
                .collect(),
        })
        .collect();
    let config = SynthConfig {
        n_deputies: args.deputies,
        n_propositions: args.propositions,
        blocs,
        discipline: args.discipline,
        abstain_rate: args.abstain_rate,
        absent_rate: args.absent_rate,
        obstruction_rate: args.obstruction_rate,
        mediator_fraction: args.mediator_fraction,
        seed: args.seed,
        stance_model: match args.stance_model {
            StanceArg::Independent => StanceModel::Independent,
            StanceArg::Opposed => StanceModel::Opposed,
        },
        consensus_rate: args.consensus_rate,
        year: args.year,
    };
    config.validate()?;
    Ok(config)
}

fn cmd_generate(args: &GenerateArgs, io: &mut Io) -> CliResult<SynthConfig> {
    let config = synth_config(args)?;
    let data = synth::generate(&config)?;
    let rows = formats::vote_rows(&data.deputies, &data.records, &data.propositions)?;
    let mut votes = Vec::new();
    let name = match args.format {
        FormatArg::Csv => {
            formats::write_vote_csv(&mut votes, &rows)?;
            "votes.csv"
        }
        FormatArg::Json => {
            formats::write_vote_json(&mut votes, &rows)?;
            "votes.json"
        }
    };
    io.write(&args.output.join(name), &votes)?;

    let truth = PartitionFile {
        k: data.ground_truth.k(),
        labels: data.ground_truth.labels().to_vec(),
        vertex_ids: Some(data.deputies.iter().map(|d| d.id.clone()).collect()),
    };
    io.write(&args.output.join("ground_truth.json"), formats::to_json(&truth)?.as_bytes())?;

    // each party allied with its bloc; the first member of a party leads it
    let mut coalitions = String::from("party,alliance\n");
    for (b, bloc) in config.blocs.iter().enumerate() {
        for (party, _) in &bloc.parties {
            coalitions.push_str(&format!("{party},B{}\n", b + 1));
        }
    }
    io.write(&args.output.join("coalitions.csv"), coalitions.as_bytes())?;
    let mut leaders = String::from("party,leader_deputy_id\n");
    let mut seen = std::collections::HashSet::new();
    for d in &data.deputies {
        if seen.insert(d.party.clone()) {
            leaders.push_str(&format!("{},{}\n", d.party, d.id));
        }
    }
    io.write(&args.output.join("leaders.csv"), leaders.as_bytes())?;
    Ok(config)
}

// -------------------------------------------------------------- pipeline

fn cmd_pipeline(args: &PipelineArgs, threads: usize, io: &mut Io) -> CliResult<(serde_json::Value, u64)> {
    let seed = args
        .solve
        .seed
        .ok_or_else(|| usage("pipeline requires an explicit --seed"))?;
    let params = solver_params(&args.solve, seed, threads)?;
    let (graph, extract_params) = extract_graph(&args.input, &args.extract, io)?;
    let text = formats::write_graph(&graph)?;
    io.write(&args.output.join("graph.txt"), text.as_bytes())?;
    // solve what a separate `solve` run would read back from the file
    let graph = formats::parse_graph(&text)?;
    let partition = solve_into(&graph, &params, &args.output, io)?;
    let analyze_params = analyze_into(&graph, &partition, &args.analyze, &args.output.join("reports"), io)?;
    let all = serde_json::json!({
        "extract": extract_params,
        "solve": params,
        "analyze": analyze_params,
    });
    Ok((all, seed))
}

// ---------------------------------------------------------------- replay

fn replay(args: &ReplayArgs) -> CliResult<()> {
    let text = fs::read(&args.manifest).map_err(|e| Error::io(&args.manifest, e))?;
    let manifest: RunManifest = serde_json::from_slice(&text).map_err(Error::from)?;
    for input in &manifest.inputs {
        let bytes = fs::read(&input.path).map_err(|e| Error::io(&input.path, e))?;
        if FileDigest::of(&input.path, &bytes).sha256 != input.sha256 {
            return Err(CliError::Data(Error::Metadata(format!(
                "{} changed since the manifest was written",
                input.path.display()
            ))));
        }
    }
    let mut command = manifest.args;
    if let Some(out) = &args.output {
        match &mut command {
            Command::Extract(a) => a.output = out.clone(),
            Command::Solve(a) => a.output = out.clone(),
            Command::Analyze(a) => a.output = out.clone(),
            Command::Generate(a) => a.output = out.clone(),
            Command::Pipeline(a) => a.output = out.clone(),
            Command::Replay(_) => return Err(usage("a manifest cannot record a replay")),
        }
    }
    if matches!(command, Command::Replay(_)) {
        return Err(usage("a manifest cannot record a replay"));
    }
    execute(command, manifest.threads)
}
