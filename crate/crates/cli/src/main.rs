mod config;

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use hybrid_shadows::ensembles::{child_seed, EnsembleKind};
use hybrid_shadows::experiments::{
    run_estimate, run_hybrid_variance_scan, run_mom_coverage_study, run_overcompleteness_check, run_random_subset_table,
    run_relative_error_scan, run_tfim_scan, run_time_evolution_study, summarize_shadow, Circuit, Experiment, ExperimentResult,
    DEFAULT_TFIM_FIELDS,
};
use hybrid_shadows::qcore::{make_state, PauliString, StateSpec};
use hybrid_shadows::shadows::{read_snapshot_log, write_snapshot_log, Protocol};
use hybrid_shadows::Error;
use serde::Serialize;

const EXIT_USAGE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_GUARD: u8 = 4;
const EXIT_IO: u8 = 5;

/// Default directory for outputs when `--out` is absent.
const OUT_DIR_VAR: &str = "SHADOWS_OUT_DIR";

/// Classical and hybrid shadow experiments.
#[derive(Parser)]
#[command(name = "shadows", version, args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Master seed; every random draw derives from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file. Defaults to standard output, or to
    /// `$SHADOWS_OUT_DIR/<experiment>.<format>` when that variable is set.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker-thread cap; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Run file of `key = value` lines mirroring the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum StateKind {
    Zeros,
    Plus,
    Ghz,
    WLike,
    Haar,
    RandomProduct,
    Tfim,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolKind {
    /// Local Clifford on every site.
    Local,
    /// Local Haar on every site.
    LocalHaar,
    /// One global Haar unitary.
    Global,
    /// Local Clifford on a fixed subsystem `A`, the rest kept as a state.
    Hybrid,
    /// Hybrid with a fresh random `A` of size `--LA` per snapshot.
    HybridRandom,
}

#[derive(Clone, Copy, ValueEnum)]
enum CircuitKind {
    Chaotic,
    Free,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate one Pauli observable from a fresh or stored shadow.
    Estimate(EstimateArgs),
    /// Relative error of Z1 against system size.
    FigRelErr(RelErrArgs),
    /// Hybrid variance against subsystem size.
    FigHybridVar(HybridVarArgs),
    /// Random-subset hybrid shadows of TFIM ground states.
    FigTfim(TfimArgs),
    /// Random-subset variance factor over a (k, L_A) grid.
    BoundsTable(BoundsTableArgs),
    /// Shadows evaluated against Heisenberg-evolved observables.
    TimeEvolution(TimeEvolutionArgs),
    /// Failure rate of the median-of-means estimator.
    MomCoverage(CoverageArgs),
    /// Harmonic perturbations of single-qubit axis distributions.
    OvercompletenessCheck(OvercompletenessArgs),
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long, value_enum)]
    state: Option<StateKind>,
    #[arg(long = "L")]
    l: Option<usize>,
    /// Pauli label with 1-based sites, e.g. `Z5Z6`.
    #[arg(long)]
    obs: String,
    #[arg(long, value_enum, default_value_t = ProtocolKind::Local)]
    protocol: ProtocolKind,
    /// Subsystem size; `A` is the first `LA` sites for `hybrid`.
    #[arg(long = "LA")]
    la: Option<usize>,
    /// Explicit 1-based subsystem for `hybrid`, overriding `--LA`.
    #[arg(long, value_delimiter = ',')]
    subset: Option<Vec<usize>>,
    #[arg(long = "M", default_value_t = 10_000)]
    m: usize,
    #[arg(long, default_value_t = 10)]
    batches: usize,
    /// Transverse field for `--state tfim`.
    #[arg(long, default_value_t = 1.0)]
    g: f64,
    /// Store the acquired snapshots in this file.
    #[arg(long)]
    snapshot_log: Option<PathBuf>,
    /// Read snapshots from this file instead of acquiring them.
    #[arg(long, conflicts_with = "snapshot_log")]
    from_log: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct RelErrArgs {
    #[arg(long = "L", value_delimiter = ',', default_values_t = [2, 4, 6, 8])]
    l: Vec<usize>,
    #[arg(long = "M", default_value_t = 10_000)]
    m: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct HybridVarArgs {
    #[arg(long = "L", default_value_t = 6)]
    l: usize,
    #[arg(long = "M", default_value_t = 100_000)]
    m: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct TfimArgs {
    #[arg(long = "L", default_value_t = 8)]
    l: usize,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_TFIM_FIELDS)]
    g: Vec<f64>,
    #[arg(long = "LA", value_delimiter = ',', default_values_t = [2, 4, 6, 8])]
    la: Vec<usize>,
    #[arg(long = "M", default_value_t = 10_000)]
    m: usize,
    /// Snapshots used for the reconstruction distance; 0 skips it.
    #[arg(long = "inset-M", default_value_t = 1000)]
    inset_m: usize,
    /// 1-based site carrying `O = X`.
    #[arg(long, default_value_t = 4)]
    site: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct BoundsTableArgs {
    #[arg(long = "L", default_value_t = 20)]
    l: usize,
    /// Observable weights; defaults to `1..=L`.
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    /// Subsystem sizes; defaults to 1, 2, 6, 10, 14, 18 and `L`, capped at `L`.
    #[arg(long = "LA", value_delimiter = ',')]
    la: Option<Vec<usize>>,
    /// Monte-Carlo spot checks as `k:LA` pairs.
    #[arg(long, value_delimiter = ',', default_values_t = ["1:2".to_string(), "6:10".to_string(), "12:14".to_string()])]
    spot: Vec<String>,
    #[arg(long, default_value_t = 100_000)]
    draws: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct TimeEvolutionArgs {
    #[arg(long = "L", default_value_t = 6)]
    l: usize,
    #[arg(long, value_enum, default_value_t = CircuitKind::Chaotic)]
    circuit: CircuitKind,
    #[arg(long, default_value_t = 6)]
    steps: usize,
    #[arg(long = "M", default_value_t = 10_000)]
    m: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CoverageArgs {
    #[arg(long = "L", default_value_t = 4)]
    l: usize,
    #[arg(long, default_value = "Z1")]
    obs: String,
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Constants in the sample-count formula.
    #[arg(long = "C", value_delimiter = ',', default_values_t = [34.0])]
    c: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct OvercompletenessArgs {
    #[arg(long, default_value_t = 20)]
    states: usize,
    #[arg(long, default_value_t = 0.05)]
    amplitude: f64,
    #[arg(long, default_value_t = 3)]
    max_degree: usize,
    #[command(flatten)]
    common: Common,
}

enum Failure {
    Usage(clap::Error),
    Config(String),
    Guard(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::LogVersion(_) | Error::LogMagic | Error::LogTruncated | Error::LogFormat(_) => Failure::Io(e.to_string()),
            other => Failure::Guard(other.to_string()),
        }
    }
}

fn guard(cond: bool, msg: impl FnOnce() -> String) -> Result<(), Failure> {
    if cond {
        Ok(())
    } else {
        Err(Failure::Guard(msg()))
    }
}

/// Long flag names accepted by `subcommand`, for run-file validation.
fn flag_names(subcommand: &str) -> Option<HashSet<String>> {
    let cmd = Cli::command();
    let sub = cmd.find_subcommand(subcommand)?;
    Some(sub.get_arguments().filter_map(|a| a.get_long()).map(str::to_string).collect())
}

/// Splices the run file named by `--config` into argv after the subcommand.
fn expand_config(args: Vec<String>) -> Result<Vec<String>, Failure> {
    let Some(path) = config::find_path(&args[1..]) else {
        return Ok(args);
    };
    let Some(allowed) = args.get(1).and_then(|s| flag_names(s)) else {
        // let clap report the bad subcommand
        return Ok(args);
    };
    let tokens = config::load(Path::new(&path), &allowed).map_err(|e| Failure::Config(e.to_string()))?;
    let mut out = args[..2].to_vec();
    out.extend(tokens);
    out.extend_from_slice(&args[2..]);
    Ok(out)
}

fn state_spec(kind: StateKind, l: usize, g: f64, seed: u64) -> StateSpec {
    match kind {
        StateKind::Zeros => StateSpec::zeros(l),
        StateKind::Plus => StateSpec::plus(l),
        StateKind::Ghz => StateSpec::Ghz { num_qubits: l },
        StateKind::WLike => StateSpec::WLike { num_qubits: l },
        StateKind::Haar => StateSpec::HaarRandom { num_qubits: l, seed: child_seed(seed, 1) },
        StateKind::RandomProduct => StateSpec::random_product(l, child_seed(seed, 1)),
        StateKind::Tfim => StateSpec::TfimGround { num_qubits: l, field: g },
    }
}

fn protocol(a: &EstimateArgs, l: usize) -> Result<Protocol, Failure> {
    let subset = || -> Result<Vec<usize>, Failure> {
        match (&a.subset, a.la) {
            (Some(sites), _) => {
                guard(sites.iter().all(|&s| (1..=l).contains(&s)), || format!("--subset sites must lie in 1..={l}"))?;
                Ok(sites.iter().map(|s| s - 1).collect())
            }
            (None, Some(la)) => {
                guard(la <= l, || format!("--LA {la} exceeds L={l}"))?;
                Ok((0..la).collect())
            }
            (None, None) => Err(Failure::Guard("hybrid protocols need --LA or --subset".into())),
        }
    };
    Ok(match a.protocol {
        ProtocolKind::Local => Protocol::local_clifford(),
        ProtocolKind::LocalHaar => Protocol {
            ensemble: EnsembleKind::LocalHaar,
            ..Protocol::local_clifford()
        },
        ProtocolKind::Global => Protocol::global_haar(),
        ProtocolKind::Hybrid => Protocol::hybrid_fixed(EnsembleKind::LocalClifford, subset()?),
        ProtocolKind::HybridRandom => {
            let la = a.la.ok_or_else(|| Failure::Guard("hybrid-random needs --LA".into()))?;
            Protocol::hybrid_random(EnsembleKind::LocalClifford, la)
        }
    })
}

fn estimate(a: &EstimateArgs) -> Result<ExperimentResult, Failure> {
    let seed = a.common.seed;
    if let Some(path) = &a.from_log {
        let shadow = read_snapshot_log(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        let l = shadow.num_qubits;
        guard(a.l.is_none_or(|x| x == l), || format!("--L disagrees with the log ({l} qubits)"))?;
        guard(shadow.len() % a.batches == 0, || format!("{} snapshots are not a multiple of {} batches", shadow.len(), a.batches))?;
        let obs = PauliString::parse(&a.obs, l)?;
        let state = a.state.map(|k| make_state(&state_spec(k, l, a.g, seed))).transpose()?;
        let row = summarize_shadow(&shadow, &obs, a.batches, state.as_ref())?;
        let e = Experiment {
            id: "estimate",
            seed,
            parameters: serde_json::json!({
                "from_log": path.display().to_string(),
                "observable": obs.to_string(),
                "protocol": shadow.protocol,
                "log_seed": shadow.master_seed,
            }),
            rows: vec![row],
            elapsed: std::time::Duration::ZERO,
        };
        return Ok(e.to_result()?);
    }
    let kind = a.state.ok_or_else(|| Failure::Guard("--state is required without --from-log".into()))?;
    let l = a.l.ok_or_else(|| Failure::Guard("--L is required without --from-log".into()))?;
    let spec = state_spec(kind, l, a.g, seed);
    let obs = PauliString::parse(&a.obs, l)?;
    let protocol = protocol(a, l)?;
    protocol.validate(l)?;
    let (e, shadow) = run_estimate(&spec, &obs, &protocol, a.m, a.batches, seed)?;
    if let Some(path) = &a.snapshot_log {
        let bytes = write_snapshot_log(&shadow, path)?;
        eprintln!("wrote {bytes} bytes ({:.1} per snapshot) to {}", bytes as f64 / shadow.len() as f64, path.display());
    }
    Ok(e.to_result()?)
}

fn parse_spots(spots: &[String]) -> Result<Vec<(usize, usize)>, Failure> {
    spots
        .iter()
        .map(|s| {
            let bad = || Failure::Guard(format!("spot check {s:?} is not k:LA"));
            let (k, la) = s.split_once(':').ok_or_else(bad)?;
            Ok((k.trim().parse().map_err(|_| bad())?, la.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

fn finish<R: Serialize>(e: hybrid_shadows::Result<Experiment<R>>) -> Result<ExperimentResult, Failure> {
    Ok(e?.to_result()?)
}

fn run(command: &Command) -> Result<ExperimentResult, Failure> {
    match command {
        Command::Estimate(a) => estimate(a),
        Command::FigRelErr(a) => finish(run_relative_error_scan(&a.l, a.m, a.common.seed)),
        Command::FigHybridVar(a) => finish(run_hybrid_variance_scan(a.l, a.m, a.common.seed)),
        Command::FigTfim(a) => {
            guard(a.site >= 1, || "--site is 1-based".into())?;
            finish(run_tfim_scan(a.l, &a.g, &a.la, a.m, a.inset_m, a.site - 1, a.common.seed))
        }
        Command::BoundsTable(a) => {
            let k = a.k.clone().unwrap_or_else(|| (1..=a.l).collect());
            let la = a.la.clone().unwrap_or_else(|| {
                let mut v: Vec<usize> = [1, 2, 6, 10, 14, 18].into_iter().filter(|&x| x < a.l).collect();
                v.push(a.l);
                v
            });
            let spots = parse_spots(&a.spot)?;
            finish(run_random_subset_table(a.l, &k, &la, &spots, a.draws, a.common.seed))
        }
        Command::TimeEvolution(a) => {
            let circuit = match a.circuit {
                CircuitKind::Chaotic => Circuit::KickedIsingChaotic,
                CircuitKind::Free => Circuit::Free,
            };
            finish(run_time_evolution_study(a.l, circuit, a.steps, a.m, a.common.seed))
        }
        Command::MomCoverage(a) => {
            let obs = PauliString::parse(&a.obs, a.l)?;
            finish(run_mom_coverage_study(&StateSpec::zeros(a.l), &obs, a.epsilon, a.delta, &a.c, a.trials, a.common.seed))
        }
        Command::OvercompletenessCheck(a) => finish(run_overcompleteness_check(a.states, a.amplitude, a.max_degree, a.common.seed)),
    }
}

fn common(command: &Command) -> &Common {
    match command {
        Command::Estimate(a) => &a.common,
        Command::FigRelErr(a) => &a.common,
        Command::FigHybridVar(a) => &a.common,
        Command::FigTfim(a) => &a.common,
        Command::BoundsTable(a) => &a.common,
        Command::TimeEvolution(a) => &a.common,
        Command::MomCoverage(a) => &a.common,
        Command::OvercompletenessCheck(a) => &a.common,
    }
}

fn emit(result: &ExperimentResult, common: &Common) -> Result<(), Failure> {
    let (text, ext) = match common.format {
        Format::Csv => (result.to_csv(), "csv"),
        Format::Json => (result.to_json(), "json"),
    };
    let path = common
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_VAR).map(|d| PathBuf::from(d).join(format!("{}.{ext}", result.experiment))));
    let io = |p: &Path, e: std::io::Error| Failure::Io(format!("{}: {e}", p.display()));
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
            }
            fs::write(&p, text).map_err(|e| io(&p, e))
        }
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Io(format!("stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let outcome = expand_config(args).and_then(|args| {
        let matches = Cli::command().try_get_matches_from(args).map_err(Failure::Usage)?;
        let cli = Cli::from_arg_matches(&matches).map_err(Failure::Usage)?;
        let common = common(&cli.command).clone();
        if let Some(n) = common.threads {
            guard(n >= 1, || "--threads must be at least 1".into())?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Failure::Guard(format!("thread pool: {e}")))?;
        }
        let result = run(&cli.command)?;
        emit(&result, &common)
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            // help and version requests also arrive here
            let _ = e.print();
            ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 })
        }
        Err(f) => {
            let (code, kind, msg) = match f {
                Failure::Usage(_) => unreachable!(),
                Failure::Config(m) => (EXIT_CONFIG, "config error", m),
                Failure::Guard(m) => (EXIT_GUARD, "precondition violated", m),
                Failure::Io(m) => (EXIT_IO, "i/o error", m),
            };
            eprintln!("shadows: {kind}: {msg}");
            ExitCode::from(code)
        }
    }
}
