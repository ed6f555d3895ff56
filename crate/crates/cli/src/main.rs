//! Command-line entry point.
//!
//! Exit codes: 0 on success, 2 on argument/parse errors, 3 on domain errors
//! (a requested quantity is undefined on the given inputs).

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pidtrunc::synergy::DEFAULT_PRUNE_TOL;
use pidtrunc::{
    i_k, i_k_plugin, i_k_profile, prune_features, select_features, split_target,
    DiscreteJointDistribution, Error, LogBase, MaskPolicy, Result, SampleSet, VariableId,
    XorModelSpec,
};
use pidtrunc_cli::{run_profile_strong, run_profile_weak, run_sampling, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "pidtrunc",
    version,
    about = "Truncated multivariate information over discrete variables"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact I^(k) profile of a distribution or a generated model
    Exact(ExactArgs),
    /// Estimate I^(k) from a sample file, with bias correction
    Estimate(EstimateArgs),
    /// Select the features that contribute to I^(k)
    Select(SelectArgs),
    /// Generate an XOR benchmark model spec file
    ModelGen(ModelGenArgs),
    /// Weak-coupling profile experiment (10 seeded models)
    ExpWeak(ExpArgs),
    /// Strong-coupling profile experiment (masked interactions)
    ExpStrong(ExpArgs),
    /// Finite-sample estimation experiment over a sample-size grid
    ExpSampling(SamplingArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitsArg {
    Nats,
    Bits,
}

impl From<UnitsArg> for LogBase {
    fn from(u: UnitsArg) -> Self {
        match u {
            UnitsArg::Nats => LogBase::Nats,
            UnitsArg::Bits => LogBase::Bits,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum MaskArg {
    None,
    ExactlyOneTarget,
}

impl From<MaskArg> for MaskPolicy {
    fn from(m: MaskArg) -> Self {
        match m {
            MaskArg::None => MaskPolicy::None,
            MaskArg::ExactlyOneTarget => MaskPolicy::ExactlyOneTarget,
        }
    }
}

/// Loads either an explicit distribution file or a model spec to build.
#[derive(Args)]
struct SourceArgs {
    /// Distribution JSON file
    #[arg(long, value_name = "FILE", conflicts_with = "model")]
    dist: Option<PathBuf>,
    /// XOR model spec JSON file (built, then reshaped to features + Y)
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    /// Target variable name (required with --dist; --model implies Y)
    #[arg(long, value_name = "NAME")]
    target: Option<String>,
}

struct LoadedSource {
    dist: DiscreteJointDistribution,
    features: Vec<VariableId>,
    target: VariableId,
}

impl SourceArgs {
    fn load(&self, units: LogBase) -> Result<LoadedSource> {
        match (&self.dist, &self.model) {
            (Some(path), None) => {
                let dist = DiscreteJointDistribution::read_json(open(path)?)?
                    .with_log_base(units);
                let target_name = self.target.as_deref().ok_or_else(|| {
                    Error::InvalidArgument("--target is required with --dist".into())
                })?;
                let target = dist.var(target_name)?;
                let features = dist
                    .variable_ids()
                    .into_iter()
                    .filter(|v| v != &target)
                    .collect();
                Ok(LoadedSource {
                    dist,
                    features,
                    target,
                })
            }
            (None, Some(path)) => {
                let spec = XorModelSpec::read_json(open(path)?)?;
                let dist = spec.build_distribution()?.with_log_base(units);
                let split = split_target(&dist, &spec)?;
                let target = match self.target.as_deref() {
                    Some(name) => split.dist.var(name)?,
                    None => split.target.clone(),
                };
                let features = split
                    .dist
                    .variable_ids()
                    .into_iter()
                    .filter(|v| v != &target)
                    .collect();
                Ok(LoadedSource {
                    dist: split.dist,
                    features,
                    target,
                })
            }
            _ => Err(Error::InvalidArgument(
                "exactly one of --dist or --model is required".into(),
            )),
        }
    }
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Highest truncation order (default: number of features)
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long, value_enum, default_value = "nats")]
    units: UnitsArg,
    /// Output file (stdout when absent)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Args)]
struct EstimateArgs {
    /// Sample CSV file: header of variable names, one row per sample
    #[arg(long, value_name = "FILE")]
    samples: PathBuf,
    /// Target variable name
    #[arg(long, value_name = "NAME")]
    target: String,
    /// Truncation order
    #[arg(long)]
    k: usize,
    /// Optional reference distribution/model for exact values
    #[arg(long, value_name = "FILE", conflicts_with = "model")]
    dist: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    /// Report the raw plug-in value only
    #[arg(long)]
    no_bias_correction: bool,
    #[arg(long, value_enum, default_value = "nats")]
    units: UnitsArg,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Truncation order
    #[arg(long)]
    k: usize,
    /// Additionally run the greedy backward pruning pass
    #[arg(long)]
    refine: bool,
    #[arg(long, value_enum, default_value = "nats")]
    units: UnitsArg,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

#[derive(Args)]
struct ModelGenArgs {
    /// Number of bits
    #[arg(long, default_value_t = 8)]
    m: usize,
    #[arg(long, default_value_t = 1.0)]
    eps0: f64,
    #[arg(long, default_value_t = 0.5)]
    eps1: f64,
    #[arg(long, default_value_t = 0.1)]
    eps2: f64,
    #[arg(long, default_value_t = 9)]
    seed: u64,
    #[arg(long, value_enum, default_value = "none")]
    mask: MaskArg,
    /// Spec JSON output file
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct ExpArgs {
    /// Root seed; per-model seeds are derived from it
    #[arg(long, default_value_t = 9)]
    seed: u64,
    /// Number of seeded models
    #[arg(long, default_value_t = 10)]
    num_seeds: usize,
    #[arg(long, value_enum, default_value = "nats")]
    units: UnitsArg,
    /// Results CSV output file (stdout when absent)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SamplingArgs {
    /// Root seed; the model and all sampling streams derive from it
    #[arg(long, default_value_t = 9)]
    seed: u64,
    /// Pin the coefficients to a spec file instead of generating them
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    /// Comma-separated strictly increasing sample sizes
    #[arg(long, value_name = "N1,N2,..")]
    ns_grid: Option<String>,
    #[arg(long, default_value_t = 100)]
    resamples: usize,
    #[arg(long, value_enum, default_value = "nats")]
    units: UnitsArg,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_domain() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

fn with_output<F>(out: &Option<PathBuf>, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            write(&mut w)
        }
    }
}

fn env_threads() -> Result<usize> {
    match std::env::var("PIDTRUNC_THREADS") {
        Ok(v) => v.trim().parse::<usize>().map_err(|e| {
            Error::InvalidArgument(format!("PIDTRUNC_THREADS must be an integer (0 = auto): {e}"))
        }),
        Err(_) => Ok(0),
    }
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Exact(args) => cmd_exact(args),
        Cmd::Estimate(args) => cmd_estimate(args),
        Cmd::Select(args) => cmd_select(args),
        Cmd::ModelGen(args) => cmd_model_gen(args),
        Cmd::ExpWeak(args) => {
            let mut cfg = ExperimentConfig::weak(args.seed, args.num_seeds);
            cfg.units = args.units.into();
            cfg.threads = env_threads()?;
            let table = run_profile_weak(&cfg)?;
            with_output(&args.out, |w| table.write_csv(w))
        }
        Cmd::ExpStrong(args) => {
            let mut cfg = ExperimentConfig::strong(args.seed, args.num_seeds);
            cfg.units = args.units.into();
            cfg.threads = env_threads()?;
            let table = run_profile_strong(&cfg)?;
            with_output(&args.out, |w| table.write_csv(w))
        }
        Cmd::ExpSampling(args) => {
            let mut cfg = ExperimentConfig::sampling(args.seed);
            if let Some(path) = &args.model {
                cfg.pinned_spec = Some(XorModelSpec::read_json(open(path)?)?);
            }
            if let Some(grid) = &args.ns_grid {
                cfg.ns_grid = parse_grid(grid)?;
            }
            cfg.resamples = args.resamples;
            cfg.units = args.units.into();
            cfg.threads = env_threads()?;
            let table = run_sampling(&cfg)?;
            with_output(&args.out, |w| table.write_csv(w))
        }
    }
}

fn parse_grid(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|e| Error::InvalidArgument(format!("bad grid entry `{part}`: {e}")))
        })
        .collect()
}

fn cmd_exact(args: ExactArgs) -> Result<()> {
    let src = args.source.load(args.units.into())?;
    let k_max = args.kmax.unwrap_or(src.features.len());
    let profile = i_k_profile(&src.dist, &src.target, &src.features, k_max)?;
    with_output(&args.out, |w| match args.format {
        FormatArg::Json => profile.write_json(w),
        FormatArg::Csv => {
            writeln!(w, "k,I_k,delta")?;
            for k in 1..=profile.k_max() {
                let delta = profile
                    .gaps()
                    .map(|g| g[k - 1].to_string())
                    .unwrap_or_default();
                writeln!(w, "{},{},{}", k, profile.value(k), delta)?;
            }
            Ok(())
        }
    })
}

fn cmd_estimate(args: EstimateArgs) -> Result<()> {
    let units: LogBase = args.units.into();
    let reference = match (&args.dist, &args.model) {
        (None, None) => None,
        _ => {
            let source = SourceArgs {
                dist: args.dist.clone(),
                model: args.model.clone(),
                target: Some(args.target.clone()),
            };
            Some(source.load(units)?)
        }
    };

    // With a reference in hand, trust its alphabets; otherwise infer them
    // from the data.
    let samples = match &reference {
        Some(src) => {
            let declared: Vec<(String, usize)> = src
                .dist
                .variable_ids()
                .iter()
                .enumerate()
                .map(|(i, v)| (v.name.clone(), src.dist.cardinality(i)))
                .collect();
            let borrowed: Vec<(&str, usize)> = declared
                .iter()
                .map(|(n, c)| (n.as_str(), *c))
                .collect();
            SampleSet::read_csv_with_alphabets(open(&args.samples)?, &borrowed)?
        }
        None => SampleSet::read_csv(open(&args.samples)?)?,
    };

    let emp = samples.empirical().with_log_base(units);
    let target = emp.dist().var(&args.target)?;
    let features: Vec<VariableId> = emp
        .dist()
        .variable_ids()
        .into_iter()
        .filter(|v| v != &target)
        .collect();
    let raw = i_k_plugin(&emp, &target, &features, args.k, false)?;
    let corrected = if args.no_bias_correction {
        None
    } else {
        Some(i_k_plugin(&emp, &target, &features, args.k, true)?)
    };
    let exact = match &reference {
        Some(src) => Some(i_k(&src.dist, &src.target, &src.features, args.k)?),
        None => None,
    };
    let i_hat = match (exact, corrected) {
        (Some(e), Some(c)) if e > 0.0 => Some(c / e - 1.0),
        (Some(e), None) if e > 0.0 => Some(raw / e - 1.0),
        _ => None,
    };

    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    with_output(&args.out, |w| match args.format {
        FormatArg::Csv => {
            writeln!(w, "N_s,k,raw,corrected,exact,i_hat")?;
            writeln!(
                w,
                "{},{},{},{},{},{}",
                samples.len(),
                args.k,
                raw,
                opt(corrected),
                opt(exact),
                opt(i_hat)
            )?;
            Ok(())
        }
        FormatArg::Json => {
            let value = serde_json::json!({
                "N_s": samples.len(),
                "k": args.k,
                "raw": raw,
                "corrected": corrected,
                "exact": exact,
                "i_hat": i_hat,
                "units": units.to_string(),
            });
            serde_json::to_writer_pretty(&mut *w, &value).map_err(Error::from)?;
            Ok(())
        }
    })
}

fn cmd_select(args: SelectArgs) -> Result<()> {
    let src = args.source.load(args.units.into())?;
    let report = select_features(&src.dist, &src.target, &src.features, args.k)?;
    let refined = if args.refine {
        Some(prune_features(
            &src.dist,
            &src.target,
            &report.relevant,
            args.k,
            DEFAULT_PRUNE_TOL,
        )?)
    } else {
        None
    };
    with_output(&args.out, |w| match args.format {
        FormatArg::Json => {
            let mut value = serde_json::json!({
                "k": report.k,
                "relevant": report.relevant_names(),
                "i_k_full": report.i_k_full,
                "i_k_selected": report.i_k_selected,
                "units": src.dist.log_base().to_string(),
            });
            if let Some(refined) = &refined {
                value["refined"] = serde_json::json!(refined
                    .iter()
                    .map(|v| v.name.clone())
                    .collect::<Vec<_>>());
            }
            serde_json::to_writer_pretty(&mut *w, &value).map_err(Error::from)?;
            Ok(())
        }
        FormatArg::Csv => {
            writeln!(w, "k,feature")?;
            let names: Vec<String> = match &refined {
                Some(r) => r.iter().map(|v| v.name.clone()).collect(),
                None => report.relevant_names(),
            };
            for name in names {
                writeln!(w, "{},{}", report.k, name)?;
            }
            Ok(())
        }
    })
}

fn cmd_model_gen(args: ModelGenArgs) -> Result<()> {
    let spec = pidtrunc::generate_spec(
        args.m,
        args.eps0,
        args.eps1,
        args.eps2,
        args.seed,
        args.mask.into(),
    )?;
    let mut w = BufWriter::new(File::create(&args.out)?);
    spec.write_json(&mut w)?;
    w.flush()?;
    Ok(())
}
