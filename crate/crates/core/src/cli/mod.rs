//! The `zilm` command line: `simulate`, `fit`, `eval` and `reproduce`.
//!
//! Every command writes into a staged directory that only replaces `--out`
//! once the command has succeeded, and records a `run.json` manifest there.
//! Without `--out`, output goes to `$ZILM_OUT_ROOT/<command>`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use crate::domain::io::{read_dataset, read_manifest, write_dataset};
use crate::domain::{validate_dataset, Dataset, NdcProfile, SplitSelector};
use crate::error::{Error, Result};
use crate::eval::{
    classification_metrics, contrast_analysis, forced_delivery_experiment, metrics_csv, ndc_hypothesis_test,
    ndc_hypothesis_test_with, policy_experiment, recovery_csv, recovery_report, Partition, Policy,
};
use crate::fit::{fit, FitConfig, FittedModel, MODEL_FILE, TRACE_FILE};
use crate::models::ModelKind;
use crate::simulate::SimConfig;

mod output;
mod reproduce;

pub use output::{RunManifest, Staging, RUN_MANIFEST_FILE};
pub use reproduce::{reproduce, ReproduceOptions, QUICK_STUDENTS, SUMMARY_FILE};

/// Environment variable naming the default output root.
pub const OUT_ROOT_ENV: &str = "ZILM_OUT_ROOT";

#[derive(Debug, Parser)]
#[command(name = "zilm", version, about = "Zero-inflated learner models: simulate, fit, evaluate")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a cohort and write it as a dataset directory.
    Simulate(SimulateArgs),
    /// Fit a model to a dataset's train split.
    Fit(FitArgs),
    /// Produce a report from a dataset and fitted models.
    Eval(EvalArgs),
    /// Simulate, fit all model kinds and write every report plus a summary.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, clap::Args)]
pub struct OutArgs {
    /// Output directory [default: $ZILM_OUT_ROOT/<command>].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Replace an existing output directory.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    /// Simulation config (JSON); defaults apply to omitted fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Irt,
    #[value(name = "irt_zilm", alias = "irt-zilm")]
    IrtZilm,
    Ktm1,
}

impl From<KindArg> for ModelKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Irt => ModelKind::Irt,
            KindArg::IrtZilm => ModelKind::IrtZilm,
            KindArg::Ktm1 => ModelKind::Ktm1,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct FitArgs {
    /// Dataset directory.
    pub dataset: PathBuf,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Fit config (JSON); defaults apply to omitted fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportKind {
    Metrics,
    Recovery,
    Contrast,
    Delivery,
    Policy,
    Hypothesis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Random,
    OracleActive,
    OracleAdversarial,
    ModelActive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PartitionArg {
    MathsVsEnglish,
    ReadVsListen,
    BothVsRead,
    AttemptParity,
}

impl From<PartitionArg> for Partition {
    fn from(p: PartitionArg) -> Self {
        match p {
            PartitionArg::MathsVsEnglish => Partition::MathsVsEnglish,
            PartitionArg::ReadVsListen => Partition::ReadVsListen,
            PartitionArg::BothVsRead => Partition::BothVsRead,
            PartitionArg::AttemptParity => Partition::AttemptParity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Test,
    All,
}

impl From<SplitArg> for SplitSelector {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => SplitSelector::Train,
            SplitArg::Test => SplitSelector::Test,
            SplitArg::All => SplitSelector::All,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct EvalArgs {
    #[arg(value_enum)]
    pub report: ReportKind,
    /// Dataset directory.
    pub dataset: PathBuf,
    /// Fitted model directories or `model.json` files.
    pub models: Vec<PathBuf>,
    /// Contrast partition [default: all partitions].
    #[arg(long, value_enum)]
    pub partition: Option<PartitionArg>,
    /// Presentation policy for the policy report.
    #[arg(long, value_enum, default_value = "oracle-active")]
    pub policy: PolicyArg,
    /// Learner probed by the hypothesis report.
    #[arg(long)]
    pub student: Option<usize>,
    /// Alternative condition flags, e.g. `dyslexia` or `dyslexia+spd`.
    #[arg(long)]
    pub alt_ndc: Option<String>,
    /// Fit config (JSON) for the hypothesis report's refits.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Split scored by the metrics report.
    #[arg(long, value_enum, default_value = "test")]
    pub split: SplitArg,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, clap::Args)]
pub struct ReproduceArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Smaller cohort for a fast end-to-end run.
    #[arg(long)]
    pub quick: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Parses `std::env::args`, runs the command and maps errors to exit codes.
pub fn main() -> ExitCode {
    run_from(std::env::args_os())
}

/// [`main`] with explicit arguments (the first is the program name).
pub fn run_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(manifest) => {
            println!("{} done in {:.2}s", manifest.command, manifest.duration_secs);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(cli: Cli) -> Result<RunManifest> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Reproduce(a) => {
            let out = resolve_out(&a.out, "reproduce")?;
            reproduce(&out, &ReproduceOptions { seed: a.seed, quick: a.quick, force: a.out.force })
        }
    }
}

fn resolve_out(o: &OutArgs, command: &str) -> Result<PathBuf> {
    if let Some(p) = &o.out {
        return Ok(p.clone());
    }
    match std::env::var_os(OUT_ROOT_ENV) {
        Some(root) if !root.is_empty() => Ok(PathBuf::from(root).join(command)),
        _ => Err(Error::config(format!("no --out given and {OUT_ROOT_ENV} is not set"))),
    }
}

pub(crate) fn digest_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads an optional JSON config file, returning its text and the digest of
/// the bytes consumed (or of the defaults' serialization).
fn read_config<T: serde::Serialize + Default>(
    path: Option<&Path>,
    parse: impl Fn(&str) -> Result<T>,
) -> Result<(T, String)> {
    match path {
        Some(p) => {
            let bytes = fs::read(p).map_err(|e| Error::io(p, e))?;
            let text = String::from_utf8(bytes.clone())
                .map_err(|_| Error::config(format!("{}: config is not UTF-8", p.display())))?;
            let cfg = parse(&text).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("{}: {m}", p.display())),
                other => other,
            })?;
            Ok((cfg, digest_bytes(&bytes)))
        }
        None => {
            let cfg = T::default();
            let bytes = serde_json::to_vec(&cfg).expect("config serializes");
            Ok((cfg, digest_bytes(&bytes)))
        }
    }
}

/// Reads and validates a dataset directory.
pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let d = read_dataset(dir)?;
    let violations = validate_dataset(&d);
    if let Some(first) = violations.first() {
        return Err(Error::data(format!(
            "{}: {} invariant violation(s), first: {first}",
            dir.display(),
            violations.len()
        )));
    }
    Ok(d)
}

/// The simulation config recorded in a dataset's manifest.
pub fn dataset_sim_config(dir: &Path) -> Result<SimConfig> {
    let manifest = read_manifest(dir)?;
    let value = manifest
        .config
        .ok_or_else(|| Error::data(format!("{}: manifest records no simulation config", dir.display())))?;
    let cfg: SimConfig = serde_json::from_value(value)
        .map_err(|e| Error::data(format!("{}: recorded config: {e}", dir.display())))?;
    cfg.validate()?;
    Ok(cfg)
}

fn load_model(path: &Path, d: &Dataset) -> Result<FittedModel> {
    let m = FittedModel::load(path)?;
    let (n_s, n_i) = (m.abilities().len(), m.difficulties().len());
    if n_s != d.students.len() || n_i != d.items.len() {
        return Err(Error::data(format!(
            "{}: model covers {n_s} students × {n_i} items but the dataset has {} × {}",
            path.display(),
            d.students.len(),
            d.items.len()
        )));
    }
    Ok(m)
}

fn cmd_simulate(a: SimulateArgs) -> Result<RunManifest> {
    let out = resolve_out(&a.out, "simulate")?;
    let (mut cfg, digest) = read_config(a.config.as_deref(), SimConfig::from_json)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let mut staging = Staging::new(&out, a.out.force)?;
    let d = crate::simulate::generate_dataset(&cfg)?;
    write_dataset(staging.path(), &d, Some(cfg.to_json_value()))?;
    for f in crate::domain::io::DATASET_FILES {
        staging.record(f);
    }
    staging.commit("simulate", digest, Some(cfg.seed))
}

fn cmd_fit(a: FitArgs) -> Result<RunManifest> {
    let out = resolve_out(&a.out, "fit")?;
    let (mut cfg, digest) = read_config(a.config.as_deref(), FitConfig::from_json)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let mut staging = Staging::new(&out, a.out.force)?;
    let d = load_dataset(&a.dataset)?;
    let model = fit(&d, a.kind.into(), &cfg)?;
    model.save(staging.path())?;
    staging.record(MODEL_FILE);
    staging.record(TRACE_FILE);
    staging.commit("fit", digest, Some(cfg.seed))
}

fn cmd_eval(a: EvalArgs) -> Result<RunManifest> {
    let out = resolve_out(&a.out, "eval")?;
    let (fit_cfg, digest) = read_config(a.config.as_deref(), FitConfig::from_json)?;
    let mut staging = Staging::new(&out, a.out.force)?;
    let d = load_dataset(&a.dataset)?;
    let models = a.models.iter().map(|p| load_model(p, &d)).collect::<Result<Vec<_>>>()?;
    let need_models = |what: &str| -> Result<()> {
        if models.is_empty() {
            Err(Error::config(format!("the {what} report needs at least one model path")))
        } else {
            Ok(())
        }
    };

    match a.report {
        ReportKind::Metrics => {
            need_models("metrics")?;
            let reports = models
                .iter()
                .map(|m| classification_metrics(m, &d, a.split.into()))
                .collect::<Result<Vec<_>>>()?;
            staging.write("metrics.json", to_json(&reports))?;
            staging.write("metrics.csv", metrics_csv(&reports))?;
        }
        ReportKind::Recovery => {
            need_models("recovery")?;
            let reports = models.iter().map(|m| recovery_report(m, &d)).collect::<Result<Vec<_>>>()?;
            staging.write("recovery.json", to_json(&reports))?;
            staging.write("recovery.csv", recovery_csv(&reports))?;
        }
        ReportKind::Contrast => {
            let partitions: Vec<Partition> = match a.partition {
                Some(p) => vec![p.into()],
                None => Partition::ALL.to_vec(),
            };
            for p in partitions {
                let r = contrast_analysis(&d, p)?;
                staging.write(&format!("contrast_{p}.json"), to_json(&r))?;
                staging.write(&format!("contrast_{p}.csv"), r.to_csv())?;
                staging.write(&format!("contrast_{p}_students.csv"), r.students_csv())?;
            }
        }
        ReportKind::Delivery => {
            let cfg = dataset_sim_config(&a.dataset)?;
            let r = forced_delivery_experiment(&cfg)?;
            staging.write("delivery.json", to_json(&r))?;
            staging.write("delivery.csv", r.to_csv())?;
        }
        ReportKind::Policy => {
            let cfg = dataset_sim_config(&a.dataset)?;
            let policy = match a.policy {
                PolicyArg::Random => Policy::Random,
                PolicyArg::OracleActive => Policy::OracleActive,
                PolicyArg::OracleAdversarial => Policy::OracleAdversarial,
                PolicyArg::ModelActive => {
                    let m = models
                        .iter()
                        .find(|m| m.kind == ModelKind::IrtZilm)
                        .ok_or_else(|| Error::config("--policy model-active needs an irt_zilm model path"))?;
                    Policy::ModelActive(m)
                }
            };
            let r = policy_experiment(&cfg, policy)?;
            staging.write("policy.json", to_json(&r))?;
            staging.write("policy.csv", r.to_csv())?;
        }
        ReportKind::Hypothesis => {
            let student = a.student.ok_or_else(|| Error::config("the hypothesis report needs --student"))?;
            let alt = a.alt_ndc.as_deref().ok_or_else(|| Error::config("the hypothesis report needs --alt-ndc"))?;
            let alt = NdcProfile::parse(alt)
                .ok_or_else(|| Error::config(format!("cannot parse --alt-ndc `{alt}`")))?;
            let r = match models.iter().find(|m| m.kind == ModelKind::IrtZilm) {
                Some(null) => ndc_hypothesis_test_with(&d, null, student, alt, &fit_cfg)?,
                None => ndc_hypothesis_test(&d, student, alt, &fit_cfg)?,
            };
            staging.write("hypothesis.json", to_json(&r))?;
            staging.write("hypothesis.csv", r.to_csv())?;
        }
    }
    let seed = (a.report == ReportKind::Hypothesis).then_some(fit_cfg.seed);
    staging.commit(&format!("eval {}", report_token(a.report)), digest, seed)
}

fn report_token(r: ReportKind) -> &'static str {
    match r {
        ReportKind::Metrics => "metrics",
        ReportKind::Recovery => "recovery",
        ReportKind::Contrast => "contrast",
        ReportKind::Delivery => "delivery",
        ReportKind::Policy => "policy",
        ReportKind::Hypothesis => "hypothesis",
    }
}

pub(crate) fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}
