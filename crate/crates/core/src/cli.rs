//! Batch command-line front end.
//!
//! Exit statuses: 0 success, 2 I/O, 3 window geometry, 4 dataset, 5 model
//! mismatch.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::classifier::{
    decision_value, evaluate_decisions, label_for, load_model, save_model, train, ClassifierError, Label,
    LabeledSample, ModelFormatError, SvmModel, TrainError, TrainParams,
};
use crate::cycle_model::{compare_to_paper, estimate, CyclePlan, OverlapMode};
use crate::descriptor::{assemble_descriptor, HogGeometry, WindowDescriptor, DEFAULT_EPS};
use crate::gradient::Backend;
use crate::imageio::{load_image, to_window, CropMode};
use crate::manifest::{read_labeled_manifest, read_manifest, ManifestError};
use crate::FEATURE_ORDER_VERSION;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Geometry(String),
    #[error("{0}")]
    Dataset(String),
    #[error("{0}")]
    ModelMismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 2,
            CliError::Geometry(_) => 3,
            CliError::Dataset(_) => 4,
            CliError::ModelMismatch(_) => 5,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<ManifestError> for CliError {
    fn from(e: ManifestError) -> Self {
        match e {
            ManifestError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Dataset(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hogdet",
    version,
    about = "HOG + linear SVM detection for 130x66 pedestrian windows"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write one descriptor line (3780 comma-separated values) per input.
    Extract(ExtractArgs),
    /// Train a linear SVM from a labeled manifest and write the model file.
    Train(TrainArgs),
    /// Print `path,decision_value,label` per input.
    Detect(DetectArgs),
    /// Print a per-class accuracy table for a labeled manifest.
    Eval(EvalArgs),
    /// Estimate datapath clock cycles and compare with published timings.
    Cycles(CyclesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Reference,
    Hardware,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Reference => Backend::Reference,
            BackendArg::Hardware => Backend::Hardware,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CropArg {
    Exact,
    Center,
}

impl From<CropArg> for CropMode {
    fn from(c: CropArg) -> Self {
        match c {
            CropArg::Exact => CropMode::Exact,
            CropArg::Center => CropMode::CenterCrop,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OverlapArg {
    Sequential,
    Overlapped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Table,
    Kv,
}

#[derive(Debug, Clone, Args)]
pub struct FeatureArgs {
    /// Numeric backend (default: reference for extract/train, hardware for detect/eval).
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    /// Block normalization constant.
    #[arg(long, default_value_t = DEFAULT_EPS)]
    pub eps: f32,
    /// Reject non-window images (exact) or take the centered 66x130 region (center).
    #[arg(long, value_enum, default_value_t = CropArg::Exact)]
    pub crop: CropArg,
}

impl FeatureArgs {
    fn extractor(&self, default_backend: Backend) -> Extractor {
        Extractor {
            backend: self.backend.map(Backend::from).unwrap_or(default_backend),
            eps: self.eps,
            crop: self.crop.into(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ExtractArgs {
    /// Image files (PGM/PPM).
    pub inputs: Vec<PathBuf>,
    /// Manifest of `path[,label]` lines; appended after the positional inputs.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub features: FeatureArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Manifest of `path,label` lines (label 1 = person, 0 = non-person).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Regularization strength.
    #[arg(long, default_value_t = 0.01)]
    pub lambda: f64,
    /// Passes over the training set.
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    /// Seed of the sample shuffle; equal seeds give identical models.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub features: FeatureArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    /// Image files (PGM/PPM).
    pub inputs: Vec<PathBuf>,
    /// Model file written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Manifest of `path[,label]` lines; labels are ignored.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub features: FeatureArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Model file written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Manifest of `path,label` lines.
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub features: FeatureArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CyclesArgs {
    /// Datapath clock frequency.
    #[arg(long, default_value_t = 50_000_000)]
    pub clock_hz: u64,
    /// Run normalization after the cell stage or overlapped with it.
    #[arg(long, value_enum, default_value_t = OverlapArg::Sequential)]
    pub overlap: OverlapArg,
    /// Cycles per SVM multiply-accumulate.
    #[arg(long, default_value_t = 1)]
    pub cycles_per_mac: u64,
    /// Cycles per 8x8 cell histogram.
    #[arg(long, default_value_t = 108)]
    pub cycles_per_cell: u64,
    /// Cycles per block normalization.
    #[arg(long, default_value_t = 47)]
    pub cycles_per_block_norm: u64,
    /// One-off latency of the SVM pipeline.
    #[arg(long, default_value_t = 0)]
    pub svm_pipeline_fill: u64,
    /// Human-readable table or key=value lines.
    #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
    pub format: ReportFormat,
}

impl CyclesArgs {
    pub fn plan(&self) -> CyclePlan {
        CyclePlan {
            cycles_per_cell: self.cycles_per_cell,
            cycles_per_block_norm: self.cycles_per_block_norm,
            cycles_per_mac: self.cycles_per_mac,
            svm_pipeline_fill: self.svm_pipeline_fill,
            clock_hz: self.clock_hz,
            overlap_mode: match self.overlap {
                OverlapArg::Sequential => OverlapMode::Sequential,
                OverlapArg::Overlapped => OverlapMode::CellNormOverlapped,
            },
        }
    }
}

/// Image-to-descriptor settings shared by every command.
#[derive(Debug, Clone, Copy)]
pub struct Extractor {
    pub backend: Backend,
    pub eps: f32,
    pub crop: CropMode,
}

impl Extractor {
    pub fn descriptor(&self, path: &Path) -> Result<WindowDescriptor, CliError> {
        let img = load_image(path).map_err(|e| {
            if e.is_geometry() {
                CliError::Geometry(format!("{}: {e}", path.display()))
            } else {
                CliError::Io(format!("{}: {e}", path.display()))
            }
        })?;
        let window = to_window(&img.into_gray(), self.crop)
            .map_err(|e| CliError::Geometry(format!("{}: {e}", path.display())))?;
        Ok(assemble_descriptor(
            &window,
            self.backend,
            &HogGeometry::standard(),
            self.eps,
        ))
    }

    /// Descriptors for all paths, computed in parallel, returned in input
    /// order. The first failing input (in input order) is reported.
    pub fn descriptors(&self, paths: &[PathBuf]) -> Result<Vec<WindowDescriptor>, CliError> {
        paths
            .par_iter()
            .map(|p| self.descriptor(p))
            .collect::<Vec<_>>()
            .into_iter()
            .collect()
    }
}

fn gather_inputs(inputs: &[PathBuf], manifest: Option<&Path>) -> Result<Vec<PathBuf>, CliError> {
    let mut paths = inputs.to_vec();
    if let Some(m) = manifest {
        paths.extend(read_manifest(m)?.into_iter().map(|e| e.path));
    }
    if paths.is_empty() {
        return Err(CliError::Dataset(
            "no inputs given (pass image paths or --manifest)".into(),
        ));
    }
    Ok(paths)
}

fn open_model(path: &Path) -> Result<SvmModel, CliError> {
    let model = load_model(path).map_err(|e| match e {
        ModelFormatError::CountMismatch { .. } => CliError::ModelMismatch(format!("{}: {e}", path.display())),
        _ => CliError::Io(format!("{}: {e}", path.display())),
    })?;
    if model.feature_order_version() != FEATURE_ORDER_VERSION {
        return Err(CliError::ModelMismatch(format!(
            "{}: feature order {:?} does not match engine {:?}",
            path.display(),
            model.feature_order_version(),
            FEATURE_ORDER_VERSION
        )));
    }
    Ok(model)
}

fn with_output<F>(out: Option<&Path>, stdout: &mut dyn Write, f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    match out {
        Some(path) => {
            let mut buf = Vec::new();
            f(&mut buf)?;
            fs::write(path, buf).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => Ok(f(stdout)?),
    }
}

fn decision(model: &SvmModel, d: &WindowDescriptor) -> f32 {
    decision_value(model, d).expect("descriptor and model lengths are both fixed")
}

pub fn cmd_extract(args: &ExtractArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let paths = gather_inputs(&args.inputs, args.manifest.as_deref())?;
    let descriptors = args.features.extractor(Backend::Reference).descriptors(&paths)?;
    with_output(args.out.as_deref(), stdout, |w| {
        for d in &descriptors {
            writeln!(w, "{}", d.to_csv_line())?;
        }
        Ok(())
    })
}

pub fn cmd_train(args: &TrainArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let entries = read_labeled_manifest(&args.manifest)?;
    let (paths, labels): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
    let descriptors = args.features.extractor(Backend::Reference).descriptors(&paths)?;
    let samples: Vec<LabeledSample> = descriptors
        .into_iter()
        .zip(labels)
        .map(|(descriptor, label)| LabeledSample { descriptor, label })
        .collect();
    let params = TrainParams {
        lambda: args.lambda,
        epochs: args.epochs,
        seed: args.seed,
    };
    let model = train(&samples, &params).map_err(|e| match e {
        TrainError::SingleClass { .. } | TrainError::NonFinite(_) => CliError::Dataset(e.to_string()),
        TrainError::InvalidLambda(_) => CliError::Dataset(e.to_string()),
    })?;
    save_model(&model, &args.out).map_err(|e| CliError::Io(format!("{}: {e}", args.out.display())))?;
    let report = evaluate_decisions(
        samples
            .iter()
            .map(|s| (s.label, label_for(decision(&model, &s.descriptor)))),
    )
    .map_err(|e| CliError::Dataset(e.to_string()))?;
    writeln!(
        stdout,
        "training accuracy: {:.2}% ({}/{})",
        report.total_accuracy() * 100.0,
        report.correct(),
        report.total()
    )?;
    Ok(())
}

pub fn cmd_detect(args: &DetectArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let model = open_model(&args.model)?;
    let paths = gather_inputs(&args.inputs, args.manifest.as_deref())?;
    let descriptors = args.features.extractor(Backend::Hardware).descriptors(&paths)?;
    with_output(args.out.as_deref(), stdout, |w| {
        for (p, d) in paths.iter().zip(&descriptors) {
            let dv = decision(&model, d);
            writeln!(w, "{},{},{}", p.display(), dv, label_for(dv).as_u8())?;
        }
        Ok(())
    })
}

pub fn cmd_eval(args: &EvalArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let model = open_model(&args.model)?;
    let entries = read_labeled_manifest(&args.manifest)?;
    if entries.is_empty() {
        return Err(CliError::Dataset(format!(
            "{}: manifest is empty",
            args.manifest.display()
        )));
    }
    let (paths, labels): (Vec<_>, Vec<Label>) = entries.into_iter().unzip();
    let descriptors = args.features.extractor(Backend::Hardware).descriptors(&paths)?;
    let report = evaluate_decisions(
        labels
            .into_iter()
            .zip(&descriptors)
            .map(|(truth, d)| (truth, label_for(decision(&model, d)))),
    )
    .map_err(|e: ClassifierError| CliError::Dataset(e.to_string()))?;
    write!(stdout, "{report}")?;
    Ok(())
}

pub fn cmd_cycles(args: &CyclesArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    if args.clock_hz == 0 {
        return Err(CliError::Dataset("--clock-hz must be positive".into()));
    }
    let report = estimate(&HogGeometry::standard(), &args.plan());
    let cmp = compare_to_paper(&report);
    match args.format {
        ReportFormat::Table => write!(stdout, "{report}\n{cmp}")?,
        ReportFormat::Kv => write!(stdout, "{}{}", report.to_key_values(), cmp.to_key_values())?,
    }
    Ok(())
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Extract(a) => cmd_extract(a, stdout),
        Command::Train(a) => cmd_train(a, stdout),
        Command::Detect(a) => cmd_detect(a, stdout),
        Command::Eval(a) => cmd_eval(a, stdout),
        Command::Cycles(a) => cmd_cycles(a, stdout),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Io(e.to_string()))?;
    execute(&cli, stdout)
}
