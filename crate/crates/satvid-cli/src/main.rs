//! `satvid`: batch front end for the satellite-video vehicle detection
//! pipeline. One subcommand per stage; all randomness hangs off `--seed`,
//! so identical invocations produce identical outputs.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

mod commands;
mod dataset;
mod manifest;
mod overlay;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "satvid", version, about = "Vehicle detection in satellite video")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic dataset with exact ground truth
    Synth(SynthArgs),
    /// Register a frame sequence onto a reference frame
    Register(RegisterArgs),
    /// Render target heatmaps from point annotations
    Targets(TargetsArgs),
    /// Train a model from scratch on a dataset directory
    Train(TrainArgs),
    /// Fine-tune pretrained weights on a few samples of a new dataset
    Finetune(FinetuneArgs),
    /// Run a model over stabilized frames and write a detections CSV
    Detect(DetectArgs),
    /// Score a detections CSV against ground truth
    Eval(EvalArgs),
    /// Run the training-configuration grid and write a results table
    Grid(GridArgs),
    /// Draw match overlays: TP green, FP blue, FN red
    Plot(PlotArgs),
}

/// Flag-default regimes. Every value can still be overridden per flag.
#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
pub enum Preset {
    /// Wide-area regime: 200 px tiles, theta 8, alpha-n 0.35.
    LasVegas,
    /// Small-scene regime: 128 px tiles, theta 4, alpha-n 0.40.
    Khartoum,
}

impl Preset {
    pub fn roobi(self) -> usize {
        match self {
            Preset::LasVegas => 200,
            Preset::Khartoum => 128,
        }
    }

    pub fn sigma(self) -> f64 {
        1.0
    }

    pub fn theta(self) -> f32 {
        match self {
            Preset::LasVegas => 8.0,
            Preset::Khartoum => 4.0,
        }
    }

    pub fn alpha_n(self) -> f32 {
        match self {
            Preset::LasVegas => 0.35,
            Preset::Khartoum => 0.40,
        }
    }

    pub fn alpha_o(self) -> f32 {
        3.5
    }

    pub fn channels(self) -> usize {
        3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
pub enum Scene {
    /// Mid-density scene with mixed road directions.
    Default,
    /// Convoy traffic with 3 to 5 px vehicle spacing.
    Dense,
    /// The coarse, low-contrast transfer domain.
    DomainB,
    /// Both transfer domains, written to domain_a/ and domain_b/.
    Pair,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
pub enum AccumulationArg {
    Sum,
    Max,
}

impl AccumulationArg {
    pub fn to_lib(self) -> satvid::targets::Accumulation {
        match self {
            AccumulationArg::Sum => satvid::targets::Accumulation::Sum,
            AccumulationArg::Max => satvid::targets::Accumulation::Max,
        }
    }
}

#[derive(Args)]
pub struct SynthArgs {
    /// Scenario to render.
    #[arg(long, value_enum, default_value_t = Scene::Default)]
    pub scene: Scene,
    /// Dataset directory to create.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Frame count override (not valid for --scene pair).
    #[arg(long)]
    pub frames: Option<usize>,
    /// Vehicle count override.
    #[arg(long)]
    pub vehicles: Option<usize>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    /// Stack depth recorded in the dataset manifest.
    #[arg(long)]
    pub c: Option<usize>,
    /// Frame skip recorded in the dataset manifest.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Tile size recorded in the dataset manifest (desk-scale default).
    #[arg(long, default_value_t = 64)]
    pub roobi: usize,
    /// Match radius recorded in the dataset manifest.
    #[arg(long)]
    pub theta: Option<f32>,
    #[arg(long, value_enum, default_value_t = Preset::LasVegas)]
    pub preset: Preset,
}

#[derive(Args)]
pub struct RegisterArgs {
    /// Directory of numbered PNG frames.
    #[arg(long)]
    pub frames: PathBuf,
    /// Output directory (frames/ and homographies.txt).
    #[arg(long)]
    pub out: PathBuf,
    /// Reference frame index.
    #[arg(long, default_value_t = 0)]
    pub reference: usize,
    /// Harris response threshold, relative to the maximum response.
    #[arg(long)]
    pub response_threshold: Option<f32>,
    /// Cap on interest points per frame.
    #[arg(long)]
    pub max_points: Option<usize>,
    /// Ratio-test bound d1/d2.
    #[arg(long)]
    pub match_ratio: Option<f32>,
    /// Inlier reprojection error bound in pixels.
    #[arg(long)]
    pub inlier_threshold: Option<f64>,
    /// Robust-estimation iteration cap.
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args)]
pub struct TargetsArgs {
    /// Ground-truth annotations CSV.
    #[arg(long)]
    pub gt: PathBuf,
    /// Output directory for target PNGs.
    #[arg(long)]
    pub out: PathBuf,
    /// Frame width in pixels.
    #[arg(long)]
    pub width: usize,
    /// Frame height in pixels.
    #[arg(long)]
    pub height: usize,
    /// Gaussian sigma in heatmap pixels.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Downsampling exponent d; coordinates are divided by 2^d.
    #[arg(long, default_value_t = 0)]
    pub scale_exp: u8,
    #[arg(long, value_enum, default_value_t = AccumulationArg::Max)]
    pub accumulation: AccumulationArg,
    /// Keep the raw 1/(2 pi sigma^2) amplitude instead of unit peaks.
    #[arg(long)]
    pub raw_peaks: bool,
    /// Render only these frame indices (repeatable); default, every frame
    /// up to the last annotated one.
    #[arg(long)]
    pub frame: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Preset::LasVegas)]
    pub preset: Preset,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args)]
pub struct TrainArgs {
    /// Dataset directory (synth output layout).
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory for weights.bin and train.log.
    #[arg(long)]
    pub out: PathBuf,
    /// Model: foveanet or foveanet4sat.
    #[arg(long, default_value = "foveanet4sat")]
    pub model: String,
    /// Stack depth c (default: dataset manifest).
    #[arg(long)]
    pub c: Option<usize>,
    /// Frame skip k (default: dataset manifest).
    #[arg(long)]
    pub k: Option<usize>,
    /// Tile size (default: dataset manifest).
    #[arg(long)]
    pub roobi: Option<usize>,
    #[arg(long, default_value_t = 1e-5)]
    pub lr: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    /// Epochs of non-improving validation loss tolerated before stopping.
    #[arg(long, default_value_t = 100)]
    pub patience: usize,
    #[arg(long, default_value_t = 10_000)]
    pub max_epochs: usize,
    /// Random flips and quarter turns during training.
    #[arg(long)]
    pub augment: bool,
    /// Fraction of samples held out for validation.
    #[arg(long, default_value_t = 0.2)]
    pub val_fraction: f64,
    /// Target Gaussian sigma.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Preset::LasVegas)]
    pub preset: Preset,
}

#[derive(Args)]
pub struct FinetuneArgs {
    /// Pretrained weights file.
    #[arg(long)]
    pub weights: PathBuf,
    /// Dataset directory to adapt to.
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory for weights.bin and train.log.
    #[arg(long)]
    pub out: PathBuf,
    /// Number of training samples to draw from the dataset.
    #[arg(long, default_value_t = 5)]
    pub samples: usize,
    /// Model name override (default: read from the weights file).
    #[arg(long)]
    pub model: Option<String>,
    /// Stack depth override (default: read from the weights file).
    #[arg(long)]
    pub c: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub roobi: Option<usize>,
    #[arg(long, default_value_t = 1e-5)]
    pub lr: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 100)]
    pub patience: usize,
    #[arg(long, default_value_t = 10_000)]
    pub max_epochs: usize,
    #[arg(long)]
    pub augment: bool,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Preset::LasVegas)]
    pub preset: Preset,
}

#[derive(Args)]
pub struct DetectArgs {
    /// Trained weights file.
    #[arg(long)]
    pub weights: PathBuf,
    /// Directory of stabilized, numbered PNG frames.
    #[arg(long)]
    pub frames: PathBuf,
    /// Stack depth c (default: the weights file's input depth).
    #[arg(long)]
    pub c: Option<usize>,
    /// Frame skip k.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Tile size.
    #[arg(long)]
    pub roobi: Option<usize>,
    /// Point extractor: nms or otsu.
    #[arg(long, default_value = "nms")]
    pub method: String,
    /// NMS score threshold.
    #[arg(long)]
    pub alpha_n: Option<f32>,
    /// Otsu minimum segment area in pixels.
    #[arg(long)]
    pub alpha_o: Option<f32>,
    /// Detections CSV path.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Preset::LasVegas)]
    pub preset: Preset,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Ground-truth annotations CSV.
    #[arg(long)]
    pub gt: PathBuf,
    /// Detections CSV.
    #[arg(long)]
    pub det: PathBuf,
    /// Match radius in pixels.
    #[arg(long)]
    pub theta: Option<f32>,
    /// Report file path.
    #[arg(long, default_value = "eval_report.txt")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Preset::LasVegas)]
    pub preset: Preset,
}

#[derive(Args)]
pub struct GridArgs {
    /// Dataset directory (synth output layout).
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory for grid_results.csv.
    #[arg(long)]
    pub out: PathBuf,
    /// Config ids 1-8, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "5,6")]
    pub configs: Vec<u8>,
    /// Training-set sizes to sweep, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "50")]
    pub sample_counts: Vec<usize>,
    /// Runs per cell.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    /// Pretrained weights for fine-tune configs: model:channels=path
    /// (repeatable).
    #[arg(long)]
    pub pretrained: Vec<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub roobi: Option<usize>,
    #[arg(long)]
    pub theta: Option<f32>,
    /// Point extractor used for scoring: nms or otsu.
    #[arg(long, default_value = "nms")]
    pub method: String,
    /// Extractor thresholds to sweep, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Vec<f32>,
    #[arg(long, default_value_t = 1e-5)]
    pub lr: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 100)]
    pub patience: usize,
    #[arg(long, default_value_t = 10_000)]
    pub max_epochs: usize,
    #[arg(long)]
    pub augment: bool,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Fraction of the non-test samples used for validation.
    #[arg(long, default_value_t = 0.2)]
    pub val_fraction: f64,
    /// Fraction of samples held out for the test split.
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Preset::LasVegas)]
    pub preset: Preset,
}

#[derive(Args)]
pub struct PlotArgs {
    /// Directory of numbered PNG frames.
    #[arg(long)]
    pub frames: PathBuf,
    /// Ground-truth annotations CSV.
    #[arg(long)]
    pub gt: PathBuf,
    /// Detections CSV.
    #[arg(long)]
    pub det: PathBuf,
    /// Output directory for overlay PNGs.
    #[arg(long)]
    pub out: PathBuf,
    /// Match radius in pixels (also the marker radius).
    #[arg(long)]
    pub theta: Option<f32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Preset::LasVegas)]
    pub preset: Preset,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let usage_ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            std::process::exit(if usage_ok { 0 } else { 1 });
        }
    };
    let result = match &cli.command {
        Command::Synth(args) => commands::synth(args),
        Command::Register(args) => commands::register(args),
        Command::Targets(args) => commands::targets(args),
        Command::Train(args) => commands::train(args),
        Command::Finetune(args) => commands::finetune(args),
        Command::Detect(args) => commands::detect(args),
        Command::Eval(args) => commands::eval(args),
        Command::Grid(args) => commands::grid(args),
        Command::Plot(args) => commands::plot(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
