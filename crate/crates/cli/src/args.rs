use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "crf-atlas",
    version,
    about = "Camera response function models and radiometric calibration"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for every random choice (falls back to CRF_ATLAS_SEED, then 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel jobs.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// JSON file with option defaults; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Omit timestamps and wall times so repeated runs are byte-identical.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// Response curve database in DoRF text format.
    #[arg(long, global = true)]
    pub dorf: Option<PathBuf>,
    /// Directory holding the shipped model files.
    #[arg(long, global = true)]
    pub assets: Option<PathBuf>,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[arg(short, long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the single-latent autoencoder.
    Train(TrainArgs),
    /// Search autoencoder architectures by cross-validated grid search.
    Nas(NasArgs),
    /// Fit every database curve with each model and report RMSE.
    Fit(FitArgs),
    /// Estimate an inverse response from irradiance/intensity pairs.
    Calibrate(CalibrateArgs),
    /// Run the synthetic-camera calibration benchmark.
    Bench(BenchArgs),
    /// Write synthetic observations of a known response.
    Synth(SynthArgs),
    /// Write the built-in surrogate curve database.
    Surrogate(SurrogateArgs),
    /// Write the principal-component basis of the curve database.
    Basis(BasisArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Encoder hidden sizes, e.g. 100,50,20.
    #[arg(long)]
    pub arch: Option<String>,
    #[arg(long)]
    pub latent_dim: Option<usize>,
    /// ldl, auc or none.
    #[arg(long)]
    pub constraint: Option<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub lambda_smooth: Option<f64>,
    #[arg(long)]
    pub lambda_latent: Option<f64>,
    /// Dropout keep probability.
    #[arg(long)]
    pub dropout_keep: Option<f64>,
    /// Latent variance estimator in the KL term: mean or sum.
    #[arg(long)]
    pub variance: Option<String>,
    /// Train on inverted curves.
    #[arg(long)]
    pub inverse: bool,
    /// Leave out the curves used as benchmark cameras.
    #[arg(long, value_name = "CAMERAS")]
    pub holdout: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Model file path (default: <out>/model.json).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Also write a latent histogram SVG.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Args)]
pub struct NasArgs {
    /// Override one axis, e.g. h1=10,20 (repeatable).
    #[arg(long, num_args = 1..)]
    pub space: Vec<String>,
    #[arg(long)]
    pub top_m: Option<usize>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub latent_dim: Option<usize>,
    #[arg(long)]
    pub dropout_keep: Option<f64>,
    /// Resample curves to this many points before searching.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Reduced space, epochs and resolution for a quick check.
    #[arg(long)]
    pub smoke: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Comma list, e.g. gamma,poly:1..4,ggcm:1..4,emor:1..4,slr.
    #[arg(long)]
    pub models: Option<String>,
    /// Autoencoder model file for the slr column.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Observation CSV (camera_id,channel,exposure,irradiance,intensity).
    #[arg(long)]
    pub observations: PathBuf,
    /// slr, gamma, poly:M, ggcm:M or emor:K.
    #[arg(long)]
    pub family: Option<String>,
    /// Autoencoder model file for the slr family.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Result JSON path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// SVG plot of the calibrated inverse curves.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Known forward response (curve CSV) to plot and score against.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Number of held-out database curves used as cameras.
    #[arg(long)]
    pub cameras: Option<usize>,
    /// Patch counts, e.g. 3,6,12,24.
    #[arg(long)]
    pub noccp: Option<String>,
    /// Gaussian noise SD added to intensities.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Exposure multipliers, e.g. 0.25,0.5,1,2.
    #[arg(long)]
    pub exposures: Option<String>,
    /// Number of seeds, starting at --seed.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Comma list of slr-ldl, slr-none, slr, gamma, poly:M, ggcm:M, emor:K.
    #[arg(long)]
    pub methods: Option<String>,
    /// Model file for slr-ldl (and slr).
    #[arg(long)]
    pub model_ldl: Option<PathBuf>,
    /// Model file for slr-none.
    #[arg(long)]
    pub model_none: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write one SVG per camera.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Generate from x^(1/gamma) instead of a database curve.
    #[arg(long, conflicts_with = "curve")]
    pub gamma: Option<f64>,
    /// Index of the database curve to use.
    #[arg(long)]
    pub curve: Option<usize>,
    /// Number of colour patches per exposure.
    #[arg(long)]
    pub patches: Option<usize>,
    /// Gaussian noise SD added to intensities.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Exposure multipliers, e.g. 0.25,0.5,1,2.
    #[arg(long)]
    pub exposures: Option<String>,
    /// Observation CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the forward response as a curve CSV.
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SurrogateArgs {
    /// Number of curves.
    #[arg(long)]
    pub count: Option<usize>,
    /// Samples per curve.
    #[arg(long)]
    pub samples: Option<usize>,
    /// DoRF-format output path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BasisArgs {
    /// Number of basis vectors.
    #[arg(long)]
    pub k: Option<usize>,
    /// Build the basis from inverted curves.
    #[arg(long)]
    pub inverse: bool,
    /// Basis CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the eigenvalue spectrum.
    #[arg(long)]
    pub eigenvalues: Option<PathBuf>,
}
