use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "tsplit", version, about = "Two-step inertial three-operator splitting")]
pub struct Cli {
    /// File of `key=value` lines supplying defaults for any flag of the command
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate the parameter conditions and print the inequality table
    Validate(ValidateArgs),
    /// Generate a problem instance file
    Gen(GenArgs),
    /// Run one algorithm on an instance
    Solve(SolveArgs),
    /// Run several algorithms on the same instance
    Compare(CompareArgs),
    /// Restore a blurred, noisy image
    Deblur(DeblurArgs),
}

/// Overrides of the default algorithm configuration.
#[derive(Args, Debug, Clone, Default)]
pub struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Relaxation (lambda for the baselines); defaults to beta_rho / beta
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    /// Step size as a multiple of eta
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_scale: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct StopArgs {
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 0.49, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long, default_value_t = -0.01, allow_negative_numbers = true)]
    pub delta: f64,
    /// Defaults to 0.7 / beta
    #[arg(long, allow_negative_numbers = true)]
    pub rho: Option<f64>,
    /// Defaults to gamma_scale * eta
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub gamma_scale: f64,
    /// Cocoercivity constant of C (`inf` without a smooth term)
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub eta: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum KindArg {
    Lasso,
    Scad,
    Deblur,
    #[value(name = "three_op", alias = "three-op")]
    ThreeOp,
    Feas2d,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinImage {
    /// Ramp with a square, a disc and bars
    Pattern,
    /// Plain diagonal ramp
    Gradient,
}

#[derive(Args, Debug, Clone)]
pub struct ImageArgs {
    /// PGM image (P2 or P5); a built-in 64x64 image otherwise
    #[arg(long)]
    pub image: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = BuiltinImage::Pattern)]
    pub builtin: BuiltinImage,
    #[arg(long, default_value_t = 9)]
    pub ksize: usize,
    #[arg(long, default_value_t = 4.0)]
    pub sigma: f64,
    /// Standard deviation of the additive noise
    #[arg(long, default_value_t = 1e-3)]
    pub noise: f64,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: KindArg,
    /// Rows of D (default 200 for scad, 50 otherwise)
    #[arg(long)]
    pub m: Option<usize>,
    /// Columns of D (default 1000 for scad, 200 otherwise)
    #[arg(long)]
    pub n: Option<usize>,
    /// Defaults to 1; 0 keeps `--angle` for feas2d
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = tsplit::problems::DEFAULT_DENSITY)]
    pub density: f64,
    /// l1 weight (default 0.1, or 1e-4 for deblur)
    #[arg(long)]
    pub reg: Option<f64>,
    /// Angle between the two lines in degrees (feas2d)
    #[arg(long, default_value_t = 45.0)]
    pub angle: f64,
    /// SCAD data without a planted signal
    #[arg(long)]
    pub unplanted: bool,
    #[command(flatten)]
    pub image: ImageArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value = "twostep")]
    pub alg: String,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub stop: StopArgs,
    /// Diagnostics CSV (default `<alg>.csv`)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fill the Lyapunov columns using a long reference run for x*
    #[arg(long)]
    pub ledger: bool,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Comma-separated or repeated algorithm names
    #[arg(long, value_delimiter = ',', required = true)]
    pub alg: Vec<String>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub stop: StopArgs,
    /// Output directory for `<alg>.csv` and `summary.csv`
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct DeblurArgs {
    #[command(flatten)]
    pub image: ImageArgs,
    #[arg(long, default_value = "twostep")]
    pub alg: String,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = tsplit::problems::DEFAULT_DEBLUR_REG)]
    pub reg: f64,
    /// Restored image; the CSV goes next to it with extension `.csv`
    #[arg(long, default_value = "restored.pgm")]
    pub out: PathBuf,
}
