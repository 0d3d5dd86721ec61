use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hgreen", version, about = "Spectra, Schatten norms and Sobolev constants on compact Heisenberg manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List eigenvalues of L_alpha up to a bound.
    Spectrum(SpectrumArgs),
    /// Truncated Schatten r-norm of the Green operator with tail bound.
    Schatten(SchattenArgs),
    /// Sharp constant of the one-derivative Sobolev gain.
    Constant(ConstantArgs),
    /// Apply the Green operator to a function given by spectral coefficients.
    Green(GreenArgs),
    /// Run the invariant suite.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sabotage {
    /// Count kernel eigenvalues in Schatten sums.
    IncludeKernel,
}

#[derive(Debug, Clone, Args)]
pub struct ManifoldArgs {
    /// Complex dimension of the Heisenberg group.
    #[arg(long, conflicts_with = "params")]
    pub d: Option<u32>,
    /// Period of the center; a number or "p/q".
    #[arg(long, conflicts_with = "params")]
    pub c: Option<String>,
    /// Operator parameter, |alpha| <= d.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "params")]
    pub alpha: Option<String>,
    /// Multiplicity constant of the type (a) eigenspaces.
    #[arg(long = "big-l", conflicts_with = "params")]
    pub big_l: Option<u64>,
    /// Weight of T^2 in the Riemannian Laplacian.
    #[arg(long, conflicts_with = "params")]
    pub epsilon: Option<f64>,
    /// `zn`, a lattice file, or inline rows such as "1,0;0,1".
    #[arg(long, conflicts_with = "params")]
    pub lattice: Option<String>,
    /// The given lattice is already the dual lattice.
    #[arg(long = "lattice-is-dual")]
    pub lattice_is_dual: bool,
    /// JSON parameter file instead of the flags above.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Cap on enumerated lattice points.
    #[arg(long)]
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub manifold: ManifoldArgs,
    #[command(flatten)]
    pub out: OutputArgs,
    /// List eigenvalues with lambda <= this bound
    #[arg(long = "lambda-max", allow_hyphen_values = true)]
    pub lambda_max: f64,
    /// Merge equal eigenvalues across families.
    #[arg(long)]
    pub coalesce: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SchattenArgs {
    #[command(flatten)]
    pub manifold: ManifoldArgs,
    #[command(flatten)]
    pub out: OutputArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub r: f64,
    #[arg(long = "n-max", default_value_t = 200)]
    pub n_max: u64,
    #[arg(long = "j-max", default_value_t = 200)]
    pub j_max: u64,
    #[arg(long = "norm-sq-max", default_value_t = 50.0, allow_hyphen_values = true)]
    pub norm_sq_max: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ConstantArgs {
    #[command(flatten)]
    pub manifold: ManifoldArgs,
    #[command(flatten)]
    pub out: OutputArgs,
    /// Largest eigenvalue scanned for the numeric supremum.
    #[arg(long, default_value_t = 100.0, allow_hyphen_values = true)]
    pub probe: f64,
}

#[derive(Debug, Clone, Args)]
pub struct GreenArgs {
    #[command(flatten)]
    pub manifold: ManifoldArgs,
    #[command(flatten)]
    pub out: OutputArgs,
    /// Spectral function file.
    #[arg(long)]
    pub input: PathBuf,
    /// Sobolev exponents to report.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
    pub s: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckFormat {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Deliberately break one invariant to confirm the suite notices.
    #[arg(long, value_enum)]
    pub sabotage: Option<Sabotage>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: CheckFormat,
    #[arg(long)]
    pub output: Option<PathBuf>,
}
