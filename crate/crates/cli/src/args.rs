use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qdiff_core::dynamics::Integrator;
use qdiff_core::Model;

#[derive(Debug, Parser)]
#[command(name = "qdiff", version, about = "Quantized vorticity, blob transport and flow deformation on the sphere")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the spin generators and the spectrum of the quantized Laplacian.
    BasisCheck(BasisCheckArgs),
    /// Integrate the quantized vorticity equation.
    Simulate(SimulateArgs),
    /// Transport a blob by the quantized flow (density) or by its own field (center).
    Blob(BlobArgs),
    /// Deform an icosahedral mesh by the reference flow and quantize F F†.
    Deform(DeformArgs),
    /// Render a qcoef, qgrid or qmat file to a Hammer-projection PPM.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output directory (created if missing).
    #[arg(long, default_value = "qdiff-out")]
    pub out: PathBuf,
    /// Eigenbasis cache file; read if present, written otherwise.
    #[arg(long)]
    pub cache_eigenbasis: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    Euler,
    Epdiff,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Model {
        match m {
            ModelArg::Euler => Model::Euler,
            ModelArg::Epdiff => Model::Epdiff,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegratorArg {
    Isomp,
    Rk4,
}

impl From<IntegratorArg> for Integrator {
    fn from(i: IntegratorArg) -> Integrator {
        match i {
            IntegratorArg::Isomp => Integrator::IsospectralMidpoint,
            IntegratorArg::Rk4 => Integrator::Rk4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BlobMode {
    Density,
    Center,
}

/// Complex generator of the stream matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorArg {
    /// α(−1+i)Y₁₀, whose field is the reference flow.
    Example,
    /// α(−1−i)Y₁₀, the example with its gradient part reversed.
    Conjugate,
}

impl GeneratorArg {
    pub fn coefficients(self) -> qdiff_core::HarmonicCoefficients {
        match self {
            GeneratorArg::Example => qdiff_core::reference::example_generator(),
            GeneratorArg::Conjugate => qdiff_core::reference::conjugate_generator(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReadAs {
    /// Trace-phase density (blobs, F F†).
    Density,
    /// Skew-Hermitian quantized function.
    Function,
    /// Quantized vorticity.
    Vorticity,
}

#[derive(Debug, Clone, Args)]
pub struct BasisCheckArgs {
    /// Matrix size, 2 ≤ N ≤ 256.
    #[arg(long)]
    pub n: i64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 16)]
    pub n: i64,
    #[arg(long, value_enum, default_value_t = ModelArg::Euler)]
    pub model: ModelArg,
    #[arg(long, default_value_t = 1.0)]
    pub t_final: f64,
    /// Step size (conflicts with --steps).
    #[arg(long, conflicts_with = "steps")]
    pub dt: Option<f64>,
    /// Number of equal steps to t_final.
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long, value_enum, default_value_t = IntegratorArg::Isomp)]
    pub integrator: IntegratorArg,
    /// Initial vorticity as qmat-v1 (W) or qcoef-v1 (ω); a fixed built-in field otherwise.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Write every state as states/step_NNNNNN.qmat.
    #[arg(long)]
    pub save_states: bool,
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BlobArgs {
    #[arg(long, default_value_t = 32)]
    pub n: i64,
    /// Initial blob position "x,y,z" (normalized).
    #[arg(long, default_value = "-1,0,0", allow_hyphen_values = true)]
    pub point: String,
    #[arg(long, value_enum, default_value_t = BlobMode::Density)]
    pub mode: BlobMode,
    #[arg(long, value_enum, default_value_t = GeneratorArg::Example)]
    pub generator: GeneratorArg,
    /// Density mode: final time (default 0.5).
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Density mode: track samples (default 50). Center mode: steps (default 200).
    #[arg(long)]
    pub steps: Option<u64>,
    /// Center mode: step size (default 1).
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DeformArgs {
    #[arg(long, default_value_t = 4)]
    pub refinements: i64,
    #[arg(long, default_value_t = 1.0)]
    pub t_final: f64,
    #[arg(long, default_value_t = 32)]
    pub n: i64,
    #[arg(long, value_enum, default_value_t = GeneratorArg::Conjugate)]
    pub generator: GeneratorArg,
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    /// qcoef-v1, qgrid-v1 or qmat-v1 file.
    #[arg(long)]
    pub input: PathBuf,
    /// How a qmat-v1 input is read back to a function.
    #[arg(long = "as", value_enum, default_value_t = ReadAs::Density)]
    pub read_as: ReadAs,
    #[arg(long, default_value_t = 512)]
    pub width: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses `"x,y,z"` into three finite numbers.
pub fn parse_point(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("point `{s}` must have three comma-separated components"));
    }
    let mut p = [0.0f64; 3];
    for (slot, text) in p.iter_mut().zip(&parts) {
        *slot = text.parse().map_err(|_| format!("point component `{text}` is not a number"))?;
        if !slot.is_finite() {
            return Err(format!("point component `{text}` is not finite"));
        }
    }
    if p.iter().all(|v| *v == 0.0) {
        return Err("point must be nonzero".into());
    }
    Ok(p)
}
