use std::path::PathBuf;

use anyhow::{bail, ensure, Result};
use clap::{Args, Parser, Subcommand};
use gaa_core::model::{half_filling, Boundary, ModelParams, Perturbation};
use gaa_core::scaling::{Correlation, Drift};
use gaa_core::spectra::EnergyWindow;
use serde::Serialize;

pub const SUBCOMMANDS: &[&str] = &["spectrum", "rstat", "phase-diagram", "sff", "chi", "collapse", "validate"];

/// Spectral and eigenstate chaos diagnostics for the interacting
/// generalized Aubry-André chain.
#[derive(Debug, Parser)]
#[command(name = "gaa", version, args_override_self = true)]
pub struct Cli {
    /// Flat `key = value` file of flag defaults; explicit flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Master seed for all realization phases.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (0 = all cores). Results do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Root directory for run outputs.
    #[arg(long, global = true, env = "GAA_OUT", default_value = "runs", value_name = "DIR")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of a single realization.
    Spectrum(SpectrumArgs),
    /// Mean adjacent gap ratio along a λ sweep.
    Rstat(RstatArgs),
    /// Mean adjacent gap ratio on an (α, λ) grid.
    PhaseDiagram(PhaseArgs),
    /// Spectral form factor and Thouless time at one parameter point.
    Sff(SffArgs),
    /// Fidelity susceptibility along a λ sweep.
    Chi(ChiArgs),
    /// Finite-size scaling collapse of a tabulated observable.
    Collapse(CollapseArgs),
    /// Run the built-in oracle checks.
    Validate(ValidateArgs),
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ModelArgs {
    /// Number of sites.
    #[arg(long = "L", default_value_t = 12)]
    #[serde(rename = "L")]
    pub sites: usize,

    /// Particle number (default: half filling, rounded up).
    #[arg(long)]
    pub particles: Option<usize>,

    /// Nearest-neighbor interaction.
    #[arg(long = "V", default_value_t = 1.0)]
    #[serde(rename = "V")]
    pub interaction: f64,

    /// Hopping amplitude.
    #[arg(long, default_value_t = 1.0)]
    pub hopping: f64,

    /// open | periodic
    #[arg(long, default_value_t = Boundary::Open)]
    pub boundary: Boundary,
}

impl ModelArgs {
    pub fn params(&self, lambda: f64, alpha: f64) -> ModelParams {
        let mut p = ModelParams::new(self.sites, lambda, alpha, self.interaction)
            .with_boundary(self.boundary)
            .with_particles(self.particles.unwrap_or_else(|| half_filling(self.sites)));
        p.hopping = self.hopping;
        p
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct LambdaGrid {
    #[arg(long, default_value_t = 0.5)]
    pub lambda_min: f64,
    #[arg(long, default_value_t = 4.0)]
    pub lambda_max: f64,
    /// Number of evenly spaced points (1 = only `lambda-min`).
    #[arg(long, default_value_t = 20)]
    pub lambda_steps: usize,
}

impl LambdaGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        linear_grid(self.lambda_min, self.lambda_max, self.lambda_steps, "lambda")
    }
}

pub fn linear_grid(lo: f64, hi: f64, steps: usize, name: &str) -> Result<Vec<f64>> {
    ensure!(steps >= 1, "{name}-steps must be at least 1");
    ensure!(lo.is_finite() && hi.is_finite(), "{name} bounds must be finite");
    if steps == 1 {
        return Ok(vec![lo]);
    }
    ensure!(hi > lo, "{name}-max must exceed {name}-min");
    Ok((0..steps).map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64).collect())
}

/// `lo,hi` in scaled-spectrum units, or `full`.
#[derive(Clone, Debug, Serialize)]
pub struct WindowArg(pub Option<(f64, f64)>);

impl std::str::FromStr for WindowArg {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("full") {
            return Ok(WindowArg(None));
        }
        let Some((lo, hi)) = s.split_once(',') else {
            bail!("window must be `lo,hi` or `full`, got `{s}`");
        };
        let (lo, hi) = (lo.trim().parse::<f64>()?, hi.trim().parse::<f64>()?);
        EnergyWindow::new(lo, hi)?;
        Ok(WindowArg(Some((lo, hi))))
    }
}

impl std::fmt::Display for WindowArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0 {
            None => f.write_str("full"),
            Some((lo, hi)) => write!(f, "{lo},{hi}"),
        }
    }
}

impl WindowArg {
    pub fn energy_window(&self) -> EnergyWindow {
        match self.0 {
            None => EnergyWindow::full(),
            Some((lo, hi)) => EnergyWindow { lo, hi },
        }
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0.65)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    /// Fixed phase offset; otherwise drawn for `realization`.
    #[arg(long)]
    pub phi: Option<f64>,
    /// Realization index whose seeded phase is used.
    #[arg(long, default_value_t = 0)]
    pub realization: usize,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct RstatArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: LambdaGrid,
    /// Realizations per point (default scales with the Hilbert-space size).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Scaled-energy window `lo,hi`, or `full`.
    #[arg(long, default_value = "-0.1,0.1", allow_hyphen_values = true)]
    pub window: WindowArg,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct PhaseArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0.0)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = 0.9)]
    pub alpha_max: f64,
    #[arg(long, default_value_t = 10)]
    pub alpha_steps: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: LambdaGrid,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value = "-0.1,0.1", allow_hyphen_values = true)]
    pub window: WindowArg,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SffArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0.65)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    /// Realizations (default follows the size-dependent table).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Gaussian filter width as a fraction of the level spread.
    #[arg(long, default_value_t = gaa_core::sff::DEFAULT_ETA)]
    pub eta: f64,
    /// Thouless threshold on the smoothed |log10(K/K_GOE)|.
    #[arg(long, default_value_t = gaa_core::sff::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Polynomial degree of the unfolding fit.
    #[arg(long, default_value_t = gaa_core::spectra::DEFAULT_FIT_DEGREE)]
    pub fit_degree: usize,
    /// Moving-average width in grid points.
    #[arg(long, default_value_t = gaa_core::sff::DEFAULT_SMOOTHING)]
    pub smoothing: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tau_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub tau_max: f64,
    #[arg(long, default_value_t = 500)]
    pub tau_points: usize,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ChiArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: LambdaGrid,
    #[arg(long)]
    pub samples: Option<usize>,
    /// local | extensive
    #[arg(long, default_value_t = Perturbation::LocalDensity)]
    pub kind: Perturbation,
    #[arg(long, default_value = "-0.1,0.1", allow_hyphen_values = true)]
    pub window: WindowArg,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct CollapseArgs {
    /// CSV with columns `L`, `lambda` and the observable.
    #[arg(long)]
    pub input: PathBuf,
    /// Observable column (default: `value`, else `mean_r`, else `f_scaled`).
    #[arg(long)]
    pub column: Option<String>,
    /// power_law | bkt
    #[arg(long, default_value_t = Correlation::Bkt)]
    pub ansatz: Correlation,
    /// const | linear_l | inverse_l | inverse_log_l
    #[arg(long, default_value_t = Drift::LinearL)]
    pub drift: Drift,
    #[arg(long, default_value_t = 40)]
    pub population: usize,
    #[arg(long, default_value_t = 300)]
    pub generations: usize,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long)]
    pub nu_min: Option<f64>,
    #[arg(long)]
    pub nu_max: Option<f64>,
    #[arg(long)]
    pub lambda0_min: Option<f64>,
    #[arg(long)]
    pub lambda0_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda1_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda1_max: Option<f64>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ValidateArgs {
    /// Sites for the single-particle self-duality check.
    #[arg(long, default_value_t = 610)]
    pub duality_sites: usize,
    /// Sites for the mobility-edge check.
    #[arg(long, default_value_t = 987)]
    pub edge_sites: usize,
}
