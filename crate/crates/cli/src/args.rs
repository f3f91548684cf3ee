use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "dicke",
    version,
    about = "Ground-state fidelity sweeps and finite-size scaling for the Dicke model"
)]
pub struct Cli {
    /// Flat TOML file whose keys mirror the long flag names.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the coupling at one atom number and write the scan CSV.
    Scan(ScanArgs),
    /// Sweep several atom numbers and fit the critical exponents.
    Exponents(ExponentsArgs),
    /// Build the specific-susceptibility collapse dataset.
    Collapse(CollapseArgs),
    /// Find the smallest truncation whose Delta P is below a tolerance.
    Converge(ConvergeArgs),
    /// Compare the displaced basis against the brute-force reference.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// Field frequency.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Atomic level splitting.
    #[arg(long)]
    pub omega0: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub gamma_min: Option<f64>,
    #[arg(long)]
    pub gamma_max: Option<f64>,
    /// Grid step, also the fidelity increment.
    #[arg(long)]
    pub dgamma: Option<f64>,
    /// Highest displaced-boson excitation kept.
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Worker threads (DICKE_WORKERS takes precedence).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Golden-section refinement of the susceptibility peak.
    #[arg(long)]
    pub refine: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Also write gnuplot scripts for the emitted CSV files.
    #[arg(long)]
    pub emit_plot: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub n_atoms: Option<u32>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ExponentsArgs {
    /// Comma-separated atom numbers.
    #[arg(long)]
    pub n_list: Option<String>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CollapseArgs {
    /// Scaling exponent of the coupling axis.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Half-width of the x window used for the spread metric.
    #[arg(long)]
    pub spread_width: Option<f64>,
    /// Existing scan, as N=path; repeatable. Replaces inline sweeps.
    #[arg(long = "scan", value_name = "N=PATH")]
    pub scans: Vec<String>,
    /// Atom numbers to sweep inline.
    #[arg(long)]
    pub n_list: Option<String>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergeArgs {
    #[arg(long)]
    pub n_atoms: Option<u32>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Quantity compared against the tolerance.
    #[arg(long, value_enum)]
    pub criterion: Option<Criterion>,
    #[arg(long)]
    pub nmax_start: Option<usize>,
    #[arg(long)]
    pub nmax_ceiling: Option<usize>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub n_atoms: Option<u32>,
    /// Comma-separated couplings.
    #[arg(long)]
    pub gamma_list: Option<String>,
    /// Photon cutoff of the reference; grown until converged when omitted.
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Truncation of the displaced basis.
    #[arg(long)]
    pub nmax: Option<usize>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// What `converge` compares against the tolerance at truncation `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// `1 - |<psi(n)|psi(n + 1)>|` with `psi(n)` zero-extended.
    Exact,
    /// Top-layer weight of `psi(n + 1)`, an upper bound on the exact form.
    Bound,
}
