use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "fermi-cavity", version, about = "Ideal Fermi gas in a chaotic cavity: thermal parameters, correlations, entanglement, partitions, kinetics and recurrence bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Write the result to this file (atomically) instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; each command has a natural default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON config whose entries override command-line flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Thermal parameters of a spectrum.
    #[command(subcommand)]
    Thermo(ThermoCommand),
    /// Random partitions into distinct parts.
    #[command(subcommand)]
    Partition(PartitionCommand),
    /// Relaxed one-particle correlations.
    #[command(subcommand)]
    Corr(CorrCommand),
    /// Lattice entanglement entropy.
    #[command(subcommand)]
    Ee(EeCommand),
    /// Szegő asymptotics of one-dimensional chains.
    Szego(SzegoArgs),
    /// Kinetic relaxation of level occupations.
    #[command(subcommand)]
    Kinetics(KineticsCommand),
    /// Quantum recurrence-time bounds.
    Recurrence(RecurrenceArgs),
    /// Regenerate the data behind a named result.
    Repro(ReproArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CavityArgs {
    /// Linear size L of the square cavity.
    #[arg(long = "L", default_value_t = 1000.0)]
    pub linear_size: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,
}

#[derive(Debug, Clone, Args)]
pub struct StateArgs {
    /// Temperature.
    #[arg(long = "T")]
    pub temperature: f64,
    /// Chemical potential.
    #[arg(long = "mu", allow_negative_numbers = true)]
    pub chemical_potential: f64,
}

#[derive(Debug, Clone, Args)]
pub struct McmcArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub burn_in: u64,
    #[arg(long, default_value_t = 1_000)]
    pub thinning: u64,
    #[arg(long, default_value_t = 64)]
    pub max_shift: u64,
}

#[derive(Debug, Subcommand)]
pub enum ThermoCommand {
    /// Solve for (T, μ) from (E, N), or evaluate (E, N) at given (T, μ).
    Solve(ThermoSolveArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Levels {
    /// Integer ladder ε_ν = ν.
    Harmonic,
    /// Two-dimensional continuum with constant density of states.
    Continuum,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("constraints").args(["energy", "temperature"]).required(true))]
pub struct ThermoSolveArgs {
    #[arg(long, value_enum, default_value_t = Levels::Harmonic)]
    pub levels: Levels,
    /// Total energy (with --N).
    #[arg(long = "E", requires = "particles")]
    pub energy: Option<f64>,
    /// Particle number (with --E).
    #[arg(long = "N", requires = "energy")]
    pub particles: Option<f64>,
    /// Temperature (with --mu).
    #[arg(long = "T", requires = "chemical_potential")]
    pub temperature: Option<f64>,
    /// Chemical potential (with --T).
    #[arg(long = "mu", allow_negative_numbers = true, requires = "temperature")]
    pub chemical_potential: Option<f64>,
    #[command(flatten)]
    pub cavity: CavityArgs,
}

#[derive(Debug, Subcommand)]
pub enum PartitionCommand {
    /// Coarse-grained occupation pattern of typical partitions.
    Sample(PartitionSampleArgs),
    /// Limit shape of distinct-part partitions with any number of parts.
    Vershik(PartitionVershikArgs),
}

#[derive(Debug, Args)]
pub struct PartitionSampleArgs {
    #[arg(long = "E")]
    pub energy: u64,
    #[arg(long = "N")]
    pub count: u64,
    /// Levels per coarse-graining group.
    #[arg(long = "Gm", default_value_t = 20)]
    pub group_size: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Also fit a Fermi–Dirac function to the mean pattern.
    #[arg(long)]
    pub fit: bool,
    #[command(flatten)]
    pub mcmc: McmcArgs,
}

#[derive(Debug, Args)]
pub struct PartitionVershikArgs {
    #[arg(long = "E")]
    pub energy: u64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[command(flatten)]
    pub mcmc: McmcArgs,
}

#[derive(Debug, Subcommand)]
pub enum CorrCommand {
    /// Thermal one-particle correlation for point pairs read from a CSV file
    /// with columns x1, y1, x2, y2.
    Eval(CorrEvalArgs),
}

#[derive(Debug, Args)]
pub struct CorrEvalArgs {
    #[arg(long)]
    pub pairs: PathBuf,
    #[command(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    pub cavity: CavityArgs,
}

#[derive(Debug, Subcommand)]
pub enum EeCommand {
    /// Entanglement entropy of one lattice subsystem.
    Lattice(EeLatticeArgs),
    /// Entropy density per site and per area across lattice spacings.
    Density(EeDensityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Chain,
    Square,
    Disk,
}

#[derive(Debug, Args)]
pub struct EeLatticeArgs {
    #[arg(long, value_enum, default_value_t = Shape::Square)]
    pub shape: Shape,
    /// Sites per side (square) or chain length.
    #[arg(long, required_unless_present = "radius")]
    pub side: Option<usize>,
    /// Disk radius in lattice units.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Lattice spacing.
    #[arg(long)]
    pub a: f64,
    #[command(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    pub cavity: CavityArgs,
}

#[derive(Debug, Args)]
pub struct EeDensityArgs {
    /// Lattice spacings, comma separated.
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set, required = true)]
    pub a_sweep: Vec<f64>,
    #[command(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    pub cavity: CavityArgs,
}

#[derive(Debug, Args)]
pub struct SzegoArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: f64,
    /// Chain lengths, comma separated.
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set, default_value = "64,128,256")]
    pub sizes: Vec<usize>,
    /// Lattice spacing.
    #[arg(long)]
    pub a: f64,
    #[command(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    pub cavity: CavityArgs,
}

#[derive(Debug, Subcommand)]
pub enum KineticsCommand {
    /// Integrate the collision equation and report the approach to
    /// Fermi–Dirac.
    Run(KineticsRunArgs),
}

#[derive(Debug, Args)]
pub struct KineticsRunArgs {
    #[arg(long, default_value_t = 64)]
    pub levels: usize,
    /// Initial occupations, one per line (lines starting with '#' and a
    /// non-numeric header are skipped).  Defaults to two filled blocks.
    #[arg(long)]
    pub init: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    /// Level spacing of the uniform grid.
    #[arg(long, default_value_t = 1.0)]
    pub spacing: f64,
    /// Largest energy transfer, in grid steps.
    #[arg(long, default_value_t = 8)]
    pub window: usize,
    /// Transition rate W inside the window.
    #[arg(long, default_value_t = 0.01)]
    pub rate: f64,
}

#[derive(Debug, Args)]
pub struct RecurrenceArgs {
    /// Number of nonzero off-diagonal coefficient pairs.
    #[arg(long = "dF")]
    pub d_f: u64,
    #[arg(long)]
    pub cmin: f64,
    #[arg(long)]
    pub cmax: f64,
    /// RMS level difference Δε.
    #[arg(long)]
    pub deps: f64,
    /// Recurrence tolerance ϵ.
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReproId {
    /// Typical pattern at E = 21900, N = 200 (use with or without --panel).
    Fig4,
    Fig4b,
    Fig4d,
    VolumeLaw,
    ContinuumLimit,
    KineticsRelax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Panel {
    B,
    D,
}

#[derive(Debug, Args)]
pub struct ReproArgs {
    #[arg(value_enum)]
    pub id: ReproId,
    /// Panel of the partition figure (with `fig4`).
    #[arg(long, value_enum)]
    pub panel: Option<Panel>,
    /// Retained Monte Carlo samples for the partition figures.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}
