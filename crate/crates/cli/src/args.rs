use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "infometric",
    version,
    about = "Verification pipelines for the information metric on instanton moduli spaces"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by all subcommands. Unset flags fall back to the config
/// file, then to built-in defaults.
#[derive(Debug, Args, Default)]
pub struct GlobalArgs {
    /// Output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the report to this path instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Omit the wall-clock timestamp so reports are byte-identical.
    #[arg(long, global = true)]
    pub no_timestamp: bool,

    /// Plain `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Relative quadrature tolerance, in [1e-14, 1e-2].
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Initial radial quadrature nodes, in [8, 1e6].
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    Info,
    Hyp,
    Vertex,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Information Gram matrix of the BPST family on ℝ⁴.
    Bpst {
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Center as x,y,z,w.
        #[arg(long, value_delimiter = ',', num_args = 1, default_value = "0,0,0,0")]
        center: Vec<f64>,
    },
    /// Closed-form ℂP² coefficients against quadrature.
    Cp2 {
        #[arg(long, conflicts_with = "t_grid")]
        t: Option<f64>,
        /// Linear grid a:b:n.
        #[arg(long)]
        t_grid: Option<String>,
    },
    /// Primary sectional curvatures along λ.
    Curv {
        #[arg(long, value_enum, default_value_t = PresetArg::Info)]
        preset: PresetArg,
        /// Linear grid a:b:n.
        #[arg(long, default_value = "0.05:0.95:10")]
        lambda_grid: String,
    },
    /// Geodesic of the warped 2-strip with conserved-quantity log.
    Geod {
        #[arg(long, value_enum, default_value_t = PresetArg::Hyp)]
        preset: PresetArg,
        /// Start as lambda,s.
        #[arg(long, value_delimiter = ',', default_value = "0.5,0")]
        start: Vec<f64>,
        /// Initial velocity as dlambda,ds.
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        vel: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long, default_value_t = infometric::geodesic::DEFAULT_STEP)]
        dt: f64,
    },
    /// Arc length to the ideal boundary λ → 0.
    Probe {
        #[arg(long, value_enum, default_value_t = PresetArg::Info)]
        preset: PresetArg,
        #[arg(long, default_value_t = 0.1)]
        lambda0: f64,
        /// Comma list, or geometric grid a:b:n.
        #[arg(long, default_value = "1e-3:1e-8:6")]
        eps_grid: String,
    },
    /// Model integrals and charge normalization.
    Fixtures,
    /// Machine-readable description of every report.
    Schema,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bpst { .. } => "bpst",
            Command::Cp2 { .. } => "cp2",
            Command::Curv { .. } => "curv",
            Command::Geod { .. } => "geod",
            Command::Probe { .. } => "probe",
            Command::Fixtures => "fixtures",
            Command::Schema => "schema",
        }
    }
}
