mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fluorospec::presets::Figure;

use crate::config::Scenario;
use crate::output::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Physics(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Physics(_) => 3,
            CliError::Io(_) => 4,
            CliError::Numerical(_) => 1,
        }
    }
}

impl From<fluorospec::Error> for CliError {
    fn from(e: fluorospec::Error) -> Self {
        if e.is_physics_domain() {
            CliError::Physics(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

/// Steady state and resonance-fluorescence spectra of a driven
/// J=1/2 to J=1/2 atom.
#[derive(Debug, Parser)]
#[command(name = "fluorospec", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file with key=value lines
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    gamma: Option<f64>,
    #[arg(long, global = true)]
    b_pi: Option<f64>,
    #[arg(long, global = true)]
    b_sigma: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    omega_abs: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    omega_phase: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    delta_detuning: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    delta_splitting: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    zeeman_b: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid_min: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid_max: Option<f64>,
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    /// Filter bandwidth
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Output file; stdout when omitted or `-`
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Also write an SVG line plot next to each data file
    #[arg(long, global = true)]
    svg: bool,
}

impl Common {
    fn flags(&self) -> Scenario {
        Scenario {
            gamma: self.gamma,
            b_pi: self.b_pi,
            b_sigma: self.b_sigma,
            omega_abs: self.omega_abs,
            omega_phase: self.omega_phase,
            delta_detuning: self.delta_detuning,
            delta_splitting: self.delta_splitting,
            zeeman_b: self.zeeman_b,
            grid_min: self.grid_min,
            grid_max: self.grid_max,
            grid_points: self.grid_points,
            lambda: self.lambda,
        }
    }

    fn scenario(&self) -> Result<Scenario, CliError> {
        let base = match &self.config {
            Some(path) => Scenario::load(path)?,
            None => Scenario::default(),
        };
        Ok(base.merged(self.flags()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ChannelArg {
    Pi,
    Sigma,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Steady-state density matrix, photon rate and intensity breakdown
    Steady,
    /// Incoherent π spectrum with and without interference terms
    SpectrumPi,
    /// Incoherent σ spectrum
    SpectrumSigma,
    /// Normalized intensity correlation G12(τ)/G12(∞)
    Correlation {
        /// Longest delay; defaults to 20/γ
        #[arg(long)]
        tau_max: Option<f64>,
        #[arg(long, default_value_t = 2001)]
        tau_points: usize,
    },
    /// Interference weight C(δ) over a range of splittings (grid keys set the δ range)
    CSweep,
    /// Filtered π spectrum with and without interference terms
    Filter,
    /// Lorentzian fit of a spectral peak
    Fit {
        #[arg(long, value_enum, default_value_t = ChannelArg::Pi)]
        channel: ChannelArg,
        /// Peak to fit
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        center: f64,
    },
    /// Reproduce a reference figure, one CSV per curve
    Figure {
        #[arg(value_parser = parse_figure)]
        name: Figure,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn parse_figure(s: &str) -> Result<Figure, String> {
    s.parse::<Figure>().map_err(|_| {
        let names: Vec<&str> = Figure::ALL.iter().map(|f| f.name()).collect();
        format!("unknown figure '{s}' (known: {})", names.join(", "))
    })
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("FLUOROSPEC_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("FLUOROSPEC_THREADS must be a count, got '{raw}'")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot size thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let scenario = cli.common.scenario()?;
    let out = commands::Output {
        path: cli.common.output.clone(),
        format: cli.common.format,
        svg: cli.common.svg,
    };
    match cli.command {
        Command::Steady => commands::steady(&scenario, &out),
        Command::SpectrumPi => commands::spectrum_pi(&scenario, &out),
        Command::SpectrumSigma => commands::spectrum_sigma(&scenario, &out),
        Command::Correlation { tau_max, tau_points } => {
            commands::correlation(&scenario, &out, tau_max, tau_points)
        }
        Command::CSweep => commands::c_sweep(&scenario, &out),
        Command::Filter => commands::filter(&scenario, &out),
        Command::Fit { channel, center } => commands::fit(&scenario, &out, channel, center),
        Command::Figure { name, out_dir } => commands::figure(name, &out_dir, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fluorospec: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
