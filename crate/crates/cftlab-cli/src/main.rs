//! `cftlab` command-line front end.
//!
//! Exit codes: 0 success, 2 usage, 3 config file, 4 invalid argument,
//! 5 I/O, 10 lattice, 11 virasoro, 12 gaussian, 13 oar, 14 error analysis,
//! 15 circuits, 20 a numerical check did not hold.

mod commands;
mod config;
mod error;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use commands::*;
use error::{code, CliError};
use output::Output;

#[derive(Debug, Parser)]
#[command(name = "cftlab", version, about = "Lattice free-fermion CFT experiments")]
struct Cli {
    /// Directory for CSV artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for randomized probes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write gnuplot scripts next to curve files.
    #[arg(long, global = true)]
    gnuplot: bool,
    /// Flat `key = value` file; flags on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single-particle dispersion and Bogoliubov angles.
    Spectrum(SpectrumArgs),
    /// Ground-state covariance in the momentum basis.
    GroundState(GroundStateArgs),
    /// Vacuum correlators under a conformal flow.
    Correlator(CorrelatorArgs),
    /// Commutator form of L_k against its momentum block form.
    VirasoroCheck(VirasoroCheckArgs),
    /// Central-charge estimate from the vacuum two-point structure of L_k.
    CentralCharge(CentralChargeArgs),
    /// Coarse-grained ground states against directly built ones.
    RgFlow(RgFlowArgs),
    /// Daubechies filter and scaling function by the cascade algorithm.
    WaveletCascade(WaveletCascadeArgs),
    /// Lattice-vs-continuum Virasoro error curves.
    ErrorCurves(ErrorCurvesArgs),
    /// Statevector circuit pipeline against the Gaussian engine.
    CircuitSim(CircuitSimArgs),
    /// All supplementary curve classes with default parameters.
    ReproduceSupplement(SupplementArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::GroundState(_) => "ground-state",
            Command::Correlator(_) => "correlator",
            Command::VirasoroCheck(_) => "virasoro-check",
            Command::CentralCharge(_) => "central-charge",
            Command::RgFlow(_) => "rg-flow",
            Command::WaveletCascade(_) => "wavelet-cascade",
            Command::ErrorCurves(_) => "error-curves",
            Command::CircuitSim(_) => "circuit-sim",
            Command::ReproduceSupplement(_) => "reproduce-supplement",
        }
    }
}

fn parse(args: Vec<OsString>) -> Result<Result<Cli, clap::Error>, CliError> {
    let first = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => return Ok(Err(e)),
    };
    let Some(path) = first.config.clone() else {
        return Ok(Ok(first));
    };
    let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
    let entries = config::parse(&path, &text)?;
    let root = Cli::command();
    let merged = config::merge(&root, first.command.name(), args, &path, &entries)?;
    Ok(root.try_get_matches_from(merged).and_then(|m| Cli::from_arg_matches(&m)))
}

fn run(cli: &Cli) -> Result<String, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Argument("threads must be at least 1".into()));
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut out = Output::new(&cli.out, cli.gnuplot)?;
    match &cli.command {
        Command::Spectrum(a) => spectrum(a, &mut out),
        Command::GroundState(a) => ground_state(a, &mut out),
        Command::Correlator(a) => correlator(a, &mut out),
        Command::VirasoroCheck(a) => virasoro_check(a, cli.seed, &mut out),
        Command::CentralCharge(a) => central_charge(a, &mut out),
        Command::RgFlow(a) => rg_flow(a, &mut out),
        Command::WaveletCascade(a) => wavelet_cascade(a, &mut out),
        Command::ErrorCurves(a) => error_curves(a, &mut out),
        Command::CircuitSim(a) => circuit_sim(a, &mut out),
        Command::ReproduceSupplement(a) => reproduce_supplement(a, &mut out),
    }
}

fn main() -> ExitCode {
    let cli = match parse(std::env::args_os().collect()) {
        Ok(Ok(cli)) => cli,
        Ok(Err(e)) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { code::USAGE } else { 0 });
        }
        Err(e) => {
            eprintln!("cftlab: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("cftlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
