use std::path::PathBuf;

use cftlab::circuits::CircuitError;
use cftlab::erroranalysis::ErrorAnalysisError;
use cftlab::gaussian::GaussianError;
use cftlab::lattice::LatticeError;
use cftlab::oar::OarError;
use cftlab::virasoro::VirasoroError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}: key `{key}`: {message}")]
    Config { path: PathBuf, line: usize, key: String, message: String },
    #[error("{0}")]
    Argument(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("lattice: {0}")]
    Lattice(LatticeError),
    #[error("virasoro: {0}")]
    Virasoro(VirasoroError),
    #[error("gaussian: {0}")]
    Gaussian(GaussianError),
    #[error("oar: {0}")]
    Oar(OarError),
    #[error("error analysis: {0}")]
    ErrorAnalysis(#[from] ErrorAnalysisError),
    #[error("circuits: {0}")]
    Circuit(CircuitError),
    #[error("check failed: {0}")]
    CheckFailed(String),
}

/// Exit codes. Clap reports usage errors with 2 itself.
pub mod code {
    pub const USAGE: u8 = 2;
    pub const CONFIG: u8 = 3;
    pub const ARGUMENT: u8 = 4;
    pub const IO: u8 = 5;
    pub const LATTICE: u8 = 10;
    pub const VIRASORO: u8 = 11;
    pub const GAUSSIAN: u8 = 12;
    pub const OAR: u8 = 13;
    pub const ERROR_ANALYSIS: u8 = 14;
    pub const CIRCUITS: u8 = 15;
    pub const CHECK_FAILED: u8 = 20;
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => code::CONFIG,
            CliError::Argument(_) => code::ARGUMENT,
            CliError::Io { .. } => code::IO,
            CliError::Lattice(_) => code::LATTICE,
            CliError::Virasoro(_) => code::VIRASORO,
            CliError::Gaussian(_) => code::GAUSSIAN,
            CliError::Oar(_) => code::OAR,
            CliError::ErrorAnalysis(_) => code::ERROR_ANALYSIS,
            CliError::Circuit(_) => code::CIRCUITS,
            CliError::CheckFailed(_) => code::CHECK_FAILED,
        }
    }
}

// Wrapped errors are reported under the module that raised them.

impl From<LatticeError> for CliError {
    fn from(e: LatticeError) -> Self {
        CliError::Lattice(e)
    }
}

impl From<VirasoroError> for CliError {
    fn from(e: VirasoroError) -> Self {
        CliError::Virasoro(e)
    }
}

impl From<GaussianError> for CliError {
    fn from(e: GaussianError) -> Self {
        match e {
            GaussianError::Virasoro(v) => CliError::Virasoro(v),
            other => CliError::Gaussian(other),
        }
    }
}

impl From<OarError> for CliError {
    fn from(e: OarError) -> Self {
        CliError::Oar(e)
    }
}

impl From<CircuitError> for CliError {
    fn from(e: CircuitError) -> Self {
        match e {
            CircuitError::Lattice(l) => l.into(),
            CircuitError::Virasoro(v) => v.into(),
            CircuitError::Gaussian(g) => g.into(),
            other => CliError::Circuit(other),
        }
    }
}
