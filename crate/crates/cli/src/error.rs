use std::fmt;
use std::path::Path;

use blowup::evolve::EvolveError;
use blowup::heat::HeatError;
use blowup::phase::PhaseError;
use blowup::selfsim::SelfSimError;
use blowup::specfun::SpecfunError;

pub const VALIDATION: i32 = 2;
pub const NUMERICAL: i32 = 3;
pub const BAD_ARGS: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self { code: VALIDATION, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self { code: NUMERICAL, message: message.into() }
    }

    pub fn args(message: impl Into<String>) -> Self {
        Self { code: BAD_ARGS, message: message.into() }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self { code: 1, message: format!("{}: {e}", path.display()) }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<SpecfunError> for CliError {
    fn from(e: SpecfunError) -> Self {
        match e {
            SpecfunError::NoConvergence { .. } => Self::numerical(e.to_string()),
            _ => Self::args(e.to_string()),
        }
    }
}

impl From<SelfSimError> for CliError {
    fn from(e: SelfSimError) -> Self {
        match e {
            SelfSimError::Specfun(s) => s.into(),
            SelfSimError::InvalidSeed { .. } => Self::validation(e.to_string()),
            _ => Self::args(e.to_string()),
        }
    }
}

impl From<HeatError> for CliError {
    fn from(e: HeatError) -> Self {
        match e {
            HeatError::NoSeed => Self::validation(e.to_string()),
            _ => Self::args(e.to_string()),
        }
    }
}

impl From<PhaseError> for CliError {
    fn from(e: PhaseError) -> Self {
        match e {
            PhaseError::Escaped { .. } => Self::numerical(e.to_string()),
            _ => Self::args(e.to_string()),
        }
    }
}

impl From<EvolveError> for CliError {
    fn from(e: EvolveError) -> Self {
        match e {
            EvolveError::NonFinite { .. } => Self::numerical(e.to_string()),
            EvolveError::FitSamples(_) | EvolveError::NoBlowup | EvolveError::Resolution { .. } => {
                Self::validation(e.to_string())
            }
            _ => Self::args(e.to_string()),
        }
    }
}
