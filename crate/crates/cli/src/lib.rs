//! Runners behind the `spinlab` binary: trajectory and soliton runs written
//! as CSV, verification suites written as JSON reports.

pub mod config;
pub mod report;
pub mod simulate;
pub mod soliton;
pub mod verify;

use spinlab_core::Error;

/// Why a command could not produce its result. Verification failures are
/// not errors; they come back as a report with `pass = false`.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Invalid(String),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Invalid(m) => write!(f, "invalid input: {m}"),
            Failure::Numerical(m) => write!(f, "numerical breakdown: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DimensionMismatch { .. }
            | Error::InvalidInput(_)
            | Error::Precondition(_)
            | Error::PoleProximity { .. }
            | Error::SpaceMismatch { .. }
            | Error::StepTooSmall(_)
            | Error::SpectrumCone(_) => Failure::Invalid(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

pub const EXIT_VERIFY_FAILED: u8 = 1;
