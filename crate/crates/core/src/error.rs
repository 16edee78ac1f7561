use thiserror::Error;

use crate::pauli::ParticleLabel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("particle rosters differ: {left} vs {right}")]
    RosterMismatch { left: String, right: String },
    #[error("roster holds {0} particles, at most 64 are supported")]
    RosterTooLarge(usize),
    #[error("particle {0} is not in the roster")]
    UnknownParticle(ParticleLabel),
    #[error("duplicate particle {0} in roster")]
    DuplicateParticle(ParticleLabel),
    #[error("operator {0} is not Hermitian (phase must be ±1)")]
    NonHermitian(String),
    #[error("cannot parse Pauli string {input:?}: {reason}")]
    PauliSyntax { input: String, reason: String },
    #[error("invalid stabilizer generators: {0}")]
    InvalidStabilizer(String),
    #[error("network document: {0}")]
    Syntax(String),
    #[error("invalid network: {}", .0.join("; "))]
    InvalidNetwork(Vec<String>),
    #[error("no valid operator pair on particle {0}")]
    NoValidOperatorPair(ParticleLabel),
    #[error("unsupported network shape: {0}")]
    Unsupported(String),
    #[error("resource guard: {what} needs {requested}, limit is {limit}")]
    ResourceGuard {
        what: &'static str,
        requested: u128,
        limit: u128,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("expectation value has imaginary part {0:e}")]
    NonRealExpectation(f64),
}

impl Error {
    pub fn is_resource_guard(&self) -> bool {
        matches!(self, Error::ResourceGuard { .. })
    }
}
