use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown builtin system `{0}` (expected `hhq` or `psh`)")]
    UnknownSystem(String),

    #[error("invalid basis function: {0}")]
    InvalidBasis(String),

    #[error("invalid system specification: {0}")]
    InvalidSystem(String),

    #[error("classical nuclei {0} and {1} coincide")]
    OverlappingNuclei(usize, usize),

    #[error("mass must be positive, got {0}")]
    NonPositiveMass(f64),

    #[error("overlap matrix for {species} is singular (smallest eigenvalue {min_eigenvalue:e})")]
    SingularOverlap { species: String, min_eigenvalue: f64 },

    #[error("SCF did not converge in {iterations} iterations (last energy {last_energy}, density change {density_change:e})")]
    ScfNotConverged {
        iterations: usize,
        last_energy: f64,
        density_change: f64,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("mode layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("{0} qubits exceeds the limit of {1} for this operation")]
    TooManyQubits(usize, usize),

    #[error("circuit parameter slot {0} is unbound")]
    UnboundParameter(usize),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("invalid noise specification: {0}")]
    InvalidNoise(String),

    #[error("shot count must be at least 1")]
    ZeroShots,

    #[error("unknown excitation label `{0}`")]
    UnknownLabel(String),

    #[error("invalid LUCJ parameters: {0}")]
    InvalidLucj(String),

    #[error("operator pool is empty")]
    EmptyPool,

    #[error("energy evaluation returned NaN at parameters {0:?}")]
    NanEnergy(Vec<f64>),

    #[error("invalid optimizer settings: {0}")]
    InvalidOptimizer(String),

    #[error("number sector is empty: {0}")]
    EmptySector(String),

    #[error("noise factor {0} is invalid for this folding style")]
    InvalidNoiseFactor(f64),

    #[error("extrapolation needs at least 2 usable points, got {0}")]
    TooFewPoints(usize),

    #[error("non-negative energy {energy} at noise factor {lambda}: ln(-E) is undefined")]
    NonNegativeEnergy { lambda: f64, energy: f64 },

    #[error("energy fell from {previous} to {energy} when noise grew to factor {lambda}, beyond 3 standard errors")]
    NonMonotoneNoise { lambda: f64, energy: f64, previous: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad input or configuration rather than by a
    /// numerical failure of a stage.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::UnknownSystem(_)
                | Error::InvalidBasis(_)
                | Error::InvalidSystem(_)
                | Error::OverlappingNuclei(..)
                | Error::NonPositiveMass(_)
                | Error::LayoutMismatch(_)
                | Error::InvalidNoise(_)
                | Error::ZeroShots
                | Error::UnknownLabel(_)
                | Error::InvalidLucj(_)
                | Error::EmptyPool
                | Error::InvalidOptimizer(_)
                | Error::EmptySector(_)
                | Error::InvalidNoiseFactor(_)
                | Error::Parse { .. }
                | Error::Config(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
