use thiserror::Error;

/// Errors raised anywhere in the diagnostic pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dense dimension {dim} exceeds the supported maximum {max}")]
    TooLarge { dim: usize, max: usize },

    #[error("spectrum has zero width")]
    DegenerateSpectrum,

    #[error("singular least-squares fit: {0}")]
    SingularFit(String),

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error("eigenvectors were not computed for this spectrum")]
    MissingEigenvectors,

    #[error("empty ensemble: {0}")]
    EmptyEnsemble(&'static str),

    #[error("every fidelity susceptibility in the ensemble is zero")]
    AllZeroSusceptibility,

    #[error("need at least {needed} data points, got {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("observable is constant; cost function denominator vanishes")]
    ConstantObservable,

    #[error("realization {index} (seed {seed:#018x}): {source}")]
    Realization {
        index: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("grid point {point}: {source}")]
    GridPoint {
        point: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn in_realization(self, index: usize, seed: u64) -> Self {
        Error::Realization { index, seed, source: Box::new(self) }
    }

    pub(crate) fn at_point(self, point: impl Into<String>) -> Self {
        Error::GridPoint { point: point.into(), source: Box::new(self) }
    }
}
