use std::fmt;

/// Pipeline phase a failure was raised in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    CandidateSweep,
    Selection,
    HighFidelity,
    Reference,
    Reconstruction,
    Validation,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Phase::CandidateSweep => "candidate-sweep",
            Phase::Selection => "selection",
            Phase::HighFidelity => "high-fidelity",
            Phase::Reference => "reference",
            Phase::Reconstruction => "reconstruction",
            Phase::Validation => "validation",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("field invariant violated: {0}")]
    Invariant(String),

    #[error("time step {dt:e} exceeds stability bound {bound:e}")]
    Stability { dt: f64, bound: f64 },

    #[error("solver diverged at step {step}")]
    Diverged { step: usize },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("surrogate construction failed: {0}")]
    SurrogateConstruction(String),

    #[error("{phase} phase failed at index {index}: {source}")]
    Sample {
        phase: Phase,
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{phase} phase failed: {source}")]
    Phase {
        phase: Phase,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn in_phase(self, phase: Phase) -> Error {
        match self {
            e @ (Error::Phase { .. } | Error::Sample { .. }) => e,
            e => Error::Phase {
                phase,
                source: Box::new(e),
            },
        }
    }

    pub fn at_sample(self, phase: Phase, index: usize) -> Error {
        Error::Sample {
            phase,
            index,
            source: Box::new(self),
        }
    }

    /// True when the root cause is a solver blow-up rather than bad input.
    pub fn is_scientific_failure(&self) -> bool {
        match self {
            Error::Diverged { .. } | Error::DegenerateSample(_) => true,
            Error::Sample { source, .. } | Error::Phase { source, .. } => {
                source.is_scientific_failure()
            }
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
