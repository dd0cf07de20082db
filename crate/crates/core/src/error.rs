use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty outcome set")]
    Empty,
    #[error("invalid mass {value} at index {index}")]
    InvalidMass { index: usize, value: f64 },
    #[error("masses sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("degenerate posterior: output outcome {0} has zero probability")]
    DegeneratePosterior(usize),
    #[error("distribution lacks full support at outcome {0}")]
    MissingSupport(usize),
    #[error("order vector sums to {0}, expected 1")]
    OrderSum(f64),
    #[error("inadmissible order vector: {0}")]
    InadmissibleOrders(&'static str),
    #[error("pivot order equals 1; the direct formula is singular (use the KL mixture limit)")]
    SingularPivot,
    #[error("operation requires the first order to be the largest, found pivot {0}")]
    PivotNotZero(usize),
    #[error("invalid {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("risk vector sits on the excluded limit: the exponents 1 - R_k sum to zero")]
    ExcludedLimit,
    #[error("inadmissible risk vector: {0}")]
    InadmissibleRisk(&'static str),
    #[error("bet of lottery {lottery} has zero mass on reachable outcome {outcome}")]
    ZeroBet { lottery: usize, outcome: usize },
    #[error(
        "odds of lottery {lottery} at outcome {outcome} must be positive and finite, found {value}"
    )]
    InvalidOdds {
        lottery: usize,
        outcome: usize,
        value: f64,
    },
    #[error("matrix is not Hermitian (deviation {0})")]
    NotHermitian(f64),
    #[error("operator is not positive semidefinite (smallest eigenvalue {0})")]
    NotPositive(f64),
    #[error("effect exceeds the identity (largest eigenvalue {0})")]
    EffectAboveUnit(f64),
    #[error("state normalization <u, w> = {0}, expected 1")]
    StateNormalization(f64),
    #[error("effects do not sum to the unit effect (deviation {0})")]
    IncompleteMeasurement(f64),
    #[error("effect {effect} gives probability {value} on state {state}")]
    EffectOutOfRange {
        effect: usize,
        state: usize,
        value: f64,
    },
}

impl Error {
    /// Errors that stem from a singular formula rather than malformed input.
    pub fn is_singularity(&self) -> bool {
        matches!(
            self,
            Error::SingularPivot | Error::ExcludedLimit | Error::DegeneratePosterior(_)
        )
    }
}
