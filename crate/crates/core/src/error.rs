use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} is not a power of two")]
    Dimension(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-Hermitian input (defect {0:.3e})")]
    NonHermitianInput(f64),
    #[error("value out of range: {0}")]
    Range(String),
    #[error("invalid Pauli string: {0}")]
    Parse(String),
    #[error("blocks larger than two qubits are unsupported (block of size {0})")]
    Arity(usize),
    #[error("witness does not detect this family (inner product {0})")]
    NonPositiveInner(f64),
    #[error("empty support")]
    EmptySupport,
    #[error("objective is degenerate: inner product nonpositive at every start")]
    DegenerateObjective,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("construction failed (residual {residual:.3e}): {reason}")]
    ConstructionFailure { residual: f64, reason: String },
    #[error("generators do not commute: {0} and {1}")]
    NonCommuting(String, String),
    #[error("generators are not independent")]
    DependentGenerators,
    #[error("unknown id: {0}")]
    UnknownId(String),
    #[error("partition shape: {0}")]
    PartitionShape(String),
    #[error("bracket has no identity term")]
    MissingIdentityTerm,
    #[error("input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
