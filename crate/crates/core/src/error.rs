use thiserror::Error;

/// Errors produced by matrix construction, repair algorithms, the LP solver
/// and the instance generators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows} rows and {cols} columns in row {row}")]
    NotSquare { rows: usize, cols: usize, row: usize },

    #[error("matrix must have at least one vertex")]
    Empty,

    #[error("entry ({i},{j}) = {value} is not a finite nonnegative number")]
    BadEntry { i: usize, j: usize, value: f64 },

    #[error("diagonal entry ({i},{i}) = {value} must be zero")]
    NonZeroDiagonal { i: usize, value: f64 },

    #[error("asymmetric entries: ({i},{j}) = {upper} but ({j},{i}) = {lower}")]
    Asymmetric { i: usize, j: usize, upper: f64, lower: f64 },

    #[error("triangle (edge {{{i},{j}}}, apex {k}) is not valid for {n} vertices")]
    InvalidTriangle { i: usize, j: usize, k: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("oracle is infeasible: pair ({i},{j}) has no apex with both edges unmarked")]
    InfeasibleOracle { i: usize, j: usize },

    #[error("LP solver exceeded the iteration cap of {cap} pivots")]
    IterationLimit { cap: usize },

    #[error("LP solver failed to reach the requested accuracy (residual {residual:.3e})")]
    SolverStalled { residual: f64 },

    #[error("random graph stayed disconnected after {attempts} attempts")]
    Disconnected { attempts: usize },

    #[error("could not keep entry ({i},{j}) nonnegative after {attempts} resampling attempts")]
    CorruptionResample { i: usize, j: usize, attempts: usize },

    #[error("invalid instance specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
