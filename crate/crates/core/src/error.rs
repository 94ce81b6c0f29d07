use thiserror::Error;

/// Errors shared by every module of the crate.
///
/// Each variant names the precondition that failed; the CLI maps them onto
/// exit codes, so messages are written to stand on their own.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed polynomial text.
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },

    /// Some expanded monomial repeats a variable or misses one.
    #[error("not multilinear: {0}")]
    NotMultilinear(String),

    /// The expansion cancelled to the zero polynomial but the input was not
    /// the literal `0`.
    #[error("expansion is the zero polynomial; only the literal \"0\" denotes it")]
    EmptyPolynomial,

    /// Degree analysis and preimage solving are undefined for the zero
    /// polynomial (it is an identity of every algebra).
    #[error("the zero polynomial has no commutator-degree")]
    ZeroPolynomial,

    /// A polynomial and an argument list (or profile) disagree on arity.
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    /// Two matrices disagree on size.
    #[error("matrix size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    /// A matrix-unit index is outside the upper triangular range.
    #[error("index ({i},{j}) out of range for an upper triangular {n}x{n} matrix (need 1 <= i <= j <= n)")]
    IndexOutOfRange { n: usize, i: usize, j: usize },

    /// A (k, T, t) profile violates its invariants.
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    /// A witness handed to the solver is unusable.
    #[error("invalid witness: {0}")]
    InvalidWitness(String),

    /// The target matrix lies outside J^r, hence outside the image.
    #[error("target lies outside J^{degree}, the image of a polynomial of commutator-degree {degree}")]
    TargetOutsideImage { degree: usize },

    /// Every sampled assignment produced a delta table with a vanishing
    /// leading coefficient.
    #[error("all {attempts} sampled delta tables had a zero leading coefficient")]
    RetriesExhausted { attempts: u32 },

    /// A certificate failed its exact verification. This indicates a bug,
    /// never a property of the input.
    #[error("internal verification failure: {0}")]
    InternalVerificationFailure(String),

    /// The brute-force substitution count exceeds the configured budget.
    #[error("brute force would need {evaluations} substitutions, over the budget of {budget}")]
    CostLimit { evaluations: u128, budget: u128 },

    /// A matrix read from JSON violates the upper triangular encoding.
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
