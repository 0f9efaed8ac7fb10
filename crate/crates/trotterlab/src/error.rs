//! Crate-wide error type.
//!
//! Every fallible operation in the toolkit returns [`Result`]. Variants are
//! grouped by the subsystem that raises them; messages carry the offending
//! numbers so a failed run can be diagnosed from the log alone.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Unified error type for the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    // ----------------------------------------------------------------- linalg
    /// A matrix expected to be Hermitian failed the symmetry check.
    #[error("operator is not Hermitian: max |A - A^dag| entry {asymmetry:.3e} exceeds {tolerance:.1e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    /// A matrix expected to be unitary failed the isometry check.
    #[error("operator is not unitary: max |U^dag U - I| entry {residual:.3e} exceeds {tolerance:.1e}")]
    NotUnitary { residual: f64, tolerance: f64 },

    /// Operator dimensions must be powers of two (spin-1/2 site spaces).
    #[error("dimension {dim} is not a power of two >= 2")]
    BadDimension { dim: usize },

    /// A non-square matrix was supplied where an operator was expected.
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },

    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// NaN or infinity encountered where a finite number is required.
    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    /// A state vector had zero (or numerically zero) norm.
    #[error("state vector has vanishing norm {norm:.3e}")]
    ZeroNorm { norm: f64 },

    /// A state vector was not normalized and normalization was not requested.
    #[error("state vector norm {norm} deviates from 1 by more than {tolerance:.1e}")]
    NotNormalized { norm: f64, tolerance: f64 },

    /// An index into a spectrum or state space was out of range.
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    /// The principal matrix logarithm is ill-defined: an eigenphase sits on
    /// (or numerically at) the branch cut.
    #[error("eigenphase {phase:.12} is within {guard:.1e} of the +/-pi branch cut; \
             reduce the step so that |H| dt stays clear of pi")]
    BranchAmbiguity { phase: f64, guard: f64 },

    /// Re-exponentiating the computed logarithm failed to reproduce the
    /// input unitary, so the step's eigenbasis was not resolved.
    #[error("matrix logarithm verification failed: residual {residual:.3e} exceeds {tolerance:.1e}")]
    LogDefect { residual: f64, tolerance: f64 },

    /// A time step that must be strictly positive was not.
    #[error("time step {dt} must be positive and finite")]
    BadTimeStep { dt: f64 },

    // ------------------------------------------------------------ hamiltonian
    /// Model construction asked for zero sites or zero layers.
    #[error("model needs at least one site and one layer (got {what})")]
    EmptyModel { what: &'static str },

    /// Site-count cap that keeps dense matrices at desk scale.
    #[error("{n_sites} sites exceeds the dense-construction cap of {cap}")]
    TooManySites { n_sites: usize, cap: usize },

    /// A chain builder needs a minimum number of sites (e.g. one bond).
    #[error("{what} requires at least {min} sites, got {n}")]
    TooFewSites { what: &'static str, min: usize, n: usize },

    /// A Pauli term's letter string did not match the model's site count.
    #[error("term acts on {found} sites, model has {expected}")]
    SiteCountMismatch { expected: usize, found: usize },

    /// A letter other than I, X, Y, Z appeared in a Pauli string.
    #[error("invalid Pauli letter {letter:?} at position {position}")]
    BadPauliLetter { letter: char, position: usize },

    /// An empty Pauli string was supplied.
    #[error("empty Pauli string")]
    EmptyPauliString,

    /// A coefficient was NaN or infinite.
    #[error("non-finite coefficient {value} in term {term}")]
    BadCoefficient { value: f64, term: String },

    /// Two terms placed in the same commuting layer anticommute.
    #[error("terms {first} and {second} in one layer anticommute; \
             split them into separate layers or use a grouped layer")]
    NonCommutingLayer { first: String, second: String },

    /// The counterexample model needs four distinct diagonal values.
    #[error("diagonal values {a} and {b} coincide within {tolerance:.1e}; \
             the two-qubit diagonal model must be nondegenerate")]
    DegenerateDiagonal { a: f64, b: f64, tolerance: f64 },

    // ---------------------------------------------------------------- trotter
    /// The step is so large that first-order eigenphases can reach the
    /// branch cut, making the extracted generator meaningless.
    #[error("time step {dt} exceeds the principal-branch budget {budget:.4e} \
             for this model")]
    StepTooLarge { dt: f64, budget: f64 },

    /// An operation that tracks individual eigenstates hit a spectral gap
    /// below the resolvable floor.
    #[error("spectral gap {gap:.3e} at index {index} is below {tolerance:.1e}; \
             eigenstate tracking is ill-defined")]
    DegenerateSpectrum { gap: f64, index: usize, tolerance: f64 },

    /// Eigenpair matching between two spectra was ambiguous.
    #[error("eigenvector pairing ambiguous at index {index}: best overlap {best:.6} \
             vs runner-up {runner_up:.6} differ by less than {margin:.1e}")]
    MatchingAmbiguity { index: usize, best: f64, runner_up: f64, margin: f64 },

    /// Subspace tracking between exact and effective spectra broke down.
    #[error("projector distance {distance:.3} >= 1: the tracked subspace no longer \
             corresponds to the exact one")]
    SubspaceLost { distance: f64 },

    /// A supplied initial state has weight outside the tracked subspace.
    #[error("initial state has weight {outside:.3e} outside the tracked subspace")]
    StateOutsideSubspace { outside: f64 },

    /// An empty or out-of-range eigenstate subset was requested.
    #[error("subspace selection is empty or repeats indices")]
    BadSubspace,

    /// Log-log fitting needs at least three strictly positive samples.
    #[error("scaling fit needs >= 3 strictly positive points, got {n}")]
    FitUnderdetermined { n: usize },

    /// Log-log fitting rejects non-positive ordinates/abscissae.
    #[error("scaling fit requires positive data; sample {index} is {value}")]
    FitNonPositive { index: usize, value: f64 },

    // ------------------------------------------------------------- bounds/das
    /// A quantity that must be strictly positive was not.
    #[error("{what} must be strictly positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    /// The tracked spectral gap collapsed somewhere along the interpolation
    /// path.
    #[error("tracked gap collapsed to {gap:.3e} at s = {s:.4}")]
    GapCollapse { s: f64, gap: f64 },

    /// The two endpoint Hamiltonians commute, so the optimal-time formula
    /// degenerates (its denominator is the commutator norm).
    #[error("endpoint Hamiltonians commute (|[Hi, Hf]| = {c1:.3e}); \
             the optimal total time is unbounded")]
    CommutingEndpoints { c1: f64 },

    // ------------------------------------------------------------------- qpe
    /// Register width outside the supported range.
    #[error("register width {bits} outside supported range 1..={max}")]
    BadRegisterWidth { bits: usize, max: usize },

    /// Eigenphase weights must form a probability vector.
    #[error("weights sum to {sum}, expected 1 within {tolerance:.1e}")]
    BadWeights { sum: f64, tolerance: f64 },

    /// Phases handed to the register kernel must lie in [0, 1).
    #[error("phase {phase} outside [0, 1)")]
    PhaseOutOfRange { phase: f64 },

    /// The two-state phase readout hit the quadrant boundary.
    #[error("cosine channel 2 P_alpha - 1 = {value:.3e} is too close to zero; \
             the extracted phase quadrant is ambiguous")]
    QuadrantAmbiguity { value: f64 },

    /// Phase comparisons assume the accumulated shift stays within one branch.
    #[error("accumulated phase shift {shift:.4} rad exceeds pi: winding; \
             comparisons modulo 2 pi are no longer faithful")]
    PhaseWinding { shift: f64 },

    // ------------------------------------------------------------ config/cli
    /// Configuration document failed to parse or validate.
    #[error("config error: {message}")]
    Config { message: String },

    /// A grid specification string was malformed.
    #[error("bad grid spec {spec:?}: {reason}")]
    BadGridSpec { spec: String, reason: String },

    /// The requested command cannot run with the supplied model kind.
    #[error("command {command:?} does not support model kind {model:?}")]
    UnsupportedModel { command: String, model: String },

    /// A required parameter was missing for the requested command.
    #[error("command {command:?} requires parameter {key:?}")]
    MissingParam { command: String, key: &'static str },

    /// A parameter value failed range validation.
    #[error("parameter {key:?}: {reason}")]
    BadParam { key: &'static str, reason: String },

    /// Artifact I/O failure.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A computed artifact contained NaN/infinity and was not written.
    #[error("numerical failure: {context} produced a non-finite value")]
    NumericalFailure { context: String },

    /// Strict mode: a non-rigorous or precondition-violating report was
    /// produced while --strict was set.
    #[error("strict mode: {message}")]
    StrictViolation { message: String },
}

impl Error {
    /// Process exit class for command-line front-ends: 2 for configuration
    /// and input-shape errors (bad documents, missing or out-of-range
    /// parameters, malformed models), 3 for strict-mode violations, 4 for
    /// runtime failures (numerics, branch guards, artifact I/O).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. }
            | Error::BadGridSpec { .. }
            | Error::MissingParam { .. }
            | Error::BadParam { .. }
            | Error::UnsupportedModel { .. }
            | Error::BadPauliLetter { .. }
            | Error::EmptyPauliString
            | Error::BadCoefficient { .. }
            | Error::NonCommutingLayer { .. }
            | Error::DegenerateDiagonal { .. }
            | Error::SiteCountMismatch { .. }
            | Error::TooManySites { .. }
            | Error::TooFewSites { .. }
            | Error::EmptyModel { .. }
            | Error::BadRegisterWidth { .. }
            | Error::BadWeights { .. }
            | Error::PhaseOutOfRange { .. }
            | Error::IndexOutOfRange { .. }
            | Error::BadDimension { .. }
            | Error::NotSquare { .. }
            | Error::BadTimeStep { .. }
            | Error::NonPositive { .. } => 2,
            Error::StrictViolation { .. } => 3,
            _ => 4,
        }
    }
}
