use thiserror::Error;

/// Errors raised by domain-type construction and the analysis operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("non-finite entry (NaN or infinity)")]
    NonFinite,
    #[error("empty vector: dimension must be at least 1")]
    EmptyVector,
    #[error("not Hermitian: max asymmetry {max_asymmetry}")]
    NotHermitian { max_asymmetry: f64 },
    #[error("norm {norm:.6} outside tolerance")]
    NotNormalized { norm: f64 },
    #[error("zero vector cannot be normalized")]
    ZeroNorm,
    #[error("element {element} eigenvalue {eigenvalue:.6}")]
    NotPositive { element: usize, eigenvalue: f64 },
    #[error("completeness deviation {deviation:.6}")]
    Incomplete { deviation: f64 },
    #[error("duplicate outcome label {label:?}")]
    DuplicateLabel { label: String },
    #[error("basis is not orthonormal: |<v{i}|v{j}> - d_ij| = {deviation}")]
    NotOrthonormal { i: usize, j: usize, deviation: f64 },
    #[error("basis has {got} vectors, expected {expected}")]
    IncompleteBasis { expected: usize, got: usize },
    #[error("joint matrix is not unitary: max |U^H U - I| = {deviation}")]
    NotUnitary { deviation: f64 },
    #[error("post-selection probability {probability} below 1e-12")]
    VanishingPostSelection { probability: f64 },
    #[error("assignment is missing a value for outcome {label:?}")]
    MissingAssignment { label: String },
    #[error("assignment marks outcome {label:?} undefined but P = {probability} >= 1e-12")]
    UndefinedAssignment { label: String, probability: f64 },
    #[error("probability {value} for outcome {label:?} outside [0, 1] beyond tolerance")]
    ProbabilityOutOfRange { label: String, value: f64 },
    #[error("operation requires a projective measurement")]
    NonProjective,
    #[error("scenario carries no value assignment and the command requires one")]
    NoAssignment,
    #[error("command requires a coupling or basis measurement")]
    UnsupportedMeasurement,
}

pub type Result<T> = std::result::Result<T, Error>;
