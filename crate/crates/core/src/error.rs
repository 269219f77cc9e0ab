use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NonHermitianInput { deviation: f64 },
    #[error("matrix is not an orthogonal projection: {0}")]
    NotAProjection(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("projection has rank zero")]
    ZeroRankProjection,
    #[error("observable does not lie in the span of context `{context}`")]
    NotInContext { context: String },
    #[error("context {lower} is not below context {upper}")]
    NotComparable { lower: usize, upper: usize },
    #[error("invalid context: {0}")]
    InvalidContext(String),
    #[error("context poset exceeds the cap of {cap} contexts")]
    PosetTooLarge { cap: usize },
    #[error("enumeration over {size} elements exceeds the cap of {cap}")]
    EnumerationTooLarge { size: usize, cap: usize },
    #[error("index {index} out of range (length {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("spectral opens live over different posets")]
    PosetMismatch,
    #[error("covering relation violates axiom {axiom}: {detail}")]
    InvalidCovering { axiom: usize, detail: String },
    #[error("map is not continuous: condition {condition} fails ({detail})")]
    NotContinuous { condition: usize, detail: String },
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("choice function is not defined at context {0}")]
    IncompleteChoice(usize),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid interval: {0}")]
    InvalidInterval(String),
    #[error("generic element search failed after {attempts} attempts")]
    GenericElementFailed { attempts: usize },
    #[error("input error: {0}")]
    Input(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
