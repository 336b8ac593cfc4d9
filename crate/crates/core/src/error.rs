use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsometryKind {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("point is not on the upper hyperboloid sheet: (X,X) = {norm}, z = {z}")]
    NotOnHyperboloid { norm: f64, z: f64 },

    #[error("tangent data invalid: {0}")]
    BadTangent(String),

    #[error("element is {kind:?}, not hyperbolic (trace {trace})")]
    NotHyperbolic { kind: IsometryKind, trace: f64 },

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("not a group element: {0}")]
    NotGroupElem(String),

    #[error("relator residual {0:e} exceeds tolerance")]
    Relator(f64),

    #[error("cannot parse word {0:?}")]
    ParseWord(String),

    #[error("unsupported twist curve {0:?}")]
    UnsupportedCurve(String),

    #[error("invalid multicurve: {0}")]
    Multicurve(String),

    #[error("objects live over different representations")]
    RepMismatch,

    #[error("mesh: {0}")]
    Mesh(String),

    #[error("degenerate triangle {0}")]
    DegenerateTriangle(usize),

    #[error("solver: {0}")]
    Solver(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
