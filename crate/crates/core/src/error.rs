use thiserror::Error;

/// Errors produced by the clustering library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point set is empty")]
    Empty,

    #[error("duplicate point identifier `{0}`")]
    DuplicatePoint(String),

    #[error("unknown point `{0}`")]
    UnknownPoint(String),

    #[error("point sets differ: `{0}` is missing from the other space")]
    PointSetMismatch(String),

    #[error("matrix has shape {rows}x{cols}, expected {n}x{n}")]
    Shape { rows: usize, cols: usize, n: usize },

    #[error("coordinate of `{point}` has dimension {got}, expected {expected}")]
    Dimension {
        point: String,
        expected: usize,
        got: usize,
    },

    #[error("distance ({a}, {b}) is not a finite nonnegative number: {value}")]
    Negative { a: String, b: String, value: f64 },

    #[error("distance ({a}, {b}) = {ab} but ({b}, {a}) = {ba}")]
    Asymmetric {
        a: String,
        b: String,
        ab: f64,
        ba: f64,
    },

    #[error("self-distance of `{0}` is nonzero")]
    Diagonal(String),

    #[error("distinct points `{a}` and `{b}` are at distance 0 but the space is not flagged pseudo")]
    ZeroDistance { a: String, b: String },

    #[error("triangle inequality fails on ({a}, {b}, {c})")]
    Triangle { a: String, b: String, c: String },

    #[error("coordinates disagree with the distance matrix at ({a}, {b})")]
    CoordsMismatch { a: String, b: String },

    #[error("strong triangle inequality fails on ({a}, {b}, {c})")]
    NotUltrametric { a: String, b: String, c: String },

    #[error("invalid correspondence: {0}")]
    Correspondence(String),

    #[error("certification failed at level {level}: {reason}")]
    Certification { level: usize, reason: String },

    #[error("invalid dendrogram: {0}")]
    Dendrogram(String),

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("invalid coloring: {0}")]
    Coloring(String),

    #[error("invalid witness: {0}")]
    Witness(String),

    #[error("instance of size {size} exceeds the cap of {cap}")]
    TooLarge { size: usize, cap: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid labeling: {0}")]
    Labeling(String),

    #[error("internal flow error: {0}")]
    Flow(String),

    #[error("unsupported format version {0}")]
    FormatVersion(u32),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
