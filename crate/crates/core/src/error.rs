use thiserror::Error;

/// Error type shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("basis label {label} out of range for {wire_count} wires")]
    LabelOutOfRange { label: u64, wire_count: usize },

    #[error("wire {wire} out of range for {wire_count} wires")]
    WireOutOfRange { wire: usize, wire_count: usize },

    #[error("wires must be distinct, got wire {0} twice")]
    DuplicateWire(usize),

    #[error("wire counts differ: {left} vs {right}")]
    WireCountMismatch { left: usize, right: usize },

    #[error("wire count {0} outside the supported range 1..=20")]
    UnsupportedWireCount(usize),

    #[error("shot count must be at least 1")]
    ZeroShots,

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("state vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("transform width {0} outside the supported range 1..=10")]
    TransformWidthOutOfRange(usize),

    #[error("invalid wire span: {0}")]
    InvalidSpan(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("malformed pixel encoding at position (y={y}, x={x}): {reason}")]
    MalformedNeqrState { y: usize, x: usize, reason: String },

    #[error("malformed permutation register: {0}")]
    MalformedPermutation(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("key material: {0}")]
    InvalidKey(String),

    #[error("invalid piece assignment: {0}")]
    InvalidAssignment(String),

    #[error("pgm: {0}")]
    Pgm(String),

    #[error("qsv: {0}")]
    Qsv(String),

    #[error("session config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
