use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("a Fock basis needs at least one mode")]
    NoModes,

    #[error("mode {mode} out of range for a {mode_count}-mode circuit")]
    InvalidMode { mode: usize, mode_count: usize },

    #[error("beam splitter needs two distinct modes, got ({0}, {0})")]
    RepeatedMode(usize),

    #[error("states live on different bases")]
    BasisMismatch,

    #[error("expected {expected} values, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("cutoff {cutoff} cannot hold {required} photons")]
    CutoffTooSmall { cutoff: u32, required: u32 },

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("component index {index} out of range ({len} elements)")]
    ComponentOutOfRange { index: usize, len: usize },

    #[error("no input sample produced the herald pattern ({excluded} excluded)")]
    NoHeraldedSamples { excluded: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
