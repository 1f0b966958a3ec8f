use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("loop edge at vertex {0}")]
    LoopEdge(String),
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(String),
    #[error("disconnected: no path between the given sets")]
    Disconnected,
    #[error("too large for exhaustive automorphism search ({vertices} vertices, bound {bound})")]
    TooLarge { vertices: usize, bound: usize },
    #[error("level too large: {edges} edges exceeds cap {cap}")]
    LevelTooLarge { edges: u128, cap: usize },
    #[error("level {0} not built")]
    LevelNotBuilt(usize),
    #[error("exponent out of range: p = {0} (need 1 < p < inf)")]
    ExponentOutOfRange(f64),
    #[error("solver did not converge at p = {p}: residual {residual:e} after {iterations} steps")]
    NotConverged {
        p: f64,
        residual: f64,
        iterations: usize,
    },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid IGS: {0}")]
    InvalidIgs(String),
    #[error("malformed address: {0}")]
    MalformedAddress(String),
    #[error("density unavailable: {0}")]
    DensityUnavailable(String),
    #[error("weak derivative undefined (degenerate gradient on edge {0})")]
    DegenerateGradient(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("spec parse error{}: {message}", location(.line, .field))]
    Parse {
        line: Option<usize>,
        field: Option<String>,
        message: String,
    },
    #[error("classifier cross-check disagreement: {0}")]
    CrossCheck(String),
}

fn location(line: &Option<usize>, field: &Option<String>) -> String {
    match (line, field) {
        (Some(l), Some(f)) => format!(" at line {l}, field `{f}`"),
        (Some(l), None) => format!(" at line {l}"),
        (None, Some(f)) => format!(" in field `{f}`"),
        (None, None) => String::new(),
    }
}

impl Error {
    /// Input problems (bad specs, bad arguments) as opposed to numeric trouble.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::UnknownVertex(_)
                | Error::LoopEdge(_)
                | Error::DuplicateVertex(_)
                | Error::ExponentOutOfRange(_)
                | Error::InvalidIgs(_)
                | Error::MalformedAddress(_)
                | Error::InvalidArgument(_)
                | Error::Parse { .. }
                | Error::TooLarge { .. }
                | Error::LevelTooLarge { .. }
                | Error::InvalidWeights(_)
                | Error::Disconnected
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
