use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    #[error("invalid grid size {n}: {reason}")]
    InvalidGrid { n: usize, reason: &'static str },

    #[error("invalid frequency box: {reason}")]
    InvalidBox { reason: &'static str },

    #[error("length mismatch in {context}: expected {expected}, found {found}")]
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("node index {index} out of range for grid of {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },

    #[error(
        "window |xi|^-m = {window:.3e} under-resolved at xi = {xi:?} with n_t = {nt}; need n_t >= {required_nt}"
    )]
    Resolution {
        xi: Vec<i64>,
        window: f64,
        nt: usize,
        required_nt: usize,
    },

    #[error("frequency {xi:?} has |xi| < 2; the oscillation conditions need log|xi| > 0")]
    FrequencyTooSmall { xi: Vec<i64> },

    #[error("frequency {xi:?} is not resonant")]
    NotResonant { xi: Vec<i64> },

    #[error("frequency {xi:?} is resonant")]
    Resonant { xi: Vec<i64> },

    #[error("compatibility integral at {xi:?} is {relative:.3e} (relative), f is not in the closure of the range")]
    Compatibility { xi: Vec<i64>, relative: f64 },

    #[error("f is not in the closure of the range: {} resonant mode(s) fail the compatibility test, worst relative integral {worst_relative:.3e}", offenders.len())]
    ClosureViolation {
        offenders: Vec<Vec<i64>>,
        worst_relative: f64,
    },

    #[error("need at least {required} frequencies, found {found}")]
    TooFewFrequencies { required: usize, found: usize },

    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error("frequency {xi:?} missing from tabulated symbol")]
    MissingFrequency { xi: Vec<i64> },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("no witnesses: symbol satisfies ({tag}) at this scale")]
    NoWitness { tag: &'static str },

    #[error("frequency sequence repeats {xi:?}")]
    SequenceRepeats { xi: Vec<i64> },
}
