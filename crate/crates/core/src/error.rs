use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus {0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("modulus {0} is outside the supported range [3, 2^31)")]
    ModulusOutOfRange(u64),
    #[error("value {value} is not a canonical residue mod {p}")]
    NotCanonical { value: u64, p: u64 },
    #[error("direction (0, 0) has no isotropy class")]
    ZeroDirection,
    #[error("point set is empty")]
    EmptySet,
    #[error("bisector of a point with itself is the whole plane")]
    CoincidentPoints,
    #[error("line coefficients (a, b) are both zero")]
    DegenerateLine,
    #[error("source set needs at least {need} elements, got {got}")]
    SourceTooSmall { need: usize, got: usize },
    #[error("{what}: workload {size} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        size: u128,
        cap: u128,
    },
    #[error("refusing {0}; pass an explicit override to run anyway")]
    Guard(String),
    #[error("invalid generator spec `{0}`")]
    InvalidSpec(String),
    #[error("cannot generate {size} elements mod {p}: {reason}")]
    Unachievable { size: usize, p: u64, reason: String },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("parse error at `{token}`: {reason}")]
    Parse { token: String, reason: String },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn cap(what: &'static str, size: u128, cap: u128) -> Result<()> {
        if size > cap {
            Err(Error::CapExceeded { what, size, cap })
        } else {
            Ok(())
        }
    }
}
