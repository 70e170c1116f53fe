use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Multiplicity matrix is not symmetric at (u, v).
    Asymmetric {
        u: usize,
        v: usize,
    },
    /// Vertex degree differs from the declared regularity.
    DegreeMismatch {
        vertex: usize,
        expected: usize,
        found: usize,
    },
    /// Rotation map is not an involution or disagrees with the multiplicities.
    Rotation(String),
    NotRegular,
    Disconnected,
    /// Some precondition on the inputs does not hold.
    Precondition(String),
    Overflow(String),
    /// A size or work budget would be exceeded.
    Budget(String),
    Infeasible(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Asymmetric { u, v } => write!(f, "asymmetric multiplicity at ({u}, {v})"),
            Error::DegreeMismatch {
                vertex,
                expected,
                found,
            } => {
                write!(
                    f,
                    "degree mismatch at vertex {vertex}: expected {expected}, found {found}"
                )
            }
            Error::Rotation(s) => write!(f, "rotation map: {s}"),
            Error::NotRegular => f.write_str("graph is not regular"),
            Error::Disconnected => f.write_str("graph is disconnected"),
            Error::Precondition(s) => write!(f, "precondition failed: {s}"),
            Error::Overflow(s) => write!(f, "overflow: {s}"),
            Error::Budget(s) => write!(f, "budget exceeded: {s}"),
            Error::Infeasible(s) => write!(f, "infeasible: {s}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
