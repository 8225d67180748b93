use std::fmt;

/// Errors shared by every module in the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A cube endpoint does not sit on the cell grid.
    Alignment(String),
    /// Two grid objects live on different domains.
    DomainMismatch(String),
    /// A numeric parameter is out of its admissible range.
    Parameter(String),
    /// A cube was expected to be dyadic but is not.
    Lattice(String),
    /// A set escapes the cube that must contain it.
    Containment(String),
    /// A dilated cube or evaluation region escapes the domain.
    Geometry(String),
    /// A cube family violates its declared disjointness/separation kind.
    Family(String),
    /// A requested measure is not an integer number of cells.
    Quantization(String),
    /// File or text format violation.
    Format(String),
    /// Experiment configuration problem.
    Config(String),
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Alignment(m) => write!(f, "alignment error: {m}"),
            Error::DomainMismatch(m) => write!(f, "domain mismatch: {m}"),
            Error::Parameter(m) => write!(f, "parameter error: {m}"),
            Error::Lattice(m) => write!(f, "lattice error: {m}"),
            Error::Containment(m) => write!(f, "containment error: {m}"),
            Error::Geometry(m) => write!(f, "geometry error: {m}"),
            Error::Family(m) => write!(f, "family error: {m}"),
            Error::Quantization(m) => write!(f, "quantization error: {m}"),
            Error::Format(m) => write!(f, "format error: {m}"),
            Error::Config(m) => write!(f, "config error: {m}"),
            Error::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
