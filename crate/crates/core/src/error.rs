use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("decomposition did not converge at {precision} bits")]
    NonConvergence { precision: usize },

    #[error("matrix dimensions do not match: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular")]
    Singular,

    #[error("invalid algebra parameters: {0}")]
    InvalidAlgebra(String),

    #[error("algebra ({a}, {b}) is split; a division algebra is required")]
    AlgebraSplit { a: String, b: String },

    #[error("lattice is not an order: {0}")]
    NotAnOrder(String),

    #[error("lattice basis is degenerate (rank {rank} < 4)")]
    DegenerateLattice { rank: usize },

    #[error("no enlargement found; stopped at reduced discriminant {reached} (target {target}), basis {basis}")]
    SearchExhausted { reached: String, target: String, basis: String },

    #[error("element {0} does not lie in the order")]
    NotInOrder(String),

    #[error("invalid polarization: {0}")]
    InvalidPolarization(String),

    #[error("point {0} is not in the upper half plane")]
    NotInUpperHalfPlane(String),

    #[error("element {0} is not elliptic")]
    NotElliptic(String),

    #[error("eigenvalue check failed: {0}")]
    EigenMismatch(String),

    #[error("element {0} has negative lower-left entry; its eigenvalue on (tau,1) lies in the lower half plane")]
    NegativeOrientation(String),

    #[error("inconsistent candidate data: {0}")]
    InconsistentData(String),
}

/// Parse failure with an optional 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ParseError {
    pub message: String,
    pub line: Option<usize>,
}

impl ParseError {
    pub fn new(message: impl Into<String>) -> Self {
        ParseError {
            message: message.into(),
            line: None,
        }
    }

    pub fn at_line(mut self, line: usize) -> Self {
        self.line = Some(line);
        self
    }
}
