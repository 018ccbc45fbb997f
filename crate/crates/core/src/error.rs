use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed JSON in a cell configuration.
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    /// Well-formed JSON that does not follow the cell schema.
    #[error("schema violation: {0}")]
    Schema(String),

    /// The cell violates one or more structural or coefficient invariants.
    #[error("invalid cell: {}", .0.join("; "))]
    InvalidCell(Vec<String>),

    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("step size underflow on edge '{edge}' at xi = {xi}")]
    StepUnderflow { edge: String, xi: f64 },

    #[error("non-finite value on edge '{edge}' at xi = {xi}")]
    NonFinite { edge: String, xi: f64 },

    /// phi_2(L) vanishes: the edge carries a Dirichlet eigenvalue.
    #[error("degenerate edge '{edge}': phi2(L) = {phi2:e}")]
    DegenerateEdge { edge: String, phi2: f64 },

    #[error("singular system ({context}): coercivity assumption violated or resonant edge")]
    SingularSystem { context: String },

    #[error("regime violation: {0}")]
    Regime(String),

    #[error("postcondition failed: {0}")]
    Postcondition(String),

    #[error("unknown budget exceeded: {needed} unknowns > budget {budget}")]
    BudgetExceeded { needed: usize, budget: usize },

    #[error("solutions belong to different cells")]
    MismatchedCells,

    #[error("cannot generate an admissible random cell: {0}")]
    Generator(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepUnderflow { .. }
                | Error::NonFinite { .. }
                | Error::DegenerateEdge { .. }
                | Error::SingularSystem { .. }
                | Error::Postcondition(_)
                | Error::Generator(_)
        )
    }
}
