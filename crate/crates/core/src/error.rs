use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value {0}")]
    NonFinite(f64),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("update factor eta = {0} outside [0, 1/2)")]
    InvalidEta(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid index set: {0}")]
    IndexSet(String),

    #[error("item weight {0} is not strictly positive")]
    NonPositiveWeight(f64),

    #[error("{items} items exceed the enumeration guard of {limit}")]
    TooManyItems { items: usize, limit: usize },

    #[error("resolution {0} must be positive and finite")]
    InvalidResolution(f64),

    #[error("dynamic program needs {cells} cells, budget is {budget}")]
    TableTooLarge { cells: u64, budget: u64 },

    #[error("adaptive search exceeded its budget of {budget} oracle calls")]
    BudgetExceeded { budget: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}
