use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes of the solver core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// `q` at or below the admissibility floor of the erosion function.
    Domain { q: f64 },
    /// Two objects that must share a grid do not.
    GridMismatch,
    /// Invalid grid or profile construction.
    InvalidInput(&'static str),
    /// An update produced a cell at or below the floor guard.
    FloorViolation { cell: usize, value: f64, time: f64 },
    /// The step budget ran out before `t_end`.
    StepBudgetExceeded { steps: usize, time: f64 },
    /// A point outside the truncated grid.
    OutOfDomain { x: f64 },
    /// A diagnostic was requested where its hypothesis does not hold.
    NotApplicable(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { q } => write!(f, "q = {q} is outside the domain q > -1"),
            Error::GridMismatch => f.write_str("profiles live on different grids"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::FloorViolation { cell, value, time } => write!(
                f,
                "floor violation in cell {cell} at t = {time}: q = {value}"
            ),
            Error::StepBudgetExceeded { steps, time } => {
                write!(f, "step budget of {steps} exhausted at t = {time}")
            }
            Error::OutOfDomain { x } => write!(f, "x = {x} is outside the grid"),
            Error::NotApplicable(msg) => write!(f, "not applicable: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
