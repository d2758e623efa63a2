use thiserror::Error;

use crate::image::Point;

/// Counters reported when an exhaustive search runs out of budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetExceeded {
    pub limit: BudgetLimit,
    /// Complete maps produced before the search stopped.
    pub maps: u64,
    /// Backtracking nodes visited before the search stopped.
    pub nodes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetLimit {
    Maps(u64),
    Nodes(u64),
    /// A domain too large for subset enumeration.
    Points(usize),
    /// An orbit that did not stabilize within the step cap.
    Steps(usize),
}

impl std::fmt::Display for BudgetExceeded {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.limit {
            BudgetLimit::Maps(n) => write!(f, "map cap {n} reached")?,
            BudgetLimit::Nodes(n) => write!(f, "node cap {n} reached")?,
            BudgetLimit::Points(n) => write!(f, "domain exceeds {n} points")?,
            BudgetLimit::Steps(n) => write!(f, "no stabilization within {n} steps")?,
        }
        write!(f, " after {} maps and {} nodes", self.maps, self.nodes)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point {0} is not in the image")]
    PointNotInImage(Point),

    #[error("image has no points")]
    EmptyImage,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("budget exceeded: {0}")]
    Budget(BudgetExceeded),

    /// A state that the mathematics rules out was reached.
    #[error("internal contradiction: {0}")]
    Contradiction(String),

    #[error("{path}: {message}")]
    Parse { path: String, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_messages_carry_counters() {
        let e = Error::Budget(BudgetExceeded {
            limit: BudgetLimit::Nodes(10),
            maps: 2,
            nodes: 10,
        });
        assert!(e.is_budget());
        assert_eq!(e.to_string(), "budget exceeded: node cap 10 reached after 2 maps and 10 nodes");
        assert!(!Error::EmptyImage.is_budget());
    }

    #[test]
    fn parse_errors_lead_with_the_path() {
        let e = Error::Parse {
            path: "points[0]".into(),
            message: "expected integer".into(),
        };
        assert_eq!(e.to_string(), "points[0]: expected integer");
    }
}
