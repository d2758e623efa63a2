//! Executable digital topology: finite digital images, digitally continuous
//! maps, the approximate fixed point property, universal and weakly universal
//! functions, normal products, digital metric spaces, and checkers for fixed
//! point theorems on finite digital metric spaces.
//!
//! Every decision procedure here is exhaustive and exact. Searches visit
//! points in lexicographic order, so witnesses are reproducible, and metric
//! comparisons use exact radical arithmetic rather than floating point.

pub mod error;
pub mod exact;
pub mod fixtures;
pub mod format;
pub mod image;
pub mod maps;
pub mod metric;
pub mod product;
pub mod theoremlab;

pub use error::{BudgetExceeded, BudgetLimit, Error, Result};
pub use exact::{Distance, RadicalSum};
pub use image::{AdjacencyKind, AdjacencyRelation, DigitalImage, Point};

use serde::Serialize;

/// A decided yes/no answer, with a witness when the answer is no.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict<W> {
    pub holds: bool,
    pub witness: Option<W>,
}

impl<W> Verdict<W> {
    pub fn yes() -> Self {
        Self { holds: true, witness: None }
    }

    pub fn no(witness: W) -> Self {
        Self { holds: false, witness: Some(witness) }
    }

    pub fn map_witness<V>(self, f: impl FnOnce(W) -> V) -> Verdict<V> {
        Verdict { holds: self.holds, witness: self.witness.map(f) }
    }
}
