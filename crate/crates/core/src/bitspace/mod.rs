//! Bit spaces `2^(N×N)` under the fair-coin measure: positions, pasts,
//! finite assignments, and exact (conditional) expectation of cylinder
//! functions.

mod assignment;
mod cylinder;
mod position;
mod set;

pub use assignment::BitAssignment;
pub use cylinder::{CylinderFunction, DEFAULT_SUPPORT_CAP};
pub use position::Position;
pub use set::{PositionSet, Thresholds};

use crate::rational::ParseRationalError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BitspaceError {
    #[error("support of {needed} positions exceeds the cap of {cap}")]
    SupportCap { needed: usize, cap: usize },
    #[error("table has {entries} entries but a support of {support} needs 2^{support}")]
    TableSize { support: usize, entries: usize },
    #[error("position {0} listed twice")]
    DuplicatePosition(crate::bitspace::Position),
    #[error("assignment has no bit at {0}")]
    MissingBit(crate::bitspace::Position),
    #[error("prefix position {0} is not in the past set")]
    PrefixOutsideSet(crate::bitspace::Position),
    #[error("tail position {0} has no slot in the complement")]
    NoRoomInComplement(crate::bitspace::Position),
    #[error("relabeled tail overlaps prefix at {0}")]
    Overlap(crate::bitspace::Position),
    #[error(transparent)]
    Rational(#[from] ParseRationalError),
}
