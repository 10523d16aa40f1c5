//! Path length of binary search trees, lifted to words whose letters are
//! independent geometric random variables.
//!
//! * [`pathlen`]: the parameter ρ on words (reference, linear-time and
//!   Cartesian-tree evaluations).
//! * [`geometric`]: the letter model, sampling, weak-order patterns and their
//!   exact probabilities.
//! * [`moments`]: closed forms for `E[ρ]`, `E[ρ(ρ-1)]`, `Var[ρ]`, the range
//!   contributions behind the second moment, and the `q -> 1` limits.
//! * [`oracle`]: exact distribution and moments by enumeration.
//! * [`montecarlo`]: seeded simulation for lengths beyond enumeration.
//! * [`report`]: the oracle-versus-closed-form verification report.

pub mod error;
pub mod geometric;
pub mod moments;
pub mod montecarlo;
pub mod oracle;
pub mod pathlen;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use geometric::{GeometricModel, Pattern};
pub use moments::{FormulaSet, KindTag, MomentReport, RangeId, Source};
pub use oracle::{PatternStats, Pmf};
pub use pathlen::{RhoBreakdown, Word};
pub use scalar::{Rational, Scalar};
