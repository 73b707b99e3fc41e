//! Exact computer algebra for finitely presented, non-positively graded
//! commutative DG-algebras over a field.
//!
//! The engine constructs Koszul complexes, derived tensor products,
//! reductions, Hom complexes and semi-free resolutions, and mechanically
//! verifies homological smoothness, complete-intersection and duality
//! statements on a finite bigraded window.

pub mod catalog;
pub mod cdga;
pub mod dgmod;
pub mod derived;
pub mod resolve;
pub mod scenario;
pub mod verdicts;
pub mod error;
pub mod strata;
pub mod exactla;

pub use error::{DgError, Result};
