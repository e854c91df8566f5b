//! Exact truncated Laurent series over prime fields (and `Q`), the group of
//! substitution automorphisms `t ↦ s`, a Hensel-type solver for `f(y) = b`,
//! orbit ball bounds with membership witnesses, and first-order defining
//! formulas for valuation-theoretic sets and orbits.

pub mod error;
pub mod field;
mod kernel;
pub mod sampling;
pub mod series;
pub mod compose;
pub mod hensel;
pub mod orbit;
pub mod formulas;
pub mod cli;

pub use error::{Error, Result};
pub use field::{Field, FieldElement};
pub use compose::{compose, Uniformiser};
pub use series::{Ball, Series, Valuation};
