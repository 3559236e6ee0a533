//! Finite-model workbench for distributive nearlattices: identity checks, filters,
//! congruences, semantic consequence, and a Gentzen-style calculus with proof search.

pub mod algebra;
pub mod congruences;
pub mod consequence;
pub mod enumerate;
pub mod error;
pub mod filters;
pub mod fixtures;
pub mod format;
pub mod formulas;
pub mod gentzen;
pub mod modal;
pub mod subset;

pub use algebra::{AlgebraClass, FiniteAlgebra, Verdict};
pub use error::{Error, Result};
pub use formulas::{Signature, Term};
pub use subset::Subset;
