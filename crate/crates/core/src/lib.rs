//! Exact 2-color Rado numbers for `x_1 + ... + x_{m-1} = a * x_m`.
//!
//! [`formula`] evaluates the closed-form piecewise value, [`search`] computes
//! the number from scratch by exhaustive coloring search, and [`certify`]
//! checks the explicit solution templates and bad colorings that the closed
//! forms rest on. [`repr`] is the shared representability kernel.

pub mod certify;
pub mod cli;
pub mod domain;
pub mod formula;
pub mod repr;
pub mod search;
pub mod table;

pub use domain::{
    expand_compact, validate_compact, Color, Coloring, CompactAssignment, DomainError,
    EquationInstance, Group, MonoWitness,
};
pub use formula::{compute_c, rado_formula, FormulaVerdict, RadoValue, RegionClass};
pub use search::{exact_rado, ExactOptions, ExactResult, ProofStatus, SearchOptions};
