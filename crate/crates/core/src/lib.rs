//! Exact arithmetic for bivariate Laurent series truncated at infinity,
//! Puiseux series in t^-1, a degree-reduction engine, and a torus fibre
//! counter built on monomial systems and valuation-ring Newton lifting.

pub mod cli;
pub mod error;
pub mod fixtures;
pub mod json;
pub mod laurent2;
mod par;
pub mod poly4;
pub mod puiseux;
pub mod reduction;
pub mod scalars;
pub mod snf;
pub mod torus;

pub use cli::run_cli;
pub use error::{Error, Result};
