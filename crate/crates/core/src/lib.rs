//! Symbolic local monomialization of germs of analytic morphisms.
//!
//! A germ is given in prepared form: `x_i = y^{C_i}` for `i <= r`,
//! `x_{r+i} = y_{s+i}` for `i <= l`, and truncated power series for the
//! remaining `x`. A monomial valuation on `y` picks charts. The engine
//! applies coordinate transformations until every `x` is monomial and
//! logs each step so the result can be replayed independently.

pub mod cyclo;
pub mod doc;
pub mod driver;
pub mod error;
pub mod linalg;
pub mod prepared;
pub mod series;
pub mod toric;
pub mod valgroup;

pub use error::{Error, Result};
pub use linalg::Q;
