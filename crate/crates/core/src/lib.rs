//! Capital-extended Kaya identity.
//!
//! Splits CO2 emissions into operating-capital, consumption and investment
//! terms, calibrates the capital-stock dynamics against history and projects
//! piecewise-constant scenarios forward.

// `!(x > 0.0)` is deliberate throughout: it rejects NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibrate;
pub mod error;
pub mod ingest;
pub mod integrator;
pub mod model;
pub mod scenario;
pub mod series;
pub mod simplex;

pub use error::{Error, ErrorClass, Result};
