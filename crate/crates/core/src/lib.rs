//! Binary addition and multiplication compiled into exact linear programs over
//! partial probabilities, with presolve, an exact rational simplex, the
//! bit-fixing factoring procedure, brute-force oracles and a claim report.

pub mod addition;
pub mod cli;
mod circuit;
pub mod error;
pub mod factor;
pub mod lp;
pub mod model;
pub mod multiplication;
pub mod oracle;
pub mod presolve;
pub mod report;
pub mod system;
pub mod universal;

pub use error::{Error, Result};
pub use num_bigint::BigUint;
