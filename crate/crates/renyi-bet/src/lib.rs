//! Input documents, verification oracles, property suites and the
//! command-line front end for `renyi_bet_core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod io;
pub mod oracles;
pub mod real;
pub mod reports;
pub mod suites;

pub use error::{Error, Result};
