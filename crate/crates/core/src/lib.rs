//! Multivariate Rényi divergences and the betting games they price.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure numerics:
//!
//! - [`prob`]: finite PMFs, conditional and joint PMFs, Markov kernels and
//!   their Bayes pseudo-inverses.
//! - [`divergences`]: bivariate, multivariate and conditional multivariate
//!   Rényi divergences, order-vector validation, data processing checks, and
//!   the KL and tropical limits along the order path.
//! - [`betting`]: isoelastic utilities, multi-lottery certainty equivalents,
//!   the exact decomposition of the log certainty equivalent into divergence,
//!   penalty and fairness terms, and closed-form optimal bets.
//! - [`gpt`]: general probabilistic theories (classical and quantum
//!   embeddings), state betting, state discrimination and the
//!   measurement-informativeness monotone.
//!
//! Every logarithm is natural (nats).

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod betting;
pub mod divergences;
mod error;
pub mod gpt;
pub mod linalg;
pub(crate) mod math;
pub mod prob;

pub use error::{Error, Result};

/// Absolute tolerance on normalization of probability vectors.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Largest normalization error that constructors silently repair.
pub const RENORMALIZE_TOL: f64 = 1e-9;

/// Slack allowed when comparing log-scale quantities in inequality checks.
pub const INEQUALITY_TOL: f64 = 1e-9;
