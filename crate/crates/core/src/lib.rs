//! Classical process matrices without predefined causal order.
//!
//! Builds the multi-party `W_n` processes as exact diagonal operators,
//! validates their logical consistency, plays the parity game on them and
//! compares against the best strategy under a predefined causal order.

pub mod causal;
pub mod cli;
pub mod diagop;
pub mod game;
pub mod process;
pub mod scalar;

pub use scalar::{Dyadic, Scalar};

/// Exact diagonal operator.
pub type ExactOperator = diagop::DiagOperator<Dyadic>;
/// Floating-point diagonal operator.
pub type FloatOperator = diagop::DiagOperator<f64>;
/// Exact process matrix.
pub type ExactProcess = process::ProcessMatrix<Dyadic>;
/// Floating-point process matrix.
pub type FloatProcess = process::ProcessMatrix<f64>;
/// Exact local behavior.
pub type ExactBehavior = game::LocalBehavior<Dyadic>;
