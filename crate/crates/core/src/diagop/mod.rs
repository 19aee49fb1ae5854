//! Exact algebra of diagonal operators on labeled bit registers.
//!
//! An operator is stored either as coefficients of `σ_z` monomials or as
//! the dense list of its `2^width` diagonal entries. The two forms are
//! related by the parity (Walsh-Hadamard) transform and convert losslessly.

mod group;
pub mod io;
mod layout;
mod operator;
mod walsh;

use thiserror::Error;

pub use group::{abelian_psd_check, character_sum, even_parity_masks, span, unweighted_sum, GroupCheck};
pub use layout::{Owner, Wire, WireKind, WireLayout, MAX_WIDTH};
pub use operator::{mask_string, DiagOperator, Repr, ZMonomial};
pub use walsh::fwht;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OpError {
    #[error("layout error: {0}")]
    Layout(String),
    #[error("unknown wire {0}")]
    UnknownWire(String),
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("operands use different representations; convert one explicitly")]
    RepresentationMismatch,
    #[error("mask {mask:#x} exceeds register width {width}")]
    InvalidMask { mask: u64, width: u32 },
    #[error("dense vector has {got} entries, layout needs {expected}")]
    DenseLength { expected: usize, got: usize },
    #[error("an empty monomial set cannot form a group")]
    EmptyMonomialSet,
    #[error("format error: {0}")]
    Format(String),
}
