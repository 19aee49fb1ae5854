//! The n-party parity game: party `S_m`, selected by a shared uniform `M`,
//! must output the parity of everybody else's input bit.

mod behavior;
mod exact;
mod sample;
mod sim;
mod strategy;

use thiserror::Error;

use crate::diagop::OpError;
use crate::process::ProcessError;

pub use behavior::{behavior_layout, LocalBehavior};
pub use exact::{
    inputs_from_bits, outcome_distribution, round_success, success_probability, success_probability_exact,
    target_parity, trace_formula_probability, GameResult, ProcessSupport,
};
pub use sample::{sample_game, sample_strategy, MCount, SampleReport, RNG_NAME};
pub use sim::{fixed_points, outcomes, FunctionTable};
pub use strategy::{winning_behavior, Strategy, WideCode, WinningStrategy};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("incompatible layouts: {0}")]
    Layout(String),
    #[error("inconsistent process: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Op(#[from] OpError),
}

/// One round: the referee's `m` and the parties' inputs `a⃗`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameRound {
    pub n: usize,
    pub m: usize,
    pub inputs: Vec<u8>,
}

impl GameRound {
    pub fn new(n: usize, m: usize, inputs: Vec<u8>) -> Result<Self, GameError> {
        if m >= n {
            return Err(GameError::InvalidArgument(format!("m = {m} must be below n = {n}")));
        }
        if inputs.len() != n {
            return Err(GameError::InvalidArgument(format!("{} inputs for {n} parties", inputs.len())));
        }
        if inputs.iter().any(|&a| a > 1) {
            return Err(GameError::InvalidArgument("inputs must be bits".into()));
        }
        Ok(GameRound { n, m, inputs })
    }

    /// `⊕_{i≠m} a_i`, the bit `S_m` has to produce.
    pub fn target(&self) -> u8 {
        target_parity(&self.inputs, self.m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_validation() {
        assert!(GameRound::new(3, 3, vec![0, 0, 0]).is_err());
        assert!(GameRound::new(3, 0, vec![0, 0]).is_err());
        assert!(GameRound::new(3, 0, vec![0, 2, 0]).is_err());
        assert_eq!(GameRound::new(3, 1, vec![1, 0, 1]).unwrap().target(), 0);
        assert_eq!(GameRound::new(4, 1, vec![1, 1, 1, 0]).unwrap().target(), 0);
        assert_eq!(GameRound::new(4, 3, vec![1, 1, 1, 0]).unwrap().target(), 1);
    }
}
