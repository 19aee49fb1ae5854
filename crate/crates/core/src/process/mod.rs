//! Process matrices: the `W_n` constructions, their loop decompositions and
//! consistency validation.

mod construct;
mod loops;
mod validate;

use std::sync::Arc;

use thiserror::Error;

use crate::diagop::{DiagOperator, OpError, Owner, WireKind, WireLayout};
use crate::scalar::{Dyadic, Scalar};

pub(crate) use construct::check_party_count as check_parties;
pub use construct::{build_w, generator_group, naive_even_w, process_layout, wire_widths, GeneratorGroup};
pub use loops::{annihilator, loop_decomposition, loop_operator, LoopChannel, LoopEdge};
pub use validate::{
    behavior_total, conditional_distribution, validate, validate_process, BilinearCheck, ValidationConfig,
    ValidationReport,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProcessError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("layout is not partitioned into one input and one output wire per party: {0}")]
    NotIoPartitioned(String),
    #[error("assignment covers {got} output wires, expected {expected}")]
    IncompleteAssignment { expected: usize, got: usize },
    #[error(transparent)]
    Op(#[from] OpError),
}

/// Positions of each party's input and output wire in a layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartyWires {
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

impl PartyWires {
    /// Requires parties `0..n` with exactly one input and one output wire
    /// each, and no other wires.
    pub fn from_layout(layout: &WireLayout) -> Result<Self, ProcessError> {
        let parties = layout.parties();
        let n = parties.len();
        if parties != (0..n).collect::<Vec<_>>() {
            return Err(ProcessError::NotIoPartitioned(format!("parties {parties:?} are not 0..{n}")));
        }
        if layout.wires().iter().any(|w| w.owner == Owner::Env) {
            return Err(ProcessError::NotIoPartitioned("environment wires present".into()));
        }
        let mut inputs = Vec::with_capacity(n);
        let mut outputs = Vec::with_capacity(n);
        for k in 0..n {
            for (kind, slot) in [(WireKind::Input, &mut inputs), (WireKind::Output, &mut outputs)] {
                let count = layout.wires().iter().filter(|w| w.owner == Owner::Party(k) && w.kind == kind).count();
                if count != 1 {
                    return Err(ProcessError::NotIoPartitioned(format!("party {k} has {count} {kind:?} wires")));
                }
                slot.push(layout.find(Owner::Party(k), kind).expect("counted above"));
            }
        }
        Ok(PartyWires { inputs, outputs })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// `W = P(I_0..I_{n-1} | O_0..O_{n-1})` as a diagonal operator on
/// `(I_0, .., I_{n-1}, O_0, .., O_{n-1})`, written `W = c Σ_h h`.
#[derive(Clone, Debug)]
pub struct ProcessMatrix<S> {
    n: usize,
    operator: DiagOperator<S>,
    normalization: Dyadic,
}

impl<S: Scalar> ProcessMatrix<S> {
    pub(crate) fn new_unchecked(n: usize, operator: DiagOperator<S>, normalization: Dyadic) -> Self {
        ProcessMatrix { n, operator, normalization }
    }

    /// Wraps an operator whose layout is partitioned into per-party input and
    /// output wires. The normalization constant is taken from the identity
    /// coefficient. Consistency is not checked here; see [`validate`].
    pub fn from_operator(operator: DiagOperator<S>, normalization: Dyadic) -> Result<Self, ProcessError> {
        let parties = PartyWires::from_layout(operator.layout())?;
        Ok(ProcessMatrix { n: parties.len(), operator, normalization })
    }

    pub fn parties(&self) -> usize {
        self.n
    }

    pub fn operator(&self) -> &DiagOperator<S> {
        &self.operator
    }

    pub fn layout(&self) -> &Arc<WireLayout> {
        self.operator.layout()
    }

    /// The constant `c` in `W = c Σ_h h`.
    pub fn normalization(&self) -> Dyadic {
        self.normalization
    }

    pub fn wires(&self) -> PartyWires {
        PartyWires::from_layout(self.operator.layout()).expect("process layout is partitioned")
    }

    pub fn into_operator(self) -> DiagOperator<S> {
        self.operator
    }

    pub fn to_dense_form(&self) -> Self {
        ProcessMatrix { n: self.n, operator: self.operator.to_dense_form(), normalization: self.normalization }
    }
}

impl<S: Scalar> PartialEq for ProcessMatrix<S> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.operator == other.operator
    }
}

impl ProcessMatrix<Dyadic> {
    /// Wraps an exact operator, reading `c` off the identity coefficient.
    pub fn from_exact_operator(operator: DiagOperator<Dyadic>) -> Result<Self, ProcessError> {
        let c = operator.coefficient(0);
        Self::from_operator(operator, c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagop::Wire;

    #[test]
    fn party_wires_require_partition() {
        let ok = WireLayout::io(&[1, 2], &[2, 1]).unwrap();
        let wires = PartyWires::from_layout(&ok).unwrap();
        assert_eq!(wires.inputs, vec![0, 1]);
        assert_eq!(wires.outputs, vec![2, 3]);

        let missing = WireLayout::new(vec![Wire::input(0, 1), Wire::output(0, 1), Wire::input(1, 1)]).unwrap();
        assert!(PartyWires::from_layout(&missing).is_err());
        let gap = WireLayout::new(vec![Wire::input(1, 1), Wire::output(1, 1)]).unwrap();
        assert!(PartyWires::from_layout(&gap).is_err());
        let env =
            WireLayout::new(vec![Wire::input(0, 1), Wire::output(0, 1), Wire::new(Owner::Env, WireKind::Input, 1)])
                .unwrap();
        assert!(PartyWires::from_layout(&env).is_err());
    }
}
