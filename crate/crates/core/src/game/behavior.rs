use std::sync::Arc;

use num_traits::Zero;

use super::GameError;
use crate::diagop::{DiagOperator, Wire, WireLayout};
use crate::scalar::{Dyadic, Scalar};

/// Party `i`'s local operation `P(X_i = x, O_i | I_i)`: one diagonal
/// operator per outcome `x ∈ {0, 1}` on the wires `(O_i, I_i)`.
#[derive(Clone, Debug)]
pub struct LocalBehavior<S> {
    party: usize,
    in_width: u32,
    out_width: u32,
    per_outcome: [DiagOperator<S>; 2],
}

/// The layout `(O_i, I_i)` a behavior lives on.
pub fn behavior_layout(party: usize, in_width: u32, out_width: u32) -> Arc<WireLayout> {
    Arc::new(
        WireLayout::new(vec![Wire::output(party, out_width), Wire::input(party, in_width)]).expect("behavior layout"),
    )
}

impl<S: Scalar> LocalBehavior<S> {
    /// Builds the behavior from its kernel `(x, o, i) ↦ P(x, o | i)`.
    pub fn from_kernel(party: usize, in_width: u32, out_width: u32, kernel: impl Fn(u8, u64, u64) -> S) -> Self {
        let layout = behavior_layout(party, in_width, out_width);
        let per_outcome = [0u8, 1].map(|x| {
            let entries: Vec<S> = (0..layout.dim() as u64)
                .map(|index| kernel(x, index >> in_width, index & ((1 << in_width) - 1)))
                .collect();
            DiagOperator::from_dense(layout.clone(), &entries).expect("dense length matches")
        });
        LocalBehavior { party, in_width, out_width, per_outcome }
    }

    /// Deterministic behavior: input `i` yields `table(i) = (x, o)`.
    pub fn deterministic(party: usize, in_width: u32, out_width: u32, table: impl Fn(u64) -> (u8, u64)) -> Self {
        Self::from_kernel(party, in_width, out_width, |x, o, i| if table(i) == (x, o) { S::one() } else { S::zero() })
    }

    /// Wraps explicit per-outcome operators on `(O_party, I_party)`.
    pub fn from_operators(party: usize, per_outcome: [DiagOperator<S>; 2]) -> Result<Self, GameError> {
        let layout = per_outcome[0].layout().clone();
        if per_outcome[1].layout() != &layout {
            return Err(GameError::Layout("outcome operators use different layouts".into()));
        }
        let wires = layout.wires();
        let ok = wires.len() == 2 && wires[0].name == format!("O{party}") && wires[1].name == format!("I{party}");
        if !ok {
            return Err(GameError::Layout(format!("expected wires (O{party}, I{party}), got {layout}")));
        }
        Ok(LocalBehavior { party, in_width: wires[1].width, out_width: wires[0].width, per_outcome })
    }

    pub fn party(&self) -> usize {
        self.party
    }

    pub fn in_width(&self) -> u32 {
        self.in_width
    }

    pub fn out_width(&self) -> u32 {
        self.out_width
    }

    pub fn operator(&self, x: u8) -> &DiagOperator<S> {
        &self.per_outcome[x as usize]
    }

    pub fn kernel(&self, x: u8, o: u64, i: u64) -> S {
        self.per_outcome[x as usize].entry((o << self.in_width) | i)
    }

    /// Dense kernel table `table[(o << in_width) | i] = [P(0, o | i), P(1, o | i)]`.
    pub fn kernel_table(&self) -> Vec<[S; 2]> {
        let d0 = self.per_outcome[0].to_dense();
        let d1 = self.per_outcome[1].to_dense();
        d0.into_iter().zip(d1).map(|(a, b)| [a, b]).collect()
    }

    /// `Σ_x Tr_O Q_x = 1_I` and all entries are non-negative.
    pub fn is_normalized(&self) -> bool {
        let sum =
            self.per_outcome[0].to_monomial_form().add(&self.per_outcome[1].to_monomial_form()).expect("same layout");
        let marginal = sum.partial_trace(&[&format!("O{}", self.party)]).expect("output wire exists");
        self.per_outcome.iter().all(|q| q.is_nonnegative())
            && marginal == DiagOperator::identity(marginal.layout().clone())
    }
}

impl<S: Scalar> PartialEq for LocalBehavior<S> {
    fn eq(&self, other: &Self) -> bool {
        self.party == other.party && self.per_outcome == other.per_outcome
    }
}

impl LocalBehavior<Dyadic> {
    /// Every deterministic map in the support of this behavior together with
    /// its probability. Input values are resolved independently.
    pub fn refinements(&self) -> Vec<(Dyadic, Vec<(u8, u64)>)> {
        let table = self.kernel_table();
        let n_in = 1u64 << self.in_width;
        let mut acc: Vec<(Dyadic, Vec<(u8, u64)>)> = vec![(Dyadic::ONE, Vec::new())];
        for i in 0..n_in {
            let support: Vec<(Dyadic, u8, u64)> = (0..1u64 << self.out_width)
                .flat_map(|o| {
                    let row = &table[((o << self.in_width) | i) as usize];
                    [0u8, 1].into_iter().filter_map(move |x| {
                        let p = row[x as usize];
                        (!p.is_zero()).then_some((p, x, o))
                    })
                })
                .collect();
            acc = acc
                .into_iter()
                .flat_map(|(w, prefix)| {
                    support.iter().map(move |&(p, x, o)| {
                        let mut next = prefix.clone();
                        next.push((x, o));
                        (w * p, next)
                    })
                })
                .collect();
        }
        acc
    }
}
