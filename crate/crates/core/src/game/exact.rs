use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use super::behavior::LocalBehavior;
use super::strategy::{Strategy, WinningStrategy};
use super::{GameError, GameRound};
use crate::diagop::DiagOperator;
use crate::process::{build_w, ProcessMatrix};
use crate::scalar::{Dyadic, Scalar};

/// Nonzero entries of a process, decoded per party.
#[derive(Clone, Debug)]
pub struct ProcessSupport<S> {
    n: usize,
    in_widths: Vec<u32>,
    out_widths: Vec<u32>,
    /// `(inputs, outputs, W(inputs | outputs))`.
    entries: Vec<(Vec<u64>, Vec<u64>, S)>,
}

impl<S: Scalar> ProcessSupport<S> {
    pub fn new(w: &ProcessMatrix<S>) -> Self {
        let layout = w.layout();
        let wires = w.wires();
        let n = wires.len();
        let dense = w.operator().to_dense();
        let entries = dense
            .into_iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(index, v)| {
                let index = index as u64;
                let inputs = wires.inputs.iter().map(|&p| layout.extract(p, index)).collect();
                let outputs = wires.outputs.iter().map(|&p| layout.extract(p, index)).collect();
                (inputs, outputs, v)
            })
            .collect();
        ProcessSupport {
            n,
            in_widths: wires.inputs.iter().map(|&p| layout.wires()[p].width).collect(),
            out_widths: wires.outputs.iter().map(|&p| layout.wires()[p].width).collect(),
            entries,
        }
    }

    pub fn parties(&self) -> usize {
        self.n
    }

    fn check(&self, behaviors: &[LocalBehavior<S>]) -> Result<(), GameError> {
        if behaviors.len() != self.n {
            return Err(GameError::Layout(format!("{} behaviors for {} parties", behaviors.len(), self.n)));
        }
        for (k, b) in behaviors.iter().enumerate() {
            if b.party() != k || b.in_width() != self.in_widths[k] || b.out_width() != self.out_widths[k] {
                return Err(GameError::Layout(format!(
                    "behavior {k} is for party {} with widths ({}, {}), process has ({}, {})",
                    b.party(),
                    b.in_width(),
                    b.out_width(),
                    self.in_widths[k],
                    self.out_widths[k]
                )));
            }
        }
        Ok(())
    }

    /// Joint distribution of `x⃗`, indexed with `x_0` as the most significant bit.
    pub fn outcome_distribution(&self, behaviors: &[LocalBehavior<S>]) -> Result<Vec<S>, GameError> {
        self.check(behaviors)?;
        let n = self.n;
        let tables: Vec<Vec<[S; 2]>> = behaviors.iter().map(|b| b.kernel_table()).collect();
        let mut dist = vec![S::zero(); 1 << n];
        for (inputs, outputs, w) in &self.entries {
            // Expand the product of per-party outcome weights, skipping zeros.
            let mut partial: Vec<(usize, S)> = vec![(0, w.clone())];
            for k in 0..n {
                let row = &tables[k][((outputs[k] << self.in_widths[k]) | inputs[k]) as usize];
                let mut next = Vec::with_capacity(partial.len() * 2);
                for (idx, weight) in &partial {
                    for (x, r) in row.iter().enumerate().take(2) {
                        if !r.is_zero() {
                            next.push(((idx << 1) | x, weight.clone() * r.clone()));
                        }
                    }
                }
                partial = next;
                if partial.is_empty() {
                    break;
                }
            }
            for (idx, weight) in partial {
                dist[idx] = dist[idx].clone() + weight;
            }
        }
        Ok(dist)
    }

    /// `[P(x_party = 0), P(x_party = 1)]`, marginalizing all other outcomes.
    pub fn outcome_marginal(&self, behaviors: &[LocalBehavior<S>], party: usize) -> Result<[S; 2], GameError> {
        self.check(behaviors)?;
        let tables: Vec<Vec<[S; 2]>> = behaviors.iter().map(|b| b.kernel_table()).collect();
        let mut out = [S::zero(), S::zero()];
        for (inputs, outputs, w) in &self.entries {
            let mut weight = w.clone();
            for k in (0..self.n).filter(|&k| k != party) {
                let row = &tables[k][((outputs[k] << self.in_widths[k]) | inputs[k]) as usize];
                weight = weight * (row[0].clone() + row[1].clone());
                if weight.is_zero() {
                    break;
                }
            }
            if weight.is_zero() {
                continue;
            }
            let row = &tables[party][((outputs[party] << self.in_widths[party]) | inputs[party]) as usize];
            for x in 0..2 {
                out[x] = out[x].clone() + weight.clone() * row[x].clone();
            }
        }
        Ok(out)
    }
}

/// `P(x⃗)` for the given behaviors on `w`.
pub fn outcome_distribution<S: Scalar>(
    w: &ProcessMatrix<S>,
    behaviors: &[LocalBehavior<S>],
) -> Result<Vec<S>, GameError> {
    ProcessSupport::new(w).outcome_distribution(behaviors)
}

/// `Tr((⊗_k Q_{k, x_k}) · W)` evaluated in monomial form, with each local
/// operator's factors moved to the positions of `W`'s wires.
pub fn trace_formula_probability<S: Scalar>(
    w: &ProcessMatrix<S>,
    behaviors: &[LocalBehavior<S>],
    outcomes: &[u8],
) -> Result<S, GameError> {
    let layout = w.layout();
    let mut product = DiagOperator::identity(layout.clone());
    for (b, &x) in behaviors.iter().zip(outcomes) {
        let local = b.operator(x).to_monomial_form().embed(layout)?;
        product = product.multiply(&local)?;
    }
    Ok(product.trace_product(&w.operator().to_monomial_form())?)
}

/// Success probabilities of one strategy on one process.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameResult {
    pub n: usize,
    /// `P(X_m = ⊕_{i≠m} A_i | M = m)` for each `m`.
    pub per_m: Vec<Dyadic>,
    /// Average of `per_m`.
    pub p_succ: BigRational,
}

/// Parity of all inputs except party `m`'s.
pub fn target_parity(inputs: &[u8], m: usize) -> u8 {
    inputs.iter().enumerate().filter(|&(k, _)| k != m).fold(0, |acc, (_, &a)| acc ^ a)
}

/// Input string number `bits` with `A_0` as the most significant bit.
pub fn inputs_from_bits(n: usize, bits: u64) -> Vec<u8> {
    (0..n).map(|k| (bits >> (n - 1 - k) & 1) as u8).collect()
}

/// Exact `P(X_m = ⊕_{i≠m} A_i | m, a⃗)` for one round.
pub fn round_success(
    support: &ProcessSupport<Dyadic>,
    strategy: &dyn Strategy,
    round: &GameRound,
) -> Result<Dyadic, GameError> {
    let behaviors = strategy.behaviors(round.m, &round.inputs);
    let marginal = support.outcome_marginal(&behaviors, round.m)?;
    Ok(marginal[target_parity(&round.inputs, round.m) as usize])
}

/// Exact success probability of `strategy` on `w`, averaging uniformly over
/// `m` and the inputs.
pub fn success_probability(w: &ProcessMatrix<Dyadic>, strategy: &dyn Strategy) -> Result<GameResult, GameError> {
    let n = w.parties();
    if strategy.parties() != n {
        return Err(GameError::InvalidArgument(format!(
            "strategy for {} parties on a {n}-party process",
            strategy.parties()
        )));
    }
    let support = ProcessSupport::new(w);
    let per_m = (0..n)
        .into_par_iter()
        .map(|m| {
            let mut total = Dyadic::ZERO;
            for bits in 0..1u64 << n {
                let round = GameRound::new(n, m, inputs_from_bits(n, bits))?;
                total += round_success(&support, strategy, &round)?;
            }
            Ok(total.mul_pow2(-(n as i32)))
        })
        .collect::<Result<Vec<Dyadic>, GameError>>()?;
    let sum: BigRational = per_m.iter().map(|d| d.to_rational()).sum();
    let p_succ = sum / BigRational::from_integer(BigInt::from(n));
    Ok(GameResult { n, per_m, p_succ })
}

/// The winning strategy on `W_n`, evaluated exactly.
pub fn success_probability_exact(n: usize) -> Result<GameResult, GameError> {
    let w = build_w::<Dyadic>(n)?;
    let strategy = WinningStrategy::new(n)?;
    success_probability(&w, &strategy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn constant_outputs_give_product_distribution() {
        let w = build_w::<Dyadic>(3).unwrap();
        // Nobody reads the input: x_k fixed, o_k fixed.
        let behaviors: Vec<LocalBehavior<Dyadic>> =
            (0..3).map(|k| LocalBehavior::deterministic(k, 1, 1, move |_| ((k % 2) as u8, 0))).collect();
        let dist = outcome_distribution(&w, &behaviors).unwrap();
        let mut expected = vec![Dyadic::ZERO; 8];
        expected[0b010] = Dyadic::ONE;
        assert_eq!(dist, expected);
    }

    #[test]
    fn trace_formula_agrees_with_support_route() {
        for n in [3, 4] {
            let w = build_w::<Dyadic>(n).unwrap();
            let s = WinningStrategy::new(n).unwrap();
            for m in 0..n {
                let inputs = inputs_from_bits(n, (5 * m as u64 + 3) % (1 << n));
                let behaviors = s.behaviors(m, &inputs);
                let dist = outcome_distribution(&w, &behaviors).unwrap();
                for (idx, p) in dist.iter().enumerate() {
                    let x: Vec<u8> = inputs_from_bits(n, idx as u64);
                    assert_eq!(trace_formula_probability(&w, &behaviors, &x).unwrap(), *p);
                }
            }
        }
    }

    #[test]
    fn three_party_result() {
        let r = success_probability_exact(3).unwrap();
        assert_eq!(r.per_m, vec![Dyadic::ONE; 3]);
        assert!(r.p_succ.is_one());
    }

    #[test]
    fn mismatched_behaviors_are_rejected() {
        let w = build_w::<Dyadic>(4).unwrap();
        let behaviors: Vec<LocalBehavior<Dyadic>> =
            (0..4).map(|k| LocalBehavior::deterministic(k, 1, 1, |_| (0, 0))).collect();
        assert!(matches!(outcome_distribution(&w, &behaviors), Err(GameError::Layout(_))));
    }
}
