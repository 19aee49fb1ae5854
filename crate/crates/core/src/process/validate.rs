use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{PartyWires, ProcessError, ProcessMatrix};
use crate::diagop::DiagOperator;
use crate::scalar::Scalar;

/// Limits for the bilinear normalization check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidationConfig {
    /// Enumerate every behavior tuple when the party count is at most this.
    pub exhaustive_max_parties: usize,
    /// Never enumerate more tuples than this; sample instead.
    pub exhaustive_max_tuples: u64,
    /// Tuples drawn when not exhaustive.
    pub samples: usize,
    pub seed: u64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig { exhaustive_max_parties: 5, exhaustive_max_tuples: 1 << 22, samples: 1000, seed: 0x5eed }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BilinearCheck {
    pub checked: u64,
    pub failed: u64,
    #[serde(skip)]
    pub exhaustive: bool,
    /// Output tables of the first failing tuple, one per party.
    #[serde(skip)]
    pub first_failure: Option<Vec<Vec<u64>>>,
}

impl BilinearCheck {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

/// Every consistency check, evaluated independently.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub nonneg: bool,
    pub channel_norm: bool,
    pub bilinear_norm: BilinearCheck,
    pub term_structure: bool,
    /// `signaling[j][i]`: some monomial links `O_j` to `I_i`.
    pub signaling: Vec<Vec<bool>>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failing_checks().is_empty()
    }

    pub fn failing_checks(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.nonneg {
            out.push("nonneg");
        }
        if !self.channel_norm {
            out.push("channel_norm");
        }
        if !self.bilinear_norm.passed() {
            out.push("bilinear_norm");
        }
        if !self.term_structure {
            out.push("term_structure");
        }
        out
    }
}

pub fn validate_process<S: Scalar>(
    op: &DiagOperator<S>,
    config: &ValidationConfig,
) -> Result<ValidationReport, ProcessError> {
    let parties = PartyWires::from_layout(op.layout())?;
    let n = parties.len();
    let layout = op.layout();

    let input_names: Vec<&str> = parties.inputs.iter().map(|&p| layout.wires()[p].name.as_str()).collect();
    let marginal = op.partial_trace(&input_names)?;
    let channel_norm = marginal == DiagOperator::identity(marginal.layout().clone());

    let monomial = op.to_monomial_form();
    let masks: Vec<u64> = monomial.terms().expect("monomial form").keys().copied().collect();
    let in_masks: Vec<u64> = parties.inputs.iter().map(|&p| layout.wire_mask(p)).collect();
    let out_masks: Vec<u64> = parties.outputs.iter().map(|&p| layout.wire_mask(p)).collect();

    let term_structure =
        masks.iter().filter(|&&m| m != 0).all(|&m| (0..n).any(|k| m & in_masks[k] != 0 && m & out_masks[k] == 0));
    let signaling = (0..n)
        .map(|j| (0..n).map(|i| masks.iter().any(|&m| m & out_masks[j] != 0 && m & in_masks[i] != 0)).collect())
        .collect();

    let dense = op.to_dense();
    let nonneg = dense.iter().all(|x| !x.is_negative_value());
    let bilinear_norm = bilinear_check(&dense, op, &parties, config);

    Ok(ValidationReport { nonneg, channel_norm, bilinear_norm, term_structure, signaling })
}

/// Validates a [`ProcessMatrix`] with the default configuration.
pub fn validate<S: Scalar>(p: &ProcessMatrix<S>) -> Result<ValidationReport, ProcessError> {
    validate_process(p.operator(), &ValidationConfig::default())
}

/// `Σ_i W(i | f(i))` for one tuple of deterministic local maps `f_k: I_k → O_k`.
pub fn behavior_total<S: Scalar>(dense: &[S], op: &DiagOperator<S>, parties: &PartyWires, tables: &[Vec<u64>]) -> S {
    let layout = op.layout();
    let n = parties.len();
    let in_widths: Vec<u32> = parties.inputs.iter().map(|&p| layout.wires()[p].width).collect();
    let total_in: u32 = in_widths.iter().sum();
    let mut sum = S::zero();
    for packed in 0..1u64 << total_in {
        let mut rest = packed;
        let mut index = 0u64;
        for k in (0..n).rev() {
            let value = rest & ((1 << in_widths[k]) - 1);
            rest >>= in_widths[k];
            index |= value << layout.shift(parties.inputs[k]);
            index |= tables[k][value as usize] << layout.shift(parties.outputs[k]);
        }
        let entry = &dense[index as usize];
        if !entry.is_zero() {
            sum = sum + entry.clone();
        }
    }
    sum
}

fn bilinear_check<S: Scalar>(
    dense: &[S],
    op: &DiagOperator<S>,
    parties: &PartyWires,
    config: &ValidationConfig,
) -> BilinearCheck {
    let layout = op.layout();
    let n = parties.len();
    // Party k has |O_k|^|I_k| deterministic maps; each map is a table of |I_k| outputs.
    let shapes: Vec<(usize, u64)> = (0..n)
        .map(|k| {
            let i = 1usize << layout.wires()[parties.inputs[k]].width;
            let o = 1u64 << layout.wires()[parties.outputs[k]].width;
            (i, o)
        })
        .collect();
    let log2_tuples: u32 = (0..n).map(|k| shapes[k].0 as u32 * layout.wires()[parties.outputs[k]].width).sum();
    let exhaustive =
        n <= config.exhaustive_max_parties && log2_tuples < 64 && (1u64 << log2_tuples) <= config.exhaustive_max_tuples;

    let decode = |mut code: u64| -> Vec<Vec<u64>> {
        shapes
            .iter()
            .map(|&(i, o)| {
                (0..i)
                    .map(|_| {
                        let v = code % o;
                        code /= o;
                        v
                    })
                    .collect()
            })
            .collect()
    };
    let tuples: Vec<Vec<Vec<u64>>> = if exhaustive {
        Vec::new()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        (0..config.samples)
            .map(|_| shapes.iter().map(|&(i, o)| (0..i).map(|_| rng.random_range(0..o)).collect()).collect())
            .collect()
    };

    let one = S::one();
    let check = |tables: &Vec<Vec<u64>>| behavior_total(dense, op, parties, tables) == one;

    let (checked, failed, first_failure) = if exhaustive {
        let total = 1u64 << log2_tuples;
        let failures: Vec<u64> = (0..total).into_par_iter().filter(|&code| !check(&decode(code))).collect();
        (total, failures.len() as u64, failures.first().map(|&c| decode(c)))
    } else {
        let failures: Vec<usize> = tuples.par_iter().enumerate().filter(|(_, t)| !check(t)).map(|(k, _)| k).collect();
        (tuples.len() as u64, failures.len() as u64, failures.first().map(|&k| tuples[k].clone()))
    };
    BilinearCheck { checked, failed, exhaustive, first_failure }
}

/// Distribution over input assignments `(i_0, ..., i_{n-1})` that the
/// process returns for the fixed outputs `outputs`; zero-probability
/// assignments are omitted.
pub fn conditional_distribution<S: Scalar>(
    p: &ProcessMatrix<S>,
    outputs: &[u64],
) -> Result<Vec<(Vec<u64>, S)>, ProcessError> {
    let op = p.operator();
    let parties = PartyWires::from_layout(op.layout())?;
    let n = parties.len();
    if outputs.len() != n {
        return Err(ProcessError::IncompleteAssignment { expected: n, got: outputs.len() });
    }
    let layout = op.layout();
    let mut fixed = 0u64;
    for (&o, &p) in outputs.iter().zip(&parties.outputs) {
        let wire = &layout.wires()[p];
        if o >> wire.width != 0 {
            return Err(ProcessError::InvalidArgument(format!("value {} does not fit wire {}", o, wire.name)));
        }
        fixed |= o << layout.shift(p);
    }
    let in_widths: Vec<u32> = parties.inputs.iter().map(|&p| layout.wires()[p].width).collect();
    let total_in: u32 = in_widths.iter().sum();
    let mut out = Vec::new();
    for packed in 0..1u64 << total_in {
        let mut rest = packed;
        let mut inputs = vec![0u64; n];
        let mut index = fixed;
        for k in (0..n).rev() {
            inputs[k] = rest & ((1 << in_widths[k]) - 1);
            rest >>= in_widths[k];
            index |= inputs[k] << layout.shift(parties.inputs[k]);
        }
        let prob = op.entry(index);
        if !prob.is_zero() {
            out.push((inputs, prob));
        }
    }
    Ok(out)
}
