use std::sync::Arc;

use super::{ProcessError, ProcessMatrix};
use crate::diagop::{even_parity_masks, DiagOperator, WireLayout};
use crate::scalar::{Dyadic, Scalar};

/// The Abelian group of `σ_z` monomials a `W_n` is summed over.
///
/// Masks range over abstract positions; position `0` is the most significant
/// bit, so `format!("{:0w$b}")` reads positions left to right. Odd `n` uses
/// `n` positions. Even `n` uses `n + 1`: the `n - 1` positions of the odd
/// group for `n - 1` parties followed by the two bits of the doubled channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorGroup {
    pub n: usize,
    pub positions: usize,
    pub elements: Vec<u64>,
}

impl GeneratorGroup {
    /// Tensor-string form of element `k`, e.g. `"1zz"`.
    pub fn element_string(&self, k: usize) -> String {
        let m = self.elements[k];
        (0..self.positions).map(|p| if m >> (self.positions - 1 - p) & 1 == 1 { 'z' } else { '1' }).collect()
    }
}

pub(crate) fn check_party_count(n: usize) -> Result<(), ProcessError> {
    match n {
        0 | 1 => Err(ProcessError::InvalidArgument(format!("n = {n}: at least two parties are required"))),
        2 => Err(ProcessError::Unsupported(
            "n = 2: the two-bit channel cannot be used to signal from its source to its \
             destination, and each party must signal to the other"
                .into(),
        )),
        _ => Ok(()),
    }
}

/// Group elements for `W_n`.
///
/// Odd `n`: every even-parity mask on `n` positions, in increasing order.
/// Even `n`: `{g ⊗ g'} ∪ {ḡ ⊗ g'}` over the odd group `g` for `n - 1`,
/// where `g'` repeats the first two factors of `g` and `ḡ = g · σ_z^{⊗(n-1)}`.
pub fn generator_group(n: usize) -> Result<GeneratorGroup, ProcessError> {
    check_party_count(n)?;
    if n % 2 == 1 {
        return Ok(GeneratorGroup { n, positions: n, elements: even_parity_masks(n as u32) });
    }
    let base = even_parity_masks(n as u32 - 1);
    let all_ones = (1u64 << (n - 1)) - 1;
    let head = |g: u64| (g >> (n - 3)) & 0b11;
    let plain = base.iter().map(|&g| (g << 2) | head(g));
    let barred = base.iter().map(|&g| ((g ^ all_ones) << 2) | head(g));
    Ok(GeneratorGroup { n, positions: n + 1, elements: plain.chain(barred).collect() })
}

/// Wire widths `(inputs, outputs)` of `W_n`.
pub fn wire_widths(n: usize) -> (Vec<u32>, Vec<u32>) {
    let mut inputs = vec![1; n];
    let mut outputs = vec![1; n];
    if n.is_multiple_of(2) {
        inputs[n - 1] = 2;
        outputs[n - 2] = 2;
    }
    (inputs, outputs)
}

/// Global bits touched by each abstract position: `(input bit, output bit)`.
///
/// Position `p < n` (odd) or `p < n - 1` (even) sits on `I_p` and on
/// `O_{p-1 mod n}`. For even `n` the last two positions are the first and
/// second bits of `I_{n-1}` and `O_{n-2}`.
pub(crate) fn placement(n: usize, layout: &WireLayout) -> Vec<(u32, u32)> {
    let input = |k: usize| k;
    let output = |k: usize| n + k;
    let single = if n % 2 == 1 { n } else { n - 1 };
    let mut bits: Vec<(u32, u32)> =
        (0..single).map(|p| (layout.bit(input(p), 0), layout.bit(output((p + n - 1) % n), 0))).collect();
    if n.is_multiple_of(2) {
        for b in 0..2 {
            bits.push((layout.bit(input(n - 1), b), layout.bit(output(n - 2), b)));
        }
    }
    bits
}

pub(crate) fn embed_positions(mask: u64, positions: usize, bits: &[(u32, u32)]) -> u64 {
    bits.iter().enumerate().fold(0u64, |acc, (p, &(i, o))| {
        if mask >> (positions - 1 - p) & 1 == 1 {
            acc | (1 << i) | (1 << o)
        } else {
            acc
        }
    })
}

pub fn process_layout(n: usize) -> Arc<WireLayout> {
    let (inputs, outputs) = wire_widths(n);
    Arc::new(WireLayout::io(&inputs, &outputs).expect("W_n layout is valid"))
}

/// `W_n = 2^-positions · Σ_h h` with each position's `σ_z` placed on its
/// input bit and its output bit.
pub fn build_w<S: Scalar>(n: usize) -> Result<ProcessMatrix<S>, ProcessError> {
    let group = generator_group(n)?;
    let layout = process_layout(n);
    let bits = placement(n, &layout);
    let c = Dyadic::recip_pow2(group.positions as u32);
    let terms = group.elements.iter().map(|&h| (embed_positions(h, group.positions, &bits), S::from_dyadic(c)));
    let operator = DiagOperator::from_terms(layout, terms)?;
    Ok(ProcessMatrix::new_unchecked(n, operator, c))
}

/// The odd-`n` recipe applied verbatim to an even `n`: all even-parity
/// masks on `n` single-bit positions. Contains `σ_z^{⊗2n}` and is not a
/// valid process; kept for negative tests.
pub fn naive_even_w<S: Scalar>(n: usize) -> Result<DiagOperator<S>, ProcessError> {
    if n % 2 == 1 || n < 2 {
        return Err(ProcessError::InvalidArgument(format!("naive even construction needs an even n >= 2, got {n}")));
    }
    let layout = Arc::new(WireLayout::io(&vec![1; n], &vec![1; n])?);
    let bits: Vec<(u32, u32)> = (0..n).map(|p| (layout.bit(p, 0), layout.bit(n + (p + n - 1) % n, 0))).collect();
    let c = S::from_dyadic(Dyadic::recip_pow2(n as u32));
    let terms = even_parity_masks(n as u32).into_iter().map(|m| (embed_positions(m, n, &bits), c.clone()));
    Ok(DiagOperator::from_terms(layout, terms)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagop::{abelian_psd_check, ZMonomial};

    #[test]
    fn w3_group() {
        let g = generator_group(3).unwrap();
        let strings: Vec<String> = (0..4).map(|k| g.element_string(k)).collect();
        assert_eq!(strings, ["111", "1zz", "z1z", "zz1"]);
        // g_1 · g_2 = g_3
        assert_eq!(g.elements[1] ^ g.elements[2], g.elements[3]);
    }

    #[test]
    fn w4_group_matches_listing() {
        let g = generator_group(4).unwrap();
        let strings: Vec<String> = (0..8).map(|k| g.element_string(k)).collect();
        assert_eq!(strings, ["11111", "1zz1z", "z1zz1", "zz1zz", "zzz11", "z111z", "1z1z1", "11zzz"]);
    }

    #[test]
    fn groups_are_closed() {
        for n in 3..=8 {
            let g = generator_group(n).unwrap();
            assert_eq!(g.elements.len(), 1 << (n - 1));
            let layout = Arc::new(WireLayout::io(&vec![1; g.positions], &[]).unwrap());
            let monos: Vec<ZMonomial> =
                g.elements.iter().map(|&m| ZMonomial::new(layout.clone(), m).unwrap()).collect();
            let check = abelian_psd_check(&monos).unwrap();
            assert!(check.is_group && check.sum_nonneg, "n = {n}");
        }
    }

    #[test]
    fn party_count_errors() {
        assert!(matches!(generator_group(2), Err(ProcessError::Unsupported(_))));
        assert!(matches!(build_w::<Dyadic>(2), Err(ProcessError::Unsupported(_))));
        assert!(matches!(build_w::<Dyadic>(1), Err(ProcessError::InvalidArgument(_))));
        assert!(naive_even_w::<Dyadic>(5).is_err());
    }

    #[test]
    fn trace_equals_output_dimension() {
        for n in 3..=8 {
            let w = build_w::<Dyadic>(n).unwrap();
            let out_bits = if n % 2 == 0 { n + 1 } else { n };
            assert_eq!(w.operator().trace(), Dyadic::from_int(1 << out_bits));
        }
    }

    #[test]
    fn naive_contains_full_z_string() {
        let w = naive_even_w::<Dyadic>(4).unwrap();
        assert!(w.terms().unwrap().contains_key(&0xff));
    }
}
