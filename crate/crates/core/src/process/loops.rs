//! Decomposition of `W_n` into deterministic circular channels.
//!
//! `W_n(i | o)` is proportional to `Σ_h (-1)^{h·v}` where `v` collects, per
//! position, the XOR of the input bit and output bit the position sits on.
//! That character sum is nonzero exactly when `v` lies in the annihilator of
//! the generator group, so every annihilator element is one loop: a fixed
//! pattern of bit flips on the circular channel `S_k → S_{k+1}`.

use std::sync::Arc;

use super::construct::{generator_group, placement, process_layout, wire_widths};
use super::ProcessError;
use crate::diagop::{DiagOperator, WireLayout};
use crate::scalar::{Dyadic, Scalar};

/// The channel carrying `O_from` to `I_to`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopEdge {
    pub from: usize,
    pub to: usize,
    pub width: u32,
    /// XORed onto the carried value; the first wire bit is the most significant.
    pub flips: u64,
}

/// One deterministic circular channel with its mixture weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopChannel {
    /// `edges[k]` carries `O_k` to `I_{k+1 mod n}`.
    pub edges: Vec<LoopEdge>,
    pub weight: Dyadic,
}

impl LoopChannel {
    pub fn parties(&self) -> usize {
        self.edges.len()
    }

    /// Inputs delivered for the given outputs.
    pub fn route(&self, outputs: &[u64]) -> Vec<u64> {
        let n = self.edges.len();
        let mut inputs = vec![0; n];
        for edge in &self.edges {
            inputs[edge.to] = outputs[edge.from] ^ edge.flips;
        }
        debug_assert_eq!(inputs.len(), n);
        inputs
    }

    /// Total number of flipped bits around the cycle.
    pub fn flip_count(&self) -> u32 {
        self.edges.iter().map(|e| e.flips.count_ones()).sum()
    }
}

/// All `v` over `bits` positions with even overlap with every generator.
///
/// Gaussian elimination over GF(2); masks use the same most-significant-first
/// position convention as [`generator_group`].
pub fn annihilator(generators: &[u64], bits: usize) -> Vec<u64> {
    // Row-reduce, tracking pivot columns (as bit indices).
    let mut rows: Vec<u64> = Vec::new();
    let mut pivots: Vec<u32> = Vec::new();
    for &g in generators {
        let mut r = g;
        for (row, &p) in rows.iter().zip(&pivots) {
            if r >> p & 1 == 1 {
                r ^= row;
            }
        }
        if r == 0 {
            continue;
        }
        let p = 63 - r.leading_zeros();
        for row in rows.iter_mut() {
            if *row >> p & 1 == 1 {
                *row ^= r;
            }
        }
        rows.push(r);
        pivots.push(p);
    }
    // Each free column gives one null-space basis vector.
    let mut basis = Vec::new();
    for free in 0..bits as u32 {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = 1u64 << free;
        for (row, &p) in rows.iter().zip(&pivots) {
            if row >> free & 1 == 1 {
                v |= 1 << p;
            }
        }
        basis.push(v);
    }
    crate::diagop::span(&basis)
}

/// The loops whose uniform mixture is `W_n`: two for odd `n`, four for even
/// `n`. Flip patterns are derived from the annihilator of the generator
/// group; the identity loop comes first.
pub fn loop_decomposition(n: usize) -> Result<Vec<LoopChannel>, ProcessError> {
    let group = generator_group(n)?;
    let layout = process_layout(n);
    let bits = placement(n, &layout);
    let duals = annihilator(&group.elements, group.positions);
    let weight = Dyadic::recip_pow2(duals.len().trailing_zeros());
    let (_, out_widths) = wire_widths(n);

    let loops = duals
        .into_iter()
        .map(|v| {
            let mut edges: Vec<LoopEdge> =
                (0..n).map(|k| LoopEdge { from: k, to: (k + 1) % n, width: out_widths[k], flips: 0 }).collect();
            for (p, &(in_bit, out_bit)) in bits.iter().enumerate() {
                let (in_wire, in_off) = locate(&layout, in_bit);
                let (out_wire, out_off) = locate(&layout, out_bit);
                let from = out_wire - n;
                assert_eq!(in_wire, (from + 1) % n, "position {p} is not on a circular edge");
                assert_eq!(in_off, out_off, "position {p} changes bit offset");
                if v >> (group.positions - 1 - p) & 1 == 1 {
                    edges[from].flips |= 1 << in_off;
                }
            }
            LoopChannel { edges, weight }
        })
        .collect();
    Ok(loops)
}

/// `(wire position, offset within the wire value)` of a global bit.
fn locate(layout: &WireLayout, bit: u32) -> (usize, u32) {
    (0..layout.wires().len())
        .find(|&p| layout.wire_mask(p) >> bit & 1 == 1)
        .map(|p| (p, bit - layout.shift(p)))
        .expect("bit inside layout")
}

/// Dense operator of the loop mixture: `Σ_l w_l [i = route_l(o)]` on the
/// `W_n` layout.
pub fn loop_operator<S: Scalar>(n: usize, loops: &[LoopChannel]) -> Result<DiagOperator<S>, ProcessError> {
    let layout: Arc<WireLayout> = process_layout(n);
    let (_, out_widths) = wire_widths(n);
    let out_bits: u32 = out_widths.iter().sum();
    let mut entries = vec![S::zero(); layout.dim()];
    let mut outputs = vec![0u64; n];
    for packed in 0..1u64 << out_bits {
        let mut rest = packed;
        for k in (0..n).rev() {
            outputs[k] = rest & ((1 << out_widths[k]) - 1);
            rest >>= out_widths[k];
        }
        for l in loops {
            let inputs = l.route(&outputs);
            let values: Vec<u64> = inputs.iter().chain(outputs.iter()).copied().collect();
            let index = layout.compose(&values) as usize;
            let w = S::from_dyadic(l.weight);
            entries[index] = if entries[index].is_zero() { w } else { entries[index].clone() + w };
        }
    }
    Ok(DiagOperator::dense(layout, entries)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_annihilator(gens: &[u64], bits: usize) -> Vec<u64> {
        (0..1u64 << bits).filter(|v| gens.iter().all(|g| (g & v).count_ones() % 2 == 0)).collect()
    }

    #[test]
    fn annihilator_matches_enumeration() {
        let cases: [(&[u64], usize); 5] = [
            (&[0b011, 0b101], 3),
            (&[0b1100, 0b0110, 0b1111], 4),
            (&[], 3),
            (&[0b11111], 5),
            (&[0b10110, 0b01011, 0b11101], 5),
        ];
        for (gens, bits) in cases {
            assert_eq!(annihilator(gens, bits), brute_annihilator(gens, bits), "{gens:?}");
        }
        for n in 3..=8 {
            let g = generator_group(n).unwrap();
            assert_eq!(annihilator(&g.elements, g.positions), brute_annihilator(&g.elements, g.positions));
        }
    }

    #[test]
    fn w3_loops() {
        let loops = loop_decomposition(3).unwrap();
        assert_eq!(loops.len(), 2);
        assert_eq!(loops[0].flip_count(), 0);
        assert!(loops[1].edges.iter().all(|e| e.flips == 1));
        assert!(loops.iter().all(|l| l.weight == Dyadic::HALF));
        // i_0 = o_2, i_1 = o_0, i_2 = o_1
        assert_eq!(loops[0].route(&[0, 1, 1]), vec![1, 0, 1]);
    }

    #[test]
    fn w4_loops_match_case_table() {
        let loops = loop_decomposition(4).unwrap();
        assert_eq!(loops.len(), 4);
        assert_eq!(loops[1].edges[2].width, 2);
        // Flips per edge (3→0, 0→1, 1→2, 2→3), wide edge as (first, second).
        let mut patterns: Vec<[u64; 4]> =
            loops.iter().map(|l| [l.edges[3].flips, l.edges[0].flips, l.edges[1].flips, l.edges[2].flips]).collect();
        patterns.sort();
        let mut expected = vec![[0, 0, 0, 0b00], [1, 0, 1, 0b01], [0, 1, 1, 0b10], [1, 1, 0, 0b11]];
        expected.sort();
        assert_eq!(patterns, expected);
        assert!(loops.iter().all(|l| l.weight == Dyadic::new(1, 2)));
    }
}
