use std::collections::BTreeSet;
use std::sync::Arc;

use super::layout::WireLayout;
use super::operator::{DiagOperator, ZMonomial};
use super::walsh::fwht;
use super::OpError;
use crate::scalar::Scalar;

/// Outcome of [`abelian_psd_check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupCheck {
    /// Contains the identity and is closed under multiplication.
    pub is_group: bool,
    /// The unweighted sum has no negative diagonal entry.
    pub sum_nonneg: bool,
    /// Number of distinct monomials.
    pub order: usize,
}

/// Checks whether a set of `σ_z` monomials forms a group and whether its
/// unweighted sum is positive semi-definite. A group always yields a
/// non-negative sum; this function reports both facts independently so the
/// implication can be tested.
pub fn abelian_psd_check(monomials: &[ZMonomial]) -> Result<GroupCheck, OpError> {
    let first = monomials.first().ok_or(OpError::EmptyMonomialSet)?;
    let layout = first.layout().clone();
    if monomials.iter().any(|m| **m.layout() != *layout) {
        return Err(OpError::LayoutMismatch("monomials do not share a layout".into()));
    }
    let masks: BTreeSet<u64> = monomials.iter().map(|m| m.mask()).collect();
    let closed = masks.iter().all(|a| masks.iter().all(|b| masks.contains(&(a ^ b))));
    let is_group = masks.contains(&0) && closed;
    let sum_nonneg = character_sum(&masks, layout.width()).iter().all(|&x| x >= 0);
    Ok(GroupCheck { is_group, sum_nonneg, order: masks.len() })
}

/// Diagonal of `Σ_mask σ_z^mask` over a register of `width` bits.
pub fn character_sum(masks: &BTreeSet<u64>, width: u32) -> Vec<i64> {
    let mut v = vec![crate::scalar::Dyadic::ZERO; 1usize << width];
    for &m in masks {
        v[m as usize] = crate::scalar::Dyadic::ONE;
    }
    fwht(&mut v);
    v.iter().map(|d| i64::try_from(d.numerator()).expect("character sum fits i64")).collect()
}

/// `Σ_i g_i` as a monomial-form operator.
pub fn unweighted_sum<S: Scalar>(layout: Arc<WireLayout>, masks: &[u64]) -> Result<DiagOperator<S>, OpError> {
    DiagOperator::from_terms(layout, masks.iter().map(|&m| (m, S::one())))
}

/// All elements of the GF(2) span of `generators`, sorted.
pub fn span(generators: &[u64]) -> Vec<u64> {
    let mut elems = BTreeSet::from([0u64]);
    for &g in generators {
        if elems.contains(&g) {
            continue;
        }
        let shifted: Vec<u64> = elems.iter().map(|e| e ^ g).collect();
        elems.extend(shifted);
    }
    elems.into_iter().collect()
}

/// Masks on `n` bits with an even number of set bits.
pub fn even_parity_masks(n: u32) -> Vec<u64> {
    (0..1u64 << n).filter(|m| m.count_ones() % 2 == 0).collect()
}
