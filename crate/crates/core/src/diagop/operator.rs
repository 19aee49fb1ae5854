use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::layout::{low_bits, WireLayout};
use super::walsh::fwht;
use super::OpError;
use crate::scalar::Scalar;

/// A `±1`-valued diagonal operator: `σ_z` on the bits set in `mask`,
/// identity elsewhere.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ZMonomial {
    layout: Arc<WireLayout>,
    mask: u64,
}

impl ZMonomial {
    pub fn new(layout: Arc<WireLayout>, mask: u64) -> Result<Self, OpError> {
        check_mask(&layout, mask)?;
        Ok(ZMonomial { layout, mask })
    }

    pub fn identity(layout: Arc<WireLayout>) -> Self {
        ZMonomial { layout, mask: 0 }
    }

    /// Parses a tensor string such as `"1 z z 1"`, one symbol per bit from the
    /// most significant bit down. `1`/`I` is the identity, `z`/`Z` is `σ_z`;
    /// whitespace and `⊗` separators are ignored.
    pub fn parse(layout: Arc<WireLayout>, text: &str) -> Result<Self, OpError> {
        let symbols: Vec<char> = text.chars().filter(|c| !c.is_whitespace() && *c != '⊗' && *c != '*').collect();
        if symbols.len() != layout.width() as usize {
            return Err(OpError::Format(format!(
                "monomial string has {} symbols, layout has {} bits",
                symbols.len(),
                layout.width()
            )));
        }
        let mut mask = 0u64;
        for c in symbols {
            mask <<= 1;
            match c {
                '1' | 'I' | 'i' => {}
                'z' | 'Z' => mask |= 1,
                other => return Err(OpError::Format(format!("unexpected symbol {other:?}"))),
            }
        }
        Ok(ZMonomial { layout, mask })
    }

    pub fn layout(&self) -> &Arc<WireLayout> {
        &self.layout
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn is_identity(&self) -> bool {
        self.mask == 0
    }

    /// Diagonal entry at basis index `index`: `(-1)^popcount(index & mask)`.
    pub fn entry(&self, index: u64) -> i8 {
        parity_sign(index & self.mask)
    }

    pub fn trace<S: Scalar>(&self) -> S {
        if self.mask == 0 {
            S::one().mul_pow2(self.layout.width() as i32)
        } else {
            S::zero()
        }
    }

    pub fn multiply(&self, other: &ZMonomial) -> Result<ZMonomial, OpError> {
        same_layout(&self.layout, &other.layout)?;
        Ok(ZMonomial { layout: self.layout.clone(), mask: self.mask ^ other.mask })
    }

    pub fn to_operator<S: Scalar>(&self) -> DiagOperator<S> {
        let mut terms = BTreeMap::new();
        terms.insert(self.mask, S::one());
        DiagOperator { layout: self.layout.clone(), repr: Repr::Monomial(terms) }
    }
}

impl fmt::Display for ZMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&mask_string(&self.layout, self.mask))
    }
}

/// Renders `mask` wire by wire, e.g. `1z|zz|1`.
pub fn mask_string(layout: &WireLayout, mask: u64) -> String {
    let mut out = String::new();
    for (pos, wire) in layout.wires().iter().enumerate() {
        if pos > 0 {
            out.push('|');
        }
        for bit in 0..wire.width {
            let set = mask >> layout.bit(pos, bit) & 1 == 1;
            out.push(if set { 'z' } else { '1' });
        }
    }
    out
}

pub(crate) fn parity_sign(bits: u64) -> i8 {
    if bits.count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn check_mask(layout: &WireLayout, mask: u64) -> Result<(), OpError> {
    if mask & !low_bits(layout.width()) != 0 {
        return Err(OpError::InvalidMask { mask, width: layout.width() });
    }
    Ok(())
}

fn same_layout(a: &WireLayout, b: &WireLayout) -> Result<(), OpError> {
    if a != b {
        return Err(OpError::LayoutMismatch(format!("{a} vs {b}")));
    }
    Ok(())
}

/// Internal representation of a diagonal operator.
#[derive(Clone, Debug)]
pub enum Repr<S> {
    /// Coefficients of `σ_z` monomials keyed by mask; zero coefficients are never stored.
    Monomial(BTreeMap<u64, S>),
    /// All `2^width` diagonal entries indexed by global basis index.
    Dense(Vec<S>),
}

/// A diagonal operator on a labeled bit register.
///
/// Binary operations require both operands in the same representation;
/// conversions happen only through [`DiagOperator::to_monomial_form`],
/// [`DiagOperator::to_dense_form`] or [`DiagOperator::with_preferred_form`].
#[derive(Clone, Debug)]
pub struct DiagOperator<S> {
    layout: Arc<WireLayout>,
    repr: Repr<S>,
}

impl<S: Scalar> DiagOperator<S> {
    pub fn identity(layout: Arc<WireLayout>) -> Self {
        ZMonomial::identity(layout).to_operator()
    }

    pub fn zero(layout: Arc<WireLayout>) -> Self {
        DiagOperator { layout, repr: Repr::Monomial(BTreeMap::new()) }
    }

    /// Monomial-form operator from `(mask, coefficient)` pairs; repeated masks add up.
    pub fn from_terms<I>(layout: Arc<WireLayout>, terms: I) -> Result<Self, OpError>
    where
        I: IntoIterator<Item = (u64, S)>,
    {
        let mut map = BTreeMap::new();
        for (mask, coeff) in terms {
            check_mask(&layout, mask)?;
            accumulate(&mut map, mask, coeff);
        }
        Ok(DiagOperator { layout, repr: Repr::Monomial(map) })
    }

    /// Dense-form operator holding `entries` verbatim.
    pub fn dense(layout: Arc<WireLayout>, entries: Vec<S>) -> Result<Self, OpError> {
        if entries.len() != layout.dim() {
            return Err(OpError::DenseLength { expected: layout.dim(), got: entries.len() });
        }
        Ok(DiagOperator { layout, repr: Repr::Dense(entries) })
    }

    /// Monomial form of the diagonal `entries` via the parity transform,
    /// scaled by `2^-width`.
    pub fn from_dense(layout: Arc<WireLayout>, entries: &[S]) -> Result<Self, OpError> {
        if entries.len() != layout.dim() {
            return Err(OpError::DenseLength { expected: layout.dim(), got: entries.len() });
        }
        let mut coeffs = entries.to_vec();
        fwht(&mut coeffs);
        let shift = -(layout.width() as i32);
        let map = coeffs
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(mask, c)| (mask as u64, c.mul_pow2(shift)))
            .collect();
        Ok(DiagOperator { layout, repr: Repr::Monomial(map) })
    }

    pub fn layout(&self) -> &Arc<WireLayout> {
        &self.layout
    }

    pub fn repr(&self) -> &Repr<S> {
        &self.repr
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.repr, Repr::Dense(_))
    }

    /// Monomial coefficients, if in monomial form.
    pub fn terms(&self) -> Option<&BTreeMap<u64, S>> {
        match &self.repr {
            Repr::Monomial(map) => Some(map),
            Repr::Dense(_) => None,
        }
    }

    /// Number of stored terms (monomial form) or entries (dense form).
    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Monomial(map) => map.len(),
            Repr::Dense(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coefficient of the monomial `mask`.
    pub fn coefficient(&self, mask: u64) -> S {
        match &self.repr {
            Repr::Monomial(map) => map.get(&mask).cloned().unwrap_or_else(S::zero),
            Repr::Dense(_) => self.to_monomial_form().coefficient(mask),
        }
    }

    /// All `2^width` diagonal entries.
    pub fn to_dense(&self) -> Vec<S> {
        match &self.repr {
            Repr::Dense(v) => v.clone(),
            Repr::Monomial(map) => {
                let mut v = vec![S::zero(); self.layout.dim()];
                for (&mask, c) in map {
                    v[mask as usize] = c.clone();
                }
                fwht(&mut v);
                v
            }
        }
    }

    pub fn to_dense_form(&self) -> Self {
        DiagOperator { layout: self.layout.clone(), repr: Repr::Dense(self.to_dense()) }
    }

    pub fn to_monomial_form(&self) -> Self {
        match &self.repr {
            Repr::Monomial(_) => self.clone(),
            Repr::Dense(v) => Self::from_dense(self.layout.clone(), v).expect("dense length matches layout"),
        }
    }

    /// Monomial form when it has at most `2^(width/2)` terms, dense otherwise.
    pub fn with_preferred_form(&self) -> Self {
        let monomial = self.to_monomial_form();
        let budget = 1usize << (self.layout.width() / 2);
        if monomial.len() <= budget {
            monomial
        } else {
            monomial.to_dense_form()
        }
    }

    /// Diagonal entry at global basis index `index`.
    pub fn entry(&self, index: u64) -> S {
        match &self.repr {
            Repr::Dense(v) => v[index as usize].clone(),
            Repr::Monomial(map) => map.iter().fold(S::zero(), |acc, (&mask, c)| {
                if parity_sign(index & mask) > 0 {
                    acc + c.clone()
                } else {
                    acc - c.clone()
                }
            }),
        }
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> DiagOperator<T> {
        let repr = match &self.repr {
            Repr::Monomial(map) => {
                let mut out = BTreeMap::new();
                for (&mask, c) in map {
                    accumulate(&mut out, mask, f(c));
                }
                Repr::Monomial(out)
            }
            Repr::Dense(v) => Repr::Dense(v.iter().map(f).collect()),
        };
        DiagOperator { layout: self.layout.clone(), repr }
    }

    pub fn scale(&self, factor: &S) -> Self {
        let repr = match &self.repr {
            Repr::Monomial(map) => Repr::Monomial(
                map.iter().map(|(&m, c)| (m, c.clone() * factor.clone())).filter(|(_, c)| !c.is_zero()).collect(),
            ),
            Repr::Dense(v) => Repr::Dense(v.iter().map(|c| c.clone() * factor.clone()).collect()),
        };
        DiagOperator { layout: self.layout.clone(), repr }
    }

    pub fn add(&self, other: &Self) -> Result<Self, OpError> {
        same_layout(&self.layout, &other.layout)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Monomial(a), Repr::Monomial(b)) => {
                let mut out = a.clone();
                for (&mask, c) in b {
                    accumulate(&mut out, mask, c.clone());
                }
                Repr::Monomial(out)
            }
            (Repr::Dense(a), Repr::Dense(b)) => {
                Repr::Dense(a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect())
            }
            _ => return Err(OpError::RepresentationMismatch),
        };
        Ok(DiagOperator { layout: self.layout.clone(), repr })
    }

    /// Tensor product; `self` occupies the more significant bits.
    pub fn tensor(&self, other: &Self) -> Result<Self, OpError> {
        let layout = Arc::new(self.layout.concat(&other.layout)?);
        let low = other.layout.width();
        let repr = match (&self.repr, &other.repr) {
            (Repr::Monomial(a), Repr::Monomial(b)) => {
                let mut out = BTreeMap::new();
                for (&ma, ca) in a {
                    for (&mb, cb) in b {
                        accumulate(&mut out, (ma << low) | mb, ca.clone() * cb.clone());
                    }
                }
                Repr::Monomial(out)
            }
            (Repr::Dense(a), Repr::Dense(b)) => {
                let mut out = Vec::with_capacity(a.len() * b.len());
                for x in a {
                    for y in b {
                        out.push(x.clone() * y.clone());
                    }
                }
                Repr::Dense(out)
            }
            _ => return Err(OpError::RepresentationMismatch),
        };
        Ok(DiagOperator { layout, repr })
    }

    /// Matrix product, which for diagonal operators is the entrywise product.
    pub fn multiply(&self, other: &Self) -> Result<Self, OpError> {
        same_layout(&self.layout, &other.layout)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Monomial(a), Repr::Monomial(b)) => {
                let mut out = BTreeMap::new();
                for (&ma, ca) in a {
                    for (&mb, cb) in b {
                        accumulate(&mut out, ma ^ mb, ca.clone() * cb.clone());
                    }
                }
                Repr::Monomial(out)
            }
            (Repr::Dense(a), Repr::Dense(b)) => {
                Repr::Dense(a.iter().zip(b).map(|(x, y)| x.clone() * y.clone()).collect())
            }
            _ => return Err(OpError::RepresentationMismatch),
        };
        Ok(DiagOperator { layout: self.layout.clone(), repr })
    }

    pub fn trace(&self) -> S {
        match &self.repr {
            Repr::Monomial(map) => map.get(&0).map(|c| c.mul_pow2(self.layout.width() as i32)).unwrap_or_else(S::zero),
            Repr::Dense(v) => v.iter().fold(S::zero(), |acc, x| acc + x.clone()),
        }
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<S, OpError> {
        same_layout(&self.layout, &other.layout)?;
        match (&self.repr, &other.repr) {
            (Repr::Monomial(a), Repr::Monomial(b)) => {
                let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
                let sum = small.iter().fold(S::zero(), |acc, (mask, c)| match large.get(mask) {
                    Some(d) => acc + c.clone() * d.clone(),
                    None => acc,
                });
                Ok(sum.mul_pow2(self.layout.width() as i32))
            }
            (Repr::Dense(a), Repr::Dense(b)) => {
                Ok(a.iter().zip(b).fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone()))
            }
            _ => Err(OpError::RepresentationMismatch),
        }
    }

    /// Traces out the named wires; the remaining wires keep their order.
    pub fn partial_trace(&self, wires: &[&str]) -> Result<Self, OpError> {
        let mut traced = vec![false; self.layout.wires().len()];
        for name in wires {
            let pos = self.layout.position(name).ok_or_else(|| OpError::UnknownWire(name.to_string()))?;
            traced[pos] = true;
        }
        let kept: Vec<usize> = (0..traced.len()).filter(|&p| !traced[p]).collect();
        let reduced = Arc::new(WireLayout::new(kept.iter().map(|&p| self.layout.wires()[p].clone()).collect())?);
        let pairs: Vec<(usize, usize)> = kept.iter().enumerate().map(|(to, &from)| (from, to)).collect();
        let traced_width: u32 = (0..traced.len()).filter(|&p| traced[p]).map(|p| self.layout.wires()[p].width).sum();
        let traced_mask = (0..traced.len()).filter(|&p| traced[p]).fold(0u64, |acc, p| acc | self.layout.wire_mask(p));
        let repr = match &self.repr {
            Repr::Monomial(map) => {
                let mut out = BTreeMap::new();
                for (&mask, c) in map {
                    if mask & traced_mask == 0 {
                        let reduced_mask = remap(mask, &self.layout, &reduced, &pairs);
                        accumulate(&mut out, reduced_mask, c.mul_pow2(traced_width as i32));
                    }
                }
                Repr::Monomial(out)
            }
            Repr::Dense(v) => {
                let mut out = vec![S::zero(); reduced.dim()];
                for (index, x) in v.iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    let r = remap(index as u64, &self.layout, &reduced, &pairs) as usize;
                    out[r] = out[r].clone() + x.clone();
                }
                Repr::Dense(out)
            }
        };
        Ok(DiagOperator { layout: reduced, repr })
    }

    /// Extends to `target` by tensoring with the identity on the wires
    /// `target` has and `self` lacks. Every wire of `self` must appear in
    /// `target` with the same width.
    pub fn embed(&self, target: &Arc<WireLayout>) -> Result<Self, OpError> {
        let pairs = wire_pairs(&self.layout, target)?;
        let repr = match &self.repr {
            Repr::Monomial(map) => Repr::Monomial(
                map.iter().map(|(&mask, c)| (remap(mask, &self.layout, target, &pairs), c.clone())).collect(),
            ),
            Repr::Dense(v) => {
                let inverse: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (b, a)).collect();
                Repr::Dense(
                    (0..target.dim() as u64)
                        .map(|index| v[remap(index, target, &self.layout, &inverse) as usize].clone())
                        .collect(),
                )
            }
        };
        Ok(DiagOperator { layout: target.clone(), repr })
    }

    /// Applies a conditional distribution to a state on its conditioning
    /// wires: `Tr_state(channel · (1 ⊗ state))`.
    pub fn channel_apply(&self, state: &Self) -> Result<Self, OpError> {
        let lifted = state
            .embed(&self.layout)
            .map_err(|e| OpError::LayoutMismatch(format!("state does not fit channel: {e}")))?;
        let names: Vec<&str> = state.layout.wires().iter().map(|w| w.name.as_str()).collect();
        self.multiply(&lifted)?.partial_trace(&names)
    }

    /// True iff every diagonal entry is non-negative, i.e. the operator is
    /// positive semi-definite.
    pub fn is_nonnegative(&self) -> bool {
        match &self.repr {
            Repr::Dense(v) => v.iter().all(|x| !x.is_negative_value()),
            Repr::Monomial(_) => self.to_dense().iter().all(|x| !x.is_negative_value()),
        }
    }
}

impl<S: Scalar> PartialEq for DiagOperator<S> {
    fn eq(&self, other: &Self) -> bool {
        if self.layout != other.layout {
            return false;
        }
        match (&self.repr, &other.repr) {
            (Repr::Monomial(a), Repr::Monomial(b)) => a == b,
            (Repr::Dense(a), Repr::Dense(b)) => a == b,
            _ => self.to_dense() == other.to_dense(),
        }
    }
}

impl<S: Scalar> fmt::Display for DiagOperator<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Monomial(map) => {
                if map.is_empty() {
                    return write!(f, "0");
                }
                for (k, (&mask, c)) in map.iter().enumerate() {
                    if k > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "{c} * {}", mask_string(&self.layout, mask))?;
                }
                Ok(())
            }
            Repr::Dense(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "diag({})", parts.join(", "))
            }
        }
    }
}

fn accumulate<S: Scalar>(map: &mut BTreeMap<u64, S>, mask: u64, coeff: S) {
    if coeff.is_zero() {
        return;
    }
    match map.remove(&mask) {
        Some(existing) => {
            let sum = existing + coeff;
            if !sum.is_zero() {
                map.insert(mask, sum);
            }
        }
        None => {
            map.insert(mask, coeff);
        }
    }
}

/// `(position in from, position in to)` for every wire of `from`.
fn wire_pairs(from: &WireLayout, to: &WireLayout) -> Result<Vec<(usize, usize)>, OpError> {
    from.wires()
        .iter()
        .enumerate()
        .map(|(p, wire)| {
            let q = to.position(&wire.name).ok_or_else(|| OpError::UnknownWire(wire.name.clone()))?;
            if to.wires()[q].width != wire.width {
                return Err(OpError::LayoutMismatch(format!(
                    "wire {} has width {} vs {}",
                    wire.name,
                    wire.width,
                    to.wires()[q].width
                )));
            }
            Ok((p, q))
        })
        .collect()
}

/// Moves the bits of each paired wire from its place in `from` to its place in `to`.
pub(crate) fn remap(bits: u64, from: &WireLayout, to: &WireLayout, pairs: &[(usize, usize)]) -> u64 {
    pairs.iter().fold(0u64, |acc, &(p, q)| acc | (from.extract(p, bits) << to.shift(q)))
}
