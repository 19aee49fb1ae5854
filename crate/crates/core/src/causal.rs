//! The baseline under a predefined causal order.
//!
//! A protocol fixes a first party `F`. Every later party is activated in an
//! order chosen from `m` and `a_F`, and each activated party forwards its
//! input to everyone after it. Outputs are Bayes-optimal given what a party
//! has seen, so a protocol is fully described by `F` and its order table.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive};
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

/// Name of the protocol model, recorded in every report.
pub const MODEL: &str = "adaptive-order full-forwarding";

/// Assumptions behind [`MODEL`], recorded in every report.
pub const ASSUMPTIONS: [&str; 3] = [
    "the first party does not depend on m",
    "the order of the remaining parties may depend on m and on the first party's input",
    "m is pre-shared randomness available to every party",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CausalError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{0}")]
    TooLarge(String),
}

/// A deterministic protocol: `F` goes first, then the parties in
/// `order[m][a_F]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CausalProtocol {
    pub n: usize,
    pub first: usize,
    pub order: Vec<[Vec<usize>; 2]>,
}

impl CausalProtocol {
    /// Checks that every order entry is a permutation of the parties other
    /// than `first`.
    pub fn new(n: usize, first: usize, order: Vec<[Vec<usize>; 2]>) -> Result<Self, CausalError> {
        if n < 2 || first >= n || order.len() != n {
            return Err(CausalError::InvalidArgument(format!("bad protocol shape for n = {n}")));
        }
        for seq in order.iter().flatten() {
            let mut sorted = seq.clone();
            sorted.sort_unstable();
            let expected: Vec<usize> = (0..n).filter(|&k| k != first).collect();
            if sorted != expected {
                return Err(CausalError::InvalidArgument(format!(
                    "{seq:?} is not an order of the parties after {first}"
                )));
            }
        }
        Ok(CausalProtocol { n, first, order })
    }

    /// Full activation sequence for `m` and the first party's input.
    pub fn activation(&self, m: usize, a_first: u8) -> Vec<usize> {
        let mut seq = vec![self.first];
        seq.extend_from_slice(&self.order[m][a_first as usize]);
        seq
    }

    /// `true` when the order never depends on `m` or `a_F`.
    pub fn is_fixed_order(&self) -> bool {
        self.order.iter().flatten().all(|seq| *seq == self.order[0][0])
    }

    /// Success probability for each `m` with Bayes-optimal outputs: `S_m`
    /// answers the majority value of the parity over inputs compatible with
    /// what it has seen, ties going to 0.
    pub fn per_m_success(&self) -> Vec<BigRational> {
        let n = self.n;
        (0..n)
            .map(|m| {
                let mut counts: BTreeMap<Vec<(usize, u8)>, [u64; 2]> = BTreeMap::new();
                for bits in 0..1u64 << n {
                    let a: Vec<u8> = (0..n).map(|k| (bits >> (n - 1 - k) & 1) as u8).collect();
                    let seq = self.activation(m, a[self.first]);
                    let mut seen: Vec<(usize, u8)> = seq.iter().take_while(|&&k| k != m).map(|&k| (k, a[k])).collect();
                    seen.push((m, a[m]));
                    let target = (0..n).filter(|&k| k != m).fold(0, |acc, k| acc ^ a[k]);
                    counts.entry(seen).or_default()[target as usize] += 1;
                }
                let won: u64 = counts.values().map(|c| c[0].max(c[1])).sum();
                BigRational::new(BigInt::from(won), BigInt::from(1u64 << n))
            })
            .collect()
    }

    /// Average of [`Self::per_m_success`].
    pub fn success(&self) -> BigRational {
        average(&self.per_m_success())
    }
}

fn average(values: &[BigRational]) -> BigRational {
    let sum: BigRational = values.iter().cloned().sum();
    sum / BigRational::from_integer(BigInt::from(values.len()))
}

/// Result of an exhaustive search over protocols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalValue {
    pub n: usize,
    pub value: BigRational,
    pub per_m: Vec<BigRational>,
    pub witness: CausalProtocol,
    /// Best value among protocols whose order ignores `m` and `a_F`.
    pub best_fixed_order: BigRational,
    pub protocols: usize,
    /// Every enumerated protocol stays within [`causal_bound`].
    pub all_within_bound: bool,
}

/// `1 - 1/(2n)`.
pub fn causal_bound(n: usize) -> Result<BigRational, CausalError> {
    if n < 2 {
        return Err(CausalError::InvalidArgument(format!("the game needs at least two parties, got {n}")));
    }
    Ok(BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(2 * n)))
}

/// The protocol with `F = S_0` that activates `S_m` last whenever `m ≠ 0`.
pub fn forwarding_protocol(n: usize) -> Result<CausalProtocol, CausalError> {
    causal_bound(n)?;
    let order = (0..n)
        .map(|m| {
            let mut seq: Vec<usize> = (1..n).filter(|&k| k != m).collect();
            if m != 0 {
                seq.push(m);
            }
            [seq.clone(), seq]
        })
        .collect();
    CausalProtocol::new(n, 0, order)
}

/// Value of [`forwarding_protocol`], together with the protocol.
pub fn forwarding_strategy_success(n: usize) -> Result<(BigRational, CausalProtocol), CausalError> {
    let protocol = forwarding_protocol(n)?;
    Ok((protocol.success(), protocol))
}

/// Permutations of `items` in lexicographic order of positions.
fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (k, &head) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Exact maximum over all deterministic protocols, for `n ∈ {2, 3}`.
pub fn brute_force_causal(n: usize) -> Result<CausalValue, CausalError> {
    if n > 3 {
        return Err(CausalError::TooLarge(format!(
            "exhaustive search is limited to n <= 3; n = {n} has {}^{} order tables per first party",
            (1..n).product::<usize>(),
            2 * n
        )));
    }
    let bound = causal_bound(n)?;
    let slots = 2 * n;
    let candidates: Vec<(usize, Vec<usize>)> = (0..n)
        .flat_map(|first| {
            let rest: Vec<usize> = (0..n).filter(|&k| k != first).collect();
            let perms = permutations(&rest);
            let total = perms.len().pow(slots as u32);
            (0..total).map(move |code| {
                // Digit `2m + a_F` of `code` in base |perms| picks order[m][a_F].
                let mut digits = Vec::with_capacity(slots);
                let mut c = code;
                for _ in 0..slots {
                    digits.push(c % perms.len());
                    c /= perms.len();
                }
                (first, digits)
            })
        })
        .collect();
    let evaluated: Vec<(CausalProtocol, Vec<BigRational>, BigRational)> = candidates
        .par_iter()
        .map(|(first, digits)| {
            let rest: Vec<usize> = (0..n).filter(|&k| k != *first).collect();
            let perms = permutations(&rest);
            let order = (0..n).map(|m| [perms[digits[2 * m]].clone(), perms[digits[2 * m + 1]].clone()]).collect();
            let protocol = CausalProtocol { n, first: *first, order };
            let per_m = protocol.per_m_success();
            let value = average(&per_m);
            (protocol, per_m, value)
        })
        .collect();
    let all_within_bound = evaluated.iter().all(|(_, _, v)| *v <= bound);
    let best_fixed_order = evaluated
        .iter()
        .filter(|(p, _, _)| p.is_fixed_order())
        .map(|(_, _, v)| v.clone())
        .max()
        .expect("fixed orders are enumerated");
    let protocols = evaluated.len();
    // First maximum in enumeration order, so the witness is deterministic.
    let (witness, per_m, value) = evaluated
        .into_iter()
        .reduce(|best, next| if next.2 > best.2 { next } else { best })
        .expect("at least one protocol");
    Ok(CausalValue { n, value, per_m, witness, best_fixed_order, protocols, all_within_bound })
}

/// `(1 - 1/(2n))^r`, the chance of winning `r` independent rounds at the bound.
pub fn repeated_success(n: usize, rounds: u32) -> Result<BigRational, CausalError> {
    if rounds == 0 {
        return Err(CausalError::InvalidArgument("at least one round is required".into()));
    }
    Ok(Pow::pow(causal_bound(n)?, rounds))
}

/// Exact rational written as `{num, den}`; components that do not fit in
/// 64 bits are written as decimal strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalJson(pub BigRational);

impl Serialize for RationalJson {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Rational", 2)?;
        for (name, v) in [("num", self.0.numer()), ("den", self.0.denom())] {
            match v.to_i64() {
                Some(small) => s.serialize_field(name, &small)?,
                None => s.serialize_field(name, &v.to_string())?,
            }
        }
        s.end()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessJson {
    pub first: usize,
    pub order: Vec<[Vec<usize>; 2]>,
    pub per_m: Vec<RationalJson>,
}

/// Machine-readable summary of a causal computation.
#[derive(Clone, Debug, Serialize)]
pub struct CausalReport {
    pub n: usize,
    pub model: &'static str,
    pub assumptions: [&'static str; 3],
    pub value: RationalJson,
    pub bound: RationalJson,
    pub witness: WitnessJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub brute_force: Option<RationalJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_fixed_order: Option<RationalJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matches_bound: Option<bool>,
}

impl CausalReport {
    /// Report for the forwarding protocol, optionally with the exhaustive
    /// search result.
    pub fn new(n: usize, brute: Option<&CausalValue>) -> Result<Self, CausalError> {
        let bound = causal_bound(n)?;
        let (value, protocol) = forwarding_strategy_success(n)?;
        let per_m = protocol.per_m_success();
        Ok(CausalReport {
            n,
            model: MODEL,
            assumptions: ASSUMPTIONS,
            value: RationalJson(value),
            witness: WitnessJson {
                first: protocol.first,
                order: protocol.order,
                per_m: per_m.into_iter().map(RationalJson).collect(),
            },
            brute_force: brute.map(|b| RationalJson(b.value.clone())),
            best_fixed_order: brute.map(|b| RationalJson(b.best_fixed_order.clone())),
            matches_bound: brute.map(|b| b.value == bound),
            bound: RationalJson(bound),
        })
    }
}
