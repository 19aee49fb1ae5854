use num_traits::Zero;
use serde::Serialize;

use super::behavior::LocalBehavior;
use super::sim::{fixed_points, outcomes, FunctionTable};
use super::GameError;
use crate::process::{check_parties, loop_decomposition, wire_widths, LoopChannel};
use crate::scalar::Dyadic;

/// Produces every party's local operation for one round.
pub trait Strategy: Sync {
    fn parties(&self) -> usize;

    /// Behaviors of `S_0..S_{n-1}` when `M = m` and the inputs are `inputs`.
    fn behaviors(&self, m: usize, inputs: &[u8]) -> Vec<LocalBehavior<Dyadic>>;
}

/// How the pair `S_{n-2} → S_{n-1}` uses the two-bit channel for even `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WideCode {
    /// Message on the first bit; the second is uniform noise.
    First,
    /// Message on the second bit; the first is uniform noise.
    Second,
    /// Message is the parity of both bits.
    Both,
    /// The channel is not used.
    Ignore,
}

impl WideCode {
    const CANDIDATES: [WideCode; 3] = [WideCode::First, WideCode::Second, WideCode::Both];

    /// `P(o | message)` over the two output bits.
    fn encode(self, message: u64, o: u64) -> Dyadic {
        let (first, second) = (o >> 1, o & 1);
        let hit = match self {
            WideCode::First => first == message,
            WideCode::Second => second == message,
            WideCode::Both => first ^ second == message,
            WideCode::Ignore => true,
        };
        let spread = if self == WideCode::Ignore { 2 } else { 1 };
        if hit {
            Dyadic::recip_pow2(spread)
        } else {
            Dyadic::ZERO
        }
    }

    /// Message read from the two input bits, `None` when ignored.
    fn decode(self, input: u64) -> Option<u64> {
        let (first, second) = (input >> 1, input & 1);
        match self {
            WideCode::First => Some(first),
            WideCode::Second => Some(second),
            WideCode::Both => Some(first ^ second),
            WideCode::Ignore => None,
        }
    }
}

/// Parties prepare `O_i = a'_i` and read `X_i = I_i`, with `a'_i = a_i`
/// for the party right after `S_m` and `a'_i = a_i ⊕ x_i` for everyone else.
/// For even `n` the pair `S_{n-2}, S_{n-1}` routes the bit through one of
/// the [`WideCode`]s, chosen per `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WinningStrategy {
    n: usize,
    codes: Option<Vec<WideCode>>,
}

impl WinningStrategy {
    pub fn new(n: usize) -> Result<Self, GameError> {
        check_parties(n)?;
        if n % 2 == 1 {
            return Ok(WinningStrategy { n, codes: None });
        }
        let loops = loop_decomposition(n)?;
        let codes = (0..n).map(|m| select_code(n, m, &loops)).collect::<Result<Vec<_>, _>>()?;
        Ok(WinningStrategy { n, codes: Some(codes) })
    }

    /// Per-`m` codes of the two-bit channel; `None` for odd `n`.
    pub fn codes(&self) -> Option<&[WideCode]> {
        self.codes.as_deref()
    }

    /// Behavior of party `i` given `M = m` and its input `a_i`.
    pub fn behavior(&self, m: usize, i: usize, a_i: u8) -> LocalBehavior<Dyadic> {
        let code = self.codes.as_ref().map(|c| c[m]);
        behavior_with_code(self.n, m, i, a_i, code)
    }
}

impl Strategy for WinningStrategy {
    fn parties(&self) -> usize {
        self.n
    }

    fn behaviors(&self, m: usize, inputs: &[u8]) -> Vec<LocalBehavior<Dyadic>> {
        (0..self.n).map(|i| self.behavior(m, i, inputs[i])).collect()
    }
}

/// Winning behavior of party `i`; see [`WinningStrategy`].
pub fn winning_behavior(n: usize, m: usize, i: usize, a_i: u8) -> Result<LocalBehavior<Dyadic>, GameError> {
    if m >= n || i >= n || a_i > 1 {
        return Err(GameError::InvalidArgument(format!("m = {m}, i = {i}, a_i = {a_i} for n = {n}")));
    }
    Ok(WinningStrategy::new(n)?.behavior(m, i, a_i))
}

fn behavior_with_code(n: usize, m: usize, i: usize, a_i: u8, code: Option<WideCode>) -> LocalBehavior<Dyadic> {
    let (in_widths, out_widths) = wire_widths(n);
    let first_sender = i == (m + 1) % n;
    // Bit this party puts on its outgoing channel after reading x.
    let message = move |x: u8| -> u64 {
        if first_sender {
            a_i as u64
        } else {
            (a_i ^ x) as u64
        }
    };
    let wide_out = out_widths[i] == 2;
    let wide_in = in_widths[i] == 2;
    LocalBehavior::from_kernel(i, in_widths[i], out_widths[i], move |x, o, input| {
        let code = code.unwrap_or(WideCode::Ignore);
        let read = if wide_in { code.decode(input) } else { Some(input) };
        let p_x = match read {
            Some(bit) if bit == x as u64 => Dyadic::ONE,
            Some(_) => Dyadic::ZERO,
            None => Dyadic::HALF,
        };
        if p_x.is_zero() {
            return Dyadic::ZERO;
        }
        let p_o = if wide_out {
            code.encode(message(x), o)
        } else if o == message(x) {
            Dyadic::ONE
        } else {
            Dyadic::ZERO
        };
        p_x * p_o
    })
}

/// The first candidate code that delivers the parity to `S_m` on every loop.
fn select_code(n: usize, m: usize, loops: &[LoopChannel]) -> Result<WideCode, GameError> {
    if m == n - 2 {
        return Ok(WideCode::Ignore);
    }
    WideCode::CANDIDATES
        .into_iter()
        .find(|&code| delivers_parity(n, m, Some(code), loops))
        .ok_or_else(|| GameError::Inconsistent(format!("no two-bit code delivers the parity for n = {n}, m = {m}")))
}

/// For every input string, every deterministic refinement of the behaviors
/// and every loop: exactly one consistent run, in which `x_m` is the parity
/// of the other inputs.
pub(crate) fn delivers_parity(n: usize, m: usize, code: Option<WideCode>, loops: &[LoopChannel]) -> bool {
    (0..1u32 << n).all(|bits| {
        let inputs: Vec<u8> = (0..n).map(|k| (bits >> (n - 1 - k) & 1) as u8).collect();
        let target = inputs.iter().enumerate().filter(|&(k, _)| k != m).fold(0, |acc, (_, &a)| acc ^ a);
        let refinements: Vec<Vec<FunctionTable>> = (0..n)
            .map(|i| behavior_with_code(n, m, i, inputs[i], code).refinements().into_iter().map(|(_, t)| t).collect())
            .collect();
        let mut choice = vec![0usize; n];
        loop {
            let tables: Vec<FunctionTable> = (0..n).map(|i| refinements[i][choice[i]].clone()).collect();
            for l in loops {
                let points = fixed_points(l, &tables);
                if points.len() != 1 || outcomes(&tables, &points[0])[m] != target {
                    return false;
                }
            }
            // Advance the mixed-radix counter over refinement choices.
            let mut k = 0;
            while k < n {
                choice[k] += 1;
                if choice[k] < refinements[k].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
            if k == n {
                return true;
            }
        }
    })
}
