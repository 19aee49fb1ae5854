//! Monte-Carlo play of the game on `W_n`, one loop channel per shot.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::exact::{inputs_from_bits, target_parity};
use super::sim::{fixed_points, outcomes, FunctionTable};
use super::strategy::{Strategy, WinningStrategy};
use super::GameError;
use crate::process::{loop_decomposition, LoopChannel};
use crate::scalar::Dyadic;

/// Generator used for every draw.
pub const RNG_NAME: &str = "ChaCha8Rng";

const CHUNK: u64 = 1 << 14;

/// Shots and wins for one value of `m`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MCount {
    pub shots: u64,
    pub wins: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleReport {
    pub n: usize,
    pub shots: u64,
    pub seed: u64,
    pub wins: u64,
    pub estimate: f64,
    pub per_m: Vec<MCount>,
    pub rng: &'static str,
}

/// Deterministic refinements of every party's behavior, per `(m, a⃗)`.
type RefinementTable = Vec<Vec<Vec<(Dyadic, FunctionTable)>>>;

/// Plays the winning strategy on `W_n` for `shots` rounds.
pub fn sample_game(n: usize, shots: u64, seed: u64) -> Result<SampleReport, GameError> {
    let strategy = WinningStrategy::new(n)?;
    sample_strategy(&strategy, shots, seed)
}

/// Plays `strategy` on `W_n`: each shot draws `m`, `a⃗`, a deterministic
/// refinement of every party's behavior and a loop channel, then picks one
/// of the consistent runs with the loop's weight.
///
/// Shots are split into fixed-size chunks; chunk `c` draws from the stream
/// `c` of a generator seeded with `seed`, so the result does not depend on
/// the number of worker threads.
pub fn sample_strategy(strategy: &dyn Strategy, shots: u64, seed: u64) -> Result<SampleReport, GameError> {
    if shots == 0 {
        return Err(GameError::InvalidArgument("shots must be at least 1".into()));
    }
    let n = strategy.parties();
    let loops = loop_decomposition(n)?;
    let table = refinement_table(strategy, n)?;
    let chunks = shots.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(shots - c * CHUNK);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            run_chunk(&mut rng, n, len, &loops, &table)
        })
        .collect::<Result<Vec<_>, GameError>>()?;
    let mut per_m = vec![MCount::default(); n];
    for chunk in counts {
        for (total, part) in per_m.iter_mut().zip(chunk) {
            total.shots += part.shots;
            total.wins += part.wins;
        }
    }
    let wins = per_m.iter().map(|c| c.wins).sum();
    Ok(SampleReport { n, shots, seed, wins, estimate: wins as f64 / shots as f64, per_m, rng: RNG_NAME })
}

fn refinement_table(strategy: &dyn Strategy, n: usize) -> Result<RefinementTable, GameError> {
    (0..n * (1 << n))
        .into_par_iter()
        .map(|key| {
            let (m, bits) = (key >> n, key as u64 & ((1 << n) - 1));
            strategy
                .behaviors(m, &inputs_from_bits(n, bits))
                .iter()
                .map(|b| {
                    let refinements = b.refinements();
                    let total: Dyadic = refinements.iter().map(|(w, _)| *w).sum();
                    if total != Dyadic::ONE || refinements.iter().any(|(w, _)| *w < Dyadic::ZERO) {
                        return Err(GameError::InvalidArgument(format!(
                            "behavior of party {} for m = {m} is not a probability kernel",
                            b.party()
                        )));
                    }
                    Ok(refinements)
                })
                .collect()
        })
        .collect()
}

fn run_chunk(
    rng: &mut ChaCha8Rng,
    n: usize,
    shots: u64,
    loops: &[LoopChannel],
    table: &RefinementTable,
) -> Result<Vec<MCount>, GameError> {
    let mut counts = vec![MCount::default(); n];
    let mut tables: Vec<FunctionTable> = Vec::with_capacity(n);
    for _ in 0..shots {
        let m = rng.random_range(0..n);
        let bits = rng.random_range(0..1u64 << n);
        tables.clear();
        for party in &table[(m << n) | bits as usize] {
            let k = pick(rng, party.iter().map(|(w, _)| *w));
            tables.push(party[k].1.clone());
        }
        let mut candidates = Vec::new();
        for l in loops {
            for point in fixed_points(l, &tables) {
                candidates.push((l.weight, point));
            }
        }
        let total: Dyadic = candidates.iter().map(|(w, _)| *w).sum();
        if total != Dyadic::ONE {
            return Err(GameError::Inconsistent(format!("consistent runs carry total weight {total}")));
        }
        let (_, point) = &candidates[pick(rng, candidates.iter().map(|(w, _)| *w))];
        let x = outcomes(&tables, point)[m];
        let inputs = inputs_from_bits(n, bits);
        counts[m].shots += 1;
        if x == target_parity(&inputs, m) {
            counts[m].wins += 1;
        }
    }
    Ok(counts)
}

/// Index drawn with probability proportional to the exact dyadic weights,
/// which must sum to one.
fn pick(rng: &mut ChaCha8Rng, weights: impl Iterator<Item = Dyadic> + Clone) -> usize {
    let exp = weights.clone().map(|w| w.log2_denominator()).max().unwrap_or(0);
    assert!(exp <= 64, "weights finer than 2^-64");
    let u = if exp == 0 { 0 } else { (rng.random::<u64>() >> (64 - exp)) as u128 };
    let mut acc = 0u128;
    let mut last = 0;
    for (k, w) in weights.enumerate() {
        last = k;
        if w.is_zero() {
            continue;
        }
        acc += (w.numerator() as u128) << (exp - w.log2_denominator());
        if u < acc {
            return k;
        }
    }
    last
}
