use ccorder::game::{
    inputs_from_bits, outcome_distribution, sample_strategy, success_probability, trace_formula_probability,
    LocalBehavior, Strategy, WinningStrategy,
};
use ccorder::process::{build_w, wire_widths};
use ccorder::Dyadic;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A behavior whose kernel splits 8 units of probability at random over
/// `(x, o)` for every input.
fn random_behavior(rng: &mut ChaCha8Rng, party: usize, in_w: u32, out_w: u32) -> LocalBehavior<Dyadic> {
    let cells = 2usize << out_w;
    let mut table = vec![vec![0i128; cells]; 1 << in_w];
    for row in table.iter_mut() {
        for _ in 0..8 {
            row[rng.random_range(0..cells)] += 1;
        }
    }
    LocalBehavior::from_kernel(party, in_w, out_w, |x, o, i| {
        Dyadic::new(table[i as usize][((o as usize) << 1) | x as usize], 3)
    })
}

/// Fixed random behaviors for every `(m, a⃗)`.
struct RandomStrategy {
    n: usize,
    table: Vec<Vec<LocalBehavior<Dyadic>>>,
}

impl RandomStrategy {
    fn new(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (in_w, out_w) = wire_widths(n);
        let table =
            (0..n << n).map(|_| (0..n).map(|k| random_behavior(&mut rng, k, in_w[k], out_w[k])).collect()).collect();
        RandomStrategy { n, table }
    }
}

impl Strategy for RandomStrategy {
    fn parties(&self) -> usize {
        self.n
    }

    fn behaviors(&self, m: usize, inputs: &[u8]) -> Vec<LocalBehavior<Dyadic>> {
        let bits = inputs.iter().fold(0usize, |acc, &a| (acc << 1) | a as usize);
        self.table[(m << self.n) | bits].clone()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn distributions_are_normalized(n in 3usize..=5, seed in any::<u64>()) {
        let w = build_w::<Dyadic>(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (in_w, out_w) = wire_widths(n);
        let behaviors: Vec<_> = (0..n).map(|k| random_behavior(&mut rng, k, in_w[k], out_w[k])).collect();
        prop_assert!(behaviors.iter().all(|b| b.is_normalized()));
        let dist = outcome_distribution(&w, &behaviors).unwrap();
        prop_assert!(dist.iter().all(|p| *p >= Dyadic::ZERO));
        prop_assert_eq!(dist.iter().copied().sum::<Dyadic>(), Dyadic::ONE);
    }

    #[test]
    fn trace_formula_matches_direct_sum(n in 3usize..=4, seed in any::<u64>()) {
        let w = build_w::<Dyadic>(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (in_w, out_w) = wire_widths(n);
        let behaviors: Vec<_> = (0..n).map(|k| random_behavior(&mut rng, k, in_w[k], out_w[k])).collect();
        let dist = outcome_distribution(&w, &behaviors).unwrap();
        for (idx, p) in dist.iter().enumerate() {
            prop_assert_eq!(trace_formula_probability(&w, &behaviors, &inputs_from_bits(n, idx as u64)).unwrap(), *p);
        }
    }
}

#[test]
fn sampler_agrees_with_exact_value_on_random_strategies() {
    let shots = 20_000u64;
    for (n, seed) in [(3, 1), (3, 2), (4, 3), (4, 4), (5, 5)] {
        let strategy = RandomStrategy::new(n, seed);
        let w = build_w::<Dyadic>(n).unwrap();
        let exact = success_probability(&w, &strategy).unwrap();
        let p = num_traits::ToPrimitive::to_f64(&exact.p_succ).unwrap();
        let report = sample_strategy(&strategy, shots, seed).unwrap();
        let tolerance = 4.0 * (p * (1.0 - p) / shots as f64).sqrt() + 1.0 / shots as f64;
        assert!((report.estimate - p).abs() <= tolerance, "n = {n}: estimate {} vs exact {p}", report.estimate);
        assert!(p < 1.0);
    }
}

#[test]
fn sampling_is_reproducible_and_thread_independent() {
    let strategy = RandomStrategy::new(3, 11);
    let a = sample_strategy(&strategy, 50_000, 99).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| sample_strategy(&strategy, 50_000, 99).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, sample_strategy(&strategy, 50_000, 100).unwrap());
    assert_eq!(a.rng, "ChaCha8Rng");
}

#[test]
fn winning_strategy_is_certain_for_every_round() {
    for n in 3..=6 {
        let w = build_w::<Dyadic>(n).unwrap();
        let s = WinningStrategy::new(n).unwrap();
        let r = success_probability(&w, &s).unwrap();
        assert!(r.per_m.iter().all(|p| *p == Dyadic::ONE), "n = {n}");
    }
}
