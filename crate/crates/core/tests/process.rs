use ccorder::game::{fixed_points, FunctionTable};
use ccorder::process::{
    behavior_total, build_w, conditional_distribution, loop_decomposition, naive_even_w, validate, wire_widths,
    PartyWires, ProcessError,
};
use ccorder::Dyadic;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn processes_are_valid_for_three_to_eight_parties() {
    for n in 3..=8 {
        let w = build_w::<Dyadic>(n).unwrap();
        let report = validate(&w).unwrap();
        assert!(report.passed(), "n = {n}: {:?}", report.failing_checks());
        assert_eq!(report.bilinear_norm.exhaustive, n <= 5);
        // Each party reaches its successor.
        for j in 0..n {
            assert!(report.signaling[j][(j + 1) % n], "n = {n}: O_{j} does not reach I_{}", (j + 1) % n);
        }
        let float = build_w::<f64>(n).unwrap();
        assert!(validate(&float).unwrap().passed());
    }
}

#[test]
fn two_parties_are_refused() {
    assert!(matches!(build_w::<Dyadic>(2), Err(ProcessError::Unsupported(_))));
    assert!(matches!(build_w::<Dyadic>(1), Err(ProcessError::InvalidArgument(_))));
}

#[test]
fn identity_forwarding_breaks_naive_even_construction() {
    let naive = naive_even_w::<Dyadic>(4).unwrap();
    let parties = PartyWires::from_layout(naive.layout()).unwrap();
    let dense = naive.to_dense();
    let forward = vec![vec![0u64, 1]; 4];
    assert_eq!(behavior_total(&dense, &naive, &parties, &forward), Dyadic::from_int(2));
}

#[test]
fn every_output_yields_a_uniform_loop_mixture() {
    for n in 3..=6 {
        let w = build_w::<Dyadic>(n).unwrap();
        let loops = loop_decomposition(n).unwrap();
        let (_, out_widths) = wire_widths(n);
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        for _ in 0..20 {
            let outputs: Vec<u64> = out_widths.iter().map(|&w| rng.random_range(0..1u64 << w)).collect();
            let dist = conditional_distribution(&w, &outputs).unwrap();
            assert_eq!(dist.len(), loops.len());
            let weight = Dyadic::new(1, loops.len().trailing_zeros());
            assert!(dist.iter().all(|(_, p)| *p == weight));
            let mut routed: Vec<Vec<u64>> = loops.iter().map(|l| l.route(&outputs)).collect();
            routed.sort();
            let got: Vec<Vec<u64>> = dist.into_iter().map(|(i, _)| i).collect();
            assert_eq!(got, routed);
        }
    }
}

fn random_tables(rng: &mut ChaCha8Rng, n: usize) -> Vec<FunctionTable> {
    let (in_widths, out_widths) = wire_widths(n);
    (0..n)
        .map(|k| {
            (0..1u64 << in_widths[k])
                .map(|_| (rng.random_range(0..2u8), rng.random_range(0..1u64 << out_widths[k])))
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Whatever the parties do, the loops' consistent runs carry total
    /// weight one, matching the operator's bilinear normalization.
    #[test]
    fn loops_have_unit_weight_of_consistent_runs(n in 3usize..=7, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tables = random_tables(&mut rng, n);
        let loops = loop_decomposition(n).unwrap();
        let total: Dyadic = loops
            .iter()
            .map(|l| Dyadic::from_int(fixed_points(l, &tables).len() as i128) * l.weight)
            .sum();
        prop_assert_eq!(total, Dyadic::ONE);

        let w = build_w::<Dyadic>(n).unwrap();
        let parties = PartyWires::from_layout(w.layout()).unwrap();
        let outputs: Vec<Vec<u64>> = tables.iter().map(|t| t.iter().map(|&(_, o)| o).collect()).collect();
        let dense = w.operator().to_dense();
        prop_assert_eq!(behavior_total(&dense, w.operator(), &parties, &outputs), Dyadic::ONE);
    }

    /// A party that ignores its input breaks every loop into a single run.
    #[test]
    fn a_constant_party_breaks_every_loop(n in 3usize..=7, seed in any::<u64>(), breaker in 0usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tables = random_tables(&mut rng, n);
        let k = breaker % n;
        let constant = tables[k][0];
        tables[k].iter_mut().for_each(|e| *e = constant);
        for l in loop_decomposition(n).unwrap() {
            prop_assert_eq!(fixed_points(&l, &tables).len(), 1);
        }
    }
}
