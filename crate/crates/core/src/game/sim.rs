//! Running deterministic parties around a circular channel.

use crate::process::LoopChannel;

/// Deterministic map of one party: `table[i] = (x, o)`.
pub type FunctionTable = Vec<(u8, u64)>;

/// Every input assignment consistent with `loop_channel` when party `k`
/// answers input `i` with `tables[k][i]`. A broken cycle has exactly one.
pub fn fixed_points(loop_channel: &LoopChannel, tables: &[FunctionTable]) -> Vec<Vec<u64>> {
    let n = tables.len();
    let mut found = Vec::new();
    for start in 0..tables[0].len() as u64 {
        let mut inputs = vec![0u64; n];
        inputs[0] = start;
        let mut current = start;
        for k in 0..n {
            let (_, o) = tables[k][current as usize];
            let edge = &loop_channel.edges[k];
            current = o ^ edge.flips;
            if k + 1 < n {
                inputs[k + 1] = current;
            }
        }
        if current == start {
            found.push(inputs);
        }
    }
    found
}

/// Outcomes `x_k = tables[k][i_k].0` at an input assignment.
pub fn outcomes(tables: &[FunctionTable], inputs: &[u64]) -> Vec<u8> {
    tables.iter().zip(inputs).map(|(t, &i)| t[i as usize].0).collect()
}
