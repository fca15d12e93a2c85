use crate::circuits::LinearDs;
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

/// A dyadic interval `[start, start + len)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dyadic {
    pub start: usize,
    pub len: usize,
}

/// Heap numbering of the dyadic intervals of `[0, n)`: node 1 is the whole
/// range, node `v` has children `2v` and `2v + 1`. Cell `c` stores node `c + 1`.
fn node_interval(n: usize, node: usize) -> Dyadic {
    let level = usize::BITS - 1 - node.leading_zeros();
    let len = n >> level;
    Dyadic {
        start: (node - (1 << level)) * len,
        len,
    }
}

fn interval_node(n: usize, d: Dyadic) -> usize {
    let level = (n / d.len).trailing_zeros();
    (1 << level) + d.start / d.len
}

/// Splits the prefix `[0, len)` into aligned dyadic blocks, greedily from the
/// left taking the largest block that fits. Yields popcount(len) blocks.
pub fn dyadic_decomposition(n: usize, len: usize) -> Vec<Dyadic> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < len {
        let align = if pos == 0 { n } else { 1 << pos.trailing_zeros() };
        let mut size = align.min(n);
        while pos + size > len {
            size /= 2;
        }
        out.push(Dyadic { start: pos, len: size });
        pos += size;
    }
    out
}

/// The one-dimensional range tree as a linear structure: one cell per dyadic
/// interval (2n - 1 cells), each update flips the log2(n) + 1 intervals holding
/// its position, and query `k` XORs the decomposition of prefix `[0, k]`.
pub fn prefix_sum_range_tree(n: usize) -> Result<LinearDs> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "range tree size must be a power of two, got {n}"
        )));
    }
    let cells = 2 * n - 1;
    let mut v = BitMatrix::zeros(cells, n);
    for c in 0..cells {
        let d = node_interval(n, c + 1);
        for j in d.start..d.start + d.len {
            v.set(c, j, true);
        }
    }
    let mut q = BitMatrix::zeros(n, cells);
    for k in 0..n {
        for d in dyadic_decomposition(n, k + 1) {
            q.set(k, interval_node(n, d) - 1, true);
        }
    }
    LinearDs::new(v, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cellprobe::{run_instrumented, DynamicDs, Memory, Op, ProbeKind};
    use crate::operators::prefix_sum_operator;

    /// Brute-force list of every dyadic interval of [0, n) that contains `pos`.
    fn containing_intervals(n: usize, pos: usize) -> usize {
        let mut count = 0;
        let mut len = n;
        while len >= 1 {
            for start in (0..n).step_by(len) {
                if (start..start + len).contains(&pos) {
                    count += 1;
                }
            }
            len /= 2;
        }
        count
    }

    #[test]
    fn decomposition_sizes() {
        for n in [1usize, 2, 4, 8, 16, 64] {
            for len in 0..=n {
                let parts = dyadic_decomposition(n, len);
                assert_eq!(parts.len(), len.count_ones() as usize);
                let mut pos = 0;
                for d in &parts {
                    assert_eq!(d.start, pos);
                    assert!(d.len.is_power_of_two());
                    assert_eq!(d.start % d.len, 0);
                    pos += d.len;
                }
                assert_eq!(pos, len);
            }
        }
    }

    #[test]
    fn range_tree_n8() {
        let ds = prefix_sum_range_tree(8).unwrap();
        assert_eq!(ds.cells(), 15);
        assert_eq!(ds.update_times(), vec![4; 8]);
        let q_weights = ds.query_times();
        assert_eq!(q_weights, (1..=8usize).map(|k| k.count_ones() as usize).collect::<Vec<_>>());
        assert!(q_weights.iter().all(|&w| w <= 3));
        assert_eq!(ds.v().total_weight(), 32);
        assert_eq!(ds.q().total_weight(), 13);
        assert_eq!(ds.operator(), prefix_sum_operator(8).unwrap());
        for pos in 0..8 {
            assert_eq!(ds.update_times()[pos], containing_intervals(8, pos));
        }
    }

    #[test]
    fn range_tree_n1() {
        let ds = prefix_sum_range_tree(1).unwrap();
        assert_eq!(ds.v(), &BitMatrix::identity(1));
        assert_eq!(ds.q(), &BitMatrix::identity(1));
    }

    #[test]
    fn rejects_non_powers() {
        for n in [0, 3, 6, 12] {
            assert!(prefix_sum_range_tree(n).is_err());
        }
    }

    #[test]
    fn update_writes_four_cells() {
        let ds = prefix_sum_range_tree(8).unwrap();
        let script = vec![Op::Preprocess(vec![false; 8]), Op::Update(3)];
        let run = run_instrumented(&ds, &script, Memory::new(ds.word_bits()).unwrap()).unwrap();
        let writes = run.records[1]
            .log
            .entries
            .iter()
            .filter(|p| p.kind == ProbeKind::Write)
            .count();
        assert_eq!(writes, containing_intervals(8, 3));
        assert_eq!(writes, 4);
    }

    #[test]
    fn answers_prefix_parities() {
        let ds = prefix_sum_range_tree(16).unwrap();
        let mut a = vec![false; 16];
        let mut script = vec![Op::Preprocess(a.clone())];
        let mut expected = Vec::new();
        for (step, flip) in [3usize, 0, 15, 3, 7, 8, 9].into_iter().enumerate() {
            a[flip] ^= true;
            script.push(Op::Update(flip));
            let k = (step * 5) % 16;
            script.push(Op::Query(k));
            expected.push(a[..=k].iter().filter(|&&b| b).count() % 2 == 1);
        }
        let run = run_instrumented(&ds, &script, Memory::new(ds.word_bits()).unwrap()).unwrap();
        assert_eq!(run.answers().copied().collect::<Vec<_>>(), expected);
    }
}
