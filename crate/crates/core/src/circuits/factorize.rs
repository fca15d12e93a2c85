//! Minimum-wire factorizations `F = Q·V` over GF(2), i.e. linear depth-2
//! circuits for `F` with `s` middle gates.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::thread;

use super::LinearDs;
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

/// Largest `s·n` the exhaustive search accepts.
pub const EXHAUSTIVE_LIMIT: usize = 26;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    /// `m×s`
    pub q: BitMatrix,
    /// `s×n`
    pub v: BitMatrix,
}

impl Factorization {
    /// `V = F`, `Q = I`.
    pub fn trivial(f: &BitMatrix) -> Self {
        Factorization {
            q: BitMatrix::identity(f.rows()),
            v: f.clone(),
        }
    }

    pub fn s(&self) -> usize {
        self.v.rows()
    }

    pub fn wires(&self) -> usize {
        self.q.total_weight() + self.v.total_weight()
    }

    pub fn product(&self) -> BitMatrix {
        self.q.mat_mul(&self.v).expect("factor shapes agree")
    }

    pub fn computes(&self, f: &BitMatrix) -> bool {
        self.q.cols() == self.v.rows() && self.product() == *f
    }

    pub fn into_linear_ds(self) -> LinearDs {
        LinearDs::new(self.v, self.q).expect("factor shapes agree")
    }
}

/// Row `mask` of width `width` as a key that orders like its `0/1` string,
/// column 0 first.
fn string_key(mask: u64, width: usize) -> u64 {
    if width == 0 {
        0
    } else {
        mask.reverse_bits() >> (64 - width)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Candidate {
    wires: usize,
    s: usize,
    q_key: Vec<u64>,
    v_key: Vec<u64>,
    q: Vec<u64>,
    v: Vec<u64>,
}

/// Best factorization with the given `V` rows: each output row independently
/// takes the fewest middle gates, ties going to the smallest row string.
fn best_q(v: &[u64], f_rows: &[u64], n: usize) -> Option<Candidate> {
    let s = v.len();
    let mut combos = vec![0u64; 1 << s];
    for q in 1usize..1 << s {
        combos[q] = combos[q & (q - 1)] ^ v[q.trailing_zeros() as usize];
    }
    let mut best: HashMap<u64, (u32, u64, u64)> = f_rows.iter().map(|&r| (r, (u32::MAX, 0, 0))).collect();
    for (q, &c) in combos.iter().enumerate() {
        if let Some(slot) = best.get_mut(&c) {
            let cand = (q.count_ones(), string_key(q as u64, s), q as u64);
            if cand < *slot {
                *slot = cand;
            }
        }
    }
    let mut q_rows = Vec::with_capacity(f_rows.len());
    let mut q_weight = 0;
    for r in f_rows {
        let (w, _, q) = best[r];
        if w == u32::MAX {
            return None;
        }
        q_weight += w as usize;
        q_rows.push(q);
    }
    let v_weight: usize = v.iter().map(|r| r.count_ones() as usize).sum();
    Some(Candidate {
        wires: v_weight + q_weight,
        s,
        q_key: q_rows.iter().map(|&q| string_key(q, s)).collect(),
        v_key: v.iter().map(|&r| string_key(r, n)).collect(),
        q: q_rows,
        v: v.to_vec(),
    })
}

fn search_range(
    s: usize,
    n: usize,
    f_rows: &[u64],
    lo: u64,
    hi: u64,
    bound: &AtomicUsize,
) -> Option<Candidate> {
    let row_mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let nonzero_outputs = f_rows.iter().filter(|&&r| r != 0).count();
    let mut best: Option<Candidate> = None;
    let mut v = vec![0u64; s];
    'outer: for idx in lo..hi {
        let mut weight = 0;
        for (r, slot) in v.iter_mut().enumerate() {
            *slot = (idx >> (r * n)) & row_mask;
            weight += slot.count_ones() as usize;
        }
        if weight + nonzero_outputs > bound.load(AtomicOrdering::Relaxed) {
            continue;
        }
        // a zero or repeated row can be dropped for a strictly smaller s at no extra cost
        for r in 0..s {
            if v[r] == 0 || v[..r].contains(&v[r]) {
                continue 'outer;
            }
        }
        if let Some(c) = best_q(&v, f_rows, n) {
            if c.wires > bound.load(AtomicOrdering::Relaxed) {
                continue;
            }
            bound.fetch_min(c.wires, AtomicOrdering::Relaxed);
            if best.as_ref().is_none_or(|b| c.cmp(b) == Ordering::Less) {
                best = Some(c);
            }
        }
    }
    best
}

/// Exact minimum of `wires(Q) + wires(V)` over all `Q·V = F` with at most
/// `s_max` middle gates. Ties go to the smallest `(s, Q, V)` compared as
/// row-major bit strings. Needs `s_max · n <= 26`.
pub fn exhaustive_factorize(f: &BitMatrix, s_max: usize, threads: usize) -> Result<Factorization> {
    let (m, n) = f.shape();
    if s_max * n > EXHAUSTIVE_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "exhaustive search needs s_max * cols <= {EXHAUSTIVE_LIMIT}, got {s_max} * {n}"
        )));
    }
    let rank = f.rank();
    if s_max < rank {
        return Err(Error::NoFactorization { s_max });
    }
    let f_rows: Vec<u64> = (0..m).map(|i| f.row_mask(i)).collect();
    let threads = threads.max(1);
    let bound = AtomicUsize::new(usize::MAX);
    let mut best: Option<Candidate> = None;
    for s in rank..=s_max {
        let total = 1u64 << (s * n);
        let chunk = total.div_ceil(threads as u64).max(1);
        let found: Vec<Option<Candidate>> = thread::scope(|scope| {
            let handles: Vec<_> = (0..threads as u64)
                .map(|t| {
                    let (lo, hi) = ((t * chunk).min(total), ((t + 1) * chunk).min(total));
                    let (f_rows, bound) = (&f_rows, &bound);
                    scope.spawn(move || search_range(s, n, f_rows, lo, hi, bound))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("search worker panicked")).collect()
        });
        for c in found.into_iter().flatten() {
            if best.as_ref().is_none_or(|b| c < *b) {
                best = Some(c);
            }
        }
    }
    let c = best.ok_or(Error::NoFactorization { s_max })?;
    let v = BitMatrix::from_row_masks(n, &c.v);
    let q = BitMatrix::from_row_masks(c.s, &c.q);
    Ok(Factorization { q, v })
}

/// Greedy common-subexpression extraction, starting from `V = F, Q = I`.
pub fn greedy_cse_factorize(f: &BitMatrix) -> Factorization {
    let mut st = Greedy {
        v: (0..f.rows()).map(|i| f.row_support(i)).collect(),
        q: (0..f.rows()).map(|j| vec![j]).collect(),
    };
    st.cleanup();
    loop {
        let current = st.wires();
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for row in &st.v {
            for (x, &a) in row.iter().enumerate() {
                for &b in &row[x + 1..] {
                    *counts.entry((a, b)).or_default() += 1;
                }
            }
        }
        let Some(&top) = counts.values().max() else { break };
        let mut choice: Option<(usize, (usize, usize), Greedy)> = None;
        for (&pair, _) in counts.iter().filter(|(_, &c)| c == top) {
            let mut next = st.clone();
            next.extract(pair);
            let w = next.wires();
            if choice.as_ref().is_none_or(|(bw, _, _)| w < *bw) {
                choice = Some((w, pair, next));
            }
        }
        match choice {
            Some((w, _, next)) if w < current => st = next,
            _ => break,
        }
    }
    st.into_factorization(f.rows(), f.cols())
}

/// Middle rows as sorted input lists, outputs as sorted middle lists.
#[derive(Debug, Clone)]
struct Greedy {
    v: Vec<Vec<usize>>,
    q: Vec<Vec<usize>>,
}

fn toggle(list: &mut Vec<usize>, x: usize) {
    match list.binary_search(&x) {
        Ok(pos) => {
            list.remove(pos);
        }
        Err(pos) => list.insert(pos, x),
    }
}

impl Greedy {
    fn wires(&self) -> usize {
        self.v.iter().map(Vec::len).sum::<usize>() + self.q.iter().map(Vec::len).sum::<usize>()
    }

    fn extract(&mut self, (a, b): (usize, usize)) {
        let g = self.v.len();
        let mut affected = Vec::new();
        for (r, row) in self.v.iter_mut().enumerate() {
            if row.binary_search(&a).is_ok() && row.binary_search(&b).is_ok() {
                row.retain(|&x| x != a && x != b);
                affected.push(r);
            }
        }
        self.v.push(vec![a, b]);
        for out in &mut self.q {
            let hits = out.iter().filter(|r| affected.binary_search(r).is_ok()).count();
            if hits % 2 == 1 {
                out.push(g);
            }
        }
        self.cleanup();
    }

    /// Drops empty rows, merges duplicate rows and drops rows no output uses.
    fn cleanup(&mut self) {
        let mut first: HashMap<Vec<usize>, usize> = HashMap::new();
        // where each old row goes: Some(new index) or None when removed
        let mut target: Vec<Option<usize>> = vec![None; self.v.len()];
        let mut kept = Vec::new();
        for (r, row) in self.v.iter().enumerate() {
            if row.is_empty() {
                continue;
            }
            let idx = *first.entry(row.clone()).or_insert_with(|| {
                kept.push(row.clone());
                kept.len() - 1
            });
            target[r] = Some(idx);
        }
        for out in &mut self.q {
            let mut merged = Vec::new();
            for &r in out.iter() {
                if let Some(t) = target[r] {
                    toggle(&mut merged, t);
                }
            }
            *out = merged;
        }
        let mut used = vec![false; kept.len()];
        for out in &self.q {
            for &r in out {
                used[r] = true;
            }
        }
        let mut renumber = vec![usize::MAX; kept.len()];
        let mut v = Vec::new();
        for (r, row) in kept.into_iter().enumerate() {
            if used[r] {
                renumber[r] = v.len();
                v.push(row);
            }
        }
        for out in &mut self.q {
            for r in out.iter_mut() {
                *r = renumber[*r];
            }
            out.sort_unstable();
        }
        self.v = v;
    }

    fn into_factorization(self, m: usize, n: usize) -> Factorization {
        let s = self.v.len();
        let mut v = BitMatrix::zeros(s, n);
        for (r, row) in self.v.iter().enumerate() {
            for &x in row {
                v.set(r, x, true);
            }
        }
        let mut q = BitMatrix::zeros(m, s);
        for (j, out) in self.q.iter().enumerate() {
            for &r in out {
                q.set(j, r, true);
            }
        }
        Factorization { q, v }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::prefix_sum_operator;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: every (Q, V) pair with at most `s_max` middle
    /// gates, minimum wires only.
    fn brute_min_wires(f: &BitMatrix, s_max: usize) -> Option<usize> {
        let (m, n) = f.shape();
        let mut best = None;
        for s in 0..=s_max {
            for vbits in 0u64..1 << (s * n) {
                for qbits in 0u64..1 << (m * s) {
                    let mut v = BitMatrix::zeros(s, n);
                    let mut q = BitMatrix::zeros(m, s);
                    for r in 0..s {
                        for c in 0..n {
                            v.set(r, c, (vbits >> (r * n + c)) & 1 == 1);
                        }
                    }
                    for j in 0..m {
                        for r in 0..s {
                            q.set(j, r, (qbits >> (j * s + r)) & 1 == 1);
                        }
                    }
                    if q.mat_mul(&v).unwrap() == *f {
                        let w = q.total_weight() + v.total_weight();
                        best = Some(best.map_or(w, |b: usize| b.min(w)));
                    }
                }
            }
        }
        best
    }

    #[test]
    fn ones_2x2() {
        let f = BitMatrix::ones(2, 2);
        let e = exhaustive_factorize(&f, 2, 1).unwrap();
        assert_eq!(e.wires(), 4);
        assert_eq!(e.s(), 1);
        assert_eq!(e.v, BitMatrix::ones(1, 2));
        assert_eq!(e.q, BitMatrix::ones(2, 1));
        assert_eq!(Factorization::trivial(&f).wires(), 6);
        assert_eq!(greedy_cse_factorize(&f).wires(), 4);
    }

    #[test]
    fn identities_and_zero() {
        for n in 1..=4 {
            let f = BitMatrix::identity(n);
            let e = exhaustive_factorize(&f, n, 2).unwrap();
            assert_eq!(e.wires(), 2 * n);
            assert!(e.computes(&f));
            assert_eq!(greedy_cse_factorize(&f).wires(), 2 * n);
        }
        let z = BitMatrix::zeros(3, 3);
        let e = exhaustive_factorize(&z, 2, 1).unwrap();
        assert_eq!((e.wires(), e.s()), (0, 0));
        assert_eq!(greedy_cse_factorize(&z).wires(), 0);
    }

    #[test]
    fn matches_brute_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..25 {
            let f = BitMatrix::random(2, 3, &mut rng);
            let oracle = brute_min_wires(&f, 2);
            match exhaustive_factorize(&f, 2, 1) {
                Ok(e) => {
                    assert!(e.computes(&f));
                    assert_eq!(Some(e.wires()), oracle, "{f:?}");
                }
                Err(Error::NoFactorization { .. }) => assert_eq!(oracle, None),
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let f = BitMatrix::random(4, 4, &mut rng);
            let s = f.rank().max(1);
            let one = exhaustive_factorize(&f, s + 1, 1).unwrap();
            for t in [2, 3, 7] {
                assert_eq!(exhaustive_factorize(&f, s + 1, t).unwrap(), one);
            }
        }
    }

    #[test]
    fn limits() {
        let f = BitMatrix::identity(3);
        assert!(matches!(exhaustive_factorize(&f, 2, 1), Err(Error::NoFactorization { s_max: 2 })));
        assert!(matches!(
            exhaustive_factorize(&BitMatrix::identity(9), 3, 1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn greedy_prefix_sum() {
        let f = prefix_sum_operator(8).unwrap();
        let g = greedy_cse_factorize(&f);
        assert!(g.computes(&f));
        assert!(g.wires() < 44, "greedy gave {}", g.wires());
    }

    #[test]
    fn greedy_never_worse_than_trivial() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let f = BitMatrix::random(8, 8, &mut rng);
            let g = greedy_cse_factorize(&f);
            assert!(g.computes(&f));
            assert!(g.wires() <= Factorization::trivial(&f).wires());
        }
    }

    #[test]
    fn exhaustive_beats_or_ties_greedy() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let f = BitMatrix::random(3, 4, &mut rng);
            let e = exhaustive_factorize(&f, 5, 2).unwrap();
            let g = greedy_cse_factorize(&f);
            assert!(e.wires() <= g.wires());
            assert!(g.wires() <= Factorization::trivial(&f).wires());
        }
    }
}
