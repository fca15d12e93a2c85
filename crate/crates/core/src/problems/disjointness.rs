//! Set disjointness: preprocess S ⊆ [n], insert elements into an initially
//! empty T, and ask whether S ∩ T = ∅. Elements are 0-based.

use std::collections::BTreeSet;

use rand::Rng;

use crate::cellprobe::{Cells, DynamicDs};
use crate::error::{Error, Result};
use crate::gf2::parse_bit_row;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjointnessInstance {
    n: usize,
    set: BTreeSet<usize>,
}

impl DisjointnessInstance {
    pub fn new(n: usize, set: impl IntoIterator<Item = usize>) -> Result<Self> {
        let set: BTreeSet<usize> = set.into_iter().collect();
        if let Some(&x) = set.iter().find(|&&x| x >= n) {
            return Err(Error::Domain(format!("element {x} outside [0, {n})")));
        }
        Ok(DisjointnessInstance { n, set })
    }

    /// The set whose characteristic vector is the low `n` bits of `mask`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64);
        DisjointnessInstance {
            n,
            set: (0..n).filter(|&x| (mask >> x) & 1 == 1).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        DisjointnessInstance {
            n,
            set: (0..n).filter(|_| rng.gen()).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn set(&self) -> &BTreeSet<usize> {
        &self.set
    }

    pub fn contains(&self, x: usize) -> bool {
        self.set.contains(&x)
    }

    /// [n] ∖ S.
    pub fn complement(&self) -> BTreeSet<usize> {
        (0..self.n).filter(|x| !self.set.contains(x)).collect()
    }

    /// File format: `n` on the first line, then one line of `n` bits for S.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(1, 1, "missing universe size"))?;
        let n: usize = header
            .trim()
            .parse()
            .map_err(|_| Error::parse(1, 1, format!("`{}` is not a count", header.trim())))?;
        let row = lines
            .next()
            .ok_or_else(|| Error::parse(2, 1, "missing membership row"))?;
        let mut set = BTreeSet::new();
        parse_bit_row(row.trim_end_matches('\r'), n, 2, |j| {
            set.insert(j);
        })?;
        for (i, line) in lines.enumerate() {
            if !line.trim().is_empty() {
                return Err(Error::parse(i + 3, 1, "unexpected trailing content"));
            }
        }
        Ok(DisjointnessInstance { n, set })
    }

    pub fn to_text(&self) -> String {
        let row: String = (0..self.n)
            .map(|x| if self.set.contains(&x) { '1' } else { '0' })
            .collect();
        format!("{}\n{row}\n", self.n)
    }
}

/// Characteristic vectors of S and T in two fixed regions of `c = ceil(n/w)`
/// cells each: S at `[0, c)`, T at `[c, 2c)`. Inserting `x` ORs one bit into
/// one T cell, so every update is memoryless. The query reads both regions.
#[derive(Debug, Clone)]
pub struct DisjointnessBitset {
    n: usize,
    w: u32,
}

impl DisjointnessBitset {
    pub fn new(n: usize, w: u32) -> Result<Self> {
        let c = n.div_ceil(w as usize) as u64;
        if c > 0 && w < 64 && 2 * c > 1u64 << w {
            return Err(Error::InvalidParameter(format!(
                "layout needs {} cells, more than 2^{w} addresses",
                2 * c
            )));
        }
        Ok(DisjointnessBitset { n, w })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn region_cells(&self) -> u64 {
        self.n.div_ceil(self.w as usize) as u64
    }

    fn t_cell(&self, x: usize) -> u64 {
        self.region_cells() + (x / self.w as usize) as u64
    }
}

pub fn disjointness_bitset(instance: &DisjointnessInstance, w: u32) -> Result<DisjointnessBitset> {
    DisjointnessBitset::new(instance.n(), w)
}

impl DynamicDs for DisjointnessBitset {
    type Input = DisjointnessInstance;
    type Update = usize;
    type Query = ();
    /// `true` iff S ∩ T = ∅.
    type Answer = bool;

    fn word_bits(&self) -> u32 {
        self.w
    }

    fn preprocess(&self, input: &DisjointnessInstance, cells: &mut dyn Cells) -> Result<()> {
        if input.n() != self.n {
            return Err(Error::Domain(format!(
                "instance universe {} differs from structure universe {}",
                input.n(),
                self.n
            )));
        }
        let c = self.region_cells();
        let w = self.w as usize;
        for b in 0..c {
            let lo = b as usize * w;
            let word = input
                .set()
                .range(lo..lo + w)
                .fold(0u64, |acc, &x| acc | 1 << (x - lo));
            cells.write(b, word)?;
            cells.write(c + b, 0)?;
        }
        Ok(())
    }

    fn update(&self, &x: &usize, cells: &mut dyn Cells) -> Result<()> {
        if x >= self.n {
            return Err(Error::Domain(format!("element {x} outside [0, {})", self.n)));
        }
        let addr = self.t_cell(x);
        let old = cells.read(addr)?;
        cells.write(addr, old | 1 << (x % self.w as usize))
    }

    fn query(&self, _: &(), cells: &mut dyn Cells) -> Result<bool> {
        let c = self.region_cells();
        let mut s = Vec::with_capacity(c as usize);
        for b in 0..c {
            s.push(cells.read(b)?);
        }
        let mut disjoint = true;
        for (b, sv) in s.into_iter().enumerate() {
            disjoint &= cells.read(c + b as u64)? & sv == 0;
        }
        Ok(disjoint)
    }

    fn query_schedule(&self, _: &()) -> Option<Vec<u64>> {
        Some((0..2 * self.region_cells()).collect())
    }

    fn update_schedule(&self, &x: &usize) -> Option<Vec<u64>> {
        Some(vec![self.t_cell(x)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cellprobe::{check_memoryless, run_instrumented, Memory, Op};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn answer(ds: &DisjointnessBitset, s: &DisjointnessInstance, t: &[usize]) -> bool {
        let mut script = vec![Op::Preprocess(s.clone())];
        script.extend(t.iter().map(|&x| Op::Update(x)));
        script.push(Op::Query(()));
        let run = run_instrumented(ds, &script, Memory::new(ds.word_bits()).unwrap()).unwrap();
        let answer = *run.answers().next().unwrap();
        answer
    }

    #[test]
    fn probe_counts() {
        let s = DisjointnessInstance::new(8, [1, 2]).unwrap();
        let ds = disjointness_bitset(&s, 8).unwrap();
        let script = vec![Op::Preprocess(s), Op::Update(3), Op::Query(())];
        let run = run_instrumented(&ds, &script, Memory::new(8).unwrap()).unwrap();
        assert_eq!(run.update_stats().max, 1);
        assert_eq!(run.query_stats().max, 2);
    }

    #[test]
    fn small_examples() {
        let s = DisjointnessInstance::new(8, [1, 2]).unwrap();
        let ds = disjointness_bitset(&s, 8).unwrap();
        assert!(answer(&ds, &s, &[3, 4]));
        assert!(!answer(&ds, &s, &[2]));
        assert!(answer(&ds, &s, &[]));
    }

    #[test]
    fn exhaustive_small_universes() {
        for n in 0..=10usize {
            let ds = DisjointnessBitset::new(n, 4).unwrap();
            for smask in 0u64..1 << n {
                let s = DisjointnessInstance::from_mask(n, smask);
                // a handful of T per S keeps this at a few thousand runs per n
                for tmask in (0u64..1 << n).step_by(((1usize << n) / 16).max(1)) {
                    let t: Vec<usize> = (0..n).filter(|&x| (tmask >> x) & 1 == 1).collect();
                    assert_eq!(answer(&ds, &s, &t), smask & tmask == 0, "n={n} S={smask:b} T={tmask:b}");
                }
            }
        }
    }

    #[test]
    fn exhaustive_all_pairs_n6() {
        let ds = DisjointnessBitset::new(6, 3).unwrap();
        for smask in 0u64..64 {
            let s = DisjointnessInstance::from_mask(6, smask);
            for tmask in 0u64..64 {
                let t: Vec<usize> = (0..6).filter(|&x| (tmask >> x) & 1 == 1).collect();
                assert_eq!(answer(&ds, &s, &t), smask & tmask == 0);
            }
        }
    }

    #[test]
    fn random_pairs_n64() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let ds = DisjointnessBitset::new(64, 16).unwrap();
        for _ in 0..1000 {
            let s = DisjointnessInstance::random(64, &mut rng);
            let t: Vec<usize> = (0..64).filter(|_| rng.gen_bool(0.05)).collect();
            let expected = t.iter().all(|x| !s.contains(*x));
            assert_eq!(answer(&ds, &s, &t), expected);
        }
    }

    #[test]
    fn inserts_are_memoryless() {
        let ds = DisjointnessBitset::new(8, 8).unwrap();
        let ups: Vec<usize> = (0..8).collect();
        let report = check_memoryless(&ds, &ups, 8, 3).unwrap();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn parse_and_errors() {
        let inst = DisjointnessInstance::parse_text("5\n01001\n").unwrap();
        assert_eq!(inst.set().iter().copied().collect::<Vec<_>>(), vec![1, 4]);
        assert_eq!(inst.to_text(), "5\n01001\n");
        assert!(matches!(
            DisjointnessInstance::parse_text("5\n0100\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(DisjointnessInstance::new(3, [3]).is_err());
        let ds = DisjointnessBitset::new(8, 8).unwrap();
        assert!(matches!(
            ds.update(&8, &mut Memory::new(8).unwrap()),
            Err(Error::Domain(_))
        ));
    }
}
