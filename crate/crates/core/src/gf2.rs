//! Dense matrices over GF(2) with rows packed into 64-bit words.
//!
//! Bit `j` of a row lives in word `j / 64` at bit position `j % 64`. Bits past
//! `cols` in the last word of each row are always zero; every mutating method
//! keeps that true so that word-level comparisons and popcounts stay exact.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

const WORD: usize = 64;

fn words_for(cols: usize) -> usize {
    cols.div_ceil(WORD)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        BitMatrix {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, true);
            }
        }
        m
    }

    /// Builds a matrix from rows of 0/1 values or `'0'`/`'1'` characters. All
    /// rows must have equal length.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::InvalidParameter(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for (j, &b) in row.iter().enumerate() {
                match b {
                    0 | b'0' => {}
                    1 | b'1' => m.set(i, j, true),
                    other => {
                        return Err(Error::InvalidParameter(format!(
                            "entry ({i},{j}) is {other}, expected 0 or 1"
                        )))
                    }
                }
            }
        }
        Ok(m)
    }

    /// Builds a matrix whose rows are the low `cols` bits of each mask.
    pub fn from_row_masks(cols: usize, masks: &[u64]) -> Self {
        assert!(cols <= WORD, "from_row_masks supports at most 64 columns");
        let mut m = Self::zeros(masks.len(), cols);
        let keep = if cols == WORD { u64::MAX } else { (1u64 << cols) - 1 };
        for (i, &mask) in masks.iter().enumerate() {
            if cols > 0 {
                m.data[i * m.stride] = mask & keep;
            }
        }
        m
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(rows, cols);
        for w in m.data.iter_mut() {
            *w = rng.gen();
        }
        m.mask_tails();
        m
    }

    fn mask_tails(&mut self) {
        let rem = self.cols % WORD;
        if rem == 0 || self.stride == 0 {
            return;
        }
        let keep = (1u64 << rem) - 1;
        for r in 0..self.rows {
            self.data[r * self.stride + self.stride - 1] &= keep;
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        (self.data[i * self.stride + j / WORD] >> (j % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        let w = &mut self.data[i * self.stride + j / WORD];
        let bit = 1u64 << (j % WORD);
        if value {
            *w |= bit;
        } else {
            *w &= !bit;
        }
    }

    pub fn flip(&mut self, i: usize, j: usize) {
        let v = self.get(i, j);
        self.set(i, j, !v);
    }

    /// Packed words of row `i`.
    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    fn row_words_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    /// Row `i` as a mask; only valid for matrices with at most 64 columns.
    pub fn row_mask(&self, i: usize) -> u64 {
        assert!(self.cols <= WORD, "row_mask needs at most 64 columns");
        if self.stride == 0 {
            0
        } else {
            self.data[i * self.stride]
        }
    }

    pub fn row_bits(&self, i: usize) -> Vec<bool> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    /// Column indices of the ones in row `i`, ascending.
    pub fn row_support(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (wi, &w) in self.row_words(i).iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let t = w.trailing_zeros() as usize;
                out.push(wi * WORD + t);
                w &= w - 1;
            }
        }
        out
    }

    pub fn col_support(&self, j: usize) -> Vec<usize> {
        (0..self.rows).filter(|&i| self.get(i, j)).collect()
    }

    /// XORs row `src` of `other` into row `dst` of `self`.
    pub fn xor_row_from(&mut self, dst: usize, other: &BitMatrix, src: usize) {
        assert_eq!(self.cols, other.cols);
        let stride = self.stride;
        let s = &other.data[src * stride..(src + 1) * stride];
        for (d, s) in self.row_words_mut(dst).iter_mut().zip(s) {
            *d ^= *s;
        }
    }

    pub fn mat_mul(&self, rhs: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                op: "mat_mul",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: rhs.rows,
                right_cols: rhs.cols,
            });
        }
        let mut out = BitMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in self.row_support(i) {
                out.xor_row_from(i, rhs, k);
            }
        }
        Ok(out)
    }

    /// `self · x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[bool]) -> Result<Vec<bool>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                op: "mul_vec",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: x.len(),
                right_cols: 1,
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row_support(i).into_iter().filter(|&j| x[j]).count() % 2 == 1)
            .collect())
    }

    pub fn row_weights(&self) -> Vec<usize> {
        (0..self.rows)
            .map(|i| {
                self.row_words(i)
                    .iter()
                    .map(|w| w.count_ones() as usize)
                    .sum()
            })
            .collect()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        let mut out = vec![0; self.cols];
        for i in 0..self.rows {
            for j in self.row_support(i) {
                out[j] += 1;
            }
        }
        out
    }

    pub fn total_weight(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in self.row_support(i) {
                out.set(j, i, true);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// Rank over GF(2) by Gaussian elimination on a copy.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..m.cols {
            let Some(pivot) = (rank..m.rows).find(|&r| m.get(r, col)) else {
                continue;
            };
            if pivot != rank {
                for w in 0..m.stride {
                    m.data.swap(pivot * m.stride + w, rank * m.stride + w);
                }
            }
            for r in 0..m.rows {
                if r != rank && m.get(r, col) {
                    let (a, b) = (r * m.stride, rank * m.stride);
                    for w in 0..m.stride {
                        let v = m.data[b + w];
                        m.data[a + w] ^= v;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    /// Row-major 0/1 characters, the ordering used for lexicographic tie-breaks.
    pub fn serialize_bits(&self) -> String {
        let mut s = String::with_capacity(self.rows * self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                s.push(if self.get(i, j) { '1' } else { '0' });
            }
        }
        s
    }

    /// Canonical text form: `<rows> <cols>` then one line of `cols` 0/1 characters per row.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                s.push(if self.get(i, j) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<BitMatrix> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, 1, "missing `<rows> <cols>` header"))?;
        let (rows, cols) = parse_header(header)?;
        let mut m = BitMatrix::zeros(rows, cols);
        for i in 0..rows {
            let (lineno, line) = lines.next().ok_or_else(|| {
                Error::parse(i + 2, 1, format!("expected {rows} rows, found {i}"))
            })?;
            let line = line.trim_end_matches('\r');
            parse_bit_row(line, cols, lineno + 1, |j| m.set(i, j, true))?;
        }
        for (lineno, line) in lines {
            if !line.trim().is_empty() {
                return Err(Error::parse(lineno + 1, 1, "unexpected trailing content"));
            }
        }
        Ok(m)
    }
}

fn parse_header(header: &str) -> Result<(usize, usize)> {
    let mut fields = header.split_whitespace();
    let mut next = |what: &str| -> Result<usize> {
        let tok = fields
            .next()
            .ok_or_else(|| Error::parse(1, header.len() + 1, format!("missing {what}")))?;
        let col = tok.as_ptr() as usize - header.as_ptr() as usize + 1;
        tok.parse()
            .map_err(|_| Error::parse(1, col, format!("{what} `{tok}` is not a count")))
    };
    let rows = next("row count")?;
    let cols = next("column count")?;
    if fields.next().is_some() {
        return Err(Error::parse(1, 1, "header has more than two fields"));
    }
    Ok((rows, cols))
}

/// Parses one line of exactly `cols` characters from {0,1}, calling `on_one`
/// for each set position. `lineno` is 1-based and only used in diagnostics.
pub(crate) fn parse_bit_row(
    line: &str,
    cols: usize,
    lineno: usize,
    mut on_one: impl FnMut(usize),
) -> Result<()> {
    let mut count = 0;
    for (j, ch) in line.chars().enumerate() {
        match ch {
            '0' => {}
            '1' => {
                if j < cols {
                    on_one(j)
                }
            }
            other => {
                return Err(Error::parse(
                    lineno,
                    j + 1,
                    format!("unexpected character `{other}`, expected 0 or 1"),
                ))
            }
        }
        count += 1;
    }
    if count != cols {
        return Err(Error::parse(
            lineno,
            count.min(cols) + 1,
            format!("row has {count} entries, expected {cols}"),
        ));
    }
    Ok(())
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            for j in 0..self.cols {
                f.write_str(if self.get(i, j) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn m(rows: &[&[u8]]) -> BitMatrix {
        BitMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let a = m(&[&[1, 0, 1], &[0, 1, 1], &[1, 1, 0]]);
        assert_eq!(BitMatrix::identity(3).mat_mul(&a).unwrap(), a);
        assert_eq!(a.mat_mul(&BitMatrix::identity(3)).unwrap(), a);
    }

    #[test]
    fn ones_squared_vanishes() {
        let j = BitMatrix::ones(2, 2);
        assert_eq!(j.mat_mul(&j).unwrap(), BitMatrix::zeros(2, 2));
    }

    #[test]
    fn small_product() {
        let q = m(&[&[1, 0], &[1, 1]]);
        let v = m(&[&[1, 1], &[0, 1]]);
        assert_eq!(q.mat_mul(&v).unwrap(), m(&[&[1, 1], &[1, 0]]));
    }

    #[test]
    fn mismatch_names_both_shapes() {
        let err = BitMatrix::zeros(2, 3).mat_mul(&BitMatrix::zeros(2, 3)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2x3"), "{msg}");
        assert!(matches!(err, Error::DimensionMismatch { left_cols: 3, right_rows: 2, .. }));
    }

    #[test]
    fn weights() {
        let i4 = BitMatrix::identity(4);
        assert_eq!(i4.row_weights(), vec![1; 4]);
        assert_eq!(i4.col_weights(), vec![1; 4]);
        assert_eq!(i4.total_weight(), 4);
        let z = BitMatrix::zeros(3, 5);
        assert_eq!(z.row_weights(), vec![0; 3]);
        assert_eq!(z.col_weights(), vec![0; 5]);
        assert_eq!(z.total_weight(), 0);
        let lt = m(&[&[1, 0, 0, 0], &[1, 1, 0, 0], &[1, 1, 1, 0], &[1, 1, 1, 1]]);
        assert_eq!(lt.row_weights(), vec![1, 2, 3, 4]);
        assert_eq!(lt.col_weights(), vec![4, 3, 2, 1]);
        assert_eq!(lt.total_weight(), 10);
    }

    #[test]
    fn transpose_and_equality() {
        assert_eq!(BitMatrix::identity(5).transpose(), BitMatrix::identity(5));
        assert_eq!(BitMatrix::ones(2, 3).transpose(), BitMatrix::ones(3, 2));
        let a = m(&[&[1, 0, 1], &[0, 0, 1]]);
        assert_eq!(a, a.clone());
        let mut b = a.clone();
        b.flip(1, 0);
        assert_ne!(a, b);
    }

    #[test]
    fn empty_matrices() {
        let z = BitMatrix::zeros(0, 0);
        assert_eq!(z.to_text(), "0 0\n");
        assert_eq!(BitMatrix::parse_text("0 0\n").unwrap(), z);
        let a = BitMatrix::zeros(3, 0);
        let b = BitMatrix::zeros(0, 4);
        assert_eq!(a.mat_mul(&b).unwrap(), BitMatrix::zeros(3, 4));
        assert_eq!(BitMatrix::parse_text(&a.to_text()).unwrap(), a);
    }

    #[test]
    fn wide_rows_cross_word_boundaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = BitMatrix::random(5, 130, &mut rng);
        let b = BitMatrix::random(130, 70, &mut rng);
        let c = a.mat_mul(&b).unwrap();
        for i in 0..5 {
            for j in 0..70 {
                let dot = (0..130).filter(|&k| a.get(i, k) && b.get(k, j)).count() % 2 == 1;
                assert_eq!(c.get(i, j), dot);
            }
        }
        assert_eq!(a.total_weight(), a.row_weights().iter().sum::<usize>());
    }

    #[test]
    fn text_roundtrip_is_byte_identical() {
        let text = "2 3\n101\n011\n";
        let a = BitMatrix::parse_text(text).unwrap();
        assert_eq!(a.to_text(), text);
    }

    #[test]
    fn parse_errors_carry_position() {
        match BitMatrix::parse_text("2 3\n101\n0x1\n") {
            Err(Error::Parse { line: 3, col: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match BitMatrix::parse_text("2 3\n101\n") {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match BitMatrix::parse_text("2 three\n") {
            Err(Error::Parse { line: 1, col: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(BitMatrix::parse_text("1 2\n1\n").is_err());
        assert!(BitMatrix::parse_text("1 2\n10\n11\n").is_err());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(BitMatrix::identity(4).rank(), 4);
        assert_eq!(BitMatrix::ones(3, 3).rank(), 1);
        assert_eq!(BitMatrix::zeros(2, 2).rank(), 0);
        assert_eq!(m(&[&[1, 1, 0], &[0, 1, 1], &[1, 0, 1]]).rank(), 2);
    }

    #[test]
    fn associativity_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..100 {
            let (a, b, c, d) = (
                rng.gen_range(0..=8),
                rng.gen_range(0..=8),
                rng.gen_range(0..=8),
                rng.gen_range(0..=8),
            );
            let x = BitMatrix::random(a, b, &mut rng);
            let y = BitMatrix::random(b, c, &mut rng);
            let z = BitMatrix::random(c, d, &mut rng);
            let left = x.mat_mul(&y).unwrap().mat_mul(&z).unwrap();
            let right = x.mat_mul(&y.mat_mul(&z).unwrap()).unwrap();
            assert_eq!(left, right);
        }
    }

    fn arb_matrix() -> impl Strategy<Value = BitMatrix> {
        (0usize..10, 0usize..80, any::<u64>()).prop_map(|(r, c, seed)| {
            BitMatrix::random(r, c, &mut ChaCha8Rng::seed_from_u64(seed))
        })
    }

    proptest! {
        #[test]
        fn transpose_is_involution(a in arb_matrix()) {
            prop_assert_eq!(a.transpose().transpose(), a);
        }

        #[test]
        fn weights_agree(a in arb_matrix()) {
            let t = a.total_weight();
            prop_assert_eq!(t, a.row_weights().iter().sum::<usize>());
            prop_assert_eq!(t, a.col_weights().iter().sum::<usize>());
            prop_assert_eq!(a.transpose().row_weights(), a.col_weights());
        }

        #[test]
        fn text_roundtrip(a in arb_matrix()) {
            let text = a.to_text();
            let back = BitMatrix::parse_text(&text).unwrap();
            prop_assert_eq!(back.to_text(), text);
            prop_assert_eq!(back, a);
        }
    }
}
