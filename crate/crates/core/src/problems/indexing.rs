//! The indexing problem: `k` bit strings of length `n`; an update selects a
//! column `j`, a query `i` returns bit `j` of string `i` for the most recent
//! update (column 0 before any update). Indices are 0-based.

use rand::Rng;

use crate::cellprobe::{Cells, DynamicDs};
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexingInstance {
    strings: BitMatrix,
}

impl IndexingInstance {
    /// Row `i` of `strings` is the string S_i.
    pub fn new(strings: BitMatrix) -> Self {
        IndexingInstance { strings }
    }

    pub fn random<R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> Self {
        IndexingInstance::new(BitMatrix::random(k, n, rng))
    }

    pub fn k(&self) -> usize {
        self.strings.rows()
    }

    pub fn n(&self) -> usize {
        self.strings.cols()
    }

    pub fn bit(&self, i: usize, j: usize) -> bool {
        self.strings.get(i, j)
    }

    pub fn strings(&self) -> &BitMatrix {
        &self.strings
    }

    /// File format: `k n` header, then `k` lines of `n` bits.
    pub fn parse_text(text: &str) -> Result<Self> {
        BitMatrix::parse_text(text).map(IndexingInstance::new)
    }

    pub fn to_text(&self) -> String {
        self.strings.to_text()
    }
}

fn check_address_space(cells: u64, w: u32) -> Result<()> {
    if cells > 0 && w < 64 && cells > 1u64 << w {
        return Err(Error::InvalidParameter(format!(
            "layout needs {cells} cells, more than 2^{w} addresses"
        )));
    }
    Ok(())
}

fn check_dims(ds_k: usize, ds_n: usize, input: &IndexingInstance) -> Result<()> {
    if input.k() != ds_k || input.n() != ds_n {
        return Err(Error::Domain(format!(
            "instance is {}x{}, structure was built for k={ds_k}, n={ds_n}",
            input.k(),
            input.n()
        )));
    }
    Ok(())
}

/// Packs `bits` into consecutive `w`-bit words.
fn pack(bits: impl Iterator<Item = bool>, w: u32) -> Vec<u64> {
    let mut out = Vec::new();
    for (pos, b) in bits.enumerate() {
        let (cell, off) = (pos / w as usize, pos % w as usize);
        if cell == out.len() {
            out.push(0);
        }
        if b {
            out[cell] |= 1 << off;
        }
    }
    out
}

/// Fast queries, slow updates: the matrix is stored column-major and an
/// update copies the selected column into a fixed answer region.
///
/// Layout with `c = ceil(k/w)`:
/// - `[0, c)`: answer region, bit `i` of the current column at cell `i / w`
/// - `[c + j*c, c + (j+1)*c)`: column `j`
#[derive(Debug, Clone)]
pub struct IndexingColCopy {
    k: usize,
    n: usize,
    w: u32,
}

impl IndexingColCopy {
    pub fn new(k: usize, n: usize, w: u32) -> Result<Self> {
        let c = k.div_ceil(w as usize) as u64;
        check_address_space(c * (n as u64 + 1), w)?;
        Ok(IndexingColCopy { k, n, w })
    }

    fn cells_per_column(&self) -> u64 {
        self.k.div_ceil(self.w as usize) as u64
    }

    fn column_base(&self, j: usize) -> u64 {
        self.cells_per_column() * (j as u64 + 1)
    }
}

pub fn indexing_baseline_colcopy(instance: &IndexingInstance, w: u32) -> Result<IndexingColCopy> {
    IndexingColCopy::new(instance.k(), instance.n(), w)
}

impl DynamicDs for IndexingColCopy {
    type Input = IndexingInstance;
    type Update = usize;
    type Query = usize;
    type Answer = bool;

    fn word_bits(&self) -> u32 {
        self.w
    }

    fn preprocess(&self, input: &IndexingInstance, cells: &mut dyn Cells) -> Result<()> {
        check_dims(self.k, self.n, input)?;
        for j in 0..self.n {
            let words = pack((0..self.k).map(|i| input.bit(i, j)), self.w);
            for (b, &word) in words.iter().enumerate() {
                cells.write(self.column_base(j) + b as u64, word)?;
                if j == 0 {
                    cells.write(b as u64, word)?;
                }
            }
        }
        Ok(())
    }

    fn update(&self, &j: &usize, cells: &mut dyn Cells) -> Result<()> {
        if j >= self.n {
            return Err(Error::Domain(format!("update index {j} outside [0, {})", self.n)));
        }
        for b in 0..self.cells_per_column() {
            let v = cells.read(self.column_base(j) + b)?;
            cells.write(b, v)?;
        }
        Ok(())
    }

    fn query(&self, &i: &usize, cells: &mut dyn Cells) -> Result<bool> {
        if i >= self.k {
            return Err(Error::Domain(format!("query index {i} outside [0, {})", self.k)));
        }
        let w = self.w as usize;
        Ok((cells.read((i / w) as u64)? >> (i % w)) & 1 == 1)
    }

    fn query_schedule(&self, &i: &usize) -> Option<Vec<u64>> {
        Some(vec![(i / self.w as usize) as u64])
    }

    fn update_schedule(&self, &j: &usize) -> Option<Vec<u64>> {
        let c = self.cells_per_column();
        Some((0..c).chain((0..c).map(|b| self.column_base(j) + b)).collect())
    }
}

/// Fast updates, slow queries: strings stored row-major, an update writes its
/// index into a register, and a query reads the register plus its whole row.
///
/// Layout with `r = ceil(n/w)`: cell 0 is the register, string `i` occupies
/// `[1 + i*r, 1 + (i+1)*r)`.
#[derive(Debug, Clone)]
pub struct IndexingRegister {
    k: usize,
    n: usize,
    w: u32,
}

impl IndexingRegister {
    pub fn new(k: usize, n: usize, w: u32) -> Result<Self> {
        let r = n.div_ceil(w as usize) as u64;
        check_address_space(1 + k as u64 * r, w)?;
        if n > 0 && w < 64 && (n as u64 - 1) >> w != 0 {
            return Err(Error::InvalidParameter(format!(
                "column index up to {} does not fit in {w} bits",
                n - 1
            )));
        }
        Ok(IndexingRegister { k, n, w })
    }

    fn cells_per_row(&self) -> u64 {
        self.n.div_ceil(self.w as usize) as u64
    }

    fn row_base(&self, i: usize) -> u64 {
        1 + i as u64 * self.cells_per_row()
    }
}

pub fn indexing_baseline_register(
    instance: &IndexingInstance,
    w: u32,
) -> Result<IndexingRegister> {
    IndexingRegister::new(instance.k(), instance.n(), w)
}

impl DynamicDs for IndexingRegister {
    type Input = IndexingInstance;
    type Update = usize;
    type Query = usize;
    type Answer = bool;

    fn word_bits(&self) -> u32 {
        self.w
    }

    fn preprocess(&self, input: &IndexingInstance, cells: &mut dyn Cells) -> Result<()> {
        check_dims(self.k, self.n, input)?;
        cells.write(0, 0)?;
        for i in 0..self.k {
            let words = pack((0..self.n).map(|j| input.bit(i, j)), self.w);
            for (b, &word) in words.iter().enumerate() {
                cells.write(self.row_base(i) + b as u64, word)?;
            }
        }
        Ok(())
    }

    fn update(&self, &j: &usize, cells: &mut dyn Cells) -> Result<()> {
        if j >= self.n {
            return Err(Error::Domain(format!("update index {j} outside [0, {})", self.n)));
        }
        cells.write(0, j as u64)
    }

    fn query(&self, &i: &usize, cells: &mut dyn Cells) -> Result<bool> {
        if i >= self.k {
            return Err(Error::Domain(format!("query index {i} outside [0, {})", self.k)));
        }
        let j = cells.read(0)? as usize;
        let mut row = Vec::with_capacity(self.cells_per_row() as usize);
        for b in 0..self.cells_per_row() {
            row.push(cells.read(self.row_base(i) + b)?);
        }
        // a register value past n can only come from garbage memory
        if j >= self.n {
            return Ok(false);
        }
        let w = self.w as usize;
        Ok((row[j / w] >> (j % w)) & 1 == 1)
    }

    fn query_schedule(&self, &i: &usize) -> Option<Vec<u64>> {
        Some(
            std::iter::once(0)
                .chain((0..self.cells_per_row()).map(|b| self.row_base(i) + b))
                .collect(),
        )
    }

    fn update_schedule(&self, _j: &usize) -> Option<Vec<u64>> {
        Some(vec![0])
    }
}
