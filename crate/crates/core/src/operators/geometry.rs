//! Points and ranges with integer coordinates, and exact membership tests.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

/// Largest dimension a simplex may live in.
pub const MAX_SIMPLEX_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    dim: usize,
    points: Vec<Vec<i64>>,
}

impl PointSet {
    pub fn new(dim: usize, points: Vec<Vec<i64>>) -> Result<Self> {
        if let Some((i, p)) = points.iter().enumerate().find(|(_, p)| p.len() != dim) {
            return Err(Error::InvalidParameter(format!(
                "point {i} has {} coordinates, expected {dim}",
                p.len()
            )));
        }
        Ok(PointSet { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Range {
    /// Closed axis-aligned box.
    Box { lo: Vec<i64>, hi: Vec<i64> },
    /// `{x : a·x <= b}`.
    Halfspace { a: Vec<i64>, b: i64 },
    /// Closed simplex on `d + 1` affinely independent vertices.
    Simplex { vertices: Vec<Vec<i64>> },
}

impl Range {
    pub fn dim(&self) -> usize {
        match self {
            Range::Box { lo, .. } => lo.len(),
            Range::Halfspace { a, .. } => a.len(),
            Range::Simplex { vertices } => vertices.len().saturating_sub(1),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Range::Box { lo, hi } => {
                if lo.len() != hi.len() {
                    return Err(Error::InvalidParameter("box bounds differ in dimension".into()));
                }
            }
            Range::Halfspace { .. } => {}
            Range::Simplex { vertices } => {
                let d = self.dim();
                if vertices.is_empty() || d > MAX_SIMPLEX_DIM {
                    return Err(Error::InvalidParameter(format!(
                        "simplices need 2..={} vertices",
                        MAX_SIMPLEX_DIM + 1
                    )));
                }
                if vertices.iter().any(|v| v.len() != d) {
                    return Err(Error::InvalidParameter(format!(
                        "a simplex with {} vertices needs {d}-dimensional vertices",
                        d + 1
                    )));
                }
                if orientation(vertices)? == 0 {
                    return Err(Error::InvalidParameter("degenerate simplex".into()));
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[i64]) -> Result<bool> {
        if x.len() != self.dim() {
            return Err(Error::InvalidParameter(format!(
                "point of dimension {} tested against a {}-dimensional range",
                x.len(),
                self.dim()
            )));
        }
        match self {
            Range::Box { lo, hi } => Ok(x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(c, (l, h))| l <= c && c <= h)),
            Range::Halfspace { a, b } => {
                let mut dot: i128 = 0;
                for (ai, xi) in a.iter().zip(x) {
                    dot = (*ai as i128)
                        .checked_mul(*xi as i128)
                        .and_then(|t| dot.checked_add(t))
                        .ok_or(Error::Overflow("halfspace test"))?;
                }
                Ok(dot <= *b as i128)
            }
            Range::Simplex { vertices } => {
                let full = orientation(vertices)?;
                let mut swapped = vertices.clone();
                for i in 0..vertices.len() {
                    swapped[i] = x.to_vec();
                    let s = orientation(&swapped)?;
                    swapped[i] = vertices[i].clone();
                    if s != 0 && s != full {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }
}

/// Sign of `det[v1 - v0, …, vd - v0]`.
fn orientation(vertices: &[Vec<i64>]) -> Result<i8> {
    let d = vertices.len() - 1;
    let mut m: Vec<Vec<i128>> = (1..=d)
        .map(|r| {
            (0..d)
                .map(|c| vertices[r][c] as i128 - vertices[0][c] as i128)
                .collect()
        })
        .collect();
    Ok(bareiss_det(&mut m)?.signum() as i8)
}

/// Fraction-free Gaussian elimination; exact for integer matrices.
fn bareiss_det(m: &mut [Vec<i128>]) -> Result<i128> {
    let n = m.len();
    if n == 0 {
        return Ok(1);
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&r| m[r][k] != 0) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = m[i][j]
                    .checked_mul(m[k][k])
                    .zip(m[i][k].checked_mul(m[k][j]))
                    .and_then(|(a, b)| a.checked_sub(b))
                    .ok_or(Error::Overflow("orientation determinant"))?;
                m[i][j] = t / prev;
            }
        }
        prev = m[k][k];
    }
    Ok(sign * m[n - 1][n - 1])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeSet {
    dim: usize,
    ranges: Vec<Range>,
}

impl RangeSet {
    pub fn new(dim: usize, ranges: Vec<Range>) -> Result<Self> {
        for (i, r) in ranges.iter().enumerate() {
            r.validate()
                .map_err(|e| Error::InvalidParameter(format!("range {i}: {e}")))?;
            if r.dim() != dim {
                return Err(Error::InvalidParameter(format!(
                    "range {i} has dimension {}, expected {dim}",
                    r.dim()
                )));
            }
        }
        Ok(RangeSet { dim, ranges })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ranges(&self) -> &[Range] {
        &self.ranges
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }
}

/// `A(P,R)`: row `i`, column `j` is set iff point `j` lies in range `i`.
pub fn incidence_matrix(points: &PointSet, ranges: &RangeSet) -> Result<BitMatrix> {
    if points.dim() != ranges.dim() {
        return Err(Error::InvalidParameter(format!(
            "points are {}-dimensional, ranges {}-dimensional",
            points.dim(),
            ranges.dim()
        )));
    }
    let mut a = BitMatrix::zeros(ranges.len(), points.len());
    for (i, r) in ranges.ranges().iter().enumerate() {
        for (j, p) in points.points().iter().enumerate() {
            if r.contains(p)? {
                a.set(i, j, true);
            }
        }
    }
    Ok(a)
}

fn parse_ints(
    fields: &[(usize, &str)],
    lineno: usize,
    expected: usize,
    what: &str,
) -> Result<Vec<i64>> {
    if fields.len() != expected {
        let col = fields.first().map_or(1, |f| f.0);
        return Err(Error::parse(
            lineno,
            col,
            format!("{what} needs {expected} integers, found {}", fields.len()),
        ));
    }
    fields
        .iter()
        .map(|&(col, tok)| {
            tok.parse::<i64>()
                .map_err(|_| Error::parse(lineno, col, format!("`{tok}` is not an integer")))
        })
        .collect()
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

/// Reads a geometry file: `DIM d`, then any mix of `POINT`, `BOX`,
/// `HALFSPACE` and `SIMPLEX` (followed by `d + 1` `VERT` lines). Blank lines
/// and `#` comments are ignored.
pub fn parse_geometry(text: &str) -> Result<(PointSet, RangeSet)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("")))
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();
    let (hl, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, 1, "missing `DIM` line"))?;
    let ht = tokens(header);
    if ht[0].1 != "DIM" {
        return Err(Error::parse(hl, ht[0].0, "first line must be `DIM <d>`"));
    }
    let dim = parse_ints(&ht[1..], hl, 1, "DIM")?[0];
    if dim < 1 {
        return Err(Error::parse(hl, ht[1].0, "dimension must be positive"));
    }
    let d = dim as usize;
    let mut points = Vec::new();
    let mut ranges = Vec::new();
    while let Some((lineno, line)) = lines.next() {
        let t = tokens(line);
        let (col, kw) = t[0];
        let args = &t[1..];
        match kw {
            "POINT" => points.push(parse_ints(args, lineno, d, "POINT")?),
            "BOX" => {
                let v = parse_ints(args, lineno, 2 * d, "BOX")?;
                let lo = v.iter().step_by(2).copied().collect();
                let hi = v.iter().skip(1).step_by(2).copied().collect();
                ranges.push((lineno, Range::Box { lo, hi }));
            }
            "HALFSPACE" => {
                let mut v = parse_ints(args, lineno, d + 1, "HALFSPACE")?;
                let b = v.pop().unwrap();
                ranges.push((lineno, Range::Halfspace { a: v, b }));
            }
            "SIMPLEX" => {
                if !args.is_empty() {
                    return Err(Error::parse(lineno, args[0].0, "SIMPLEX takes no arguments"));
                }
                let mut vertices = Vec::with_capacity(d + 1);
                for _ in 0..=d {
                    let (vl, vline) = lines.next().ok_or_else(|| {
                        Error::parse(lineno, col, format!("SIMPLEX needs {} VERT lines", d + 1))
                    })?;
                    let vt = tokens(vline);
                    if vt[0].1 != "VERT" {
                        return Err(Error::parse(vl, vt[0].0, "expected `VERT`"));
                    }
                    vertices.push(parse_ints(&vt[1..], vl, d, "VERT")?);
                }
                ranges.push((lineno, Range::Simplex { vertices }));
            }
            other => {
                return Err(Error::parse(lineno, col, format!("unknown keyword `{other}`")));
            }
        }
    }
    for (lineno, r) in &ranges {
        r.validate()
            .map_err(|e| Error::parse(*lineno, 1, e.to_string()))?;
    }
    Ok((
        PointSet::new(d, points)?,
        RangeSet::new(d, ranges.into_iter().map(|(_, r)| r).collect())?,
    ))
}

pub fn geometry_to_text(points: &PointSet, ranges: &RangeSet) -> String {
    let join = |v: &[i64]| v.iter().map(i64::to_string).collect::<Vec<_>>().join(" ");
    let mut s = format!("DIM {}\n", points.dim());
    for p in points.points() {
        let _ = writeln!(s, "POINT {}", join(p));
    }
    for r in ranges.ranges() {
        match r {
            Range::Box { lo, hi } => {
                let v: Vec<i64> = lo.iter().zip(hi).flat_map(|(l, h)| [*l, *h]).collect();
                let _ = writeln!(s, "BOX {}", join(&v));
            }
            Range::Halfspace { a, b } => {
                let _ = writeln!(s, "HALFSPACE {} {b}", join(a));
            }
            Range::Simplex { vertices } => {
                s.push_str("SIMPLEX\n");
                for v in vertices {
                    let _ = writeln!(s, "VERT {}", join(v));
                }
            }
        }
    }
    s
}
