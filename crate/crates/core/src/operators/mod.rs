//! Linear operators worth factoring: prefix sums, incidence matrices of
//! points against ranges, and the affine-plane lines instance, together with
//! the properties that make such operators hard for linear structures.

mod analysis;
mod geometry;

pub use analysis::{
    count_large, discrepancy_bruteforce, discrepancy_sample, gram_eigenvalues,
    intersection_profile, IntersectionProfile, DEFAULT_JACOBI_TOL, MAX_BRUTEFORCE_COLS,
    MAX_SPECTRUM_COLS,
};
pub use geometry::{
    geometry_to_text, incidence_matrix, parse_geometry, PointSet, Range, RangeSet,
    MAX_SIMPLEX_DIM,
};

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

/// `n×n` lower-triangular ones: query `k` is the parity of positions `0..=k`.
pub fn prefix_sum_operator(n: usize) -> Result<BitMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("prefix sums need n >= 1".into()));
    }
    let mut f = BitMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            f.set(i, j, true);
        }
    }
    Ok(f)
}

/// Points of the affine plane over `Z_p` against its non-vertical lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridLines {
    pub p: usize,
    /// Column `x·p + y` is the point `(x, y)`.
    pub points: Vec<(usize, usize)>,
    /// Row `a·p + b` is the line `y = a·x + b (mod p)`.
    pub lines: Vec<(usize, usize)>,
    pub matrix: BitMatrix,
}

pub const MAX_GRID_PRIME: usize = 97;

fn is_prime(p: usize) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

pub fn grid_lines_instance(p: usize) -> Result<GridLines> {
    if !is_prime(p) || p > MAX_GRID_PRIME {
        return Err(Error::InvalidParameter(format!(
            "grid size must be a prime at most {MAX_GRID_PRIME}, got {p}"
        )));
    }
    let points: Vec<(usize, usize)> = (0..p).flat_map(|x| (0..p).map(move |y| (x, y))).collect();
    let lines: Vec<(usize, usize)> = (0..p).flat_map(|a| (0..p).map(move |b| (a, b))).collect();
    let mut matrix = BitMatrix::zeros(p * p, p * p);
    for &(a, b) in &lines {
        for x in 0..p {
            let y = (a * x + b) % p;
            matrix.set(a * p + b, x * p + y, true);
        }
    }
    Ok(GridLines {
        p,
        points,
        lines,
        matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_operator() {
        assert_eq!(prefix_sum_operator(1).unwrap(), BitMatrix::identity(1));
        assert_eq!(prefix_sum_operator(3).unwrap().row_weights(), vec![1, 2, 3]);
        assert_eq!(prefix_sum_operator(4).unwrap().total_weight(), 10);
        assert!(prefix_sum_operator(0).is_err());
    }

    #[test]
    fn grid_properties_exhaustive() {
        for p in [2usize, 3, 5, 7] {
            let g = grid_lines_instance(p).unwrap();
            let a = &g.matrix;
            assert_eq!(a.shape(), (p * p, p * p));
            assert!(a.row_weights().iter().all(|&w| w == p));
            assert!(a.col_weights().iter().all(|&w| w == p));
            assert_eq!(a.total_weight(), p * p * p);
            // independent pairwise check straight from the line equations
            for (i, &(a1, b1)) in g.lines.iter().enumerate() {
                for &(a2, b2) in &g.lines[i + 1..] {
                    let common = (0..p)
                        .filter(|&x| (a1 * x + b1) % p == (a2 * x + b2) % p)
                        .count();
                    assert!(common <= 1);
                }
            }
            assert!(intersection_profile(a).pairwise_max <= 1);
        }
    }

    #[test]
    fn grid_rejects_composites() {
        for p in [0, 1, 4, 9, 101] {
            assert!(grid_lines_instance(p).is_err());
        }
    }

    #[test]
    fn grid_spectrum_trace() {
        let g = grid_lines_instance(3).unwrap();
        let e = gram_eigenvalues(&g.matrix, DEFAULT_JACOBI_TOL).unwrap();
        let sum: f64 = e.iter().sum();
        assert!((sum - 27.0).abs() < 9.0 * DEFAULT_JACOBI_TOL + 1e-9);
    }

    #[test]
    fn grid_profile_p5() {
        let p = intersection_profile(&grid_lines_instance(5).unwrap().matrix);
        assert!(p.per_range.iter().all(|&c| c == 5));
        assert_eq!(p.pairwise_max, 1);
        assert!(p.identical_pairs.is_empty());
    }
}
