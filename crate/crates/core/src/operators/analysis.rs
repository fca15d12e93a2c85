//! Hardness properties of an incidence matrix: discrepancy, the spectrum of
//! its Gram matrix, and how much ranges overlap.

use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

pub const MAX_BRUTEFORCE_COLS: usize = 22;
pub const MAX_SPECTRUM_COLS: usize = 512;
pub const DEFAULT_JACOBI_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;

fn imbalance(weights: &[u32], rows: &[u64], coloring: u64, stop_at: u64) -> u64 {
    let mut worst = 0;
    for (&w, &r) in weights.iter().zip(rows) {
        let minus = (r & coloring).count_ones();
        let v = (w as i64 - 2 * minus as i64).unsigned_abs();
        if v > worst {
            worst = v;
            if worst >= stop_at {
                break;
            }
        }
    }
    worst
}

/// Exact `min_x max_i |row_i · x|` over all `x ∈ {−1,+1}^cols`.
pub fn discrepancy_bruteforce(a: &BitMatrix, threads: usize) -> Result<u64> {
    let n = a.cols();
    if n > MAX_BRUTEFORCE_COLS {
        return Err(Error::InvalidParameter(format!(
            "brute-force discrepancy handles at most {MAX_BRUTEFORCE_COLS} columns, got {n}; use sampling"
        )));
    }
    if n == 0 || a.rows() == 0 {
        return Ok(0);
    }
    let rows: Vec<u64> = (0..a.rows()).map(|i| a.row_mask(i)).collect();
    let weights: Vec<u32> = rows.iter().map(|r| r.count_ones()).collect();
    // x and −x have the same imbalance, so the last column is always +1
    let total = 1u64 << (n - 1);
    let threads = threads.max(1) as u64;
    let chunk = total.div_ceil(threads);
    let best = AtomicU64::new(u64::MAX);
    thread::scope(|scope| {
        for t in 0..threads {
            let (rows, weights, best) = (&rows, &weights, &best);
            scope.spawn(move || {
                for c in (t * chunk).min(total)..((t + 1) * chunk).min(total) {
                    let cur = best.load(Ordering::Relaxed);
                    if cur == 0 {
                        return;
                    }
                    let v = imbalance(weights, rows, c, cur);
                    if v < cur {
                        best.fetch_min(v, Ordering::Relaxed);
                    }
                }
            });
        }
    });
    Ok(best.into_inner())
}

/// Best imbalance over `trials` uniformly random colorings: an upper bound
/// on the discrepancy.
pub fn discrepancy_sample(a: &BitMatrix, trials: usize, seed: u64) -> Result<u64> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one sampled coloring".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = a.cols().div_ceil(64);
    let tail = a.cols() % 64;
    let weights = a.row_weights();
    let mut best = u64::MAX;
    for _ in 0..trials {
        let mut coloring: Vec<u64> = (0..words).map(|_| rng.gen()).collect();
        if tail != 0 {
            *coloring.last_mut().unwrap() &= (1u64 << tail) - 1;
        }
        let mut worst = 0u64;
        for (i, &w) in weights.iter().enumerate() {
            let minus: u32 = a
                .row_words(i)
                .iter()
                .zip(&coloring)
                .map(|(r, c)| (r & c).count_ones())
                .sum();
            worst = worst.max((w as i64 - 2 * minus as i64).unsigned_abs());
        }
        best = best.min(worst);
    }
    Ok(best)
}

/// Eigenvalues of `AᵀA`, largest first, by cyclic Jacobi rotations until the
/// off-diagonal Frobenius norm is at most `tol`.
pub fn gram_eigenvalues(a: &BitMatrix, tol: f64) -> Result<Vec<f64>> {
    let n = a.cols();
    if n > MAX_SPECTRUM_COLS {
        return Err(Error::InvalidParameter(format!(
            "spectrum needs at most {MAX_SPECTRUM_COLS} columns, got {n}"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let at = a.transpose();
    let mut g = vec![0f64; n * n];
    for i in 0..n {
        for j in i..n {
            let dot: u32 = at
                .row_words(i)
                .iter()
                .zip(at.row_words(j))
                .map(|(x, y)| (x & y).count_ones())
                .sum();
            g[i * n + j] = dot as f64;
            g[j * n + i] = dot as f64;
        }
    }
    let off = |g: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += g[i * n + j] * g[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    let mut residual = off(&g);
    while residual > tol {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, residual });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = g[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (g[p * n + p], g[q * n + q]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (gkp, gkq) = (g[k * n + p], g[k * n + q]);
                    g[k * n + p] = c * gkp - s * gkq;
                    g[k * n + q] = s * gkp + c * gkq;
                }
                for k in 0..n {
                    let (gpk, gqk) = (g[p * n + k], g[q * n + k]);
                    g[p * n + k] = c * gpk - s * gqk;
                    g[q * n + k] = s * gpk + c * gqk;
                }
                g[p * n + q] = 0.0;
                g[q * n + p] = 0.0;
            }
        }
        sweeps += 1;
        residual = off(&g);
    }
    let mut eig: Vec<f64> = (0..n).map(|i| g[i * n + i]).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}

/// Number of eigenvalues of `AᵀA` at least `threshold²`, i.e. singular
/// values of `A` at least `threshold`. Eigenvalues within `n·tol` below the
/// cut still count.
pub fn count_large(a: &BitMatrix, threshold: f64, tol: f64) -> Result<usize> {
    let eig = gram_eigenvalues(a, tol)?;
    let cut = threshold * threshold - a.cols() as f64 * tol;
    Ok(eig.iter().filter(|&&l| l >= cut).count())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionProfile {
    /// `|R_i ∩ P|` for each range.
    pub per_range: Vec<usize>,
    /// Largest `|R_i ∩ R_j ∩ P|` over `i ≠ j`, with the first pair attaining it.
    pub pairwise_max: usize,
    pub pairwise_argmax: Option<(usize, usize)>,
    /// Pairs of distinct ranges containing exactly the same points.
    pub identical_pairs: Vec<(usize, usize)>,
}

pub fn intersection_profile(a: &BitMatrix) -> IntersectionProfile {
    let m = a.rows();
    let mut pairwise_max = 0;
    let mut pairwise_argmax = None;
    let mut identical_pairs = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let common: usize = a
                .row_words(i)
                .iter()
                .zip(a.row_words(j))
                .map(|(x, y)| (x & y).count_ones() as usize)
                .sum();
            if pairwise_argmax.is_none() || common > pairwise_max {
                pairwise_max = common;
                pairwise_argmax = Some((i, j));
            }
            if a.row_words(i) == a.row_words(j) {
                identical_pairs.push((i, j));
            }
        }
    }
    IntersectionProfile {
        per_range: a.row_weights(),
        pairwise_max,
        pairwise_argmax,
        identical_pairs,
    }
}
