//! Exhaustive closest-point references. Nothing here shares code with the
//! decoder engine; candidates are scored by evaluating `||r - u G||^2`
//! directly (incrementally along an odometer walk).

use thiserror::Error;

use crate::linalg::{LowerTriangularPair, Matrix};
use crate::reduction::{lll_reduce, DEFAULT_DELTA};

/// Largest grid or box the oracles agree to walk.
pub const MAX_CANDIDATES: u128 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("search space of {0} candidates exceeds the limit of {MAX_CANDIDATES}")]
    TooLarge(u128),
    #[error("empty constellation range [{u_min}, {u_max}]")]
    EmptyRange { u_min: i64, u_max: i64 },
    #[error("received vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension must be at least 1")]
    EmptyDimension,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best_u: Vec<i64>,
    pub best_sq_dist: f64,
    /// Gap between the best and the second-best candidate. For the lattice
    /// oracle this is a lower bound when no second point lies in the box.
    pub margin: f64,
}

/// Minimizes `||r - u G||` over `u` in `[u_min, u_max]^n` by visiting every
/// grid point.
pub fn oracle_finite(
    g: &Matrix,
    r: &[f64],
    u_min: i64,
    u_max: i64,
) -> Result<OracleResult, OracleError> {
    if u_min > u_max {
        return Err(OracleError::EmptyRange { u_min, u_max });
    }
    let n = g.rows();
    check_dims(g, r)?;
    let lo = vec![u_min; n];
    let hi = vec![u_max; n];
    let size = box_size(&lo, &hi);
    if size > MAX_CANDIDATES {
        return Err(OracleError::TooLarge(size));
    }
    Ok(walk_box(g, r, &lo, &hi, f64::INFINITY))
}

/// Minimizes `||r - u G||` over all of `Z^n`.
///
/// The basis is LLL-reduced first (`G' = U G`) so the search box stays small;
/// the minimizer `u'` over `G'` maps back to `u = u' U`.
///
/// With `b = round(r H')` and `C0 = ||r - b G'||^2`, any `u'` at least as good
/// satisfies `u' - r H' = (x - r) H'` for its lattice point `x = u' G'`, so by
/// Cauchy–Schwarz `|u'_i - (r H')_i| <= ||x - r|| * ||H'_{:,i}|| <= sqrt(C0) *
/// ||H'_{:,i}||`. The box of those bounds contains the optimum. It is enlarged
/// by a factor 1.5 in squared radius so the runner-up usually lands inside it
/// and the reported margin is meaningful.
pub fn oracle_lattice(pair: &LowerTriangularPair, r: &[f64]) -> Result<OracleResult, OracleError> {
    check_dims(pair.g(), r)?;
    let n = pair.dim();
    let (g, unimodular) = match lll_reduce(pair.g(), DEFAULT_DELTA) {
        Ok(red) => (red.g_reduced, Some(red.unimodular)),
        Err(_) => (pair.g().clone(), None),
    };
    let h = pseudo_inverse_rows(&g);
    let rh = h.left_mul(r);
    let babai: Vec<i64> = rh.iter().map(|v| v.round() as i64).collect();
    let c0 = sq_dist(&g, r, &babai);
    let radius2 = 1.5 * c0;
    let radius = radius2.sqrt();
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for i in 0..n {
        let col_norm = (0..n).map(|k| h[(k, i)] * h[(k, i)]).sum::<f64>().sqrt();
        let w = radius * col_norm * (1.0 + 1e-12) + 1e-9;
        lo.push((rh[i] - w).ceil() as i64);
        hi.push((rh[i] + w).floor() as i64);
    }
    debug_assert!((0..n).all(|i| lo[i] <= babai[i] && babai[i] <= hi[i]));
    let size = box_size(&lo, &hi);
    if size > MAX_CANDIDATES {
        return Err(OracleError::TooLarge(size));
    }
    let mut res = walk_box(&g, r, &lo, &hi, radius2);
    if let Some(u) = unimodular {
        res.best_u = (0..n)
            .map(|j| (0..n).map(|i| res.best_u[i] * u[i][j]).sum())
            .collect();
        res.best_sq_dist = sq_dist(pair.g(), r, &res.best_u);
    }
    Ok(res)
}

/// Inverse of a square basis through its Gram matrix, `H = G^T (G G^T)^-1`,
/// solved column by column with Gaussian elimination. Only used to size the
/// search box, so modest accuracy is enough.
fn pseudo_inverse_rows(g: &Matrix) -> Matrix {
    let n = g.rows();
    let gram = g.gram();
    // solve gram * X = g, then H = X^T
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = gram.row(i).to_vec();
            row.extend_from_slice(g.row(i));
            row
        })
        .collect();
    let m = g.cols();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&x, &y| a[x][k].abs().total_cmp(&a[y][k].abs()))
            .unwrap();
        a.swap(k, piv);
        let d = a[k][k];
        for v in a[k].iter_mut() {
            *v /= d;
        }
        let pivot_row = a[k].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != k {
                let f = row[k];
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * p;
                }
            }
        }
    }
    Matrix::from_fn(m, n, |j, i| a[i][n + j])
}

fn check_dims(g: &Matrix, r: &[f64]) -> Result<(), OracleError> {
    if g.rows() == 0 {
        return Err(OracleError::EmptyDimension);
    }
    if r.len() != g.cols() {
        return Err(OracleError::DimensionMismatch {
            expected: g.cols(),
            got: r.len(),
        });
    }
    Ok(())
}

fn box_size(lo: &[i64], hi: &[i64]) -> u128 {
    lo.iter().zip(hi).fold(1u128, |acc, (&l, &h)| {
        acc.saturating_mul((i128::from(h) - i128::from(l) + 1).max(0) as u128)
    })
}

fn sq_dist(g: &Matrix, r: &[f64], u: &[i64]) -> f64 {
    let x = g.combine(u);
    r.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Odometer over the box, keeping `e = r - u G` up to date with one row
/// addition per step and rescoring exactly every time a new best is found.
/// `cap` bounds the runner-up distance used for the margin.
fn walk_box(g: &Matrix, r: &[f64], lo: &[i64], hi: &[i64], cap: f64) -> OracleResult {
    let n = lo.len();
    let m = g.cols();
    let mut u = lo.to_vec();
    let mut e: Vec<f64> = {
        let x = g.combine(&u);
        r.iter().zip(&x).map(|(a, b)| a - b).collect()
    };
    let mut best_u = u.clone();
    let mut best = f64::INFINITY;
    let mut second = f64::INFINITY;
    let mut steps: u64 = 0;
    loop {
        let d: f64 = e.iter().map(|v| v * v).sum();
        if d < best {
            second = best;
            best = d;
            best_u.copy_from_slice(&u);
        } else if d < second {
            second = d;
        }
        // advance
        let mut k = 0;
        loop {
            if k == n {
                let best_sq_dist = sq_dist(g, r, &best_u);
                let runner_up = second.min(cap.max(best_sq_dist));
                return OracleResult {
                    best_u,
                    best_sq_dist,
                    margin: (runner_up - best_sq_dist).max(0.0),
                };
            }
            if u[k] < hi[k] {
                u[k] += 1;
                for (ej, gj) in e.iter_mut().zip(g.row(k)) {
                    *ej -= gj;
                }
                break;
            }
            let span = (u[k] - lo[k]) as f64;
            u[k] = lo[k];
            for (ej, gj) in e.iter_mut().zip(g.row(k)) {
                *ej += span * gj;
            }
            k += 1;
        }
        steps += 1;
        // periodic exact refresh against drift
        if steps % 4096 == 0 {
            let x = g.combine(&u);
            for j in 0..m {
                e[j] = r[j] - x[j];
            }
        }
    }
}
