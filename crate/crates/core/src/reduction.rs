//! Floating-point LLL reduction of a row basis.
//!
//! Used only as preprocessing: the reduced basis is re-triangularized before
//! decoding and none of the work here is counted.

use thiserror::Error;

use crate::linalg::{dot, Matrix, RANK_TOLERANCE};

pub const DEFAULT_DELTA: f64 = 0.75;

/// Slack on the size-reduction bound so rounding noise on `|mu| = 1/2`
/// does not trigger a pointless reduction step.
const SIZE_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("LLL parameter delta = {0} outside (1/4, 1]")]
    BadDelta(f64),
    #[error("basis is rank deficient at row {row}")]
    RankDeficient { row: usize },
    #[error("basis has no rows")]
    Empty,
    #[error("non-finite basis entry")]
    NonFinite,
    #[error("reduction did not converge after {0} passes")]
    NoConvergence(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedBasis {
    pub g_reduced: Matrix,
    /// `g_reduced = unimodular * g`, row-major, `n x n`.
    pub unimodular: Vec<Vec<i64>>,
}

/// Gram–Schmidt data of a row basis: `mu[i][j]` for `j < i` and the squared
/// norms `b_star[i]` of the orthogonalized rows.
#[derive(Debug, Clone)]
pub struct GramSchmidt {
    pub mu: Vec<Vec<f64>>,
    pub b_star: Vec<f64>,
}

impl GramSchmidt {
    pub fn of(basis: &Matrix) -> Self {
        let n = basis.rows();
        let mut mu = vec![vec![0.0; n]; n];
        let mut b_star = vec![0.0; n];
        let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut v = basis.row(i).to_vec();
            for j in 0..i {
                let m = dot(basis.row(i), &star[j]) / b_star[j];
                mu[i][j] = m;
                for (x, s) in v.iter_mut().zip(&star[j]) {
                    *x -= m * s;
                }
            }
            mu[i][i] = 1.0;
            b_star[i] = dot(&v, &v);
            star.push(v);
        }
        GramSchmidt { mu, b_star }
    }

    /// Size-reduced (up to `SIZE_SLACK`) and Lovász condition for `delta`.
    pub fn is_reduced(&self, delta: f64, tol: f64) -> bool {
        let n = self.b_star.len();
        for i in 1..n {
            for j in 0..i {
                if self.mu[i][j].abs() > 0.5 + tol {
                    return false;
                }
            }
            let m = self.mu[i][i - 1];
            if self.b_star[i] < (delta - m * m) * self.b_star[i - 1] * (1.0 - tol) {
                return false;
            }
        }
        true
    }
}

pub fn lll_reduce(g: &Matrix, delta: f64) -> Result<ReducedBasis, ReductionError> {
    if !(delta > 0.25 && delta <= 1.0) {
        return Err(ReductionError::BadDelta(delta));
    }
    let n = g.rows();
    if n == 0 {
        return Err(ReductionError::Empty);
    }
    if g.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(ReductionError::NonFinite);
    }
    let gs = GramSchmidt::of(g);
    let max_b = gs.b_star.iter().cloned().fold(0.0f64, f64::max);
    for (row, &b) in gs.b_star.iter().enumerate() {
        // b_star are squared norms, so compare against the squared tolerance
        if !(b > RANK_TOLERANCE * RANK_TOLERANCE * max_b) {
            return Err(ReductionError::RankDeficient { row });
        }
    }

    let mut lll = Lll::new(g.clone());
    // Incremental updates drift; re-verify on a fresh orthogonalization and
    // run again from the current basis until it holds.
    const MAX_PASSES: usize = 8;
    for _ in 0..MAX_PASSES {
        lll.run(delta);
        let fresh = GramSchmidt::of(&lll.basis);
        if fresh.is_reduced(delta, 1e-6) {
            return Ok(ReducedBasis {
                g_reduced: lll.basis,
                unimodular: lll.transform,
            });
        }
        lll.reload();
    }
    Err(ReductionError::NoConvergence(MAX_PASSES))
}

struct Lll {
    basis: Matrix,
    transform: Vec<Vec<i64>>,
    mu: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl Lll {
    fn new(basis: Matrix) -> Self {
        let n = basis.rows();
        let transform = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        let gs = GramSchmidt::of(&basis);
        Lll {
            basis,
            transform,
            mu: gs.mu,
            b: gs.b_star,
        }
    }

    fn reload(&mut self) {
        let gs = GramSchmidt::of(&self.basis);
        self.mu = gs.mu;
        self.b = gs.b_star;
    }

    fn size_reduce(&mut self, k: usize, l: usize) {
        let m = self.mu[k][l];
        if m.abs() <= 0.5 + SIZE_SLACK {
            return;
        }
        let q = m.round();
        let qi = q as i64;
        let cols = self.basis.cols();
        for c in 0..cols {
            let v = self.basis[(l, c)];
            self.basis[(k, c)] -= q * v;
        }
        let (tk, tl) = if k > l {
            let (lo, hi) = self.transform.split_at_mut(k);
            (&mut hi[0], &lo[l])
        } else {
            unreachable!("size reduction always reduces a later row by an earlier one")
        };
        for (a, b) in tk.iter_mut().zip(tl.iter()) {
            *a -= qi * b;
        }
        self.mu[k][l] -= q;
        for j in 0..l {
            self.mu[k][j] -= q * self.mu[l][j];
        }
    }

    fn swap(&mut self, k: usize) {
        let n = self.b.len();
        let cols = self.basis.cols();
        for c in 0..cols {
            let tmp = self.basis[(k, c)];
            self.basis[(k, c)] = self.basis[(k - 1, c)];
            self.basis[(k - 1, c)] = tmp;
        }
        self.transform.swap(k, k - 1);
        for j in 0..k - 1 {
            let tmp = self.mu[k][j];
            self.mu[k][j] = self.mu[k - 1][j];
            self.mu[k - 1][j] = tmp;
        }
        let m = self.mu[k][k - 1];
        let big_b = self.b[k] + m * m * self.b[k - 1];
        self.mu[k][k - 1] = m * self.b[k - 1] / big_b;
        self.b[k] = self.b[k - 1] * self.b[k] / big_b;
        self.b[k - 1] = big_b;
        for i in k + 1..n {
            let t = self.mu[i][k];
            self.mu[i][k] = self.mu[i][k - 1] - m * t;
            self.mu[i][k - 1] = t + self.mu[k][k - 1] * self.mu[i][k];
        }
    }

    fn run(&mut self, delta: f64) {
        let n = self.b.len();
        let mut k = 1;
        while k < n {
            self.size_reduce(k, k - 1);
            let m = self.mu[k][k - 1];
            if self.b[k] < (delta - m * m) * self.b[k - 1] {
                self.swap(k);
                k = k.saturating_sub(1).max(1);
            } else {
                for l in (0..k - 1).rev() {
                    self.size_reduce(k, l);
                }
                k += 1;
            }
        }
    }
}
