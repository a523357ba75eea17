#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use spheredec::linalg::{lower_triangularize, LowerTriangularPair, Matrix};
use spheredec::reduction::lll_reduce;
use spheredec::{DecoderConfig, Domain};

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(n, n, |_, _| StandardNormal.sample(rng))
}

/// Random Gaussian lattice, LLL-reduced when `reduce` is set.
pub fn random_pair<R: Rng>(n: usize, reduce: bool, rng: &mut R) -> LowerTriangularPair {
    let mut g = gaussian_matrix(n, rng);
    if reduce {
        g = lll_reduce(&g, 0.75).unwrap().g_reduced;
    }
    lower_triangularize(&g).unwrap()
}

/// Received vector around a random lattice point.
pub fn random_received<R: Rng>(pair: &LowerTriangularPair, rng: &mut R) -> Vec<f64> {
    let n = pair.dim();
    let u: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
    let x = pair.g().combine(&u);
    x.iter()
        .map(|v| v + 2.0 * { let z: f64 = StandardNormal.sample(rng); z })
        .collect()
}

/// Received vector near the finite grid `{0..levels-1}^n`.
pub fn random_finite_received<R: Rng>(pair: &LowerTriangularPair, levels: i64, rng: &mut R) -> Vec<f64> {
    let n = pair.dim();
    let u: Vec<i64> = (0..n).map(|_| rng.gen_range(0..levels)).collect();
    let x = pair.g().combine(&u);
    x.iter()
        .map(|v| v + 0.7 * { let z: f64 = StandardNormal.sample(rng); z })
        .collect()
}

pub fn config(label: u8, levels: i64) -> DecoderConfig {
    DecoderConfig::from_label(label, Some((0, levels - 1))).unwrap()
}

pub fn finite_range(cfg: &DecoderConfig) -> Option<(i64, i64)> {
    match cfg.domain {
        Domain::Lattice => None,
        Domain::Finite { u_min, u_max } => Some((u_min, u_max)),
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300) || a == b
}

pub fn pair_of(rows: &[&[f64]]) -> LowerTriangularPair {
    LowerTriangularPair::from_generator(Matrix::from_rows(rows).unwrap()).unwrap()
}
