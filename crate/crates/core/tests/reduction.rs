mod common;

use common::{gaussian_matrix, rng};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use spheredec::linalg::{dot, lower_triangularize, Matrix};
use spheredec::reduction::{lll_reduce, GramSchmidt, DEFAULT_DELTA};

type Q = BigRational;

fn q(x: f64) -> Q {
    Q::from_float(x).unwrap()
}

fn qdot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

/// Textbook LLL in exact rational arithmetic, recomputing Gram–Schmidt from
/// scratch after every change.
fn exact_lll(rows: &[Vec<f64>], delta: Q) -> Vec<Vec<Q>> {
    let mut b: Vec<Vec<Q>> = rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect();
    let n = b.len();
    let gso = |b: &[Vec<Q>]| {
        let mut star: Vec<Vec<Q>> = Vec::new();
        let mut mu = vec![vec![Q::zero(); n]; n];
        for i in 0..n {
            let mut v = b[i].clone();
            for j in 0..i {
                mu[i][j] = qdot(&b[i], &star[j]) / qdot(&star[j], &star[j]);
                for (x, s) in v.iter_mut().zip(&star[j]) {
                    *x -= &mu[i][j] * s;
                }
            }
            star.push(v);
        }
        let norms: Vec<Q> = star.iter().map(|s| qdot(s, s)).collect();
        (mu, norms)
    };
    let half = Q::new(BigInt::one(), BigInt::from(2));
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            let (mu, _) = gso(&b);
            if mu[k][j].abs() > half {
                let r = (&mu[k][j] + &half).floor();
                let bj = b[j].clone();
                for (x, y) in b[k].iter_mut().zip(&bj) {
                    *x -= &r * y;
                }
            }
        }
        let (mu, norms) = gso(&b);
        let lhs = &norms[k];
        let m = &mu[k][k - 1];
        if *lhs >= (&delta - m * m) * &norms[k - 1] {
            k += 1;
        } else {
            b.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    b
}

fn int_det(m: &[Vec<i64>]) -> i128 {
    // Bareiss fraction-free elimination
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

fn covolume(g: &Matrix) -> f64 {
    let p = lower_triangularize(g).unwrap();
    (0..p.dim()).map(|i| p.g()[(i, i)]).product()
}

#[test]
fn matches_exact_reference_2d() {
    let rows = vec![vec![1.0, 0.0], vec![0.5, 0.001]];
    let g = Matrix::from_rows(&rows).unwrap();
    let got = lll_reduce(&g, DEFAULT_DELTA).unwrap();
    let want = exact_lll(&rows, Q::new(BigInt::from(3), BigInt::from(4)));
    for i in 0..2 {
        for j in 0..2 {
            let w = want[i][j].to_f64().unwrap();
            assert!((got.g_reduced[(i, j)] - w).abs() <= 1e-9, "{:?} vs {:?}", got.g_reduced, want);
        }
    }
    // first vector within the LLL bound 2^{(n-1)/2} lambda_1, here via covolume
    let b1 = dot(got.g_reduced.row(0), got.g_reduced.row(0));
    assert!(b1 <= (4.0f64 / 3.0).sqrt() * covolume(&g) * 1.000001);
}

#[test]
fn matches_exact_reference_random() {
    let mut rng = rng(21);
    for n in 2..=5 {
        let g = gaussian_matrix(n, &mut rng);
        let rows: Vec<Vec<f64>> = (0..n).map(|i| g.row(i).to_vec()).collect();
        let got = lll_reduce(&g, DEFAULT_DELTA).unwrap();
        let want = exact_lll(&rows, Q::new(BigInt::from(3), BigInt::from(4)));
        for i in 0..n {
            for j in 0..n {
                let w = want[i][j].to_f64().unwrap();
                assert!((got.g_reduced[(i, j)] - w).abs() <= 1e-9, "n = {n}");
            }
        }
    }
}

#[test]
fn exact_reference_is_reduced() {
    let rows = vec![vec![1.0, 0.0], vec![0.5, 0.001]];
    let b = exact_lll(&rows, Q::new(BigInt::from(3), BigInt::from(4)));
    let m = Matrix::from_fn(2, 2, |i, j| b[i][j].to_f64().unwrap());
    assert!(GramSchmidt::of(&m).is_reduced(0.75, 1e-9));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reduction_invariants(seed in any::<u64>(), n in 1usize..13, delta in prop::sample::select(vec![0.5, 0.75, 0.99])) {
        let mut rng = rng(seed);
        let g = gaussian_matrix(n, &mut rng);
        let red = lll_reduce(&g, delta).unwrap();
        let gs = GramSchmidt::of(&red.g_reduced);
        prop_assert!(gs.is_reduced(delta, 1e-6));
        prop_assert_eq!(int_det(&red.unimodular).abs(), 1);
        let (c0, c1) = (covolume(&g), covolume(&red.g_reduced));
        prop_assert!((c0 - c1).abs() <= 1e-8 * c0);
        // U g recomposes the reduced basis
        let scale = red.g_reduced.max_abs().max(g.max_abs());
        for i in 0..n {
            let row = g.combine(&red.unimodular[i]);
            for (j, v) in row.iter().enumerate() {
                prop_assert!((v - red.g_reduced[(i, j)]).abs() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn reduction_is_idempotent(seed in any::<u64>(), n in 1usize..10) {
        let mut rng = rng(seed);
        let g = gaussian_matrix(n, &mut rng);
        let once = lll_reduce(&g, DEFAULT_DELTA).unwrap().g_reduced;
        let twice = lll_reduce(&once, DEFAULT_DELTA).unwrap();
        for i in 0..n {
            let a = once.row(i);
            let b = twice.g_reduced.row(i);
            let same = a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9);
            let flipped = a.iter().zip(b).all(|(x, y)| (x + y).abs() <= 1e-9);
            prop_assert!(same || flipped, "row {} changed", i);
        }
    }
}
