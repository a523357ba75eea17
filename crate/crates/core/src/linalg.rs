//! Dense row-major matrices and the lower-triangular generator form consumed
//! by the decoders.
//!
//! A basis is stored with its basis vectors as rows. [`lower_triangularize`]
//! rotates an arbitrary full-rank `n x m` basis into a square lower-triangular
//! generator `G` with positive diagonal and returns `H = G^-1` alongside it.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use thiserror::Error;

/// Relative pivot threshold below which a basis is declared rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("basis is rank deficient (pivot {pivot:e} at row {row} below {threshold:e})")]
    RankDeficient {
        row: usize,
        pivot: f64,
        threshold: f64,
    },
    #[error("matrix is singular: zero diagonal entry at row {0}")]
    Singular(usize),
    #[error("matrix must have rows <= cols, got {rows}x{cols}")]
    BadShape { rows: usize, cols: usize },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not lower triangular: entry ({row},{col}) = {value}")]
    NotLowerTriangular { row: usize, col: usize, value: f64 },
    #[error("non-finite matrix entry at ({row},{col})")]
    NonFinite { row: usize, col: usize },
    #[error("vector length {got} does not match dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix parse error: {0}")]
    Parse(String),
}

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, LinalgError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != ncols {
                return Err(LinalgError::DimensionMismatch {
                    expected: ncols,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(LinalgError::NonFinite { row: i, col: j });
                }
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// `self * self^T`, the Gram matrix of the rows.
    pub fn gram(&self) -> Matrix {
        let mut out = Matrix::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in 0..=i {
                let v = dot(self.row(i), self.row(j));
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    /// Row vector times matrix: `x * self`.
    pub fn left_mul(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "left_mul shape mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += xi * a;
            }
        }
        out
    }

    /// Integer row vector times matrix: `u * self`.
    pub fn combine(&self, u: &[i64]) -> Vec<f64> {
        assert_eq!(u.len(), self.rows, "combine shape mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &ui) in u.iter().enumerate() {
            if ui == 0 {
                continue;
            }
            let ui = ui as f64;
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += ui * a;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_lower_triangular(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self[(i, j)] == 0.0))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Writes the text form: a header `n m`, then one row per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|v| format!("{v:?}")).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl FromStr for Matrix {
    type Err = LinalgError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| LinalgError::Parse("missing header line".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| LinalgError::Parse(format!("bad header {header:?}: {e}")))?;
        let [rows, cols] = dims[..] else {
            return Err(LinalgError::Parse(format!(
                "header must be `n m`, got {header:?}"
            )));
        };
        if rows > cols {
            return Err(LinalgError::BadShape { rows, cols });
        }
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            let line = lines
                .next()
                .ok_or_else(|| LinalgError::Parse(format!("missing row {}", i + 1)))?;
            let before = data.len();
            for tok in line.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|e| LinalgError::Parse(format!("row {}: {tok:?}: {e}", i + 1)))?;
                if !v.is_finite() {
                    return Err(LinalgError::NonFinite {
                        row: i,
                        col: data.len() - before,
                    });
                }
                data.push(v);
            }
            if data.len() - before != cols {
                return Err(LinalgError::Parse(format!(
                    "row {} has {} entries, expected {cols}",
                    i + 1,
                    data.len() - before
                )));
            }
        }
        if lines.next().is_some() {
            return Err(LinalgError::Parse("trailing data after last row".into()));
        }
        Ok(Matrix { rows, cols, data })
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Square lower-triangular generator `g` with positive diagonal and its
/// inverse `h`. Both are lower triangular.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangularPair {
    g: Matrix,
    h: Matrix,
}

impl LowerTriangularPair {
    /// Builds the pair from an already lower-triangular generator.
    pub fn from_generator(g: Matrix) -> Result<Self, LinalgError> {
        check_lower_triangular(&g)?;
        for i in 0..g.rows() {
            if g[(i, i)] <= 0.0 {
                return Err(LinalgError::RankDeficient {
                    row: i,
                    pivot: g[(i, i)],
                    threshold: 0.0,
                });
            }
        }
        let h = invert_lower_triangular(&g)?;
        Ok(LowerTriangularPair { g, h })
    }

    pub fn g(&self) -> &Matrix {
        &self.g
    }

    pub fn h(&self) -> &Matrix {
        &self.h
    }

    pub fn dim(&self) -> usize {
        self.g.rows()
    }
}

/// Result of rotating a rectangular basis into lower-triangular form:
/// `basis = g * q` with `q` having orthonormal rows.
#[derive(Debug, Clone)]
pub struct Triangularization {
    pub pair: LowerTriangularPair,
    /// `n x m`, orthonormal rows.
    pub rotation: Matrix,
}

impl Triangularization {
    /// Maps a vector of the ambient space `R^m` into the coordinates of `g`:
    /// `r * q^T`. Distances to lattice points change only by the squared norm
    /// of the component orthogonal to the row space, which is the same for
    /// every lattice point.
    pub fn rotate(&self, r: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let q = &self.rotation;
        if r.len() != q.cols() {
            return Err(LinalgError::DimensionMismatch {
                expected: q.cols(),
                got: r.len(),
            });
        }
        Ok((0..q.rows()).map(|i| dot(q.row(i), r)).collect())
    }
}

/// Rotates an `n x m` full-row-rank basis into lower-triangular form with a
/// positive diagonal (LQ factorisation via Householder reflections).
pub fn lower_triangularize(basis: &Matrix) -> Result<LowerTriangularPair, LinalgError> {
    triangularize_with_rotation(basis).map(|t| t.pair)
}

pub fn triangularize_with_rotation(basis: &Matrix) -> Result<Triangularization, LinalgError> {
    let (n, m) = (basis.rows(), basis.cols());
    if n > m || n == 0 {
        return Err(LinalgError::BadShape { rows: n, cols: m });
    }
    for i in 0..n {
        for j in 0..m {
            if !basis[(i, j)].is_finite() {
                return Err(LinalgError::NonFinite { row: i, col: j });
            }
        }
    }

    // Householder on the rows: reflect columns k..m of row k onto e_k.
    let mut a = basis.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let x = &a.row(k)[k..];
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut v = x.to_vec();
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        if vnorm2 > 0.0 {
            for i in k..n {
                let row = &mut a.row_mut(i)[k..];
                let s = 2.0 * dot(row, &v) / vnorm2;
                for (r, vi) in row.iter_mut().zip(&v) {
                    *r -= s * vi;
                }
            }
        }
        reflectors.push(if vnorm2 > 0.0 { v } else { Vec::new() });
    }

    let max_pivot = (0..n).fold(0.0f64, |acc, i| acc.max(a[(i, i)].abs()));
    let threshold = RANK_TOLERANCE * max_pivot;
    for i in 0..n {
        let p = a[(i, i)].abs();
        if p <= threshold || max_pivot == 0.0 {
            return Err(LinalgError::RankDeficient {
                row: i,
                pivot: p,
                threshold,
            });
        }
    }

    // Q^T = P_0 P_1 ... P_{n-1} restricted to the first n rows; build the
    // rotation by applying the reflectors to the identity in reverse.
    let mut q = Matrix::zeros(n, m);
    for i in 0..n {
        q[(i, i)] = 1.0;
    }
    for k in (0..n).rev() {
        let v = &reflectors[k];
        if v.is_empty() {
            continue;
        }
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        for i in 0..n {
            let row = &mut q.row_mut(i)[k..];
            let s = 2.0 * dot(row, v) / vnorm2;
            for (r, vi) in row.iter_mut().zip(v) {
                *r -= s * vi;
            }
        }
    }

    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            g[(i, j)] = a[(i, j)];
        }
    }
    // Flip negative pivots: negate column j of g and row j of q.
    for j in 0..n {
        if g[(j, j)] < 0.0 {
            for i in j..n {
                g[(i, j)] = -g[(i, j)];
            }
            for x in q.row_mut(j) {
                *x = -*x;
            }
        }
    }
    let h = invert_lower_triangular(&g)?;
    Ok(Triangularization {
        pair: LowerTriangularPair { g, h },
        rotation: q,
    })
}

fn check_lower_triangular(g: &Matrix) -> Result<(), LinalgError> {
    if !g.is_square() {
        return Err(LinalgError::NotSquare {
            rows: g.rows(),
            cols: g.cols(),
        });
    }
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            let v = g[(i, j)];
            if !v.is_finite() {
                return Err(LinalgError::NonFinite { row: i, col: j });
            }
            if j > i && v != 0.0 {
                return Err(LinalgError::NotLowerTriangular {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    Ok(())
}

/// Inverts a lower-triangular matrix by forward substitution.
pub fn invert_lower_triangular(g: &Matrix) -> Result<Matrix, LinalgError> {
    check_lower_triangular(g)?;
    let n = g.rows();
    for i in 0..n {
        if g[(i, i)] == 0.0 {
            return Err(LinalgError::Singular(i));
        }
    }
    let mut h = Matrix::zeros(n, n);
    // Column j of h solves g x = e_j, with x_i = 0 for i < j.
    for j in 0..n {
        h[(j, j)] = 1.0 / g[(j, j)];
        for i in j + 1..n {
            let mut s = 0.0;
            for k in j..i {
                s += g[(i, k)] * h[(k, j)];
            }
            h[(i, j)] = -s / g[(i, i)];
        }
    }
    Ok(h)
}
