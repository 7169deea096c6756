//! Dense LU factorization with partial pivoting carried out in double-double,
//! used only for `log |det A|`.

use super::ExtendedReal;
use crate::error::{Error, Result};

/// Row-major square matrix of [`ExtendedReal`] entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DdMatrix {
    n: usize,
    data: Vec<ExtendedReal>,
}

impl DdMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![ExtendedReal::ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ExtendedReal::ONE;
        }
        m
    }

    /// Builds from rows; fails unless every row has `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<ExtendedReal>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    pub fn from_f64_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<ExtendedReal>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| ExtendedReal::from_f64(v)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn<F>(n: usize, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> ExtendedReal,
    {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[ExtendedReal] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

impl std::ops::Index<(usize, usize)> for DdMatrix {
    type Output = ExtendedReal;
    fn index(&self, (i, j): (usize, usize)) -> &ExtendedReal {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DdMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut ExtendedReal {
        &mut self.data[i * self.n + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDetResult {
    /// Natural log of `|det A|`.
    pub log_abs_det: ExtendedReal,
    /// `+1.0` or `-1.0`.
    pub sign: f64,
    /// Smallest absolute pivot; a conditioning diagnostic.
    pub pivot_min: ExtendedReal,
}

/// `log |det A|` and `sign det A` of a dense square matrix.
///
/// An empty matrix has determinant one.
pub fn log_det_lu(matrix: &DdMatrix) -> Result<LogDetResult> {
    let n = matrix.n;
    for (idx, v) in matrix.data.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                row: idx / n,
                col: idx % n,
            });
        }
    }
    let mut a = matrix.data.clone();
    let mut sign = 1.0;
    let mut log_abs = ExtendedReal::ZERO;
    let mut pivot_min = ExtendedReal::from_f64(f64::INFINITY);

    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].abs();
        for i in k + 1..n {
            let v = a[i * n + k].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best.is_zero() {
            return Err(Error::Singular { step: k });
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            sign = -sign;
        }
        let pivot = a[k * n + k];
        if pivot.hi < 0.0 {
            sign = -sign;
        }
        log_abs += pivot.abs().ln();
        if best < pivot_min {
            pivot_min = best;
        }

        let (top, bottom) = a.split_at_mut((k + 1) * n);
        let pivot_row = &top[k * n + k + 1..(k + 1) * n];
        for row in bottom.chunks_exact_mut(n) {
            let factor = row[k] / pivot;
            if factor.is_zero() {
                continue;
            }
            for (dst, &src) in row[k + 1..].iter_mut().zip(pivot_row) {
                *dst -= factor * src;
            }
        }
    }
    if n == 0 {
        pivot_min = ExtendedReal::ONE;
    }
    Ok(LogDetResult {
        log_abs_det: log_abs,
        sign,
        pivot_min,
    })
}
