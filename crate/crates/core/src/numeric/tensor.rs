use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense column vector.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseVector<T>(Vec<T>);

impl<T: Scalar> DenseVector<T> {
    pub fn new(entries: Vec<T>) -> Self {
        Self(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![T::zero(); dim])
    }

    pub fn from_f64(entries: &[f64]) -> Self {
        Self(entries.iter().map(|&x| T::of(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn dot(&self, other: &Self) -> Result<T> {
        check_dim("dot", self.dim(), other.dim())?;
        Ok(dot(&self.0, &other.0))
    }

    pub fn norm(&self) -> T {
        dot(&self.0, &self.0).sqrt()
    }

    /// Concatenates `parts` in order.
    pub fn concat(parts: &[&DenseVector<T>]) -> Self {
        let mut out = Vec::with_capacity(parts.iter().map(|p| p.dim()).sum());
        for p in parts {
            out.extend_from_slice(&p.0);
        }
        Self(out)
    }

    /// Copies out `len` entries starting at `offset`.
    pub fn slice(&self, offset: usize, len: usize) -> Result<Self> {
        if offset + len > self.dim() {
            return Err(Error::Shape {
                context: "vector slice",
                expected: offset + len,
                actual: self.dim(),
            });
        }
        Ok(Self(self.0[offset..offset + len].to_vec()))
    }
}

impl<T> Deref for DenseVector<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> DerefMut for DenseVector<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.0
    }
}

impl<T> From<Vec<T>> for DenseVector<T> {
    fn from(v: Vec<T>) -> Self {
        Self(v)
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn from_rows_major(rows: usize, cols: usize, entries: Vec<T>) -> Result<Self> {
        if rows * cols != entries.len() {
            return Err(Error::Shape {
                context: "matrix entries",
                expected: rows * cols,
                actual: entries.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = T::one();
        }
        m
    }

    /// Builds from nested rows given as `f64`; all rows must share a length.
    pub fn from_f64_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_dim("matrix row", cols, r.len())?;
            entries.extend(r.iter().map(|&x| T::of(x)));
        }
        Self::from_rows_major(rows.len(), cols, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [T] {
        &mut self.entries
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.entries[r * self.cols + c]
    }

    /// `W · x`
    pub fn matvec(&self, x: &[T]) -> Result<DenseVector<T>> {
        check_dim("matrix-vector product", self.cols, x.len())?;
        Ok(DenseVector(
            (0..self.rows).map(|r| dot(self.row(r), x)).collect(),
        ))
    }

    /// `Wᵀ · g`
    pub fn matvec_transposed(&self, g: &[T]) -> Result<DenseVector<T>> {
        check_dim("transposed matrix-vector product", self.rows, g.len())?;
        let mut out = vec![T::zero(); self.cols];
        for (r, &gr) in g.iter().enumerate() {
            if gr == T::zero() {
                continue;
            }
            for (o, &w) in out.iter_mut().zip(self.row(r)) {
                *o += w * gr;
            }
        }
        Ok(DenseVector(out))
    }

    /// `self += g · xᵀ`
    pub fn add_outer(&mut self, g: &[T], x: &[T]) -> Result<()> {
        check_dim("outer product rows", self.rows, g.len())?;
        check_dim("outer product cols", self.cols, x.len())?;
        for (r, &gr) in g.iter().enumerate() {
            if gr == T::zero() {
                continue;
            }
            let row = &mut self.entries[r * self.cols..(r + 1) * self.cols];
            for (w, &xc) in row.iter_mut().zip(x) {
                *w += gr * xc;
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|x| x.is_finite())
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn check_dim(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Shape {
            context,
            expected,
            actual,
        })
    }
}
