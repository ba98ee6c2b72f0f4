//! Dense rank-1/2 real arrays. Vectors are stored as a single row (1 x n).
//!
//! Everything the model touches (weights, states, logits, gradients) lives in
//! a [`TensorBuffer`]. The implementation is deliberately plain: flat storage,
//! row-major, triple-loop matmul. At the scales this crate targets that is
//! fast enough and keeps every operation auditable against the finite
//! difference oracle.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct TensorBuffer<T> {
    data: Vec<T>,
    rows: usize,
    cols: usize,
}

impl<T: Scalar> TensorBuffer<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(
            data.len(),
            rows * cols,
            "data length {} does not match shape ({rows}, {cols})",
            data.len()
        );
        TensorBuffer { data, rows, cols }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        TensorBuffer {
            data: vec![T::zero(); rows * cols],
            rows,
            cols,
        }
    }

    /// Row vector (1 x n).
    pub fn vector(data: Vec<T>) -> Self {
        let cols = data.len();
        TensorBuffer {
            data,
            rows: 1,
            cols,
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.rows, self.cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn at(&self, r: usize, c: usize) -> T {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Standard matrix product; `self` is (r x k), `other` is (k x c).
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::dim("matmul", self.shape(), other.shape()));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let lhs = self.row(i);
            let dst = out.row_mut(i);
            for (k, &a) in lhs.iter().enumerate() {
                let rhs = other.row(k);
                for (d, &b) in dst.iter_mut().zip(rhs.iter()) {
                    *d = *d + a * b;
                }
            }
        }
        Ok(out)
    }

    /// y = W v for a weight matrix W (rows x cols) and row vector v of length cols.
    /// Returns a row vector of length `rows`.
    pub fn matvec(&self, v: &Self) -> Result<Self> {
        if v.rows != 1 || v.cols != self.cols {
            return Err(Error::dim("matvec", self.shape(), v.shape()));
        }
        let mut out = vec![T::zero(); self.rows];
        for (r, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(r), &v.data);
        }
        Ok(TensorBuffer::vector(out))
    }

    /// y = W^T v for a row vector v of length `rows`. Returns length `cols`.
    pub fn matvec_transposed(&self, v: &Self) -> Result<Self> {
        if v.rows != 1 || v.cols != self.rows {
            return Err(Error::dim("matvec_transposed", self.shape(), v.shape()));
        }
        let mut out = vec![T::zero(); self.cols];
        for (r, &s) in v.data.iter().enumerate() {
            for (o, &w) in out.iter_mut().zip(self.row(r).iter()) {
                *o = *o + s * w;
            }
        }
        Ok(TensorBuffer::vector(out))
    }

    /// self += a^T b * scale, where a has length `rows` and b length `cols`.
    /// Rank-one accumulation used by every weight-gradient path.
    pub fn add_outer_scaled(&mut self, a: &Self, b: &Self, scale: T) {
        debug_assert_eq!(a.cols, self.rows);
        debug_assert_eq!(b.cols, self.cols);
        for r in 0..self.rows {
            let av = a.data[r] * scale;
            if av == T::zero() {
                continue;
            }
            for (d, &bv) in self.row_mut(r).iter_mut().zip(b.data.iter()) {
                *d = *d + av * bv;
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Self, scale: T) {
        debug_assert_eq!(self.shape(), other.shape());
        for (d, &s) in self.data.iter_mut().zip(other.data.iter()) {
            *d = *d + s * scale;
        }
    }

    pub fn scale_in_place(&mut self, s: T) {
        for d in self.data.iter_mut() {
            *d = *d * s;
        }
    }

    pub fn fill(&mut self, v: T) {
        self.data.iter_mut().for_each(|d| *d = v);
    }

    pub fn map<F: Fn(T) -> T>(&self, f: F) -> Self {
        TensorBuffer {
            data: self.data.iter().map(|&v| f(v)).collect(),
            rows: self.rows,
            cols: self.cols,
        }
    }

    /// Index of the largest element; ties resolve to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.data.iter().enumerate() {
            if v > self.data[best] {
                best = i;
            }
        }
        best
    }

    pub fn squared_norm(&self) -> T {
        dot(&self.data, &self.data)
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = T::zero();
    for (&x, &y) in a.iter().zip(b.iter()) {
        acc = acc + x * y;
    }
    acc
}
