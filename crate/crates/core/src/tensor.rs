//! Dense complex 3-way tensors and the slice-wise matrix algebra built on them.
//!
//! Elements are stored with the first index fastest, so every frontal slice
//! `X(:, :, k)` is a contiguous column-major `n1 x n2` block. All indices in
//! this crate are 0-based.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub type Dims = (usize, usize, usize);

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense column-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "matrix {rows}x{cols} needs {} elements, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for c in 0..cols {
            for r in 0..rows {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag(rows: usize, cols: usize, values: &[f64]) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (i, &v) in values.iter().enumerate().take(rows.min(cols)) {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn column(&self, c: usize) -> &[C64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                left: (self.rows, self.cols, 1),
                right: (rhs.rows, rhs.cols, 1),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        gemm_into(
            &self.data,
            self.rows,
            self.cols,
            &rhs.data,
            rhs.cols,
            &mut out.data,
        );
        Ok(out)
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> Result<Self> {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(Error::DimensionMismatch {
                op: "sub",
                left: (self.rows, self.cols, 1),
                right: (rhs.rows, rhs.cols, 1),
            });
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r + c * self.rows]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r + c * self.rows]
    }
}

/// `out = a * b` for column-major `a` (m x k) and `b` (k x n).
fn gemm_into(a: &[C64], m: usize, k: usize, b: &[C64], n: usize, out: &mut [C64]) {
    for j in 0..n {
        let out_col = &mut out[j * m..(j + 1) * m];
        out_col.fill(ZERO);
        for p in 0..k {
            let bpj = b[p + j * k];
            if bpj == ZERO {
                continue;
            }
            let a_col = &a[p * m..(p + 1) * m];
            for (o, &apj) in out_col.iter_mut().zip(a_col) {
                *o += apj * bpj;
            }
        }
    }
}

/// Dense complex 3-way tensor `X ∈ C^{n1 x n2 x n3}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexTensor3 {
    dims: Dims,
    data: Vec<C64>,
}

impl ComplexTensor3 {
    pub fn zeros(dims: Dims) -> Self {
        Self {
            dims,
            data: vec![ZERO; dims.0 * dims.1 * dims.2],
        }
    }

    pub fn from_vec(dims: Dims, data: Vec<C64>) -> Result<Self> {
        if data.len() != dims.0 * dims.1 * dims.2 {
            return Err(Error::invalid(format!(
                "tensor {dims:?} needs {} elements, got {}",
                dims.0 * dims.1 * dims.2,
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dims.0 * dims.1 * dims.2);
        for k in 0..dims.2 {
            for j in 0..dims.1 {
                for i in 0..dims.0 {
                    data.push(f(i, j, k));
                }
            }
        }
        Self { dims, data }
    }

    /// Stacks equally sized matrices as frontal slices.
    pub fn from_slices(slices: &[ComplexMatrix]) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::invalid("at least one frontal slice is required"))?;
        let (n1, n2) = (first.rows, first.cols);
        let mut data = Vec::with_capacity(n1 * n2 * slices.len());
        for s in slices {
            if (s.rows, s.cols) != (n1, n2) {
                return Err(Error::DimensionMismatch {
                    op: "from_slices",
                    left: (n1, n2, 1),
                    right: (s.rows, s.cols, 1),
                });
            }
            data.extend_from_slice(&s.data);
        }
        Ok(Self {
            dims: (n1, n2, slices.len()),
            data,
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    #[inline]
    pub fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims.0 * (j + self.dims.1 * k)
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> C64 {
        self.data[self.offset(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: C64) {
        let o = self.offset(i, j, k);
        self.data[o] = v;
    }

    fn slice_len(&self) -> usize {
        self.dims.0 * self.dims.1
    }

    /// Contiguous view of frontal slice `k`.
    pub fn slice_data(&self, k: usize) -> &[C64] {
        let n = self.slice_len();
        &self.data[k * n..(k + 1) * n]
    }

    pub fn slice_data_mut(&mut self, k: usize) -> &mut [C64] {
        let n = self.slice_len();
        &mut self.data[k * n..(k + 1) * n]
    }

    /// Copy of the frontal slice `X(:, :, k)`.
    pub fn frontal_slice(&self, k: usize) -> Result<ComplexMatrix> {
        if k >= self.dims.2 {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: self.dims.2,
            });
        }
        Ok(ComplexMatrix {
            rows: self.dims.0,
            cols: self.dims.1,
            data: self.slice_data(k).to_vec(),
        })
    }

    pub fn set_frontal_slice(&mut self, k: usize, m: &ComplexMatrix) -> Result<()> {
        if k >= self.dims.2 {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: self.dims.2,
            });
        }
        if (m.rows, m.cols) != (self.dims.0, self.dims.1) {
            return Err(Error::DimensionMismatch {
                op: "set_frontal_slice",
                left: self.dims,
                right: (m.rows, m.cols, 1),
            });
        }
        self.slice_data_mut(k).copy_from_slice(&m.data);
        Ok(())
    }

    pub fn frontal_slices(&self) -> Vec<ComplexMatrix> {
        (0..self.dims.2)
            .map(|k| ComplexMatrix {
                rows: self.dims.0,
                cols: self.dims.1,
                data: self.slice_data(k).to_vec(),
            })
            .collect()
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<X, Y> = sum conj(x) * y`.
    pub fn inner(&self, other: &ComplexTensor3) -> Result<C64> {
        self.check_same(other, "inner")?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| x.conj() * y)
            .sum())
    }

    /// Returns `alpha * self + y`.
    pub fn axpy(&self, alpha: C64, y: &ComplexTensor3) -> Result<ComplexTensor3> {
        self.check_same(y, "axpy")?;
        Ok(self.zip_map(y, |a, b| alpha * a + b))
    }

    pub fn add(&self, other: &ComplexTensor3) -> Result<ComplexTensor3> {
        self.check_same(other, "add")?;
        Ok(self.zip_map(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &ComplexTensor3) -> Result<ComplexTensor3> {
        self.check_same(other, "sub")?;
        Ok(self.zip_map(other, |a, b| a - b))
    }

    pub fn scale(&self, alpha: f64) -> ComplexTensor3 {
        self.map(|z| z * alpha)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> ComplexTensor3 {
        ComplexTensor3 {
            dims: self.dims,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// Elementwise combination; panics if the dims differ.
    pub(crate) fn zip_map(
        &self,
        other: &ComplexTensor3,
        f: impl Fn(C64, C64) -> C64,
    ) -> ComplexTensor3 {
        assert_eq!(self.dims, other.dims, "zip_map on tensors of different dims");
        ComplexTensor3 {
            dims: self.dims,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub(crate) fn check_same(&self, other: &ComplexTensor3, op: &'static str) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                op,
                left: self.dims,
                right: other.dims,
            });
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Frontal slice-wise product: `C(:,:,k) = A(:,:,k) * B(:,:,k)`.
pub fn slice_matmul(a: &ComplexTensor3, b: &ComplexTensor3) -> Result<ComplexTensor3> {
    let (n1, n2, n3) = a.dims;
    let (m2, n4, m3) = b.dims;
    if n2 != m2 || n3 != m3 {
        return Err(Error::DimensionMismatch {
            op: "slice_matmul",
            left: a.dims,
            right: b.dims,
        });
    }
    let mut out = ComplexTensor3::zeros((n1, n4, n3));
    let out_len = n1 * n4;
    if out_len == 0 {
        return Ok(out);
    }
    out.data
        .par_chunks_mut(out_len)
        .enumerate()
        .for_each(|(k, c)| gemm_into(a.slice_data(k), n1, n2, b.slice_data(k), n4, c));
    Ok(out)
}

/// Applies `q` to every mode-3 fiber: `Y(i, j, :) = q * X(i, j, :)`.
pub fn mode3_matvec(q: &ComplexMatrix, x: &ComplexTensor3) -> Result<ComplexTensor3> {
    let (n1, n2, n3) = x.dims;
    if q.rows != n3 || q.cols != n3 {
        return Err(Error::DimensionMismatch {
            op: "mode3_matvec",
            left: (q.rows, q.cols, 1),
            right: x.dims,
        });
    }
    let plane = n1 * n2;
    let mut out = ComplexTensor3::zeros(x.dims);
    // Output slice r is sum_k q[r, k] * X(:, :, k); slices are contiguous.
    out.data
        .par_chunks_mut(plane.max(1))
        .enumerate()
        .for_each(|(r, dst)| {
            for k in 0..n3 {
                let w = q[(r, k)];
                if w == ZERO {
                    continue;
                }
                for (d, &s) in dst.iter_mut().zip(x.slice_data(k)) {
                    *d += w * s;
                }
            }
        });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(dims: Dims) -> ComplexTensor3 {
        ComplexTensor3::from_fn(dims, |i, j, k| {
            C64::new((i + 2 * j) as f64 - k as f64, (i * j + k) as f64 * 0.5)
        })
    }

    #[test]
    fn frontal_slice_picks_identity() {
        let mut x = ComplexTensor3::zeros((2, 2, 3));
        x.set_frontal_slice(1, &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(x.frontal_slice(1).unwrap(), ComplexMatrix::identity(2));
        assert!(matches!(
            x.frontal_slice(3),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        ));
    }

    #[test]
    fn slices_round_trip() {
        let x = ramp((4, 5, 6));
        let y = ComplexTensor3::from_slices(&x.frontal_slices()).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn slice_matmul_identity_and_zero() {
        let a = ramp((3, 4, 2));
        let eye = ComplexTensor3::from_slices(&[ComplexMatrix::identity(4), ComplexMatrix::identity(4)])
            .unwrap();
        assert_eq!(slice_matmul(&a, &eye).unwrap(), a);
        let z = slice_matmul(&ComplexTensor3::zeros((3, 4, 2)), &ramp((4, 2, 2))).unwrap();
        assert!(z.as_slice().iter().all(|v| *v == ZERO));
        assert!(slice_matmul(&a, &ramp((3, 2, 2))).is_err());
    }

    #[test]
    fn norms() {
        assert_eq!(ComplexTensor3::zeros((2, 3, 4)).fro_norm(), 0.0);
        let ones = ComplexTensor3::from_fn((2, 2, 2), |_, _, _| ONE);
        assert!((ones.fro_norm() - 8f64.sqrt()).abs() < 1e-15);
        let x = ramp((3, 3, 3));
        let ip = x.inner(&x).unwrap();
        assert!(ip.im.abs() <= 1e-12 * ip.re);
        assert!((x.fro_norm().powi(2) - ip.re).abs() <= 1e-12 * ip.re);
    }

    #[test]
    fn mode3_identity_and_dft_of_impulse() {
        let x = ramp((2, 3, 4));
        assert_eq!(mode3_matvec(&ComplexMatrix::identity(4), &x).unwrap(), x);

        let n = 4;
        let s = 1.0 / (n as f64).sqrt();
        let q = ComplexMatrix::from_fn(n, n, |j, k| {
            C64::from_polar(s, -2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64)
        });
        let mut imp = ComplexTensor3::zeros((1, 1, 4));
        imp.set(0, 0, 0, ONE);
        let y = mode3_matvec(&q, &imp).unwrap();
        for v in y.as_slice() {
            assert!((v - C64::new(0.5, 0.0)).norm() < 1e-15);
        }
        assert!(mode3_matvec(&ComplexMatrix::identity(3), &x).is_err());
    }
}
