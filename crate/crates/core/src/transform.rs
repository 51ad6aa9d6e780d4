//! Unitary transforms along the third (temporal) mode.
//!
//! Every transform is materialized as an explicit `n3 x n3` matrix `Q`;
//! [`UnitaryTransform::apply`] multiplies each tube fiber by `Q` and
//! [`UnitaryTransform::adjoint`] by `Q^H`. The DFT uses the unitary
//! `1/sqrt(n3)` scaling, so norms computed in the transformed domain
//! (notably the TTNN) differ by `sqrt(n3)` from conventions that use the
//! unnormalized FFT.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg;
use crate::tensor::{mode3_matvec, ComplexMatrix, ComplexTensor3, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformKind {
    Fft,
    Dct,
    Identity,
    Matrix,
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TransformKind::Fft => "fft",
            TransformKind::Dct => "dct",
            TransformKind::Identity => "identity",
            TransformKind::Matrix => "matrix",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct UnitaryTransform {
    kind: TransformKind,
    q: ComplexMatrix,
    q_adj: ComplexMatrix,
}

/// `||Q^H Q - I||_F`.
pub fn unitarity_residual(q: &ComplexMatrix) -> f64 {
    let n = q.rows();
    let gram = q.adjoint().matmul(q).expect("square matrix");
    gram.sub(&ComplexMatrix::identity(n))
        .expect("same shape")
        .fro_norm()
}

impl UnitaryTransform {
    fn build(kind: TransformKind, q: ComplexMatrix) -> Result<Self> {
        let n = q.rows();
        if n == 0 || q.cols() != n {
            return Err(Error::invalid(format!(
                "transform matrix must be square and non-empty, got {}x{}",
                q.rows(),
                q.cols()
            )));
        }
        let residual = unitarity_residual(&q);
        if !(residual <= 1e-8 * (n as f64).sqrt()) {
            return Err(Error::invalid(format!(
                "transform matrix is not unitary (||Q^H Q - I||_F = {residual:.3e})"
            )));
        }
        let q_adj = q.adjoint();
        Ok(Self { kind, q, q_adj })
    }

    /// Normalized DFT: `Q[j, k] = exp(-2 pi i jk / n) / sqrt(n)`.
    pub fn fft(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("transform size must be >= 1"));
        }
        let s = 1.0 / (n as f64).sqrt();
        let q = ComplexMatrix::from_fn(n, n, |j, k| {
            // reduce jk mod n first to keep the angle small
            let jk = (j * k) % n;
            C64::from_polar(s, -2.0 * PI * jk as f64 / n as f64)
        });
        Self::build(TransformKind::Fft, q)
    }

    /// Orthonormal DCT-II.
    pub fn dct(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("transform size must be >= 1"));
        }
        let nf = n as f64;
        let q = ComplexMatrix::from_fn(n, n, |j, k| {
            let c = if j == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            C64::new(c * (PI * (2 * k + 1) as f64 * j as f64 / (2.0 * nf)).cos(), 0.0)
        });
        Self::build(TransformKind::Dct, q)
    }

    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("transform size must be >= 1"));
        }
        Self::build(TransformKind::Identity, ComplexMatrix::identity(n))
    }

    /// Wraps an arbitrary unitary matrix.
    pub fn from_matrix(q: ComplexMatrix) -> Result<Self> {
        Self::build(TransformKind::Matrix, q)
    }

    /// Data-driven transform: the eigenvectors of the pooled mode-3 Gram
    /// matrix `G = sum_s M_s M_s^H`, ordered by decreasing eigenvalue, so
    /// the first transformed slice captures the most energy.
    pub fn learn(samples: &[ComplexTensor3]) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::invalid("learn_transform needs at least one sample"))?;
        let n = first.dims().2;
        let mut gram = ComplexMatrix::zeros(n, n);
        for s in samples {
            if s.dims().2 != n {
                return Err(Error::DimensionMismatch {
                    op: "learn_transform",
                    left: first.dims(),
                    right: s.dims(),
                });
            }
            for a in 0..n {
                let xa = s.slice_data(a);
                for b in a..n {
                    let xb = s.slice_data(b);
                    let g: C64 = xa.iter().zip(xb).map(|(p, q)| p * q.conj()).sum();
                    gram[(a, b)] += g;
                    if a != b {
                        gram[(b, a)] += g.conj();
                    }
                }
            }
        }
        let (values, vectors) = linalg::hermitian_eigen(&gram)?;

        // Descending eigenvalues; near-ties keep the solver's index order.
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut order: Vec<usize> = Vec::with_capacity(n);
        for i in 0..n {
            let pos = order
                .iter()
                .position(|&j| values[i] > values[j] + 1e-12 * scale)
                .unwrap_or(order.len());
            order.insert(pos, i);
        }

        let mut q = ComplexMatrix::zeros(n, n);
        for (row, &col) in order.iter().enumerate() {
            let v = vectors.column(col);
            let mut pivot = 0;
            for (i, z) in v.iter().enumerate() {
                if z.norm() > v[pivot].norm() + 1e-14 {
                    pivot = i;
                }
            }
            let phase = if v[pivot].norm() > 0.0 {
                v[pivot].conj() / v[pivot].norm()
            } else {
                C64::new(1.0, 0.0)
            };
            for (k, z) in v.iter().enumerate() {
                q[(row, k)] = (z * phase).conj();
            }
        }
        Self::build(TransformKind::Matrix, q)
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.q.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.q
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.q)
    }

    pub fn apply(&self, x: &ComplexTensor3) -> Result<ComplexTensor3> {
        mode3_matvec(&self.q, x)
    }

    pub fn adjoint(&self, x_hat: &ComplexTensor3) -> Result<ComplexTensor3> {
        mode3_matvec(&self.q_adj, x_hat)
    }

    /// The matrix as an `(n3, n3, 1)` tensor for storage.
    pub fn to_tensor(&self) -> ComplexTensor3 {
        let n = self.size();
        ComplexTensor3::from_vec((n, n, 1), self.q.as_slice().to_vec()).expect("n*n elements")
    }

    pub fn from_tensor(t: &ComplexTensor3) -> Result<Self> {
        let (r, c, d) = t.dims();
        if r != c || d != 1 {
            return Err(Error::invalid(format!(
                "transform tensor must have dims (n, n, 1), got {:?}",
                t.dims()
            )));
        }
        Self::from_matrix(ComplexMatrix::from_vec(r, c, t.as_slice().to_vec())?)
    }
}
