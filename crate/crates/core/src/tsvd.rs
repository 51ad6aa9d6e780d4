//! Transformed t-SVD algebra: the ⊤-product, the decomposition itself, the
//! transformed multirank, the transformed tensor nuclear norm (TTNN) and its
//! proximal operator (⊤-TSVT).
//!
//! All of these reduce to ordinary matrix algebra on the frontal slices of
//! `apply(T, X)`; the results are mapped back with `adjoint(T, ·)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, Svd};
use crate::tensor::{slice_matmul, ComplexMatrix, ComplexTensor3};
use crate::transform::UnitaryTransform;

fn check_transform(x: &ComplexTensor3, t: &UnitaryTransform, op: &'static str) -> Result<()> {
    if x.dims().2 != t.size() {
        return Err(Error::DimensionMismatch {
            op,
            left: x.dims(),
            right: (t.size(), t.size(), 1),
        });
    }
    Ok(())
}

/// Applies `f` to every frontal slice (in parallel) and stacks the results.
fn map_slices<F>(x: &ComplexTensor3, f: F) -> Result<ComplexTensor3>
where
    F: Fn(ComplexMatrix) -> Result<ComplexMatrix> + Sync,
{
    let slices = (0..x.dims().2)
        .into_par_iter()
        .map(|k| f(x.frontal_slice(k)?))
        .collect::<Result<Vec<_>>>()?;
    ComplexTensor3::from_slices(&slices)
}

/// `C = A *_T B = T^H( T(A) × T(B) )`.
pub fn t_product(
    a: &ComplexTensor3,
    b: &ComplexTensor3,
    t: &UnitaryTransform,
) -> Result<ComplexTensor3> {
    check_transform(a, t, "t_product")?;
    check_transform(b, t, "t_product")?;
    let prod = slice_matmul(&t.apply(a)?, &t.apply(b)?)?;
    t.adjoint(&prod)
}

/// Unit element of the ⊤-product: every transformed slice is `I_n`.
pub fn identity_tensor(t: &UnitaryTransform, n: usize) -> Result<ComplexTensor3> {
    if n == 0 {
        return Err(Error::invalid("identity tensor size must be >= 1"));
    }
    let slices = vec![ComplexMatrix::identity(n); t.size()];
    t.adjoint(&ComplexTensor3::from_slices(&slices)?)
}

/// ⊤-conjugate transpose: conjugate-transposes each transformed slice.
pub fn t_adjoint(x: &ComplexTensor3, t: &UnitaryTransform) -> Result<ComplexTensor3> {
    check_transform(x, t, "t_adjoint")?;
    let hat = t.apply(x)?;
    let slices: Vec<_> = hat.frontal_slices().iter().map(|s| s.adjoint()).collect();
    t.adjoint(&ComplexTensor3::from_slices(&slices)?)
}

#[derive(Clone, Debug)]
pub struct TransformedTsvd {
    pub u: ComplexTensor3,
    pub s: ComplexTensor3,
    pub v: ComplexTensor3,
    pub transform: UnitaryTransform,
}

impl TransformedTsvd {
    /// `U *_T S *_T V^H`.
    pub fn reconstruct(&self) -> Result<ComplexTensor3> {
        let us = t_product(&self.u, &self.s, &self.transform)?;
        t_product(&us, &t_adjoint(&self.v, &self.transform)?, &self.transform)
    }

    /// Diagonals of the transformed `S` slices, one vector per slice.
    pub fn singular_values(&self) -> Result<Vec<Vec<f64>>> {
        let hat = self.transform.apply(&self.s)?;
        let (n1, n2, n3) = hat.dims();
        Ok((0..n3)
            .map(|k| (0..n1.min(n2)).map(|i| hat.get(i, i, k).re).collect())
            .collect())
    }
}

/// Full t-SVD in the transformed domain: square `U` (n1 x n1 x n3) and
/// `V` (n2 x n2 x n3), tubal-diagonal `S`.
pub fn transformed_tsvd(x: &ComplexTensor3, t: &UnitaryTransform) -> Result<TransformedTsvd> {
    check_transform(x, t, "transformed_tsvd")?;
    let (n1, n2, n3) = x.dims();
    let hat = t.apply(x)?;
    let factors = (0..n3)
        .into_par_iter()
        .map(|k| {
            let Svd { u, sigma, v } = linalg::svd(&hat.frontal_slice(k)?)?;
            Ok((
                linalg::complete_basis(&u),
                ComplexMatrix::diag(n1, n2, &sigma),
                linalg::complete_basis(&v),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let (us, (ss, vs)): (Vec<_>, (Vec<_>, Vec<_>)) =
        factors.into_iter().map(|(u, s, v)| (u, (s, v))).unzip();
    Ok(TransformedTsvd {
        u: t.adjoint(&ComplexTensor3::from_slices(&us)?)?,
        s: t.adjoint(&ComplexTensor3::from_slices(&ss)?)?,
        v: t.adjoint(&ComplexTensor3::from_slices(&vs)?)?,
        transform: t.clone(),
    })
}

/// Singular values of every transformed frontal slice.
pub fn transformed_singular_values(
    x: &ComplexTensor3,
    t: &UnitaryTransform,
) -> Result<Vec<Vec<f64>>> {
    check_transform(x, t, "transformed_singular_values")?;
    let hat = t.apply(x)?;
    (0..hat.dims().2)
        .into_par_iter()
        .map(|k| linalg::singular_values(&hat.frontal_slice(k)?))
        .collect()
}

/// `||X||_TTNN = sum_k ||T(X)^(k)||_*`.
pub fn ttnn(x: &ComplexTensor3, t: &UnitaryTransform) -> Result<f64> {
    Ok(transformed_singular_values(x, t)?
        .iter()
        .flatten()
        .sum())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Multirank {
    pub ranks: Vec<usize>,
    pub tol: f64,
}

impl Multirank {
    pub fn total(&self) -> usize {
        self.ranks.iter().sum()
    }
}

/// Counts singular values above `tol * sigma_max`, where `sigma_max` is the
/// largest singular value over all transformed slices.
pub fn transformed_multirank(
    x: &ComplexTensor3,
    t: &UnitaryTransform,
    tol: f64,
) -> Result<Multirank> {
    if !(tol >= 0.0) {
        return Err(Error::invalid(format!("multirank tolerance must be >= 0, got {tol}")));
    }
    let sv = transformed_singular_values(x, t)?;
    let smax = sv.iter().flatten().fold(0.0f64, |m, &s| m.max(s));
    let cutoff = tol * smax;
    let ranks = sv
        .iter()
        .map(|s| s.iter().filter(|&&v| v > cutoff && v > 0.0).count())
        .collect();
    Ok(Multirank { ranks, tol })
}

/// Singular value soft-thresholding, the proximal operator of `tau ||·||_*`.
pub fn svt_matrix(m: &ComplexMatrix, tau: f64) -> Result<ComplexMatrix> {
    if !(tau >= 0.0) {
        return Err(Error::invalid(format!("SVT threshold must be >= 0, got {tau}")));
    }
    let Svd { u, sigma, v } = linalg::svd(m)?;
    Ok(svt_from_factors(&u, &sigma, &v, tau))
}

/// Rebuilds `U max(Σ - tau, 0) V^H` from thin SVD factors.
pub(crate) fn svt_from_factors(
    u: &ComplexMatrix,
    sigma: &[f64],
    v: &ComplexMatrix,
    tau: f64,
) -> ComplexMatrix {
    let (rows, cols) = (u.rows(), v.rows());
    let mut out = ComplexMatrix::zeros(rows, cols);
    for (i, &s) in sigma.iter().enumerate() {
        let shrunk = s - tau;
        if shrunk <= 0.0 {
            // sorted descending, nothing further survives
            break;
        }
        let ui = u.column(i);
        let vi = v.column(i);
        let data = out.as_mut_slice();
        for c in 0..cols {
            let w = vi[c].conj() * shrunk;
            let col = &mut data[c * rows..(c + 1) * rows];
            for (o, &uu) in col.iter_mut().zip(ui) {
                *o += uu * w;
            }
        }
    }
    out
}

/// Frontal slice-wise SVT with no transform.
pub fn svt_slices(x: &ComplexTensor3, tau: f64) -> Result<ComplexTensor3> {
    map_slices(x, |m| svt_matrix(&m, tau))
}

/// ⊤-TSVT: `T^H( SVT_tau( T(X) ) )`, the minimizer of
/// `tau ||Z||_TTNN + 1/2 ||Z - X||_F^2`.
pub fn t_tsvt(x: &ComplexTensor3, tau: f64, t: &UnitaryTransform) -> Result<ComplexTensor3> {
    check_transform(x, t, "t_tsvt")?;
    let hat = t.apply(x)?;
    t.adjoint(&svt_slices(&hat, tau)?)
}

/// `tau ||Z||_* + 1/2 ||Z - M||_F^2`.
pub fn svt_objective(z: &ComplexMatrix, m: &ComplexMatrix, tau: f64) -> Result<f64> {
    let nuc: f64 = linalg::singular_values(z)?.iter().sum();
    Ok(tau * nuc + 0.5 * z.sub(m)?.fro_norm().powi(2))
}
