//! Matrix decompositions backed by faer's SVD and self-adjoint eigensolver.

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::tensor::{ComplexMatrix, C64};

/// Thin SVD `M = U diag(sigma) V^H` with `k = min(rows, cols)` and
/// `sigma` sorted in descending order.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v: ComplexMatrix,
}

fn to_faer(m: &ComplexMatrix) -> Mat<C64> {
    Mat::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)])
}

fn check_finite(m: &ComplexMatrix, what: &str) -> Result<()> {
    if m.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericFailure(format!(
            "non-finite entry in {}x{} {what} input",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    let (rows, cols) = (m.rows(), m.cols());
    check_finite(m, "SVD")?;
    let dec = to_faer(m).thin_svd().map_err(|e| {
        Error::NumericFailure(format!("SVD of {rows}x{cols} matrix failed: {e:?}"))
    })?;
    let k = rows.min(cols);
    let s = dec.S().column_vector();
    // faer returns nonincreasing values already; keep the order explicit
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].re.total_cmp(&s[a].re));
    let (u, v) = (dec.U(), dec.V());
    Ok(Svd {
        sigma: order.iter().map(|&i| s[i].re).collect(),
        u: ComplexMatrix::from_fn(rows, k, |r, c| u[(r, order[c])]),
        v: ComplexMatrix::from_fn(cols, k, |r, c| v[(r, order[c])]),
    })
}

pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(svd(m)?.sigma)
}

/// Extends the orthonormal columns of `q` (m x k) to a unitary m x m matrix.
pub fn complete_basis(q: &ComplexMatrix) -> ComplexMatrix {
    let m = q.rows();
    let mut cols: Vec<Vec<C64>> = (0..q.cols()).map(|c| q.column(c).to_vec()).collect();
    let mut candidate = 0;
    while cols.len() < m && candidate < m {
        let mut v = vec![C64::new(0.0, 0.0); m];
        v[candidate] = C64::new(1.0, 0.0);
        candidate += 1;
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for c in &cols {
                let proj: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= proj * ci;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|z| *z /= norm);
            cols.push(v);
        }
    }
    ComplexMatrix::from_fn(m, m, |r, c| cols[c][r])
}

/// Eigendecomposition of a Hermitian matrix: returns eigenvalues in
/// ascending order and the matrix whose columns are the matching unit
/// eigenvectors.
pub fn hermitian_eigen(g: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if g.rows() != g.cols() {
        return Err(Error::invalid("hermitian_eigen needs a square matrix"));
    }
    check_finite(g, "eigensolver")?;
    let n = g.rows();
    let eig = to_faer(g).self_adjoint_eigen(Side::Lower).map_err(|e| {
        Error::NumericFailure(format!("Hermitian eigensolver failed ({n}x{n}): {e:?}"))
    })?;
    let s = eig.S().column_vector();
    let u = eig.U();
    Ok((
        (0..n).map(|i| s[i].re).collect(),
        ComplexMatrix::from_fn(n, n, |r, c| u[(r, c)]),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_of_diagonal() {
        let m = ComplexMatrix::diag(3, 2, &[1.0, 3.0]);
        let s = svd(&m).unwrap();
        assert_eq!(s.sigma.len(), 2);
        assert!((s.sigma[0] - 3.0).abs() < 1e-14);
        assert!((s.sigma[1] - 1.0).abs() < 1e-14);
        assert_eq!((s.u.rows(), s.u.cols(), s.v.rows(), s.v.cols()), (3, 2, 2, 2));
    }

    #[test]
    fn completed_basis_is_unitary() {
        let q = ComplexMatrix::from_fn(4, 1, |_, _| C64::new(0.5, 0.0));
        let full = complete_basis(&q);
        let gram = full.adjoint().matmul(&full).unwrap();
        let err = gram.sub(&ComplexMatrix::identity(4)).unwrap().fro_norm();
        assert!(err < 1e-12, "{err}");
        assert_eq!(full.column(0), q.column(0));
    }

    #[test]
    fn rejects_nan() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(svd(&m), Err(Error::NumericFailure(_))));
    }
}
