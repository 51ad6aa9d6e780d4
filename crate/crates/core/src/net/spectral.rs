//! Slice-wise singular value thresholding with reverse-mode gradients.
//!
//! Gradients of a real loss with respect to a complex array are stored as
//! `dL/dRe + i dL/dIm`.

use crate::error::Result;
use crate::linalg::{self, Svd};
use crate::tensor::{ComplexMatrix, ComplexTensor3, C64};
use crate::tsvd::svt_from_factors;

/// Relative size of the floor applied to `sigma_j^2 - sigma_i^2`.
pub const GAP_EPS: f64 = 1e-10;

/// Per-slice SVDs kept for the backward pass.
#[derive(Clone, Debug)]
pub struct SvtTape {
    pub tau: f64,
    pub slices: Vec<Svd>,
}

pub fn svt_forward(x: &ComplexTensor3, tau: f64) -> Result<(ComplexTensor3, SvtTape)> {
    let (nx, ny, nt) = x.dims();
    let mut out = ComplexTensor3::zeros((nx, ny, nt));
    let mut slices = Vec::with_capacity(nt);
    for k in 0..nt {
        let m = ComplexMatrix::from_vec(nx, ny, x.slice_data(k).to_vec())?;
        let dec = linalg::svd(&m)?;
        let s = svt_from_factors(&dec.u, &dec.sigma, &dec.v, tau);
        out.slice_data_mut(k).copy_from_slice(s.as_slice());
        slices.push(dec);
    }
    Ok((out, SvtTape { tau, slices }))
}

/// Returns `(dL/dX, dL/dtau)` given `dL/dSVT(X)`.
pub fn svt_backward(tape: &SvtTape, grad: &ComplexTensor3) -> Result<(ComplexTensor3, f64)> {
    let (nx, ny, nt) = grad.dims();
    let mut gx = ComplexTensor3::zeros((nx, ny, nt));
    let mut gtau = 0.0;
    for (k, dec) in tape.slices.iter().enumerate() {
        let gy = ComplexMatrix::from_vec(nx, ny, grad.slice_data(k).to_vec())?;
        let (gm, gt) = svt_matrix_backward(dec, tape.tau, &gy)?;
        gx.slice_data_mut(k).copy_from_slice(gm.as_slice());
        gtau += gt;
    }
    Ok((gx, gtau))
}

/// Backward pass of `Y = U max(S - tau, 0) V^H` for one matrix.
pub fn svt_matrix_backward(dec: &Svd, tau: f64, gy: &ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
    let Svd { u, sigma, v } = dec;
    let k = sigma.len();
    let f: Vec<f64> = sigma.iter().map(|&s| (s - tau).max(0.0)).collect();
    let active: Vec<bool> = sigma.iter().map(|&s| s > tau).collect();
    let ratio: Vec<f64> = (0..k)
        .map(|i| if active[i] { f[i] / sigma[i] } else { 0.0 })
        .collect();
    let smax = sigma.first().copied().unwrap_or(0.0);
    let eps = GAP_EPS * smax * smax;

    let uh = u.adjoint();
    let uh_gy = uh.matmul(gy)?;
    let gbar = uh_gy.matmul(v)?;

    let mut h = ComplexMatrix::zeros(k, k);
    let mut gtau = 0.0;
    {
        let hd = h.as_mut_slice();
        for j in 0..k {
            for i in 0..k {
                let g_ij = gbar[(i, j)];
                let val = if i == j {
                    if active[i] {
                        gtau -= g_ij.re;
                        C64::new(g_ij.re, ratio[i] * g_ij.im)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                } else {
                    let (si, sj) = (sigma[i], sigma[j]);
                    let (a, b) = match (active[i], active[j]) {
                        (true, true) => {
                            let s = si + sj;
                            (1.0 - tau / s, tau / s)
                        }
                        (false, false) => (0.0, 0.0),
                        _ => {
                            let mut d = sj * sj - si * si;
                            if d.abs() < eps {
                                d = if d < 0.0 { -eps } else { eps };
                            }
                            ((f[j] * sj - f[i] * si) / d, (f[j] * si - f[i] * sj) / d)
                        }
                    };
                    g_ij * a + gbar[(j, i)].conj() * b
                };
                hd[i + j * k] = val;
            }
        }
    }

    let vh = v.adjoint();
    let mut gm = u.matmul(&h)?.matmul(&vh)?;

    // Components outside the column/row spaces of the thin factors only
    // exist for rectangular slices or rank-deficient square ones.
    let d = ComplexMatrix::diag(k, k, &ratio);
    if u.rows() > k {
        // (I - U U^H) gY V D V^H
        let p = gy.matmul(v)?.matmul(&d)?;
        let p = p.sub(&u.matmul(&uh.matmul(&p)?)?)?;
        gm = add(&gm, &p.matmul(&vh)?);
    }
    if v.rows() > k {
        // U D U^H gY (I - V V^H)
        let q = d.matmul(&uh_gy)?;
        let q = q.sub(&q.matmul(v)?.matmul(&vh)?)?;
        gm = add(&gm, &u.matmul(&q)?);
    }
    Ok((gm, gtau))
}

fn add(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = a.clone();
    for (o, x) in out.as_mut_slice().iter_mut().zip(b.as_slice()) {
        *o += x;
    }
    out
}
