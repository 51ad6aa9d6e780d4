//! Independent reference implementations used as test oracles. Nothing in
//! here calls into the library's numerics: transforms are built from their
//! defining formulas, SVDs come from one-sided Jacobi rotations, solves
//! from conjugate gradients.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use ttnn_recon::{ComplexMatrix, ComplexTensor3, C64};

pub type Dense = Vec<Vec<C64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cgauss<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

pub fn random_tensor<R: Rng>(dims: (usize, usize, usize), rng: &mut R) -> ComplexTensor3 {
    ComplexTensor3::from_fn(dims, |_, _, _| cgauss(rng))
}

pub fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| cgauss(rng))
}

pub fn rel_err(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

pub fn to_dense(m: &ComplexMatrix) -> Dense {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| m[(r, c)]).collect())
        .collect()
}

pub fn from_dense(d: &Dense) -> ComplexMatrix {
    ComplexMatrix::from_fn(d.len(), d[0].len(), |r, c| d[r][c])
}

pub fn naive_matmul(a: &Dense, b: &Dense) -> Dense {
    let (m, k, n) = (a.len(), b.len(), b[0].len());
    let mut c = vec![vec![C64::new(0.0, 0.0); n]; m];
    for i in 0..m {
        for j in 0..n {
            for p in 0..k {
                c[i][j] += a[i][p] * b[p][j];
            }
        }
    }
    c
}

pub fn adjoint(a: &Dense) -> Dense {
    let (m, n) = (a.len(), a[0].len());
    (0..n).map(|j| (0..m).map(|i| a[i][j].conj()).collect()).collect()
}

/// `F[k][j] = exp(-2 pi i j k / n) / sqrt(n)`.
pub fn dft_matrix(n: usize) -> Dense {
    let s = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| {
            (0..n)
                .map(|j| C64::from_polar(s, -2.0 * PI * (j * k) as f64 / n as f64))
                .collect()
        })
        .collect()
}

/// Orthonormal DCT-II.
pub fn dct_matrix(n: usize) -> Dense {
    let nf = n as f64;
    (0..n)
        .map(|k| {
            let a = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            (0..n)
                .map(|j| C64::new(a * (PI * k as f64 * (2 * j + 1) as f64 / (2.0 * nf)).cos(), 0.0))
                .collect()
        })
        .collect()
}

pub fn identity_matrix(n: usize) -> Dense {
    (0..n)
        .map(|i| (0..n).map(|j| C64::new((i == j) as u8 as f64, 0.0)).collect())
        .collect()
}

/// `Y(i, j, :) = Q X(i, j, :)` by explicit loops.
pub fn naive_mode3(q: &Dense, x: &ComplexTensor3) -> ComplexTensor3 {
    let (n1, n2, n3) = x.dims();
    ComplexTensor3::from_fn((n1, n2, n3), |i, j, k| {
        (0..n3).map(|l| q[k][l] * x.get(i, j, l)).sum()
    })
}

pub fn slice_dense(x: &ComplexTensor3, k: usize) -> Dense {
    let (n1, n2, _) = x.dims();
    (0..n1).map(|i| (0..n2).map(|j| x.get(i, j, k)).collect()).collect()
}

pub fn from_slices_dense(slices: &[Dense]) -> ComplexTensor3 {
    let (n1, n2) = (slices[0].len(), slices[0][0].len());
    ComplexTensor3::from_fn((n1, n2, slices.len()), |i, j, k| slices[k][i][j])
}

/// Transform both factors, multiply slice by slice, transform back.
pub fn naive_t_product(a: &ComplexTensor3, b: &ComplexTensor3, q: &Dense) -> ComplexTensor3 {
    let ah = naive_mode3(q, a);
    let bh = naive_mode3(q, b);
    let slices: Vec<Dense> = (0..a.dims().2)
        .map(|k| naive_matmul(&slice_dense(&ah, k), &slice_dense(&bh, k)))
        .collect();
    naive_mode3(&adjoint(q), &from_slices_dense(&slices))
}

/// One-sided (Hestenes) Jacobi SVD. Returns `(U, sigma, V)` with
/// `k = min(m, n)` columns and `sigma` descending.
pub fn jacobi_svd(a: &Dense) -> (Dense, Vec<f64>, Dense) {
    let (m, n) = (a.len(), a[0].len());
    // columns of the working matrix
    let mut w: Vec<Vec<C64>> = (0..n).map(|j| (0..m).map(|i| a[i][j]).collect()).collect();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| (0..n).map(|i| C64::new((i == j) as u8 as f64, 0.0)).collect())
        .collect();
    let dot = |x: &[C64], y: &[C64]| -> C64 { x.iter().zip(y).map(|(a, b)| a.conj() * b).sum() };
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&w[p], &w[p]).re;
                let beta = dot(&w[q], &w[q]).re;
                let gamma = dot(&w[p], &w[q]);
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for cols in [&mut w, &mut v] {
                    let (lo, hi) = cols.split_at_mut(q);
                    let (cp, cq) = (&mut lo[p], &mut hi[0]);
                    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                        let yq = *y * phase.conj();
                        let xp = *x;
                        *x = xp * c - yq * s;
                        *y = xp * s + yq * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(f64, usize)> = (0..n)
        .map(|j| (dot(&w[j], &w[j]).re.sqrt(), j))
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    let k = m.min(n);
    let sigma: Vec<f64> = order[..k].iter().map(|o| o.0).collect();
    let u: Dense = (0..m)
        .map(|i| {
            order[..k]
                .iter()
                .map(|&(s, j)| if s > 0.0 { w[j][i] / s } else { C64::new(0.0, 0.0) })
                .collect()
        })
        .collect();
    let vv: Dense = (0..n)
        .map(|i| order[..k].iter().map(|&(_, j)| v[j][i]).collect())
        .collect();
    (u, sigma, vv)
}

pub fn jacobi_singular_values(a: &Dense) -> Vec<f64> {
    jacobi_svd(a).1
}

/// Centered orthonormal 2-D DFT by direct summation.
pub fn naive_fft2c(x: &ComplexTensor3) -> ComplexTensor3 {
    let (nx, ny, nt) = x.dims();
    let (hx, hy) = ((nx / 2) as f64, (ny / 2) as f64);
    let scale = 1.0 / ((nx * ny) as f64).sqrt();
    ComplexTensor3::from_fn((nx, ny, nt), |kx, ky, t| {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..nx {
            for j in 0..ny {
                let ph = -2.0
                    * PI
                    * ((kx as f64 - hx) * (i as f64 - hx) / nx as f64
                        + (ky as f64 - hy) * (j as f64 - hy) / ny as f64);
                acc += x.get(i, j, t) * C64::from_polar(1.0, ph);
            }
        }
        acc * scale
    })
}

pub fn re_inner(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Conjugate gradients for a Hermitian positive-definite operator.
pub fn cg_solve(
    apply: impl Fn(&[C64]) -> Vec<C64>,
    rhs: &[C64],
    tol: f64,
    max_iter: usize,
) -> Vec<C64> {
    let mut x = vec![C64::new(0.0, 0.0); rhs.len()];
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut rr = re_inner(&r, &r);
    let stop = tol * tol * re_inner(rhs, rhs);
    for _ in 0..max_iter {
        if rr <= stop {
            break;
        }
        let ap = apply(&p);
        let alpha = rr / re_inner(&p, &ap);
        for i in 0..x.len() {
            x[i] += p[i] * alpha;
            r[i] -= ap[i] * alpha;
        }
        let rr_new = re_inner(&r, &r);
        let beta = rr_new / rr;
        for i in 0..p.len() {
            p[i] = r[i] + p[i] * beta;
        }
        rr = rr_new;
    }
    x
}

/// Same-padded 3x3x3 convolution by seven nested loops. `w(dx, dy, dt, ci, co)`
/// with offsets `d* - 1`; volumes are channels-last.
#[allow(clippy::too_many_arguments)]
pub fn naive_conv3d(
    input: &[f64],
    dims: (usize, usize, usize),
    c_in: usize,
    c_out: usize,
    w: impl Fn(usize, usize, usize, usize, usize) -> f64,
    bias: &[f64],
) -> Vec<f64> {
    let (nx, ny, nt) = dims;
    let mut out = vec![0.0; nx * ny * nt * c_out];
    for t in 0..nt {
        for y in 0..ny {
            for x in 0..nx {
                for co in 0..c_out {
                    let mut acc = bias[co];
                    for dt in 0..3 {
                        for dy in 0..3 {
                            for dx in 0..3 {
                                let (xx, yy, tt) = (
                                    x as isize + dx as isize - 1,
                                    y as isize + dy as isize - 1,
                                    t as isize + dt as isize - 1,
                                );
                                if xx < 0
                                    || yy < 0
                                    || tt < 0
                                    || xx >= nx as isize
                                    || yy >= ny as isize
                                    || tt >= nt as isize
                                {
                                    continue;
                                }
                                let v = xx as usize + nx * (yy as usize + ny * tt as usize);
                                for ci in 0..c_in {
                                    acc += input[v * c_in + ci] * w(dx, dy, dt, ci, co);
                                }
                            }
                        }
                    }
                    out[(x + nx * (y + ny * t)) * c_out + co] = acc;
                }
            }
        }
    }
    out
}

/// Random tensor whose FFT-transformed slice `k` has rank `ranks[k]`; the
/// factor columns are random Fourier series with Gaussian spectral decay of
/// width `width`, so the slices look like smooth images.
pub fn smooth_low_rank(
    dims: (usize, usize, usize),
    ranks: &[usize],
    width: f64,
    seed: u64,
) -> ComplexTensor3 {
    let (nx, ny, nt) = dims;
    assert_eq!(ranks.len(), nt);
    let mut rng = rng(seed);
    let smooth = |n: usize, rng: &mut ChaCha8Rng| -> Vec<C64> {
        let coef: Vec<C64> = (0..n)
            .map(|f| {
                let freq = if f <= n / 2 { f as f64 } else { f as f64 - n as f64 };
                cgauss(rng) * (-(freq / width).powi(2)).exp()
            })
            .collect();
        (0..n)
            .map(|p| {
                coef.iter()
                    .enumerate()
                    .map(|(f, c)| c * C64::from_polar(1.0, 2.0 * PI * (f * p) as f64 / n as f64))
                    .sum()
            })
            .collect()
    };
    let mut slices = Vec::with_capacity(nt);
    for &r in ranks {
        let mut s = vec![vec![C64::new(0.0, 0.0); ny]; nx];
        for _ in 0..r {
            let u = smooth(nx, &mut rng);
            let v = smooth(ny, &mut rng);
            for i in 0..nx {
                for j in 0..ny {
                    s[i][j] += u[i] * v[j];
                }
            }
        }
        slices.push(s);
    }
    let hat = from_slices_dense(&slices);
    naive_mode3(&adjoint(&dft_matrix(nt)), &hat)
}

pub mod fd;
