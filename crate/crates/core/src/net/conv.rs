//! 3x3x3 "same" convolutions over channels-last volumes.
//!
//! A volume with spatial dims `(nx, ny, nt)` and `c` channels is stored with
//! the channel index fastest, then x, y, t; a complex tensor reinterpreted
//! as `[re, im]` pairs is therefore already a 2-channel volume. Kernels are
//! laid out `[tap][c_in][c_out]` with `tap = dx + 3 (dy + 3 dt)`, so each
//! layer is one GEMM against the im2col matrix.

use crate::tensor::Dims;

pub const TAPS: usize = 27;

#[inline]
fn voxels(d: Dims) -> usize {
    d.0 * d.1 * d.2
}

/// Gathers the 27-neighborhood of every voxel: row `v` holds
/// `[tap][c]` with zeros outside the volume.
fn im2col(input: &[f64], d: Dims, c: usize) -> Vec<f64> {
    let (nx, ny, nt) = d;
    let width = TAPS * c;
    let mut cols = vec![0.0; voxels(d) * width];
    let mut v = 0;
    for t in 0..nt {
        for y in 0..ny {
            for x in 0..nx {
                let row = &mut cols[v * width..(v + 1) * width];
                for dt in 0..3 {
                    let tt = t as isize + dt as isize - 1;
                    if tt < 0 || tt >= nt as isize {
                        continue;
                    }
                    for dy in 0..3 {
                        let yy = y as isize + dy as isize - 1;
                        if yy < 0 || yy >= ny as isize {
                            continue;
                        }
                        for dx in 0..3 {
                            let xx = x as isize + dx as isize - 1;
                            if xx < 0 || xx >= nx as isize {
                                continue;
                            }
                            let tap = dx + 3 * (dy + 3 * dt);
                            let src = (xx as usize + nx * (yy as usize + ny * tt as usize)) * c;
                            row[tap * c..(tap + 1) * c].copy_from_slice(&input[src..src + c]);
                        }
                    }
                }
                v += 1;
            }
        }
    }
    cols
}

/// Scatter-adds im2col rows back onto the volume (adjoint of [`im2col`]).
fn col2im_add(cols: &[f64], d: Dims, c: usize, out: &mut [f64]) {
    let (nx, ny, nt) = d;
    let width = TAPS * c;
    let mut v = 0;
    for t in 0..nt {
        for y in 0..ny {
            for x in 0..nx {
                let row = &cols[v * width..(v + 1) * width];
                for dt in 0..3 {
                    let tt = t as isize + dt as isize - 1;
                    if tt < 0 || tt >= nt as isize {
                        continue;
                    }
                    for dy in 0..3 {
                        let yy = y as isize + dy as isize - 1;
                        if yy < 0 || yy >= ny as isize {
                            continue;
                        }
                        for dx in 0..3 {
                            let xx = x as isize + dx as isize - 1;
                            if xx < 0 || xx >= nx as isize {
                                continue;
                            }
                            let tap = dx + 3 * (dy + 3 * dt);
                            let dst = (xx as usize + nx * (yy as usize + ny * tt as usize)) * c;
                            for (o, g) in out[dst..dst + c].iter_mut().zip(&row[tap * c..]) {
                                *o += g;
                            }
                        }
                    }
                }
                v += 1;
            }
        }
    }
}

/// Row-major `C = alpha A B + beta C` with explicit strides.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
    (rsc, csc): (usize, usize),
) {
    if m == 0 || n == 0 {
        return;
    }
    assert!(m == 0 || k == 0 || (m - 1) * rsa + (k - 1) * csa < a.len());
    assert!(k == 0 || (k - 1) * rsb + (n - 1) * csb < b.len());
    assert!((m - 1) * rsc + (n - 1) * csc < c.len());
    // SAFETY: the checked extents keep every strided access in bounds.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            rsc as isize,
            csc as isize,
        );
    }
}

/// `out[v, co] = bias[co] + sum_{tap, ci} in[v + off(tap), ci] * kernel[tap, ci, co]`.
pub fn conv3d_forward(
    input: &[f64],
    d: Dims,
    c_in: usize,
    kernel: &[f64],
    bias: &[f64],
    c_out: usize,
) -> Vec<f64> {
    let nv = voxels(d);
    assert_eq!(input.len(), nv * c_in);
    assert_eq!(kernel.len(), TAPS * c_in * c_out);
    assert_eq!(bias.len(), c_out);
    let mut out = Vec::with_capacity(nv * c_out);
    for _ in 0..nv {
        out.extend_from_slice(bias);
    }
    let cols = im2col(input, d, c_in);
    let width = TAPS * c_in;
    gemm(
        nv,
        width,
        c_out,
        &cols,
        (width, 1),
        kernel,
        (c_out, 1),
        1.0,
        &mut out,
        (c_out, 1),
    );
    out
}

pub struct ConvGrads {
    pub input: Option<Vec<f64>>,
    pub kernel: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Gradients of a scalar loss given `grad_out = dL/d out`.
pub fn conv3d_backward(
    input: &[f64],
    d: Dims,
    c_in: usize,
    kernel: &[f64],
    c_out: usize,
    grad_out: &[f64],
    need_input: bool,
) -> ConvGrads {
    let nv = voxels(d);
    assert_eq!(grad_out.len(), nv * c_out);
    let width = TAPS * c_in;

    let mut bias = vec![0.0; c_out];
    for row in grad_out.chunks_exact(c_out) {
        for (b, g) in bias.iter_mut().zip(row) {
            *b += g;
        }
    }

    let cols = im2col(input, d, c_in);
    let mut gk = vec![0.0; width * c_out];
    gemm(
        width,
        nv,
        c_out,
        &cols,
        (1, width),
        grad_out,
        (c_out, 1),
        0.0,
        &mut gk,
        (c_out, 1),
    );
    drop(cols);

    let input_grad = need_input.then(|| {
        let mut gcols = vec![0.0; nv * width];
        gemm(
            nv,
            c_out,
            width,
            grad_out,
            (c_out, 1),
            kernel,
            (1, c_out),
            0.0,
            &mut gcols,
            (width, 1),
        );
        let mut gin = vec![0.0; nv * c_in];
        col2im_add(&gcols, d, c_in, &mut gin);
        gin
    });

    ConvGrads {
        input: input_grad,
        kernel: gk,
        bias,
    }
}
