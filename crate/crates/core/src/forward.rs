//! Single-coil Cartesian acquisition model `b = M ⊙ F2(X) + n`.
//!
//! `F2` is the centered, orthonormal 2-D DFT applied to every frame
//! independently; the DC sample sits at `(nx/2, ny/2)` (integer division).
//! Measurements are kept as zero-filled k-space grids, which makes `A^H A`
//! a diagonal operator in k-space.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::seq::index::sample_weighted;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::tensor::{ComplexTensor3, Dims, C64};

/// Golden-angle increment between consecutive frames, in degrees.
pub const GOLDEN_ANGLE_DEG: f64 = 111.246_117_975;

/// Lines always acquired around the k-space center by [`SamplingMask::vds`].
pub const VDS_CENTER_LINES: usize = 4;

struct Plans {
    fwd_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl Plans {
    fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            fwd_x: planner.plan_fft_forward(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_x: planner.plan_fft_inverse(nx),
            inv_y: planner.plan_fft_inverse(ny),
        }
    }
}

/// Centered 2-D DFT of one column-major `nx x ny` frame, in place.
fn fft2c_frame(frame: &mut [C64], nx: usize, ny: usize, plans: &Plans, inverse: bool) {
    let (px, py) = if inverse {
        (&plans.inv_x, &plans.inv_y)
    } else {
        (&plans.fwd_x, &plans.fwd_y)
    };
    let scale = 1.0 / ((nx * ny) as f64).sqrt();
    let (hx, hy) = (nx / 2, ny / 2);

    // ifftshift on input, FFT, fftshift on output, both axes.
    let mut buf = vec![C64::new(0.0, 0.0); nx * ny];
    for j in 0..ny {
        let sj = (j + hy) % ny;
        for i in 0..nx {
            buf[i + nx * j] = frame[(i + hx) % nx + nx * sj];
        }
    }
    for col in buf.chunks_mut(nx) {
        px.process(col);
    }
    let mut row = vec![C64::new(0.0, 0.0); ny];
    for i in 0..nx {
        for j in 0..ny {
            row[j] = buf[i + nx * j];
        }
        py.process(&mut row);
        for j in 0..ny {
            buf[i + nx * j] = row[j];
        }
    }
    for j in 0..ny {
        let sj = (j + ny - hy) % ny;
        for i in 0..nx {
            frame[i + nx * j] = buf[(i + nx - hx) % nx + nx * sj] * scale;
        }
    }
}

fn fft2c_impl(x: &ComplexTensor3, inverse: bool) -> ComplexTensor3 {
    let (nx, ny, _) = x.dims();
    let plans = Plans::new(nx, ny);
    let mut out = x.clone();
    if nx * ny == 0 {
        return out;
    }
    out.as_mut_slice()
        .par_chunks_mut(nx * ny)
        .for_each(|f| fft2c_frame(f, nx, ny, &plans, inverse));
    out
}

/// Orthonormal centered 2-D DFT of every frame.
pub fn fft2c(x: &ComplexTensor3) -> ComplexTensor3 {
    fft2c_impl(x, false)
}

/// Inverse (= adjoint) of [`fft2c`].
pub fn ifft2c(k: &ComplexTensor3) -> ComplexTensor3 {
    fft2c_impl(k, true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaskKind {
    Full,
    Radial,
    Vds,
    Custom,
}

impl MaskKind {
    pub fn code(self) -> u8 {
        match self {
            MaskKind::Full => 0,
            MaskKind::Radial => 1,
            MaskKind::Vds => 2,
            MaskKind::Custom => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => MaskKind::Full,
            1 => MaskKind::Radial,
            2 => MaskKind::Vds,
            3 => MaskKind::Custom,
            _ => return None,
        })
    }
}

/// Binary k-space sampling pattern, one frame per temporal index.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingMask {
    dims: Dims,
    data: Vec<u8>,
    pub kind: MaskKind,
    pub seed: u64,
    /// Spokes for radial masks, target acceleration for vds.
    pub param: f64,
}

impl SamplingMask {
    /// Validates a raw 0/1 array (same element order as tensors).
    pub fn from_data(dims: Dims, data: Vec<u8>) -> Result<Self> {
        let (nx, ny, nt) = dims;
        if nx * ny * nt == 0 {
            return Err(Error::invalid(format!("mask dims must be positive, got {dims:?}")));
        }
        if data.len() != nx * ny * nt {
            return Err(Error::invalid(format!(
                "mask {dims:?} needs {} entries, got {}",
                nx * ny * nt,
                data.len()
            )));
        }
        if data.iter().any(|&v| v > 1) {
            return Err(Error::invalid("mask entries must be 0 or 1"));
        }
        for (t, frame) in data.chunks(nx * ny).enumerate() {
            if frame.iter().all(|&v| v == 0) {
                return Err(Error::invalid(format!("mask frame {t} has no samples")));
            }
        }
        Ok(Self {
            dims,
            data,
            kind: MaskKind::Custom,
            seed: 0,
            param: 0.0,
        })
    }

    pub fn full(dims: Dims) -> Result<Self> {
        let n = dims.0 * dims.1 * dims.2;
        let mut m = Self::from_data(dims, vec![1; n])?;
        m.kind = MaskKind::Full;
        m.param = 1.0;
        Ok(m)
    }

    /// Pseudo-radial pattern: `spokes` lines through the k-space center per
    /// frame, evenly spread over 180°, with the whole set rotated by the
    /// golden angle from one frame to the next. The seed picks the initial
    /// rotation.
    pub fn radial(nx: usize, ny: usize, nt: usize, spokes: usize, seed: u64) -> Result<Self> {
        if nx * ny * nt == 0 {
            return Err(Error::invalid(format!(
                "mask dims must be positive, got {:?}",
                (nx, ny, nt)
            )));
        }
        if spokes == 0 {
            return Err(Error::invalid("radial mask needs at least one spoke"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let offset = rng.random::<f64>() * PI;
        let golden = GOLDEN_ANGLE_DEG.to_radians();
        let (cx, cy) = ((nx / 2) as f64, (ny / 2) as f64);
        let mut data = vec![0u8; nx * ny * nt];
        for t in 0..nt {
            let frame = &mut data[t * nx * ny..(t + 1) * nx * ny];
            let base = offset + golden * t as f64;
            for s in 0..spokes {
                let theta = base + PI * s as f64 / spokes as f64;
                let (sin, cos) = theta.sin_cos();
                if cos.abs() >= sin.abs() {
                    let slope = sin / cos;
                    for ix in 0..nx {
                        let y = (cy + (ix as f64 - cx) * slope).round();
                        if y >= 0.0 && (y as usize) < ny {
                            frame[ix + nx * y as usize] = 1;
                        }
                    }
                } else {
                    let slope = cos / sin;
                    for iy in 0..ny {
                        let x = (cx + (iy as f64 - cy) * slope).round();
                        if x >= 0.0 && (x as usize) < nx {
                            frame[x as usize + nx * iy] = 1;
                        }
                    }
                }
            }
        }
        let mut m = Self::from_data((nx, ny, nt), data)?;
        m.kind = MaskKind::Radial;
        m.seed = seed;
        m.param = spokes as f64;
        Ok(m)
    }

    /// Variable-density Cartesian pattern: `round(ny / acc)` full readout
    /// lines (along x) per frame, made of a fully sampled center band plus
    /// lines drawn without replacement from a Gaussian density (std `ny/6`)
    /// over the line index. Frames are drawn independently.
    pub fn vds(nx: usize, ny: usize, nt: usize, acc: f64, seed: u64) -> Result<Self> {
        if nx * ny * nt == 0 {
            return Err(Error::invalid(format!(
                "mask dims must be positive, got {:?}",
                (nx, ny, nt)
            )));
        }
        if !(acc > 1.0) {
            return Err(Error::invalid(format!("vds acceleration must be > 1, got {acc}")));
        }
        if acc > ny as f64 {
            return Err(Error::invalid(format!(
                "vds acceleration {acc} exceeds the number of phase-encode lines {ny}"
            )));
        }
        let lines = ((ny as f64 / acc).round() as usize).clamp(1, ny);
        let band = VDS_CENTER_LINES.min(lines);
        let cy = ny / 2;
        let band_start = cy.saturating_sub(band / 2).min(ny - band);
        let sigma = ny as f64 / 6.0;
        let candidates: Vec<usize> = (0..ny)
            .filter(|&y| y < band_start || y >= band_start + band)
            .collect();
        let weights: Vec<f64> = candidates
            .iter()
            .map(|&y| {
                let d = y as f64 - cy as f64;
                (-(d * d) / (2.0 * sigma * sigma)).exp().max(1e-300)
            })
            .collect();

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = vec![0u8; nx * ny * nt];
        for t in 0..nt {
            let frame = &mut data[t * nx * ny..(t + 1) * nx * ny];
            let mut chosen: Vec<usize> = (band_start..band_start + band).collect();
            let extra = lines - band;
            if extra > 0 {
                let picked = sample_weighted(&mut rng, candidates.len(), |i| weights[i], extra)
                    .map_err(|e| Error::NumericFailure(format!("vds sampling failed: {e}")))?;
                chosen.extend(picked.iter().map(|i| candidates[i]));
            }
            for y in chosen {
                frame[nx * y..nx * (y + 1)].fill(1);
            }
        }
        let mut m = Self::from_data((nx, ny, nt), data)?;
        m.kind = MaskKind::Vds;
        m.seed = seed;
        m.param = acc;
        Ok(m)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        self.data[i + self.dims.0 * (j + self.dims.1 * k)] != 0
    }

    /// `(nx ny nt) / #samples`.
    pub fn acceleration_factor(&self) -> Result<f64> {
        acceleration_factor(self)
    }
}

pub fn acceleration_factor(mask: &SamplingMask) -> Result<f64> {
    let n = mask.count();
    if n == 0 {
        return Err(Error::invalid("acceleration factor of an empty mask"));
    }
    Ok(mask.data.len() as f64 / n as f64)
}

/// Zero-filled measured k-space.
#[derive(Clone, Debug, PartialEq)]
pub struct KSpaceData {
    pub grid: ComplexTensor3,
    pub mask: SamplingMask,
    pub noise_sigma: f64,
}

impl KSpaceData {
    pub fn new(grid: ComplexTensor3, mask: SamplingMask, noise_sigma: f64) -> Result<Self> {
        if grid.dims() != mask.dims() {
            return Err(Error::DimensionMismatch {
                op: "kspace",
                left: grid.dims(),
                right: mask.dims(),
            });
        }
        let mut grid = grid;
        for (g, &m) in grid.as_mut_slice().iter_mut().zip(mask.as_slice()) {
            if m == 0 {
                *g = C64::new(0.0, 0.0);
            }
        }
        Ok(Self {
            grid,
            mask,
            noise_sigma,
        })
    }

    pub fn dims(&self) -> Dims {
        self.grid.dims()
    }
}

/// Zeroes every entry where the mask is 0.
pub fn apply_mask(k: &mut ComplexTensor3, mask: &SamplingMask) {
    for (g, &m) in k.as_mut_slice().iter_mut().zip(mask.as_slice()) {
        if m == 0 {
            *g = C64::new(0.0, 0.0);
        }
    }
}

/// `A(X) = M ⊙ F2(X)`.
pub fn forward(x: &ComplexTensor3, mask: &SamplingMask) -> Result<KSpaceData> {
    if x.dims() != mask.dims() {
        return Err(Error::DimensionMismatch {
            op: "forward",
            left: x.dims(),
            right: mask.dims(),
        });
    }
    let mut grid = fft2c(x);
    apply_mask(&mut grid, mask);
    Ok(KSpaceData {
        grid,
        mask: mask.clone(),
        noise_sigma: 0.0,
    })
}

/// `A^H b = F2^H(M ⊙ b)`.
pub fn adjoint(k: &KSpaceData) -> Result<ComplexTensor3> {
    if k.grid.dims() != k.mask.dims() {
        return Err(Error::DimensionMismatch {
            op: "adjoint",
            left: k.grid.dims(),
            right: k.mask.dims(),
        });
    }
    let mut g = k.grid.clone();
    apply_mask(&mut g, &k.mask);
    Ok(ifft2c(&g))
}

/// Adds circular complex white Gaussian noise of standard deviation `sigma`
/// (real and imaginary parts each `N(0, sigma^2/2)`) to sampled entries.
pub fn add_noise(k: &KSpaceData, sigma: f64, seed: u64) -> Result<KSpaceData> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("noise sigma must be >= 0, got {sigma}")));
    }
    let mut out = k.clone();
    out.noise_sigma = (k.noise_sigma.powi(2) + sigma * sigma).sqrt();
    if sigma == 0.0 {
        return Ok(out);
    }
    let normal = Normal::new(0.0, sigma / 2f64.sqrt())
        .map_err(|e| Error::invalid(format!("noise distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (g, &m) in out.grid.as_mut_slice().iter_mut().zip(k.mask.as_slice()) {
        if m != 0 {
            *g += C64::new(normal.sample(&mut rng), normal.sample(&mut rng));
        }
    }
    Ok(out)
}
