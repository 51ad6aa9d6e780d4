//! 8-bit binary PGM export of single frames.

use std::path::Path;

use crate::data::container::write_atomic;
use crate::error::{Error, Result};
use crate::tensor::ComplexTensor3;

/// Encodes `|X(:, :, frame)|` as a P5 image with `nx` rows and `ny` columns,
/// linearly scaled so the frame maximum maps to 255.
pub fn magnitude_pgm(x: &ComplexTensor3, frame: usize) -> Result<Vec<u8>> {
    let (nx, ny, nt) = x.dims();
    if frame >= nt {
        return Err(Error::IndexOutOfRange {
            index: frame,
            len: nt,
        });
    }
    let slice = x.slice_data(frame);
    let max = slice.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    let mut out = format!("P5\n{ny} {nx}\n255\n").into_bytes();
    for i in 0..nx {
        for j in 0..ny {
            let v = if max > 0.0 {
                (slice[i + nx * j].norm() / max * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                0
            };
            out.push(v);
        }
    }
    Ok(out)
}

pub fn export_magnitude_image(x: &ComplexTensor3, frame: usize, path: &Path) -> Result<()> {
    write_atomic(path, &magnitude_pgm(x, frame)?)
}

/// Magnitude of `reference - rec` for one frame.
pub fn export_error_map(
    reference: &ComplexTensor3,
    rec: &ComplexTensor3,
    frame: usize,
    path: &Path,
) -> Result<()> {
    export_magnitude_image(&reference.sub(rec)?, frame, path)
}
