//! Synthetic cine-like phantoms: a static body of overlapping ellipses with
//! one to three "beating" ellipses whose radii oscillate once per sequence,
//! under a smooth complex phase ramp.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{ComplexTensor3, C64};

struct Ellipse {
    cx: f64,
    cy: f64,
    rx: f64,
    ry: f64,
    angle: f64,
    value: f64,
}

impl Ellipse {
    fn contains(&self, x: f64, y: f64, scale: f64) -> bool {
        let (s, c) = self.angle.sin_cos();
        let dx = x - self.cx;
        let dy = y - self.cy;
        let u = (c * dx + s * dy) / (self.rx * scale);
        let v = (-s * dx + c * dy) / (self.ry * scale);
        u * u + v * v <= 1.0
    }
}

struct Beat {
    shape: Ellipse,
    amplitude: f64,
    phase: f64,
}

/// Generates an `nx x ny x nt` phantom with peak magnitude 1. Pure in
/// `(dims, seed)`.
pub fn make_phantom(nx: usize, ny: usize, nt: usize, seed: u64) -> Result<ComplexTensor3> {
    if nx < 16 || ny < 16 || nt < 4 {
        return Err(Error::invalid(format!(
            "phantom needs nx, ny >= 16 and nt >= 4, got {:?}",
            (nx, ny, nt)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Coordinates normalized to [-1, 1].
    let body = Ellipse {
        cx: rng.random_range(-0.05..0.05),
        cy: rng.random_range(-0.05..0.05),
        rx: rng.random_range(0.75..0.9),
        ry: rng.random_range(0.6..0.8),
        angle: rng.random_range(-0.3..0.3),
        value: rng.random_range(0.35..0.5),
    };
    let organs: Vec<Ellipse> = (0..rng.random_range(2..=4))
        .map(|_| Ellipse {
            cx: rng.random_range(-0.5..0.5),
            cy: rng.random_range(-0.4..0.4),
            rx: rng.random_range(0.1..0.3),
            ry: rng.random_range(0.1..0.3),
            angle: rng.random_range(0.0..PI),
            value: rng.random_range(-0.2..0.3),
        })
        .collect();
    let beats: Vec<Beat> = (0..rng.random_range(1..=3))
        .map(|_| Beat {
            shape: Ellipse {
                cx: rng.random_range(-0.35..0.35),
                cy: rng.random_range(-0.3..0.3),
                rx: rng.random_range(0.12..0.25),
                ry: rng.random_range(0.12..0.25),
                angle: rng.random_range(0.0..PI),
                value: rng.random_range(0.3..0.6),
            },
            amplitude: rng.random_range(0.1..0.25),
            phase: rng.random_range(0.0..2.0 * PI),
        })
        .collect();
    let ramp_x = rng.random_range(-1.0..1.0);
    let ramp_y = rng.random_range(-1.0..1.0);
    let ramp_0 = rng.random_range(0.0..2.0 * PI);

    let coord = |i: usize, n: usize| 2.0 * (i as f64 + 0.5) / n as f64 - 1.0;
    let mut x = ComplexTensor3::from_fn((nx, ny, nt), |i, j, t| {
        let (px, py) = (coord(i, nx), coord(j, ny));
        let mut m = 0.0;
        if body.contains(px, py, 1.0) {
            m += body.value;
            for o in &organs {
                if o.contains(px, py, 1.0) {
                    m += o.value;
                }
            }
            for b in &beats {
                let scale =
                    1.0 + b.amplitude * (2.0 * PI * t as f64 / nt as f64 + b.phase).sin();
                if b.shape.contains(px, py, scale) {
                    m += b.shape.value;
                }
            }
        }
        let m = m.max(0.0);
        C64::from_polar(m, ramp_0 + ramp_x * px + ramp_y * py)
    });
    let peak = x.as_slice().iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    if peak > 0.0 {
        x = x.scale(1.0 / peak);
    }
    Ok(x)
}
