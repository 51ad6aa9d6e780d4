//! Learns a temporal transform from training images and uses it for ADMM.
//!
//!     cargo run --release --example learned_transform

use ttnn_recon::admm::{reconstruct, AdmmConfig};
use ttnn_recon::data::{make_phantom, snr_db};
use ttnn_recon::forward::{add_noise, forward, SamplingMask};
use ttnn_recon::transform::UnitaryTransform;
use ttnn_recon::Result;

fn main() -> Result<()> {
    let (nx, ny, nt) = (32, 32, 8);
    let training = (0..10)
        .map(|s| make_phantom(nx, ny, nt, s))
        .collect::<Result<Vec<_>>>()?;
    let learned = UnitaryTransform::learn(&training)?;
    println!("learned transform, unitarity residual {:.1e}", learned.unitarity_residual());

    let truth = make_phantom(nx, ny, nt, 100)?;
    let mask = SamplingMask::radial(nx, ny, nt, 8, 100)?;
    let k = add_noise(&forward(&truth, &mask)?, 0.01, 1)?;
    for t in [UnitaryTransform::fft(nt)?, learned] {
        let (x, _) = reconstruct(&k, &t, &AdmmConfig::new(0.03, 0.1))?;
        println!("{:?}: {:.2} dB", t.kind(), snr_db(&truth, &x)?);
    }
    Ok(())
}
