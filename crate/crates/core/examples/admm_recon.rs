//! Reconstructs an undersampled phantom with TTNN-regularized ADMM and
//! compares transforms against the zero-filled baseline.
//!
//!     cargo run --release --example admm_recon

use ttnn_recon::admm::{reconstruct, AdmmConfig};
use ttnn_recon::data::{make_phantom, snr_db};
use ttnn_recon::forward::{add_noise, adjoint, forward, SamplingMask};
use ttnn_recon::transform::UnitaryTransform;
use ttnn_recon::Result;

fn main() -> Result<()> {
    let (nx, ny, nt) = (48, 48, 12);
    let truth = make_phantom(nx, ny, nt, 2)?;
    let mask = SamplingMask::radial(nx, ny, nt, 12, 2)?;
    let k = add_noise(&forward(&truth, &mask)?, 0.01, 3)?;
    println!("acceleration {:.2}", mask.acceleration_factor()?);
    println!("zero-filled: {:.2} dB", snr_db(&truth, &adjoint(&k)?)?);

    for t in [UnitaryTransform::fft(nt)?, UnitaryTransform::dct(nt)?, UnitaryTransform::identity(nt)?] {
        let mut cfg = AdmmConfig::new(0.03, 0.1);
        cfg.max_iters = 150;
        let (x, history) = reconstruct(&k, &t, &cfg)?;
        let last = history.last().expect("at least one iteration");
        println!(
            "{:?}: {:.2} dB after {} iterations (objective {:.4e})",
            t.kind(),
            snr_db(&truth, &x)?,
            history.len(),
            last.objective
        );
    }
    Ok(())
}
