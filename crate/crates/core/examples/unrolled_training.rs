//! Trains a small unrolled network on phantoms and compares it with ADMM
//! on held-out data. Takes a few minutes in release mode.
//!
//!     cargo run --release --example unrolled_training [epochs]

use ttnn_recon::admm::{reconstruct, AdmmConfig};
use ttnn_recon::data::{make_phantom, snr_db};
use ttnn_recon::forward::{adjoint, SamplingMask};
use ttnn_recon::net::net_forward;
use ttnn_recon::net::train::{train_with, TrainConfig, TrainSample};
use ttnn_recon::transform::UnitaryTransform;
use ttnn_recon::Result;

fn main() -> Result<()> {
    let epochs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(10);
    let (nx, ny, nt) = (32, 32, 8);
    let sample = |seed| -> Result<TrainSample> {
        let x = make_phantom(nx, ny, nt, seed)?;
        TrainSample::new(x, SamplingMask::radial(nx, ny, nt, 8, seed)?, Some(0.01))
    };
    let train = (0..8).map(sample).collect::<Result<Vec<_>>>()?;
    let test = sample(500)?;

    let cfg = TrainConfig { n_modules: 3, epochs, seed: 1, ..Default::default() };
    let out = train_with(&train, &cfg, |epoch, loss| println!("epoch {epoch}: loss {loss:.4e}"))?;

    let k = test.kspace(7)?;
    let (x_net, _) = net_forward(&out.net, &k)?;
    let (x_admm, _) = reconstruct(&k, &UnitaryTransform::fft(nt)?, &AdmmConfig::new(0.03, 0.1))?;
    println!("zero-filled {:.2} dB", snr_db(&test.reference, &adjoint(&k)?)?);
    println!("ADMM        {:.2} dB", snr_db(&test.reference, &x_admm)?);
    println!("unrolled    {:.2} dB", snr_db(&test.reference, &x_net)?);
    for (i, m) in out.net.modules.iter().enumerate() {
        println!("module {i}: tau {:.4} mu {:.4} eta {:.4}", m.tau(), m.mu(), m.eta());
    }
    Ok(())
}
