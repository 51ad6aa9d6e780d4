//! Saves an untrained network to a checkpoint, reloads it and runs
//! inference, then shows that an ADMM-equivalent network reproduces
//! plain ADMM iterations.
//!
//!     cargo run --release --example checkpoint_infer

use ttnn_recon::admm::{reconstruct, AdmmConfig};
use ttnn_recon::data::{make_phantom, snr_db};
use ttnn_recon::forward::{forward, SamplingMask};
use ttnn_recon::net::checkpoint::{load_checkpoint, save_checkpoint};
use ttnn_recon::net::{net_forward, ScalarInit, UnrolledNet};
use ttnn_recon::transform::UnitaryTransform;
use ttnn_recon::Result;

fn main() -> Result<()> {
    let truth = make_phantom(16, 16, 4, 3)?;
    let k = forward(&truth, &SamplingMask::radial(16, 16, 4, 6, 3)?)?;

    let net = UnrolledNet::init(2, 3, ScalarInit::default())?;
    let path = std::env::temp_dir().join("example_net.ct3");
    save_checkpoint(&net, &path)?;
    let back = load_checkpoint(&path)?;
    let (a, _) = net_forward(&net, &k)?;
    let (b, _) = net_forward(&back, &k)?;
    println!("{} parameters, reload identical: {}", net.n_params(), a == b);

    let init = ScalarInit { tau: 0.02, mu: 0.5, eta: 1.0 };
    let equiv = UnrolledNet::admm_equivalent(5, init)?;
    let (x_net, _) = net_forward(&equiv, &k)?;
    let mut cfg = AdmmConfig::new(init.tau * init.mu, init.mu);
    cfg.eta = init.eta;
    cfg.max_iters = 5;
    cfg.rel_tol = 0.0;
    let (x_admm, _) = reconstruct(&k, &UnitaryTransform::identity(4)?, &cfg)?;
    let diff = x_net.sub(&x_admm)?.fro_norm() / x_admm.fro_norm();
    println!("5-module ADMM-equivalent net vs 5 ADMM iterations: rel diff {diff:.1e}");
    println!("snr {:.2} dB", snr_db(&truth, &x_net)?);
    Ok(())
}
