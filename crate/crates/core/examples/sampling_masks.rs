//! Radial and variable-density masks and their acceleration factors.
//!
//!     cargo run --example sampling_masks

use ttnn_recon::forward::SamplingMask;
use ttnn_recon::Result;

fn show(name: &str, m: &SamplingMask) -> Result<()> {
    let (nx, ny, _) = m.dims();
    println!("{name}: acceleration {:.2}", m.acceleration_factor()?);
    for i in 0..nx {
        let row: String = (0..ny).map(|j| if m.get(i, j, 0) { '#' } else { '.' }).collect();
        println!("  {row}");
    }
    Ok(())
}

fn main() -> Result<()> {
    // small masks so the first frame fits on a terminal
    show("radial, 6 spokes", &SamplingMask::radial(24, 48, 8, 6, 0)?)?;
    show("vds, target 4", &SamplingMask::vds(24, 48, 8, 4.0, 0)?)?;

    // the reference geometry: 144x144, 16 frames
    let radial = SamplingMask::radial(144, 144, 16, 16, 0)?;
    println!("radial 16 spokes at 144x144: {:.2}", radial.acceleration_factor()?);
    for acc in [8.0, 10.0, 12.0] {
        let m = SamplingMask::vds(144, 144, 16, acc, 0)?;
        println!("vds target {acc}: realized {:.2}", m.acceleration_factor()?);
    }
    Ok(())
}
