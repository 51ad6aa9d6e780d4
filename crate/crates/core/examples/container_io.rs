//! Writes tensors, a mask and scalars to a container file, reads them back
//! and exports a frame as PGM.
//!
//!     cargo run --example container_io [dir]

use std::path::PathBuf;

use ttnn_recon::data::{export_magnitude_image, load_container, make_phantom, save_container, TensorContainer};
use ttnn_recon::forward::SamplingMask;
use ttnn_recon::Result;

fn main() -> Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let path = dir.join("example.ct3");

    let image = make_phantom(32, 32, 8, 0)?;
    let mask = SamplingMask::vds(32, 32, 8, 4.0, 0)?;
    let mut c = TensorContainer::new();
    c.insert_tensor("image", &image)?;
    c.insert_mask("mask", &mask)?;
    c.insert_scalar("noise_sigma", 0.01)?;
    save_container(&path, &c)?;

    let back = load_container(&path)?;
    for e in back.entries() {
        println!("{:<12} {:?} {:?}", e.name, e.dims, e.payload.dtype());
    }
    assert_eq!(back.tensor("image")?, image);
    assert_eq!(back.mask("mask")?, mask);
    println!("noise_sigma = {}", back.scalar("noise_sigma")?);

    let pgm = dir.join("frame0.pgm");
    export_magnitude_image(&image, 0, &pgm)?;
    println!("wrote {} and {}", path.display(), pgm.display());
    Ok(())
}
