//! Transformed t-SVD of a random tensor under each built-in transform.
//!
//!     cargo run --example tsvd_basics

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ttnn_recon::transform::UnitaryTransform;
use ttnn_recon::tsvd::{t_product, t_tsvt, transformed_multirank, transformed_tsvd, ttnn};
use ttnn_recon::{ComplexTensor3, Result, C64};

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut rand_tensor = |dims| {
        ComplexTensor3::from_fn(dims, |_, _, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    };
    let nt = 6;

    // a tensor of tubal rank 2: product of 8x2x6 and 2x8x6 factors
    let a = rand_tensor((8, 2, nt));
    let b = rand_tensor((2, 8, nt));

    for t in [
        UnitaryTransform::fft(nt)?,
        UnitaryTransform::dct(nt)?,
        UnitaryTransform::identity(nt)?,
    ] {
        let x = t_product(&a, &b, &t)?;
        let dec = transformed_tsvd(&x, &t)?;
        let err = dec.reconstruct()?.sub(&x)?.fro_norm() / x.fro_norm();
        let rank = transformed_multirank(&x, &t, 1e-10)?;
        println!(
            "{:?}: ttnn {:.3}, multirank {:?}, reconstruction error {err:.1e}",
            t.kind(),
            ttnn(&x, &t)?,
            rank.ranks
        );

        // thresholding shrinks the nuclear norm
        let z = t_tsvt(&x, 0.5, &t)?;
        println!("    after t_tsvt(0.5): ttnn {:.3}", ttnn(&z, &t)?);
    }
    Ok(())
}
