use crate::error::{Error, Result};
use crate::tensor::ComplexTensor3;

/// Reported in place of `+inf` when the reconstruction is exact.
pub const SNR_CAP_DB: f64 = 300.0;

/// Whole-volume reconstruction SNR `20 log10(||ref|| / ||ref - rec||)` on
/// complex Frobenius norms.
pub fn snr_db(reference: &ComplexTensor3, rec: &ComplexTensor3) -> Result<f64> {
    let err = reference.sub(rec)?.fro_norm();
    let signal = reference.fro_norm();
    if signal == 0.0 {
        return Err(Error::invalid("SNR of an all-zero reference"));
    }
    if err == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((20.0 * (signal / err).log10()).min(SNR_CAP_DB))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::C64;

    fn reference() -> ComplexTensor3 {
        ComplexTensor3::from_fn((4, 3, 2), |i, j, k| C64::new(i as f64 + 1.0, (j * k) as f64))
    }

    #[test]
    fn exact_and_zero() {
        let r = reference();
        assert_eq!(snr_db(&r, &r).unwrap(), SNR_CAP_DB);
        let zero = ComplexTensor3::zeros(r.dims());
        assert!(snr_db(&r, &zero).unwrap().abs() < 1e-12);
        assert!(snr_db(&zero, &r).is_err());
    }

    #[test]
    fn ten_percent_error_is_twenty_db() {
        let r = reference();
        let rec = r.scale(1.1);
        assert!((snr_db(&r, &rec).unwrap() - 20.0).abs() < 1e-9);
        let eps: f64 = 0.03;
        let rec = r.scale(1.0 + eps);
        assert!((snr_db(&r, &rec).unwrap() + 20.0 * eps.log10()).abs() < 1e-9);
    }
}
