mod common;

use common::{cg_solve, naive_fft2c, random_tensor, rel_err, rng};
use ttnn_recon::admm::*;
use ttnn_recon::data::metrics::snr_db;
use ttnn_recon::data::phantom::make_phantom;
use ttnn_recon::forward::{self, KSpaceData, SamplingMask};
use ttnn_recon::transform::UnitaryTransform;
use ttnn_recon::tsvd::t_tsvt;
use ttnn_recon::{ComplexTensor3, Error, C64};

/// Centered DFT with a symmetric kernel, so the inverse is conj(F(conj(y))).
fn naive_ifft2c(y: &ComplexTensor3) -> ComplexTensor3 {
    let conj = |t: &ComplexTensor3| {
        ComplexTensor3::from_vec(t.dims(), t.as_slice().iter().map(|z| z.conj()).collect()).unwrap()
    };
    conj(&naive_fft2c(&conj(y)))
}

#[test]
fn x_step_matches_conjugate_gradients() {
    let mut r = rng(10);
    let dims = (8, 8, 2);
    let mask = SamplingMask::vds(8, 8, 2, 2.0, 1).unwrap();
    let b = forward::forward(&random_tensor(dims, &mut r), &mask).unwrap();
    let z = random_tensor(dims, &mut r);
    let l = random_tensor(dims, &mut r);
    for mu in [0.05, 1.0, 7.0] {
        let got = solve_data_consistency(&z, &l, &b, mu).unwrap();

        let apply = |v: &[C64]| -> Vec<C64> {
            let x = ComplexTensor3::from_vec(dims, v.to_vec()).unwrap();
            let mut k = naive_fft2c(&x);
            for (kk, &m) in k.as_mut_slice().iter_mut().zip(mask.as_slice()) {
                *kk *= m as f64;
            }
            naive_ifft2c(&k)
                .as_slice()
                .iter()
                .zip(v)
                .map(|(a, vv)| a + vv * mu)
                .collect()
        };
        let atb = naive_ifft2c(&b.grid);
        let zl = z.sub(&l).unwrap();
        let rhs: Vec<C64> = atb.as_slice().iter().zip(zl.as_slice()).map(|(a, d)| a + d * mu).collect();
        let want = cg_solve(apply, &rhs, 1e-14, 500);
        assert!(rel_err(got.as_slice(), &want) < 1e-10, "mu {mu}");
    }
}

#[test]
fn x_step_examples() {
    let mut r = rng(11);
    let dims = (6, 4, 3);
    let x = random_tensor(dims, &mut r);
    let full = SamplingMask::full(dims).unwrap();
    let b = forward::forward(&x, &full).unwrap();
    // full mask with Z - L equal to the truth reproduces it for any mu
    let zero = ComplexTensor3::zeros(dims);
    let got = solve_data_consistency(&x, &zero, &b, 3.0).unwrap();
    assert!(rel_err(got.as_slice(), x.as_slice()) < 1e-12);
    // full mask averages the two sources with weights 1 and mu
    let y = random_tensor(dims, &mut r);
    let got = solve_data_consistency(&y, &zero, &b, 1.0).unwrap();
    let avg: Vec<C64> = x.as_slice().iter().zip(y.as_slice()).map(|(a, c)| (a + c) * 0.5).collect();
    assert!(rel_err(got.as_slice(), &avg) < 1e-12);
    // frames without samples are rejected up front
    let empty = SamplingMask::from_data(dims, vec![0; 72]);
    assert!(empty.is_err() || KSpaceData::new(ComplexTensor3::zeros(dims), empty.unwrap(), 0.0).is_err());
    let partial = SamplingMask::vds(6, 4, 3, 2.0, 0).unwrap();
    let kb = KSpaceData::new(ComplexTensor3::zeros(dims), partial, 0.0).unwrap();
    assert!(matches!(
        solve_data_consistency(&y, &x, &kb, 0.0),
        Err(Error::NumericFailure(_))
    ));
}

#[test]
fn multiplier_update_examples() {
    let mut r = rng(12);
    let dims = (3, 3, 2);
    let l = random_tensor(dims, &mut r);
    let z = random_tensor(dims, &mut r);
    assert_eq!(multiplier_update(&l, &z, &z, 0.7).unwrap(), l);
    let x = random_tensor(dims, &mut r);
    let got = multiplier_update(&l, &z, &x, 0.5).unwrap();
    for ((g, ll), (zz, xx)) in got.as_slice().iter().zip(l.as_slice()).zip(z.as_slice().iter().zip(x.as_slice())) {
        assert!((g - (ll - (zz - xx) * 0.5)).norm() < 1e-15);
    }
}

#[test]
fn full_mask_converges_to_the_proximal_point() {
    let mut r = rng(13);
    let dims = (8, 8, 4);
    let y = random_tensor(dims, &mut r);
    let full = SamplingMask::full(dims).unwrap();
    let b = forward::forward(&y, &full).unwrap();
    let t = UnitaryTransform::fft(4).unwrap();
    let mut cfg = AdmmConfig::new(0.8, 1.0);
    cfg.max_iters = 500;
    cfg.rel_tol = 1e-13;
    let (x, _) = reconstruct(&b, &t, &cfg).unwrap();
    let want = t_tsvt(&y, 0.8, &t).unwrap();
    assert!(rel_err(x.as_slice(), want.as_slice()) < 1e-8);
}

#[test]
fn objective_decreases_and_iterations_stay_finite() {
    let x = make_phantom(24, 24, 8, 1).unwrap();
    let mask = SamplingMask::radial(24, 24, 8, 10, 2).unwrap();
    let b = forward::add_noise(&forward::forward(&x, &mask).unwrap(), 0.01, 3).unwrap();
    let t = UnitaryTransform::fft(8).unwrap();
    let mut cfg = AdmmConfig::new(0.01, 0.05);
    cfg.rel_tol = 0.0;
    cfg.max_iters = 60;
    let state = run(&b, &t, &cfg).unwrap();
    let h = &state.history;
    assert_eq!(h.len(), 60);
    let first = objective(&forward::adjoint(&b).unwrap(), &b, &t, cfg.lambda).unwrap();
    assert!(h.last().unwrap().objective < first);
    assert!(h.iter().all(|r| r.objective.is_finite() && r.primal_residual.is_finite()));
    assert!(h.last().unwrap().primal_residual < h[0].primal_residual);
    let zf = snr_db(&x, &forward::adjoint(&b).unwrap()).unwrap();
    assert!(snr_db(&x, &state.x).unwrap() > zf);
}

#[test]
fn zero_measurements_give_zero() {
    let dims = (8, 8, 4);
    let mask = SamplingMask::radial(8, 8, 4, 3, 0).unwrap();
    let b = KSpaceData::new(ComplexTensor3::zeros(dims), mask, 0.0).unwrap();
    let t = UnitaryTransform::dct(4).unwrap();
    let (x, h) = reconstruct(&b, &t, &AdmmConfig::new(0.1, 1.0)).unwrap();
    assert_eq!(x.fro_norm(), 0.0);
    assert!(h.len() <= 2);
}

#[test]
fn runs_are_deterministic() {
    let x = make_phantom(16, 16, 4, 5).unwrap();
    let mask = SamplingMask::vds(16, 16, 4, 3.0, 5).unwrap();
    let b = forward::add_noise(&forward::forward(&x, &mask).unwrap(), 0.02, 6).unwrap();
    let t = UnitaryTransform::fft(4).unwrap();
    let cfg = AdmmConfig::new(0.02, 0.2);
    let (a, ha) = reconstruct(&b, &t, &cfg).unwrap();
    let (c, hc) = reconstruct(&b, &t, &cfg).unwrap();
    assert_eq!(a, c);
    assert_eq!(ha, hc);
    let csv = history_csv(&ha);
    assert!(csv.starts_with("iter,objective,primal_residual,rel_change\n"));
    assert_eq!(csv.lines().count(), ha.len() + 1);
}

#[test]
fn bad_inputs_are_rejected() {
    let dims = (8, 8, 4);
    let b = KSpaceData::new(ComplexTensor3::zeros(dims), SamplingMask::full(dims).unwrap(), 0.0).unwrap();
    let t3 = UnitaryTransform::fft(3).unwrap();
    let cfg = AdmmConfig::new(0.1, 1.0);
    assert!(matches!(reconstruct(&b, &t3, &cfg), Err(Error::DimensionMismatch { .. })));
    let t = UnitaryTransform::fft(4).unwrap();
    for bad in [
        AdmmConfig { lambda: -1.0, ..cfg.clone() },
        AdmmConfig { mu: 0.0, ..cfg.clone() },
        AdmmConfig { eta: f64::NAN, ..cfg.clone() },
        AdmmConfig { max_iters: 0, ..cfg.clone() },
    ] {
        assert!(matches!(reconstruct(&b, &t, &bad), Err(Error::InvalidArgument(_))));
    }
}
