//! Supervised training with Adam and a per-epoch exponential learning rate.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{loss_and_gradient, ScalarInit, UnrolledNet, DEFAULT_MODULES};
use crate::error::{Error, Result};
use crate::forward::{add_noise, adjoint, forward, KSpaceData, SamplingMask};
use crate::linalg;
use crate::tensor::ComplexTensor3;

pub const DEFAULT_LR: f64 = 1e-3;
pub const DEFAULT_DECAY: f64 = 0.95;

/// A ground-truth image and how to sample it.
#[derive(Clone, Debug)]
pub struct TrainSample {
    pub reference: ComplexTensor3,
    pub mask: SamplingMask,
    pub noise_sigma: Option<f64>,
}

impl TrainSample {
    pub fn new(reference: ComplexTensor3, mask: SamplingMask, noise_sigma: Option<f64>) -> Result<Self> {
        if reference.dims() != mask.dims() {
            return Err(Error::DimensionMismatch {
                op: "train sample",
                left: reference.dims(),
                right: mask.dims(),
            });
        }
        Ok(Self {
            reference,
            mask,
            noise_sigma,
        })
    }

    /// Simulated measurement; the noise draw depends only on `seed`.
    pub fn kspace(&self, seed: u64) -> Result<KSpaceData> {
        let k = forward(&self.reference, &self.mask)?;
        match self.noise_sigma {
            Some(s) if s > 0.0 => add_noise(&k, s, seed),
            _ => Ok(k),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub n_modules: usize,
    pub epochs: usize,
    pub lr: f64,
    pub decay: f64,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Effective scalars at initialization; `tau` is estimated from the
    /// data when `None`.
    pub scalars: Option<ScalarInit>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_modules: DEFAULT_MODULES,
            epochs: 50,
            lr: DEFAULT_LR,
            decay: DEFAULT_DECAY,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            scalars: None,
        }
    }
}

/// `0.001 * 0.95^epoch`.
pub fn lr_schedule(epoch: usize) -> f64 {
    lr_at(DEFAULT_LR, DEFAULT_DECAY, epoch)
}

pub fn lr_at(lr0: f64, decay: f64, epoch: usize) -> f64 {
    lr0 * decay.powi(epoch as i32)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    pub fn new(n_params: usize, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            beta1,
            beta2,
            eps,
            step: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
        }
    }

    pub fn for_net(net: &UnrolledNet) -> Self {
        Self::new(net.n_params(), 0.9, 0.999, 1e-8)
    }
}

/// One bias-corrected Adam update in place.
pub fn adam_step(
    params: &mut UnrolledNet,
    grads: &UnrolledNet,
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    let mut p = params.to_flat();
    let g = grads.to_flat();
    if g.len() != p.len() || state.m.len() != p.len() {
        return Err(Error::invalid(format!(
            "adam: {} params, {} grads, {} moments",
            p.len(),
            g.len(),
            state.m.len()
        )));
    }
    state.step += 1;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = 1.0 - b1.powi(state.step as i32);
    let c2 = 1.0 - b2.powi(state.step as i32);
    for i in 0..p.len() {
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g[i];
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g[i] * g[i];
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        p[i] -= lr * m_hat / (v_hat.sqrt() + state.eps);
    }
    params.set_flat(&p)
}

/// `0.05 *` the median singular value over all frontal slices of the
/// zero-filled reconstructions.
pub fn initial_tau(measurements: &[KSpaceData]) -> Result<f64> {
    let mut sv = Vec::new();
    for k in measurements {
        let zf = adjoint(k)?;
        for m in zf.frontal_slices() {
            sv.extend(linalg::singular_values(&m)?);
        }
    }
    if sv.is_empty() {
        return Err(Error::invalid("no data to estimate the threshold from"));
    }
    sv.sort_by(f64::total_cmp);
    let med = sv[sv.len() / 2];
    Ok((0.05 * med).max(1e-8))
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub net: UnrolledNet,
    /// Mean training loss of each epoch.
    pub losses: Vec<f64>,
}

/// Trains a fresh network; see [`train_from`].
pub fn train(dataset: &[TrainSample], cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_with(dataset, cfg, |_, _| {})
}

/// Like [`train`], calling `on_epoch(epoch, mean_loss)` after each epoch.
pub fn train_with(
    dataset: &[TrainSample],
    cfg: &TrainConfig,
    on_epoch: impl FnMut(usize, f64),
) -> Result<TrainOutcome> {
    let measurements = simulate(dataset, cfg.seed)?;
    let scalars = match cfg.scalars {
        Some(s) => s,
        None => ScalarInit {
            tau: initial_tau(&measurements)?,
            ..ScalarInit::default()
        },
    };
    let net = UnrolledNet::init(cfg.n_modules, cfg.seed, scalars)?;
    fit(net, dataset, &measurements, cfg, on_epoch)
}

/// Continues training `net` for `cfg.epochs` epochs.
pub fn train_from(
    net: UnrolledNet,
    dataset: &[TrainSample],
    cfg: &TrainConfig,
    on_epoch: impl FnMut(usize, f64),
) -> Result<TrainOutcome> {
    let measurements = simulate(dataset, cfg.seed)?;
    fit(net, dataset, &measurements, cfg, on_epoch)
}

fn simulate(dataset: &[TrainSample], seed: u64) -> Result<Vec<KSpaceData>> {
    if dataset.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    dataset
        .iter()
        .enumerate()
        .map(|(i, s)| s.kspace(seed.wrapping_add(1 + i as u64)))
        .collect()
}

fn fit(
    mut net: UnrolledNet,
    dataset: &[TrainSample],
    measurements: &[KSpaceData],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<TrainOutcome> {
    net.validate()?;
    let mut adam = AdamState::new(net.n_params(), cfg.beta1, cfg.beta2, cfg.eps);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5EED_0F_0DE5);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let lr = lr_at(cfg.lr, cfg.decay, epoch);
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            let (loss, grads) = loss_and_gradient(&net, &measurements[i], &dataset[i].reference)?;
            if !loss.is_finite() {
                return Err(Error::NumericFailure(format!("loss diverged in epoch {epoch}")));
            }
            total += loss;
            adam_step(&mut net, &grads, &mut adam, lr)?;
        }
        let mean = total / dataset.len() as f64;
        on_epoch(epoch, mean);
        losses.push(mean);
    }
    Ok(TrainOutcome { net, losses })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_values() {
        assert_eq!(lr_schedule(0), 1e-3);
        assert!((lr_schedule(10) - 5.987_369_392_383_789e-4).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_keeps_params() {
        let mut net = UnrolledNet::init(1, 1, ScalarInit::default()).unwrap();
        let before = net.clone();
        let zero = net.zeros_like();
        let mut st = AdamState::for_net(&net);
        for _ in 0..3 {
            adam_step(&mut net, &zero, &mut st, 1e-3).unwrap();
        }
        assert_eq!(net, before);
    }

    #[test]
    fn empty_dataset_rejected() {
        assert!(train(&[], &TrainConfig::default()).is_err());
    }
}
