//! Unrolled reconstruction network.
//!
//! Each iteration module mirrors one ADMM step, with the transform pair in
//! the Z block replaced by two small 3-D CNNs and the scalars learned:
//!
//! ```text
//! Y   = X_{n-1} + L_{n-1}
//! Z_n = Y + cnn_adj( SVT_tau( cnn_fwd(Y) ) )       (skip term optional)
//! X_n = F2^H[ (b + mu F2(Z_n - L_{n-1})) / (M + mu) ]
//! L_n = L_{n-1} - eta (Z_n - X_n)
//! ```
//!
//! `tau`, `mu` and `eta` are `softplus` of unconstrained raw parameters.

pub mod checkpoint;
pub mod conv;
pub mod spectral;
pub mod train;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::admm::{multiplier_update, solve_data_consistency};
use crate::error::{Error, Result};
use crate::forward::{adjoint, fft2c, ifft2c, KSpaceData, SamplingMask};
use crate::tensor::{ComplexTensor3, Dims, C64};

use self::conv::{conv3d_backward, conv3d_forward, TAPS};
use self::spectral::{svt_backward, svt_forward, SvtTape};

pub use self::checkpoint::{load_checkpoint, save_checkpoint};
pub use self::train::{adam_step, lr_schedule, train, AdamState, TrainConfig, TrainSample};

/// Channel chain of every CNN.
pub const CHANNELS: [usize; 4] = [2, 16, 16, 2];
pub const DEFAULT_MODULES: usize = 15;

// ---------------------------------------------------------------------------
// channel views

/// Real array of shape `(nx, ny, nt, channels)`, channel index fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelVolume {
    dims: Dims,
    channels: usize,
    data: Vec<f64>,
}

impl ChannelVolume {
    pub fn from_vec(dims: Dims, channels: usize, data: Vec<f64>) -> Result<Self> {
        let want = dims.0 * dims.1 * dims.2 * channels;
        if data.len() != want {
            return Err(Error::invalid(format!(
                "channel volume {dims:?}x{channels} needs {want} values, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, channels, data })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize, k: usize, c: usize) -> f64 {
        let (nx, ny, _) = self.dims;
        self.data[(i + nx * (j + ny * k)) * self.channels + c]
    }
}

pub fn complex_to_channels(x: &ComplexTensor3) -> ChannelVolume {
    ChannelVolume {
        dims: x.dims(),
        channels: 2,
        data: split(x),
    }
}

pub fn channels_to_complex(v: &ChannelVolume) -> Result<ComplexTensor3> {
    if v.channels != 2 {
        return Err(Error::invalid(format!(
            "a complex view needs 2 channels, got {}",
            v.channels
        )));
    }
    Ok(join(v.dims, &v.data))
}

fn split(x: &ComplexTensor3) -> Vec<f64> {
    x.as_slice().iter().flat_map(|z| [z.re, z.im]).collect()
}

fn join(dims: Dims, data: &[f64]) -> ComplexTensor3 {
    let v = data.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect();
    ComplexTensor3::from_vec(dims, v).expect("length checked by caller")
}

// ---------------------------------------------------------------------------
// CNN

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    None,
}

/// 3x3x3 convolution. `kernel` is laid out `[tap][c_in][c_out]` with
/// `tap = dx + 3 (dy + 3 dt)` and offsets `d* - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvLayer {
    pub c_in: usize,
    pub c_out: usize,
    pub kernel: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl ConvLayer {
    pub fn zeros(c_in: usize, c_out: usize, activation: Activation) -> Self {
        Self {
            c_in,
            c_out,
            kernel: vec![0.0; TAPS * c_in * c_out],
            bias: vec![0.0; c_out],
            activation,
        }
    }

    pub fn kernel_index(&self, dx: usize, dy: usize, dt: usize, ci: usize, co: usize) -> usize {
        let tap = dx + 3 * (dy + 3 * dt);
        (tap * self.c_in + ci) * self.c_out + co
    }

    pub fn weight(&self, dx: usize, dy: usize, dt: usize, ci: usize, co: usize) -> f64 {
        self.kernel[self.kernel_index(dx, dy, dt, ci, co)]
    }

    fn set_center(&mut self, ci: usize, co: usize, w: f64) {
        let i = self.kernel_index(1, 1, 1, ci, co);
        self.kernel[i] = w;
    }
}

/// Three conv layers `2 -> 16 -> 16 -> 2` with ReLU after the first two.
#[derive(Clone, Debug, PartialEq)]
pub struct Cnn {
    pub layers: [ConvLayer; 3],
}

struct CnnTape {
    dims: Dims,
    /// Input of each layer; `acts[l + 1]` is the activated output of layer `l`.
    acts: [Vec<f64>; 3],
}

impl Cnn {
    pub fn zeros() -> Self {
        let act = [Activation::Relu, Activation::Relu, Activation::None];
        Self {
            layers: std::array::from_fn(|l| ConvLayer::zeros(CHANNELS[l], CHANNELS[l + 1], act[l])),
        }
    }

    /// Center-tap weights that reproduce the input exactly: the first layer
    /// splits each part into its positive and negative halves so the ReLUs
    /// pass everything through, the last layer recombines them.
    pub fn identity() -> Self {
        let mut c = Self::zeros();
        for part in 0..2 {
            c.layers[0].set_center(part, 2 * part, 1.0);
            c.layers[0].set_center(part, 2 * part + 1, -1.0);
        }
        for ch in 0..4 {
            c.layers[1].set_center(ch, ch, 1.0);
        }
        for part in 0..2 {
            c.layers[2].set_center(2 * part, part, 1.0);
            c.layers[2].set_center(2 * part + 1, part, -1.0);
        }
        c
    }

    /// Weights and biases uniform in `±1/sqrt(fan_in)`.
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let mut c = Self::zeros();
        for layer in &mut c.layers {
            let bound = 1.0 / ((TAPS * layer.c_in) as f64).sqrt();
            for w in layer.kernel.iter_mut().chain(layer.bias.iter_mut()) {
                *w = rng.random_range(-bound..bound);
            }
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        let act = [Activation::Relu, Activation::Relu, Activation::None];
        for (l, layer) in self.layers.iter().enumerate() {
            if layer.c_in != CHANNELS[l] || layer.c_out != CHANNELS[l + 1] {
                return Err(Error::invalid(format!(
                    "layer {l} maps {} -> {} channels, expected {} -> {}",
                    layer.c_in,
                    layer.c_out,
                    CHANNELS[l],
                    CHANNELS[l + 1]
                )));
            }
            if layer.activation != act[l] {
                return Err(Error::invalid(format!("layer {l} has the wrong activation")));
            }
            if layer.kernel.len() != TAPS * layer.c_in * layer.c_out
                || layer.bias.len() != layer.c_out
            {
                return Err(Error::invalid(format!("layer {l} has malformed weights")));
            }
            if !layer.kernel.iter().chain(&layer.bias).all(|w| w.is_finite()) {
                return Err(Error::NumericFailure(format!("layer {l} has non-finite weights")));
            }
        }
        Ok(())
    }

    pub fn forward(&self, x: &ComplexTensor3) -> ComplexTensor3 {
        self.forward_taped(x).0
    }

    fn forward_taped(&self, x: &ComplexTensor3) -> (ComplexTensor3, CnnTape) {
        let d = x.dims();
        let mut acts: [Vec<f64>; 3] = Default::default();
        let mut h = split(x);
        for (l, layer) in self.layers.iter().enumerate() {
            let mut out = conv3d_forward(&h, d, layer.c_in, &layer.kernel, &layer.bias, layer.c_out);
            if layer.activation == Activation::Relu {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts[l] = std::mem::replace(&mut h, out);
        }
        (join(d, &h), CnnTape { dims: d, acts })
    }

    /// Accumulates parameter gradients into `grads` and returns the
    /// gradient with respect to the input.
    fn backward(&self, tape: &CnnTape, grad: &ComplexTensor3, grads: &mut Cnn) -> ComplexTensor3 {
        let d = tape.dims;
        let mut g = split(grad);
        for l in (0..3).rev() {
            let layer = &self.layers[l];
            if layer.activation == Activation::Relu {
                for (gv, &a) in g.iter_mut().zip(&tape.acts[l + 1]) {
                    if a <= 0.0 {
                        *gv = 0.0;
                    }
                }
            }
            let cg = conv3d_backward(&tape.acts[l], d, layer.c_in, &layer.kernel, layer.c_out, &g, true);
            let gl = &mut grads.layers[l];
            add_into(&mut gl.kernel, &cg.kernel);
            add_into(&mut gl.bias, &cg.bias);
            g = cg.input.expect("input gradient requested");
        }
        join(d, &g)
    }
}

pub fn cnn_forward(p: &Cnn, x: &ComplexTensor3) -> Result<ComplexTensor3> {
    p.validate()?;
    Ok(p.forward(x))
}

fn add_into(acc: &mut [f64], v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

// ---------------------------------------------------------------------------
// scalars

pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// Inverse of [`softplus`] for `y > 0`.
pub fn softplus_inv(y: f64) -> f64 {
    if y > 30.0 {
        y
    } else {
        y + (-(-y).exp_m1()).ln()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

// ---------------------------------------------------------------------------
// parameters

#[derive(Clone, Debug, PartialEq)]
pub struct IterationModule {
    pub cnn_fwd: Cnn,
    pub cnn_adj: Cnn,
    pub raw_tau: f64,
    pub raw_mu: f64,
    pub raw_eta: f64,
}

impl IterationModule {
    pub fn tau(&self) -> f64 {
        softplus(self.raw_tau)
    }

    pub fn mu(&self) -> f64 {
        softplus(self.raw_mu)
    }

    pub fn eta(&self) -> f64 {
        softplus(self.raw_eta)
    }

    fn zeros() -> Self {
        Self {
            cnn_fwd: Cnn::zeros(),
            cnn_adj: Cnn::zeros(),
            raw_tau: 0.0,
            raw_mu: 0.0,
            raw_eta: 0.0,
        }
    }
}

/// Effective (post-softplus) scalar values used at initialization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarInit {
    pub tau: f64,
    pub mu: f64,
    pub eta: f64,
}

impl Default for ScalarInit {
    fn default() -> Self {
        Self {
            tau: 0.05,
            mu: 1.0,
            eta: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnrolledNet {
    pub modules: Vec<IterationModule>,
    /// Adds the block input `Y` to the CNN branch in the Z block.
    pub residual: bool,
}

impl UnrolledNet {
    /// Random CNN weights, scalars set from `init`.
    pub fn init(n_modules: usize, seed: u64, init: ScalarInit) -> Result<Self> {
        check_modules(n_modules)?;
        check_scalars(init)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modules = (0..n_modules)
            .map(|_| IterationModule {
                cnn_fwd: Cnn::random(&mut rng),
                cnn_adj: Cnn::random(&mut rng),
                raw_tau: softplus_inv(init.tau),
                raw_mu: softplus_inv(init.mu),
                raw_eta: softplus_inv(init.eta),
            })
            .collect();
        Ok(Self {
            modules,
            residual: true,
        })
    }

    /// Identity CNNs and no skip term: each module performs one ADMM step
    /// with the identity transform and threshold `tau = lambda / mu`.
    pub fn admm_equivalent(n_modules: usize, init: ScalarInit) -> Result<Self> {
        check_modules(n_modules)?;
        check_scalars(init)?;
        let m = IterationModule {
            cnn_fwd: Cnn::identity(),
            cnn_adj: Cnn::identity(),
            raw_tau: softplus_inv(init.tau),
            raw_mu: softplus_inv(init.mu),
            raw_eta: softplus_inv(init.eta),
        };
        Ok(Self {
            modules: vec![m; n_modules],
            residual: false,
        })
    }

    /// Same structure, all parameters zero (gradient accumulator).
    pub fn zeros_like(&self) -> Self {
        Self {
            modules: vec![IterationModule::zeros(); self.modules.len()],
            residual: self.residual,
        }
    }

    pub fn n_modules(&self) -> usize {
        self.modules.len()
    }

    pub fn validate(&self) -> Result<()> {
        check_modules(self.modules.len())?;
        for (n, m) in self.modules.iter().enumerate() {
            m.cnn_fwd.validate()?;
            m.cnn_adj.validate()?;
            for (name, v) in [("raw_tau", m.raw_tau), ("raw_mu", m.raw_mu), ("raw_eta", m.raw_eta)] {
                if !v.is_finite() {
                    return Err(Error::NumericFailure(format!("module {n} has non-finite {name}")));
                }
            }
        }
        Ok(())
    }

    /// Visits every parameter array in a fixed order with its checkpoint
    /// name (`m{n}.fwd.l{k}.kernel`, ..., `m{n}.raw_eta`).
    pub fn for_each_param(&self, mut f: impl FnMut(&str, &[f64])) {
        for (n, m) in self.modules.iter().enumerate() {
            for (tag, cnn) in [("fwd", &m.cnn_fwd), ("adj", &m.cnn_adj)] {
                for (k, layer) in cnn.layers.iter().enumerate() {
                    f(&format!("m{n}.{tag}.l{k}.kernel"), &layer.kernel);
                    f(&format!("m{n}.{tag}.l{k}.bias"), &layer.bias);
                }
            }
            f(&format!("m{n}.raw_tau"), std::slice::from_ref(&m.raw_tau));
            f(&format!("m{n}.raw_mu"), std::slice::from_ref(&m.raw_mu));
            f(&format!("m{n}.raw_eta"), std::slice::from_ref(&m.raw_eta));
        }
    }

    pub fn for_each_param_mut(&mut self, mut f: impl FnMut(&str, &mut [f64])) {
        for (n, m) in self.modules.iter_mut().enumerate() {
            for (tag, cnn) in [("fwd", &mut m.cnn_fwd), ("adj", &mut m.cnn_adj)] {
                for (k, layer) in cnn.layers.iter_mut().enumerate() {
                    f(&format!("m{n}.{tag}.l{k}.kernel"), &mut layer.kernel);
                    f(&format!("m{n}.{tag}.l{k}.bias"), &mut layer.bias);
                }
            }
            f(&format!("m{n}.raw_tau"), std::slice::from_mut(&mut m.raw_tau));
            f(&format!("m{n}.raw_mu"), std::slice::from_mut(&mut m.raw_mu));
            f(&format!("m{n}.raw_eta"), std::slice::from_mut(&mut m.raw_eta));
        }
    }

    pub fn n_params(&self) -> usize {
        let mut n = 0;
        self.for_each_param(|_, p| n += p.len());
        n
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n_params());
        self.for_each_param(|_, p| v.extend_from_slice(p));
        v
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::invalid(format!(
                "expected {} parameters, got {}",
                self.n_params(),
                flat.len()
            )));
        }
        let mut at = 0;
        self.for_each_param_mut(|_, p| {
            p.copy_from_slice(&flat[at..at + p.len()]);
            at += p.len();
        });
        Ok(())
    }
}

fn check_modules(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("the network needs at least one module"));
    }
    Ok(())
}

fn check_scalars(s: ScalarInit) -> Result<()> {
    if [s.tau, s.mu, s.eta].iter().all(|v| *v > 0.0 && v.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid(format!("initial scalars must be positive, got {s:?}")))
    }
}

// ---------------------------------------------------------------------------
// blocks

/// `Z = [Y +] cnn_adj( SVT_tau( cnn_fwd(Y) ) )` with `Y = X_prev + L_prev`.
pub fn z_block(
    x_prev: &ComplexTensor3,
    l_prev: &ComplexTensor3,
    m: &IterationModule,
    residual: bool,
) -> Result<ComplexTensor3> {
    let y = x_prev.add(l_prev)?;
    let f = m.cnn_fwd.forward(&y);
    let (s, _) = svt_forward(&f, m.tau())?;
    let g = m.cnn_adj.forward(&s);
    if residual {
        y.add(&g)
    } else {
        Ok(g)
    }
}

pub fn x_block(
    z: &ComplexTensor3,
    l_prev: &ComplexTensor3,
    k: &KSpaceData,
    mu: f64,
) -> Result<ComplexTensor3> {
    solve_data_consistency(z, l_prev, k, mu)
}

pub fn l_block(
    l_prev: &ComplexTensor3,
    z: &ComplexTensor3,
    x: &ComplexTensor3,
    eta: f64,
) -> Result<ComplexTensor3> {
    multiplier_update(l_prev, z, x, eta)
}

// ---------------------------------------------------------------------------
// forward / backward

struct ModuleTape {
    fwd: CnnTape,
    svt: SvtTape,
    adj: CnnTape,
    /// `F2(Z - L_prev)` and `F2(X)`.
    w_hat: ComplexTensor3,
    x_hat: ComplexTensor3,
    z_minus_x: ComplexTensor3,
}

/// Intermediates of [`net_forward`] needed by [`net_backward`].
pub struct Tape {
    mask: SamplingMask,
    modules: Vec<ModuleTape>,
}

pub fn net_forward(p: &UnrolledNet, k: &KSpaceData) -> Result<(ComplexTensor3, Tape)> {
    p.validate()?;
    let mut x = adjoint(k)?;
    let mut l = ComplexTensor3::zeros(x.dims());
    let mut tapes = Vec::with_capacity(p.modules.len());
    for m in &p.modules {
        let y = x.add(&l)?;
        let (f, fwd) = m.cnn_fwd.forward_taped(&y);
        let (s, svt) = svt_forward(&f, m.tau())?;
        let (g, adj) = m.cnn_adj.forward_taped(&s);
        let z = if p.residual { y.add(&g)? } else { g };
        let x_new = x_block(&z, &l, k, m.mu())?;
        let l_new = l_block(&l, &z, &x_new, m.eta())?;
        tapes.push(ModuleTape {
            fwd,
            svt,
            adj,
            w_hat: fft2c(&z.sub(&l)?),
            x_hat: fft2c(&x_new),
            z_minus_x: z.sub(&x_new)?,
        });
        x = x_new;
        l = l_new;
    }
    if !x.is_finite() {
        return Err(Error::NumericFailure("network output is not finite".into()));
    }
    Ok((
        x,
        Tape {
            mask: k.mask.clone(),
            modules: tapes,
        },
    ))
}

/// `(1 / (nx ny nt)) sum |X - X*|^2`.
pub fn mse_loss(x: &ComplexTensor3, reference: &ComplexTensor3) -> Result<f64> {
    x.check_same(reference, "mse_loss")?;
    let s: f64 = x
        .as_slice()
        .iter()
        .zip(reference.as_slice())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok(s / x.len() as f64)
}

/// Gradient of [`mse_loss`] with respect to `x`.
pub fn mse_grad(x: &ComplexTensor3, reference: &ComplexTensor3) -> Result<ComplexTensor3> {
    Ok(x.sub(reference)?.scale(2.0 / x.len() as f64))
}

fn re_inner(a: &ComplexTensor3, b: &ComplexTensor3) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}

/// Reverse-mode gradient of a scalar loss whose gradient with respect to
/// the network output is `grad_out`. The result has the same structure as
/// `p`.
pub fn net_backward(p: &UnrolledNet, tape: &Tape, grad_out: &ComplexTensor3) -> Result<UnrolledNet> {
    if tape.modules.len() != p.modules.len() {
        return Err(Error::invalid("tape does not belong to these parameters"));
    }
    let dims = grad_out.dims();
    if dims != tape.mask.dims() {
        return Err(Error::DimensionMismatch {
            op: "net_backward",
            left: dims,
            right: tape.mask.dims(),
        });
    }
    let mut grads = p.zeros_like();
    let mut gx = grad_out.clone();
    let mut gl = ComplexTensor3::zeros(dims);
    for ((m, t), gm) in p
        .modules
        .iter()
        .zip(&tape.modules)
        .zip(grads.modules.iter_mut())
        .rev()
    {
        let (mu, eta) = (m.mu(), m.eta());

        // L = L_prev - eta (Z - X)
        let g_eta = -re_inner(&gl, &t.z_minus_x);
        let mut gz = gl.scale(-eta);
        let gx_tot = gl.axpy(C64::new(eta, 0.0), &gx)?;
        let mut gl_prev = gl;

        // X = F2^H[(b M + mu F2(Z - L_prev)) / (M + mu)]
        let g_hat = fft2c(&gx_tot);
        let mut gw_hat = g_hat.clone();
        let mut g_mu = 0.0;
        for ((((g, gh), &mk), w), xh) in gw_hat
            .as_mut_slice()
            .iter_mut()
            .zip(g_hat.as_slice())
            .zip(tape.mask.as_slice())
            .zip(t.w_hat.as_slice())
            .zip(t.x_hat.as_slice())
        {
            let denom = mk as f64 + mu;
            let dx = (w - xh) / denom;
            g_mu += gh.re * dx.re + gh.im * dx.im;
            *g = gh * (mu / denom);
        }
        let gw = ifft2c(&gw_hat);
        gz = gz.add(&gw)?;
        gl_prev = gl_prev.sub(&gw)?;

        // Z = [Y +] cnn_adj(SVT(cnn_fwd(Y)))
        let gs = m.cnn_adj.backward(&t.adj, &gz, &mut gm.cnn_adj);
        let (gf, g_tau) = svt_backward(&t.svt, &gs)?;
        let mut gy = m.cnn_fwd.backward(&t.fwd, &gf, &mut gm.cnn_fwd);
        if p.residual {
            gy = gy.add(&gz)?;
        }

        gm.raw_tau = g_tau * sigmoid(m.raw_tau);
        gm.raw_mu = g_mu * sigmoid(m.raw_mu);
        gm.raw_eta = g_eta * sigmoid(m.raw_eta);

        // Y = X_prev + L_prev
        gl = gl_prev.add(&gy)?;
        gx = gy;
    }
    Ok(grads)
}

/// Forward pass, MSE against `reference` and its gradient.
pub fn loss_and_gradient(
    p: &UnrolledNet,
    k: &KSpaceData,
    reference: &ComplexTensor3,
) -> Result<(f64, UnrolledNet)> {
    let (x, tape) = net_forward(p, k)?;
    let loss = mse_loss(&x, reference)?;
    let g = net_backward(p, &tape, &mse_grad(&x, reference)?)?;
    Ok((loss, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admm::{reconstruct, AdmmConfig};
    use crate::forward::forward;
    use crate::transform::UnitaryTransform;

    fn sample(dims: Dims, seed: u64) -> ComplexTensor3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexTensor3::from_fn(dims, |_, _, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn channel_views_round_trip() {
        let x = sample((3, 4, 2), 1);
        let v = complex_to_channels(&x);
        assert_eq!(v.get(2, 1, 1, 1), x.get(2, 1, 1).im);
        assert_eq!(channels_to_complex(&v).unwrap(), x);
        let bad = ChannelVolume::from_vec((3, 4, 2), 3, vec![0.0; 72]).unwrap();
        assert!(channels_to_complex(&bad).is_err());
    }

    #[test]
    fn identity_cnn_is_exact() {
        let x = sample((5, 4, 3), 2);
        assert_eq!(Cnn::identity().forward(&x), x);
        assert_eq!(Cnn::zeros().forward(&x), ComplexTensor3::zeros(x.dims()));
    }

    #[test]
    fn softplus_inverse() {
        for y in [1e-6, 0.05, 1.0, 10.0, 50.0] {
            assert!((softplus(softplus_inv(y)) - y).abs() < 1e-12 * y.max(1.0));
        }
    }

    #[test]
    fn identity_net_matches_admm() {
        let dims = (8, 8, 4);
        let truth = sample(dims, 3);
        let mask = SamplingMask::radial(8, 8, 4, 3, 1).unwrap();
        let k = forward(&truth, &mask).unwrap();
        let (lambda, mu, eta) = (0.3, 0.7, 1.1);
        let net = UnrolledNet::admm_equivalent(
            4,
            ScalarInit {
                tau: lambda / mu,
                mu,
                eta,
            },
        )
        .unwrap();
        let (out, _) = net_forward(&net, &k).unwrap();
        let cfg = AdmmConfig {
            eta,
            max_iters: 4,
            rel_tol: 0.0,
            record_history: false,
            ..AdmmConfig::new(lambda, mu)
        };
        let (reference, _) = reconstruct(&k, &UnitaryTransform::identity(4).unwrap(), &cfg).unwrap();
        assert!(out.sub(&reference).unwrap().fro_norm() < 1e-10 * reference.fro_norm());
    }

    #[test]
    fn flat_round_trip() {
        let net = UnrolledNet::init(2, 5, ScalarInit::default()).unwrap();
        let flat = net.to_flat();
        let mut other = net.zeros_like();
        other.set_flat(&flat).unwrap();
        assert_eq!(other, net);
        assert_eq!(net.n_params(), 2 * (2 * (27 * (2 * 16 + 16 * 16 + 16 * 2) + 34) + 3));
    }
}
