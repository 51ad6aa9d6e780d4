//! TTNN-regularized reconstruction
//!
//! ```text
//! min_X 1/2 ||A(X) - b||_F^2 + lambda ||X||_TTNN
//! ```
//!
//! solved by ADMM on the split `Z = X` with scaled multiplier `L = W / mu`:
//!
//! ```text
//! Z_n = TSVT_{lambda/mu, T}(X_{n-1} + L_{n-1})
//! X_n = (A^H A + mu)^{-1} (A^H b + mu Z_n - mu L_{n-1})
//! L_n = L_{n-1} - eta (Z_n - X_n)
//! ```
//!
//! Because `A = M ⊙ F2` with unitary `F2`, the X-step is a pointwise
//! division in k-space.

use std::fmt::Write as _;
use std::path::Path;

use crate::data::container::write_atomic;
use crate::error::{Error, Result};
use crate::forward::{self, fft2c, ifft2c, KSpaceData};
use crate::tensor::ComplexTensor3;
use crate::transform::UnitaryTransform;
use crate::tsvd::{t_tsvt, ttnn};

#[derive(Clone, Debug, PartialEq)]
pub struct AdmmConfig {
    pub lambda: f64,
    pub mu: f64,
    pub eta: f64,
    pub max_iters: usize,
    /// Stop once `||X_n - X_{n-1}|| / ||X_{n-1}||` drops below this.
    pub rel_tol: f64,
    pub record_history: bool,
}

impl AdmmConfig {
    /// Uses the classical scaled-form dual step `eta = 1`.
    pub fn new(lambda: f64, mu: f64) -> Self {
        Self {
            lambda,
            mu,
            eta: 1.0,
            max_iters: 100,
            rel_tol: 1e-6,
            record_history: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("lambda", self.lambda)?;
        positive("mu", self.mu)?;
        positive("eta", self.eta)?;
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be >= 1"));
        }
        if !(self.rel_tol >= 0.0) {
            return Err(Error::invalid(format!("rel_tol must be >= 0, got {}", self.rel_tol)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistoryRecord {
    pub iter: usize,
    pub objective: f64,
    pub primal_residual: f64,
    pub rel_change: f64,
}

#[derive(Clone, Debug)]
pub struct AdmmState {
    pub x: ComplexTensor3,
    pub z: ComplexTensor3,
    /// Scaled multiplier `W / mu`.
    pub l: ComplexTensor3,
    pub iter: usize,
    pub history: Vec<HistoryRecord>,
}

impl AdmmState {
    /// `X_0 = A^H b`, `Z_0 = X_0`, `L_0 = 0`.
    pub fn init(k: &KSpaceData) -> Result<Self> {
        let x = forward::adjoint(k)?;
        Ok(Self {
            z: x.clone(),
            l: ComplexTensor3::zeros(x.dims()),
            x,
            iter: 0,
            history: Vec::new(),
        })
    }
}

/// `Z = TSVT_{lambda/mu}(X + L)`.
pub fn z_step(state: &AdmmState, t: &UnitaryTransform, cfg: &AdmmConfig) -> Result<ComplexTensor3> {
    t_tsvt(&state.x.add(&state.l)?, cfg.lambda / cfg.mu, t)
}

/// Exact minimizer of `1/2 ||A(X) - b||^2 + mu/2 ||Z - X - L||^2`:
/// `X = F2^H[ (b + mu F2(Z - L)) / (M + mu) ]`.
pub fn solve_data_consistency(
    z: &ComplexTensor3,
    l: &ComplexTensor3,
    k: &KSpaceData,
    mu: f64,
) -> Result<ComplexTensor3> {
    z.check_same(l, "x_step")?;
    if z.dims() != k.dims() {
        return Err(Error::DimensionMismatch {
            op: "x_step",
            left: z.dims(),
            right: k.dims(),
        });
    }
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::invalid(format!("mu must be >= 0, got {mu}")));
    }
    if mu == 0.0 && k.mask.count() < k.mask.as_slice().len() {
        return Err(Error::NumericFailure(
            "x-step system is singular: mu = 0 with an incomplete mask".into(),
        ));
    }
    let mut spec = fft2c(&z.sub(l)?);
    for ((s, &b), &m) in spec
        .as_mut_slice()
        .iter_mut()
        .zip(k.grid.as_slice())
        .zip(k.mask.as_slice())
    {
        let m = m as f64;
        *s = (b * m + *s * mu) / (m + mu);
    }
    Ok(ifft2c(&spec))
}

pub fn x_step(state: &AdmmState, k: &KSpaceData, cfg: &AdmmConfig) -> Result<ComplexTensor3> {
    solve_data_consistency(&state.z, &state.l, k, cfg.mu)
}

/// `L - eta (Z - X)`.
pub fn multiplier_update(
    l: &ComplexTensor3,
    z: &ComplexTensor3,
    x: &ComplexTensor3,
    eta: f64,
) -> Result<ComplexTensor3> {
    l.check_same(z, "l_step")?;
    l.check_same(x, "l_step")?;
    let mut out = l.clone();
    for ((o, zz), xx) in out.as_mut_slice().iter_mut().zip(z.as_slice()).zip(x.as_slice()) {
        *o -= (zz - xx) * eta;
    }
    Ok(out)
}

pub fn l_step(state: &AdmmState, cfg: &AdmmConfig) -> Result<ComplexTensor3> {
    multiplier_update(&state.l, &state.z, &state.x, cfg.eta)
}

/// `||M ⊙ F2(X) - b||_F`.
pub fn data_residual(x: &ComplexTensor3, k: &KSpaceData) -> Result<f64> {
    let ax = forward::forward(x, &k.mask)?;
    let mut acc = 0.0;
    for ((a, b), &m) in ax.grid.as_slice().iter().zip(k.grid.as_slice()).zip(k.mask.as_slice()) {
        if m != 0 {
            acc += (a - b).norm_sqr();
        }
    }
    Ok(acc.sqrt())
}

/// `1/2 ||A(X) - b||_F^2 + lambda ||X||_TTNN`.
pub fn objective(
    x: &ComplexTensor3,
    k: &KSpaceData,
    t: &UnitaryTransform,
    lambda: f64,
) -> Result<f64> {
    let fid = 0.5 * data_residual(x, k)?.powi(2);
    if lambda == 0.0 {
        return Ok(fid);
    }
    Ok(fid + lambda * ttnn(x, t)?)
}

/// Runs ADMM from the zero-filled reconstruction until `max_iters` or the
/// relative-change criterion, returning the final `X` and the per-iteration
/// history (empty unless `record_history`).
pub fn reconstruct(
    k: &KSpaceData,
    t: &UnitaryTransform,
    cfg: &AdmmConfig,
) -> Result<(ComplexTensor3, Vec<HistoryRecord>)> {
    let state = run(k, t, cfg)?;
    Ok((state.x, state.history))
}

/// Same as [`reconstruct`] but returns the whole final state.
pub fn run(k: &KSpaceData, t: &UnitaryTransform, cfg: &AdmmConfig) -> Result<AdmmState> {
    cfg.validate()?;
    if k.dims().2 != t.size() {
        return Err(Error::DimensionMismatch {
            op: "reconstruct",
            left: k.dims(),
            right: (t.size(), t.size(), 1),
        });
    }
    let mut state = AdmmState::init(k)?;
    for n in 1..=cfg.max_iters {
        state.z = z_step(&state, t, cfg)?;
        let x_new = x_step(&state, k, cfg)?;
        let prev_norm = state.x.fro_norm();
        let change = x_new.sub(&state.x)?.fro_norm();
        let rel_change = if prev_norm > 0.0 {
            change / prev_norm
        } else if change == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        state.x = x_new;
        state.l = l_step(&state, cfg)?;
        state.iter = n;
        if !state.x.is_finite() {
            return Err(Error::NumericFailure(format!(
                "non-finite iterate at ADMM iteration {n}"
            )));
        }
        if cfg.record_history {
            state.history.push(HistoryRecord {
                iter: n,
                objective: objective(&state.x, k, t, cfg.lambda)?,
                primal_residual: state.z.sub(&state.x)?.fro_norm(),
                rel_change,
            });
        }
        if rel_change < cfg.rel_tol {
            break;
        }
    }
    Ok(state)
}

pub fn history_csv(history: &[HistoryRecord]) -> String {
    let mut s = String::from("iter,objective,primal_residual,rel_change\n");
    for h in history {
        let _ = writeln!(
            s,
            "{},{:e},{:e},{:e}",
            h.iter, h.objective, h.primal_residual, h.rel_change
        );
    }
    s
}

pub fn write_history_csv(path: &Path, history: &[HistoryRecord]) -> Result<()> {
    write_atomic(path, history_csv(history).as_bytes())
}
