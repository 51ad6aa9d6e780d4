//! Network checkpoints stored in the tensor container format.
//!
//! Kernels are saved as real arrays of dims `(c_out, c_in, 27)`, which is
//! the in-memory `[tap][c_in][c_out]` layout; biases as `(c_out, 1, 1)` and
//! scalars as `(1, 1, 1)`.

use std::path::Path;

use super::conv::TAPS;
use super::{Cnn, IterationModule, UnrolledNet};
use crate::data::container::{load_container, save_container, TensorContainer};
use crate::error::{Error, Result};

pub fn to_container(net: &UnrolledNet) -> Result<TensorContainer> {
    net.validate()?;
    let mut c = TensorContainer::new();
    c.insert_scalar("meta.n_modules", net.n_modules() as f64)?;
    c.insert_scalar("meta.residual", if net.residual { 1.0 } else { 0.0 })?;
    for (n, m) in net.modules.iter().enumerate() {
        for (tag, cnn) in [("fwd", &m.cnn_fwd), ("adj", &m.cnn_adj)] {
            for (k, layer) in cnn.layers.iter().enumerate() {
                c.insert_f64(
                    &format!("m{n}.{tag}.l{k}.kernel"),
                    (layer.c_out, layer.c_in, TAPS),
                    layer.kernel.clone(),
                )?;
                c.insert_f64(
                    &format!("m{n}.{tag}.l{k}.bias"),
                    (layer.c_out, 1, 1),
                    layer.bias.clone(),
                )?;
            }
        }
        c.insert_scalar(&format!("m{n}.raw_tau"), m.raw_tau)?;
        c.insert_scalar(&format!("m{n}.raw_mu"), m.raw_mu)?;
        c.insert_scalar(&format!("m{n}.raw_eta"), m.raw_eta)?;
    }
    Ok(c)
}

pub fn from_container(c: &TensorContainer) -> Result<UnrolledNet> {
    let n = c.scalar("meta.n_modules")?;
    if !(n >= 1.0) || n.fract() != 0.0 || n > 1e6 {
        return Err(Error::CorruptFile(format!("bad module count {n}")));
    }
    let residual = match c.get("meta.residual") {
        Some(_) => c.scalar("meta.residual")? != 0.0,
        None => true,
    };
    let mut modules = Vec::with_capacity(n as usize);
    for n in 0..n as usize {
        let mut cnns = [Cnn::zeros(), Cnn::zeros()];
        for (tag, cnn) in ["fwd", "adj"].iter().zip(cnns.iter_mut()) {
            for (k, layer) in cnn.layers.iter_mut().enumerate() {
                let kname = format!("m{n}.{tag}.l{k}.kernel");
                let (dims, w) = c.f64_array(&kname)?;
                if dims != (layer.c_out, layer.c_in, TAPS) {
                    return Err(Error::CorruptFile(format!("{kname} has dims {dims:?}")));
                }
                layer.kernel = w.to_vec();
                let bname = format!("m{n}.{tag}.l{k}.bias");
                let (dims, b) = c.f64_array(&bname)?;
                if dims != (layer.c_out, 1, 1) {
                    return Err(Error::CorruptFile(format!("{bname} has dims {dims:?}")));
                }
                layer.bias = b.to_vec();
            }
        }
        let [cnn_fwd, cnn_adj] = cnns;
        modules.push(IterationModule {
            cnn_fwd,
            cnn_adj,
            raw_tau: c.scalar(&format!("m{n}.raw_tau"))?,
            raw_mu: c.scalar(&format!("m{n}.raw_mu"))?,
            raw_eta: c.scalar(&format!("m{n}.raw_eta"))?,
        });
    }
    let net = UnrolledNet { modules, residual };
    net.validate().map_err(|e| Error::CorruptFile(e.to_string()))?;
    Ok(net)
}

pub fn save_checkpoint(net: &UnrolledNet, path: &Path) -> Result<()> {
    save_container(path, &to_container(net)?)
}

pub fn load_checkpoint(path: &Path) -> Result<UnrolledNet> {
    from_container(&load_container(path)?)
}
