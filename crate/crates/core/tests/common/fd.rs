//! Central finite differences over every parameter of an unrolled network.
//! The loss is re-evaluated with the public block functions, starting from
//! the cached state in front of the module that owns the perturbed
//! parameter.

use ttnn_recon::forward::{adjoint, KSpaceData};
use ttnn_recon::net::{
    l_block, loss_and_gradient, mse_loss, net_forward, x_block, z_block, Cnn, IterationModule,
    UnrolledNet,
};
use ttnn_recon::ComplexTensor3;

#[derive(Clone, Copy, Debug)]
enum Slot {
    Kernel(bool, usize, usize),
    Bias(bool, usize, usize),
    Tau,
    Mu,
    Eta,
}

fn cnn_mut(m: &mut IterationModule, fwd: bool) -> &mut Cnn {
    if fwd {
        &mut m.cnn_fwd
    } else {
        &mut m.cnn_adj
    }
}

fn slot_mut(m: &mut IterationModule, s: Slot) -> &mut f64 {
    match s {
        Slot::Kernel(f, l, i) => &mut cnn_mut(m, f).layers[l].kernel[i],
        Slot::Bias(f, l, i) => &mut cnn_mut(m, f).layers[l].bias[i],
        Slot::Tau => &mut m.raw_tau,
        Slot::Mu => &mut m.raw_mu,
        Slot::Eta => &mut m.raw_eta,
    }
}

fn slots(m: &IterationModule) -> Vec<Slot> {
    let mut out = Vec::new();
    for (f, cnn) in [(true, &m.cnn_fwd), (false, &m.cnn_adj)] {
        for (l, layer) in cnn.layers.iter().enumerate() {
            out.extend((0..layer.kernel.len()).map(|i| Slot::Kernel(f, l, i)));
            out.extend((0..layer.bias.len()).map(|i| Slot::Bias(f, l, i)));
        }
    }
    out.extend([Slot::Tau, Slot::Mu, Slot::Eta]);
    out
}

fn run_from(
    net: &UnrolledNet,
    first: usize,
    module: &IterationModule,
    state: &(ComplexTensor3, ComplexTensor3),
    k: &KSpaceData,
) -> ComplexTensor3 {
    let (mut x, mut l) = state.clone();
    for n in first..net.modules.len() {
        let m = if n == first { module } else { &net.modules[n] };
        let z = z_block(&x, &l, m, net.residual).unwrap();
        let xn = x_block(&z, &l, k, m.mu()).unwrap();
        l = l_block(&l, &z, &xn, m.eta()).unwrap();
        x = xn;
    }
    x
}

#[derive(Debug, Default)]
pub struct FdReport {
    pub tested: usize,
    pub passed: usize,
    pub worst: Vec<(String, f64, f64)>,
}

impl FdReport {
    pub fn pass_rate(&self) -> f64 {
        self.passed as f64 / self.tested.max(1) as f64
    }
}

/// Compares the analytic MSE gradient against central differences with step
/// `h` for every parameter whose analytic gradient exceeds `floor`.
pub fn check_gradient(
    net: &UnrolledNet,
    k: &KSpaceData,
    truth: &ComplexTensor3,
    h: f64,
    rtol: f64,
    floor: f64,
) -> FdReport {
    let (_, grads) = loss_and_gradient(net, k, truth).unwrap();
    let x0 = adjoint(k).unwrap();
    let mut states = vec![(x0.clone(), ComplexTensor3::zeros(x0.dims()))];
    for n in 0..net.modules.len() {
        let (x, l) = states[n].clone();
        let m = &net.modules[n];
        let z = z_block(&x, &l, m, net.residual).unwrap();
        let xn = x_block(&z, &l, k, m.mu()).unwrap();
        let ln = l_block(&l, &z, &xn, m.eta()).unwrap();
        states.push((xn, ln));
    }
    let (full, _) = net_forward(net, k).unwrap();
    assert!(
        full.sub(&states[net.modules.len()].0).unwrap().fro_norm() <= 1e-12 * full.fro_norm(),
        "block composition disagrees with net_forward"
    );

    let mut report = FdReport::default();
    for n in 0..net.modules.len() {
        let mut module = net.modules[n].clone();
        let mut gm = grads.modules[n].clone();
        for s in slots(&module) {
            let g = *slot_mut(&mut gm, s);
            if g.abs() <= floor {
                continue;
            }
            let p0 = *slot_mut(&mut module, s);
            *slot_mut(&mut module, s) = p0 + h;
            let lp = mse_loss(&run_from(net, n, &module, &states[n], k), truth).unwrap();
            *slot_mut(&mut module, s) = p0 - h;
            let lm = mse_loss(&run_from(net, n, &module, &states[n], k), truth).unwrap();
            *slot_mut(&mut module, s) = p0;
            let fd = (lp - lm) / (2.0 * h);
            let rel = (fd - g).abs() / fd.abs().max(g.abs());
            report.tested += 1;
            if rel < rtol {
                report.passed += 1;
            } else if report.worst.len() < 10 {
                report.worst.push((format!("m{n}.{s:?}"), g, fd));
            }
        }
    }
    report
}
