//! Command-line front end. Every artifact is a tensor container; entries
//! are named `image`, `mask`, `kspace`, `noise_sigma` and `transform`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::admm::{self, AdmmConfig};
use crate::data::{self, load_container, save_container, TensorContainer};
use crate::error::{Error, Result};
use crate::forward::{self, KSpaceData, SamplingMask};
use crate::net::train::{train_with, TrainConfig, TrainSample};
use crate::net::{load_checkpoint, net_forward, save_checkpoint};
use crate::tensor::ComplexTensor3;
use crate::transform::UnitaryTransform;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "ttnn-recon", version, about = "Transformed low-rank tensor reconstruction of dynamic MRI")]
pub struct Cli {
    /// Worker threads (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a synthetic cine phantom
    Phantom(PhantomArgs),
    /// Write a k-space sampling mask
    Mask(MaskArgs),
    /// Simulate undersampled, optionally noisy k-space from an image
    Simulate(SimulateArgs),
    /// TTNN-regularized ADMM reconstruction
    Recon(ReconArgs),
    /// Train an unrolled network on a directory of image+mask containers
    Train(TrainArgs),
    /// Run a trained network on k-space
    Infer(InferArgs),
    /// Print the SNR of a reconstruction against a reference
    Metrics(MetricsArgs),
    /// Learn a data-adaptive temporal transform from a directory of images
    LearnTransform(LearnTransformArgs),
    /// Export one frame (or its error map) as an 8-bit PGM
    Export(ExportArgs),
}

#[derive(Args, Debug)]
pub struct Grid {
    /// Image rows
    #[arg(long, default_value_t = 32)]
    pub nx: usize,
    /// Image columns
    #[arg(long, default_value_t = 32)]
    pub ny: usize,
    /// Frames
    #[arg(long, default_value_t = 8)]
    pub nt: usize,
}

#[derive(Args, Debug)]
pub struct PhantomArgs {
    #[command(flatten)]
    pub grid: Grid,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output container path
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct MaskArgs {
    #[command(subcommand)]
    pub kind: MaskKindArgs,
}

#[derive(Subcommand, Debug)]
pub enum MaskKindArgs {
    /// Golden-angle pseudo-radial spokes
    Radial {
        /// Spokes per frame
        #[arg(long, default_value_t = 16)]
        spokes: usize,
        #[command(flatten)]
        common: MaskCommon,
    },
    /// Variable-density random phase-encode lines
    Vds {
        /// Target acceleration factor
        #[arg(long, default_value_t = 8.0)]
        acc: f64,
        #[command(flatten)]
        common: MaskCommon,
    },
}

#[derive(Args, Debug)]
pub struct MaskCommon {
    #[command(flatten)]
    pub grid: Grid,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output container path
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Container with an `image` entry
    #[arg(long)]
    pub image: PathBuf,
    /// Container with a `mask` entry
    #[arg(long)]
    pub mask: PathBuf,
    /// Complex noise standard deviation
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output container path
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReconArgs {
    /// Container with a `kspace` entry
    #[arg(long)]
    pub kspace: PathBuf,
    /// Container with a `mask` entry
    #[arg(long)]
    pub mask: PathBuf,
    /// fft, dct, identity or learned:PATH
    #[arg(long, default_value = "fft")]
    pub transform: String,
    /// Low-rank regularization weight
    #[arg(long, default_value_t = 0.03)]
    pub lambda: f64,
    /// Penalty parameter
    #[arg(long, default_value_t = 0.1)]
    pub mu: f64,
    /// Multiplier step size
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Maximum iterations
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    /// Relative-change stopping tolerance
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Output container path
    #[arg(long)]
    pub out: PathBuf,
    /// Optional CSV of per-iteration objective and residuals
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Directory of `.ct3` containers holding `image` and `mask` entries
    /// (and optionally `noise_sigma`)
    #[arg(long)]
    pub data: PathBuf,
    /// Iteration modules
    #[arg(long, default_value_t = crate::net::DEFAULT_MODULES)]
    pub modules: usize,
    /// Training epochs
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    /// Initial learning rate
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    /// Per-epoch learning-rate decay factor
    #[arg(long, default_value_t = 0.95)]
    pub decay: f64,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Checkpoint output path
    #[arg(long)]
    pub out_ckpt: PathBuf,
}

#[derive(Args, Debug)]
pub struct InferArgs {
    /// Checkpoint path
    #[arg(long)]
    pub ckpt: PathBuf,
    /// Container with a `kspace` entry
    #[arg(long)]
    pub kspace: PathBuf,
    /// Container with a `mask` entry
    #[arg(long)]
    pub mask: PathBuf,
    /// Output container path
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    /// Reference container with an `image` entry
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Reconstruction container with an `image` entry
    #[arg(long)]
    pub rec: PathBuf,
}

#[derive(Args, Debug)]
pub struct LearnTransformArgs {
    /// Directory of `.ct3` containers holding `image` entries
    #[arg(long)]
    pub data: PathBuf,
    /// Output container path
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    /// Container with an `image` entry
    #[arg(long)]
    pub image: PathBuf,
    /// Frame index (0-based)
    #[arg(long, default_value_t = 0)]
    pub frame: usize,
    /// Write |reference - image| instead of |image|
    #[arg(long = "ref")]
    pub reference: Option<PathBuf>,
    /// Output PGM path
    #[arg(long)]
    pub out: PathBuf,
}

/// Process exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DimensionMismatch { .. } | Error::IndexOutOfRange { .. } | Error::InvalidArgument(_) => {
            EXIT_USAGE
        }
        Error::Io { .. } | Error::CorruptFile(_) | Error::VersionMismatch { .. } => EXIT_IO,
        Error::NumericFailure(_) => EXIT_NUMERIC,
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code. Diagnostics go to stderr, metrics to stdout.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if cli.threads > 0 {
        // only fails if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Phantom(a) => cmd_phantom(&a),
        Command::Mask(a) => cmd_mask(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Recon(a) => cmd_recon(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Infer(a) => cmd_infer(&a),
        Command::Metrics(a) => cmd_metrics(&a).map(|snr| println!("snr_db={snr}")),
        Command::LearnTransform(a) => cmd_learn_transform(&a),
        Command::Export(a) => cmd_export(&a),
    }
}

fn save_image(path: &Path, x: &ComplexTensor3) -> Result<()> {
    let mut c = TensorContainer::new();
    c.insert_tensor("image", x)?;
    save_container(path, &c)
}

fn load_image(path: &Path) -> Result<ComplexTensor3> {
    load_container(path)?.tensor("image")
}

fn load_mask(path: &Path) -> Result<SamplingMask> {
    load_container(path)?.mask("mask")
}

/// Reads a k-space container and pairs it with a separately stored mask.
fn load_kspace(kspace: &Path, mask: &Path) -> Result<KSpaceData> {
    let c = load_container(kspace)?;
    let grid = c.tensor("kspace")?;
    let sigma = match c.get("noise_sigma") {
        Some(_) => c.scalar("noise_sigma")?,
        None => 0.0,
    };
    KSpaceData::new(grid, load_mask(mask)?, sigma)
}

pub fn cmd_phantom(a: &PhantomArgs) -> Result<()> {
    let x = data::make_phantom(a.grid.nx, a.grid.ny, a.grid.nt, a.seed)?;
    save_image(&a.out, &x)
}

pub fn cmd_mask(a: &MaskArgs) -> Result<()> {
    let (mask, out) = match &a.kind {
        MaskKindArgs::Radial { spokes, common: c } => (
            SamplingMask::radial(c.grid.nx, c.grid.ny, c.grid.nt, *spokes, c.seed)?,
            &c.out,
        ),
        MaskKindArgs::Vds { acc, common: c } => (
            SamplingMask::vds(c.grid.nx, c.grid.ny, c.grid.nt, *acc, c.seed)?,
            &c.out,
        ),
    };
    let mut c = TensorContainer::new();
    c.insert_mask("mask", &mask)?;
    save_container(out, &c)
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let x = load_image(&a.image)?;
    let mask = load_mask(&a.mask)?;
    let k = forward::add_noise(&forward::forward(&x, &mask)?, a.sigma, a.seed)?;
    let mut c = TensorContainer::new();
    c.insert_tensor("kspace", &k.grid)?;
    c.insert_scalar("noise_sigma", k.noise_sigma)?;
    save_container(&a.out, &c)
}

/// `fft`, `dct`, `identity` or `learned:PATH` for a temporal size `n`.
pub fn parse_transform(spec: &str, n: usize) -> Result<UnitaryTransform> {
    match spec {
        "fft" => UnitaryTransform::fft(n),
        "dct" => UnitaryTransform::dct(n),
        "identity" => UnitaryTransform::identity(n),
        other => match other.strip_prefix("learned:") {
            Some(path) => {
                UnitaryTransform::from_tensor(&load_container(Path::new(path))?.tensor("transform")?)
            }
            None => Err(Error::invalid(format!(
                "unknown transform {other:?} (expected fft, dct, identity or learned:PATH)"
            ))),
        },
    }
}

pub fn cmd_recon(a: &ReconArgs) -> Result<()> {
    let k = load_kspace(&a.kspace, &a.mask)?;
    let t = parse_transform(&a.transform, k.dims().2)?;
    let cfg = AdmmConfig {
        eta: a.eta,
        max_iters: a.iters,
        rel_tol: a.tol,
        record_history: a.history.is_some(),
        ..AdmmConfig::new(a.lambda, a.mu)
    };
    let (x, history) = admm::reconstruct(&k, &t, &cfg)?;
    save_image(&a.out, &x)?;
    if let Some(h) = &a.history {
        admm::write_history_csv(h, &history)?;
    }
    Ok(())
}

/// Sorted `.ct3` files of a directory.
fn container_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|x| x == "ct3") {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Error::invalid(format!("no .ct3 files in {}", dir.display())));
    }
    Ok(files)
}

pub fn cmd_train(a: &TrainArgs) -> Result<()> {
    let mut dataset = Vec::new();
    for f in container_files(&a.data)? {
        let c = load_container(&f)?;
        let sigma = match c.get("noise_sigma") {
            Some(_) => Some(c.scalar("noise_sigma")?),
            None => None,
        };
        dataset.push(TrainSample::new(c.tensor("image")?, c.mask("mask")?, sigma)?);
    }
    let cfg = TrainConfig {
        n_modules: a.modules,
        epochs: a.epochs,
        lr: a.lr,
        decay: a.decay,
        seed: a.seed,
        ..TrainConfig::default()
    };
    let out = train_with(&dataset, &cfg, |e, loss| println!("epoch={e} loss={loss:e}"))?;
    save_checkpoint(&out.net, &a.out_ckpt)
}

pub fn cmd_infer(a: &InferArgs) -> Result<()> {
    let net = load_checkpoint(&a.ckpt)?;
    let k = load_kspace(&a.kspace, &a.mask)?;
    let (x, _) = net_forward(&net, &k)?;
    save_image(&a.out, &x)
}

pub fn cmd_metrics(a: &MetricsArgs) -> Result<f64> {
    data::snr_db(&load_image(&a.reference)?, &load_image(&a.rec)?)
}

pub fn cmd_learn_transform(a: &LearnTransformArgs) -> Result<()> {
    let images = container_files(&a.data)?
        .iter()
        .map(|f| load_image(f))
        .collect::<Result<Vec<_>>>()?;
    let t = UnitaryTransform::learn(&images)?;
    let mut c = TensorContainer::new();
    c.insert_tensor("transform", &t.to_tensor())?;
    save_container(&a.out, &c)
}

pub fn cmd_export(a: &ExportArgs) -> Result<()> {
    let x = load_image(&a.image)?;
    match &a.reference {
        Some(r) => data::export_error_map(&load_image(r)?, &x, a.frame, &a.out),
        None => data::export_magnitude_image(&x, a.frame, &a.out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_parses_for_every_subcommand() {
        for sub in ["phantom", "mask", "simulate", "recon", "train", "infer", "metrics", "learn-transform", "export"] {
            let err = Cli::try_parse_from(["ttnn-recon", sub, "--help"]).unwrap_err();
            assert_eq!(err.kind(), clap::error::ErrorKind::DisplayHelp, "{sub}");
        }
        Cli::try_parse_from(["ttnn-recon", "mask", "vds", "--acc", "8", "--out", "m.ct3"]).unwrap();
    }

    #[test]
    fn error_codes() {
        assert_eq!(exit_code(&Error::invalid("x")), EXIT_USAGE);
        assert_eq!(exit_code(&Error::CorruptFile("x".into())), EXIT_IO);
        assert_eq!(exit_code(&Error::NumericFailure("x".into())), EXIT_NUMERIC);
    }

    #[test]
    fn transform_names() {
        assert!(parse_transform("dct", 4).is_ok());
        assert!(parse_transform("wavelet", 4).is_err());
    }
}
