//! `CT3` tensor container.
//!
//! Little-endian layout:
//!
//! ```text
//! magic      4  "CT3\0"
//! version    u8 (= 1)
//! reserved   u8
//! count      u16
//! per entry:
//!   name_len u8, name (UTF-8)
//!   dtype    u8 (0 = c64, 1 = c128, 2 = u8, 3 = f64)
//!   pad      u8
//!   dims     u32 x 3
//!   payload  element order i1-fastest; complex values interleaved (re, im)
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex32;

use crate::error::{Error, Result};
use crate::forward::{MaskKind, SamplingMask};
use crate::tensor::{ComplexTensor3, Dims, C64};

pub const MAGIC: [u8; 4] = *b"CT3\0";
pub const VERSION: u8 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dtype {
    C64,
    C128,
    U8,
    F64,
}

impl Dtype {
    fn code(self) -> u8 {
        match self {
            Dtype::C64 => 0,
            Dtype::C128 => 1,
            Dtype::U8 => 2,
            Dtype::F64 => 3,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => Dtype::C64,
            1 => Dtype::C128,
            2 => Dtype::U8,
            3 => Dtype::F64,
            _ => return None,
        })
    }

    pub fn element_size(self) -> usize {
        match self {
            Dtype::C64 => 8,
            Dtype::C128 => 16,
            Dtype::U8 => 1,
            Dtype::F64 => 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    C64(Vec<Complex32>),
    C128(Vec<C64>),
    U8(Vec<u8>),
    F64(Vec<f64>),
}

impl Payload {
    pub fn dtype(&self) -> Dtype {
        match self {
            Payload::C64(_) => Dtype::C64,
            Payload::C128(_) => Dtype::C128,
            Payload::U8(_) => Dtype::U8,
            Payload::F64(_) => Dtype::F64,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Payload::C64(v) => v.len(),
            Payload::C128(v) => v.len(),
            Payload::U8(v) => v.len(),
            Payload::F64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub name: String,
    pub dims: Dims,
    pub payload: Payload,
}

/// Ordered collection of uniquely named arrays.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TensorContainer {
    entries: Vec<Entry>,
}

impl TensorContainer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn insert(&mut self, name: &str, dims: Dims, payload: Payload) -> Result<()> {
        if name.is_empty() || name.len() > 255 {
            return Err(Error::invalid(format!(
                "entry name must be 1..=255 bytes, got {} bytes",
                name.len()
            )));
        }
        if self.get(name).is_some() {
            return Err(Error::invalid(format!("duplicate entry name {name:?}")));
        }
        if [dims.0, dims.1, dims.2].iter().any(|&d| d > u32::MAX as usize) {
            return Err(Error::invalid(format!("dims {dims:?} exceed u32")));
        }
        if payload.len() != dims.0 * dims.1 * dims.2 {
            return Err(Error::invalid(format!(
                "entry {name:?}: payload has {} elements, dims {dims:?} need {}",
                payload.len(),
                dims.0 * dims.1 * dims.2
            )));
        }
        self.entries.push(Entry {
            name: name.to_owned(),
            dims,
            payload,
        });
        Ok(())
    }

    fn require(&self, name: &str) -> Result<&Entry> {
        self.get(name)
            .ok_or_else(|| Error::CorruptFile(format!("missing entry {name:?}")))
    }

    pub fn insert_tensor(&mut self, name: &str, t: &ComplexTensor3) -> Result<()> {
        self.insert(name, t.dims(), Payload::C128(t.as_slice().to_vec()))
    }

    /// Reads a complex entry (c64 entries are widened).
    pub fn tensor(&self, name: &str) -> Result<ComplexTensor3> {
        let e = self.require(name)?;
        let data = match &e.payload {
            Payload::C128(v) => v.clone(),
            Payload::C64(v) => v.iter().map(|z| C64::new(z.re as f64, z.im as f64)).collect(),
            other => {
                return Err(Error::CorruptFile(format!(
                    "entry {name:?} has dtype {:?}, expected complex",
                    other.dtype()
                )))
            }
        };
        ComplexTensor3::from_vec(e.dims, data)
    }

    pub fn insert_f64(&mut self, name: &str, dims: Dims, values: Vec<f64>) -> Result<()> {
        self.insert(name, dims, Payload::F64(values))
    }

    pub fn f64_array(&self, name: &str) -> Result<(Dims, &[f64])> {
        let e = self.require(name)?;
        match &e.payload {
            Payload::F64(v) => Ok((e.dims, v)),
            other => Err(Error::CorruptFile(format!(
                "entry {name:?} has dtype {:?}, expected f64",
                other.dtype()
            ))),
        }
    }

    pub fn insert_scalar(&mut self, name: &str, v: f64) -> Result<()> {
        self.insert_f64(name, (1, 1, 1), vec![v])
    }

    pub fn scalar(&self, name: &str) -> Result<f64> {
        let (dims, v) = self.f64_array(name)?;
        if dims != (1, 1, 1) {
            return Err(Error::CorruptFile(format!(
                "entry {name:?} should be a 1x1x1 scalar, has dims {dims:?}"
            )));
        }
        Ok(v[0])
    }

    /// Stores the mask as u8 plus a `<name>.meta` f64 triple
    /// `(kind, seed, param)`.
    pub fn insert_mask(&mut self, name: &str, m: &SamplingMask) -> Result<()> {
        self.insert(name, m.dims(), Payload::U8(m.as_slice().to_vec()))?;
        self.insert_f64(
            &format!("{name}.meta"),
            (3, 1, 1),
            vec![m.kind.code() as f64, m.seed as f64, m.param],
        )
    }

    pub fn mask(&self, name: &str) -> Result<SamplingMask> {
        let e = self.require(name)?;
        let data = match &e.payload {
            Payload::U8(v) => v.clone(),
            other => {
                return Err(Error::CorruptFile(format!(
                    "entry {name:?} has dtype {:?}, expected u8",
                    other.dtype()
                )))
            }
        };
        let mut mask = SamplingMask::from_data(e.dims, data)?;
        if let Ok((_, meta)) = self.f64_array(&format!("{name}.meta")) {
            if meta.len() == 3 {
                if let Some(kind) = MaskKind::from_code(meta[0] as u8) {
                    mask.kind = kind;
                }
                mask.seed = meta[1] as u64;
                mask.param = meta[2];
            }
        }
        Ok(mask)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        if self.entries.len() > u16::MAX as usize {
            return Err(Error::invalid(format!(
                "too many entries ({}) for the container format",
                self.entries.len()
            )));
        }
        let mut out = Vec::new();
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(0);
        out.extend_from_slice(&(self.entries.len() as u16).to_le_bytes());
        for e in &self.entries {
            out.push(e.name.len() as u8);
            out.extend_from_slice(e.name.as_bytes());
            out.push(e.payload.dtype().code());
            out.push(0);
            for d in [e.dims.0, e.dims.1, e.dims.2] {
                out.extend_from_slice(&(d as u32).to_le_bytes());
            }
            match &e.payload {
                Payload::C64(v) => v.iter().for_each(|z| {
                    out.extend_from_slice(&z.re.to_le_bytes());
                    out.extend_from_slice(&z.im.to_le_bytes());
                }),
                Payload::C128(v) => v.iter().for_each(|z| {
                    out.extend_from_slice(&z.re.to_le_bytes());
                    out.extend_from_slice(&z.im.to_le_bytes());
                }),
                Payload::U8(v) => out.extend_from_slice(v),
                Payload::F64(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::CorruptFile("bad magic (expected \"CT3\\0\")".into()));
        }
        let version = r.u8()?;
        if version != VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: VERSION,
            });
        }
        r.u8()?;
        let count = u16::from_le_bytes(r.array()?) as usize;
        let mut c = TensorContainer::new();
        for _ in 0..count {
            let name_len = r.u8()? as usize;
            let name = std::str::from_utf8(r.take(name_len)?)
                .map_err(|_| Error::CorruptFile("entry name is not UTF-8".into()))?
                .to_owned();
            let code = r.u8()?;
            let dtype = Dtype::from_code(code)
                .ok_or_else(|| Error::CorruptFile(format!("unknown dtype code {code}")))?;
            r.u8()?;
            let mut dims = [0usize; 3];
            for d in &mut dims {
                *d = u32::from_le_bytes(r.array()?) as usize;
            }
            let n = dims[0]
                .checked_mul(dims[1])
                .and_then(|v| v.checked_mul(dims[2]))
                .ok_or_else(|| Error::CorruptFile(format!("entry {name:?} dims overflow")))?;
            let raw = r.take(
                n.checked_mul(dtype.element_size())
                    .ok_or_else(|| Error::CorruptFile("payload size overflow".into()))?,
            )?;
            let payload = match dtype {
                Dtype::C64 => Payload::C64(
                    raw.chunks_exact(8)
                        .map(|b| {
                            Complex32::new(
                                f32::from_le_bytes(b[..4].try_into().unwrap()),
                                f32::from_le_bytes(b[4..].try_into().unwrap()),
                            )
                        })
                        .collect(),
                ),
                Dtype::C128 => Payload::C128(
                    raw.chunks_exact(16)
                        .map(|b| {
                            C64::new(
                                f64::from_le_bytes(b[..8].try_into().unwrap()),
                                f64::from_le_bytes(b[8..].try_into().unwrap()),
                            )
                        })
                        .collect(),
                ),
                Dtype::U8 => Payload::U8(raw.to_vec()),
                Dtype::F64 => Payload::F64(
                    raw.chunks_exact(8)
                        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                        .collect(),
                ),
            };
            if c.get(&name).is_some() {
                return Err(Error::CorruptFile(format!("duplicate entry name {name:?}")));
            }
            c.insert(&name, (dims[0], dims[1], dims[2]), payload)
                .map_err(|e| Error::CorruptFile(e.to_string()))?;
        }
        if r.pos != bytes.len() {
            return Err(Error::CorruptFile(format!(
                "{} trailing bytes after last entry",
                bytes.len() - r.pos
            )));
        }
        Ok(c)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| {
                Error::CorruptFile(format!("truncated: needed {n} bytes at offset {}", self.pos))
            })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().unwrap())
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| Path::new("."));
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        file_name.to_string_lossy(),
        std::process::id()
    ));
    let res = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = res {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

pub fn save_container(path: &Path, c: &TensorContainer) -> Result<()> {
    write_atomic(path, &c.to_bytes()?)
}

pub fn load_container(path: &Path) -> Result<TensorContainer> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    TensorContainer::from_bytes(&bytes).map_err(|e| match e {
        Error::CorruptFile(msg) => Error::CorruptFile(format!("{}: {msg}", path.display())),
        other => other,
    })
}
