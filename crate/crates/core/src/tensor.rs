//! 4-D fixed-point tensors, the `TNSR` file format, layout permutation, and
//! corpus manifests.
//!
//! ```text
//! "TNSR" | version u8 = 1 | m u8 | layout u8 | reserved u8
//!        | N, C, H, W as u32 LE (always in this order)
//!        | N*C*H*W words, m/8 bytes each, LE, in the declared layout
//! ```

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TENSOR_MAGIC: [u8; 4] = *b"TNSR";
pub const TENSOR_VERSION: u8 = 1;
pub const TENSOR_HEADER_LEN: usize = 24;

/// Axis order of the serialized data, outermost first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    #[default]
    Nchw,
    Nhwc,
    Chwn,
    Hwcn,
}

impl Layout {
    pub const ALL: [Layout; 4] = [Layout::Nchw, Layout::Nhwc, Layout::Chwn, Layout::Hwcn];

    pub fn tag(self) -> u8 {
        match self {
            Layout::Nchw => 0,
            Layout::Nhwc => 1,
            Layout::Chwn => 2,
            Layout::Hwcn => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        Layout::ALL
            .into_iter()
            .find(|l| l.tag() == tag)
            .ok_or_else(|| Error::BadFormat(format!("unknown layout tag {tag}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            Layout::Nchw => "nchw",
            Layout::Nhwc => "nhwc",
            Layout::Chwn => "chwn",
            Layout::Hwcn => "hwcn",
        }
    }

    /// Logical axes (0 = N, 1 = C, 2 = H, 3 = W) from outermost to innermost.
    fn axes(self) -> [usize; 4] {
        match self {
            Layout::Nchw => [0, 1, 2, 3],
            Layout::Nhwc => [0, 2, 3, 1],
            Layout::Chwn => [1, 2, 3, 0],
            Layout::Hwcn => [2, 3, 1, 0],
        }
    }

    /// Element strides for the logical N, C, H, W axes.
    fn strides(self, dims: [usize; 4]) -> [usize; 4] {
        let mut strides = [0; 4];
        let mut step = 1;
        for &axis in self.axes().iter().rev() {
            strides[axis] = step;
            step *= dims[axis];
        }
        strides
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Layout::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParams(format!("unknown layout '{s}'")))
    }
}

pub fn check_word_width(m: u32) -> Result<()> {
    match m {
        8 | 16 | 32 => Ok(()),
        _ => Err(Error::InvalidParams(format!(
            "word width {m} is not one of 8, 16, 32"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TensorMeta {
    pub network: String,
    pub layer: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorRecord {
    /// N, C, H, W
    pub dims: [usize; 4],
    pub layout: Layout,
    pub m: u32,
    pub data: Vec<u32>,
    pub meta: TensorMeta,
}

impl TensorRecord {
    pub fn new(dims: [usize; 4], layout: Layout, m: u32, data: Vec<u32>) -> Result<Self> {
        check_word_width(m)?;
        let len = element_len(dims)?;
        if data.len() != len {
            return Err(Error::WrongLength {
                expected: len,
                actual: data.len(),
            });
        }
        let max = ((1u64 << m) - 1) as u32;
        if let Some(&w) = data.iter().find(|&&w| w > max) {
            return Err(Error::ValueOutOfRange {
                value: u64::from(w),
                count: m,
            });
        }
        Ok(Self {
            dims,
            layout,
            m,
            data,
            meta: TensorMeta::default(),
        })
    }

    pub fn with_meta(mut self, network: impl Into<String>, layer: impl Into<String>) -> Self {
        self.meta = TensorMeta {
            network: network.into(),
            layer: layer.into(),
        };
        self
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Value at logical index `(n, c, h, w)`.
    pub fn get(&self, index: [usize; 4]) -> u32 {
        let strides = self.layout.strides(self.dims);
        self.data[(0..4).map(|a| index[a] * strides[a]).sum::<usize>()]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let word_bytes = (self.m / 8) as usize;
        let mut out = Vec::with_capacity(TENSOR_HEADER_LEN + self.data.len() * word_bytes);
        out.extend_from_slice(&TENSOR_MAGIC);
        out.extend_from_slice(&[TENSOR_VERSION, self.m as u8, self.layout.tag(), 0]);
        for d in self.dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &w in &self.data {
            out.extend_from_slice(&w.to_le_bytes()[..word_bytes]);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < TENSOR_HEADER_LEN {
            return Err(Error::BadFormat("tensor header truncated".into()));
        }
        if bytes[..4] != TENSOR_MAGIC {
            return Err(Error::BadFormat("bad magic, expected \"TNSR\"".into()));
        }
        if bytes[4] != TENSOR_VERSION {
            return Err(Error::BadFormat(format!(
                "unsupported tensor version {}",
                bytes[4]
            )));
        }
        let m = u32::from(bytes[5]);
        check_word_width(m).map_err(|e| Error::BadFormat(e.to_string()))?;
        let layout = Layout::from_tag(bytes[6])?;
        let mut dims = [0usize; 4];
        for (i, d) in dims.iter_mut().enumerate() {
            let at = 8 + 4 * i;
            *d = u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
        }
        let len = element_len(dims)?;
        let word_bytes = (m / 8) as usize;
        let body = &bytes[TENSOR_HEADER_LEN..];
        let expected = len
            .checked_mul(word_bytes)
            .ok_or_else(|| Error::BadFormat("dimension product overflows".into()))?;
        if body.len() != expected {
            return Err(Error::BadFormat(format!(
                "tensor body is {} bytes, dims require {expected}",
                body.len()
            )));
        }
        let data = body
            .chunks_exact(word_bytes)
            .map(|c| {
                let mut le = [0u8; 4];
                le[..word_bytes].copy_from_slice(c);
                u32::from_le_bytes(le)
            })
            .collect();
        Ok(Self {
            dims,
            layout,
            m,
            data,
            meta: TensorMeta::default(),
        })
    }
}

fn element_len(dims: [usize; 4]) -> Result<usize> {
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .filter(|_| dims.iter().all(|&d| u32::try_from(d).is_ok()))
        .ok_or_else(|| Error::BadFormat(format!("dimensions {dims:?} overflow")))
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<TensorRecord> {
    TensorRecord::from_bytes(&fs::read(path)?)
}

pub fn store_tensor(t: &TensorRecord, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, t.to_bytes())?;
    Ok(())
}

pub fn permute_layout(t: &TensorRecord, target: Layout) -> TensorRecord {
    if t.layout == target {
        return t.clone();
    }
    let [dn, dc, dh, dw] = t.dims;
    let src = t.layout.strides(t.dims);
    let dst = target.strides(t.dims);
    let mut data = vec![0u32; t.data.len()];
    for n in 0..dn {
        for c in 0..dc {
            for h in 0..dh {
                for w in 0..dw {
                    let at = |s: [usize; 4]| n * s[0] + c * s[1] + h * s[2] + w * s[3];
                    data[at(dst)] = t.data[at(src)];
                }
            }
        }
    }
    TensorRecord {
        dims: t.dims,
        layout: target,
        m: t.m,
        data,
        meta: t.meta.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub network: String,
    pub layer: String,
    pub m: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
    /// Directory relative entry paths resolve against.
    pub root: PathBuf,
}

impl CorpusManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let entries: Vec<ManifestEntry> = serde_json::from_slice(&fs::read(path)?)?;
        for e in &entries {
            check_word_width(e.m)
                .map_err(|err| Error::BadFormat(format!("{}: {err}", e.path.display())))?;
        }
        Ok(Self {
            entries,
            root: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        })
    }

    pub fn store(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_vec_pretty(&self.entries)?)?;
        Ok(())
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        if entry.path.is_absolute() {
            entry.path.clone()
        } else {
            self.root.join(&entry.path)
        }
    }

    /// Load one entry, checking it against the declared word width.
    pub fn load_entry(&self, entry: &ManifestEntry) -> Result<TensorRecord> {
        let path = self.resolve(entry);
        let t = load_tensor(&path).map_err(|e| match e {
            Error::BadFormat(msg) => Error::BadFormat(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        if t.m != entry.m {
            return Err(Error::BadFormat(format!(
                "{}: file holds {}-bit words, manifest says {}",
                path.display(),
                t.m,
                entry.m
            )));
        }
        let t = TensorRecord::new(t.dims, t.layout, t.m, t.data)?;
        Ok(t.with_meta(entry.network.clone(), entry.layer.clone()))
    }

    pub fn load_all(&self) -> Result<Vec<TensorRecord>> {
        self.entries.iter().map(|e| self.load_entry(e)).collect()
    }
}
