//! Model checkpoint container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic        8 bytes   "MXCOSCK1"
//! header_len   u64
//! header       header_len bytes of UTF-8 JSON (see `Header`)
//! tensors      for each entry of header.tensors, rows*cols f64 values,
//!              row-major, little-endian, in header order
//! ```
//!
//! The header carries the model configuration (including the seed), the
//! training configuration when the model came out of `train`, the
//! embedding files the model was trained against, and the tensor table.
//! Reading a checkpoint and writing it back reproduces the file byte for
//! byte.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Model, ModelConfig, Params};
use crate::training::TrainConfig;

pub const MAGIC: &[u8; 8] = b"MXCOSCK1";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub train: Option<TrainConfig>,
    /// Embedding files, in concatenation order.
    pub embeddings: Vec<String>,
    /// 1-based epoch the parameters were taken from.
    pub epoch: Option<usize>,
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: Model,
    pub meta: CheckpointMeta,
}

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    model: ModelConfig,
    meta: CheckpointMeta,
    tensors: Vec<TensorEntry>,
}

impl Checkpoint {
    pub fn new(model: Model, meta: CheckpointMeta) -> Self {
        Checkpoint { model, meta }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let tensors = self.model.params.named_tensors();
        let header = Header {
            format_version: FORMAT_VERSION,
            model: self.model.config.clone(),
            meta: self.meta.clone(),
            tensors: tensors
                .iter()
                .map(|(name, _, (rows, cols))| TensorEntry {
                    name: name.clone(),
                    rows: *rows,
                    cols: *cols,
                })
                .collect(),
        };
        let json = serde_json::to_vec(&header).expect("header serializes");
        let n: usize = tensors.iter().map(|(_, d, _)| d.len()).sum();
        let mut out = Vec::with_capacity(16 + json.len() + 8 * n);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        for (_, data, _) in &tensors {
            for v in *data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Checkpoint(m.to_string());
        if bytes.len() < 16 || &bytes[..8] != MAGIC {
            return Err(bad("not a checkpoint (bad magic)"));
        }
        let len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let json = bytes
            .get(16..16usize.saturating_add(len))
            .ok_or_else(|| bad("truncated header"))?;
        let header: Header =
            serde_json::from_slice(json).map_err(|e| Error::Checkpoint(format!("header: {e}")))?;
        if header.format_version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format version {}",
                header.format_version
            )));
        }
        header.model.validate()?;
        let mut params = Params::zeros(&header.model);
        let expected: Vec<(String, (usize, usize))> = params
            .named_tensors()
            .into_iter()
            .map(|(n, _, s)| (n, s))
            .collect();
        let found: Vec<(String, (usize, usize))> = header
            .tensors
            .iter()
            .map(|t| (t.name.clone(), (t.rows, t.cols)))
            .collect();
        if expected != found {
            return Err(Error::Checkpoint(format!(
                "tensor table {found:?} does not match the model configuration"
            )));
        }
        let mut data = &bytes[16 + len..];
        for t in params.tensors_mut() {
            let need = t.len() * 8;
            if data.len() < need {
                return Err(bad("truncated tensor data"));
            }
            for (v, b) in t.iter_mut().zip(data[..need].chunks_exact(8)) {
                *v = f64::from_le_bytes(b.try_into().unwrap());
            }
            data = &data[need..];
        }
        if !data.is_empty() {
            return Err(bad("trailing bytes after tensor data"));
        }
        Ok(Checkpoint {
            model: Model::from_parts(header.model, params)?,
            meta: header.meta,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(&self.to_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        File::open(path)
            .and_then(|f| BufReader::new(f).read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

/// True if the file starts with the checkpoint magic.
pub fn is_checkpoint(path: impl AsRef<Path>) -> bool {
    let mut magic = [0u8; 8];
    File::open(path)
        .and_then(|mut f| f.read_exact(&mut magic))
        .map(|_| &magic == MAGIC)
        .unwrap_or(false)
}
