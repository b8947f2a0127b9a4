//! Binary checkpoint container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! b"DISFL"  u32 version  u64 header_len  header (JSON)
//! u32 tensor_count
//! per tensor: u32 name_len  name  u32 rows  u32 cols  rows*cols × f32
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::params::{Params, TensorSpec};
use super::train::{EpochRecord, TrainConfig};
use super::{Model, ModelConfig};
use crate::corpus::LabelScheme;
use crate::features::Featurizer;

pub const MAGIC: &[u8; 5] = b"DISFL";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint (bad magic bytes)")]
    BadMagic,
    #[error("unsupported checkpoint version {found} (this build reads version {FORMAT_VERSION})")]
    UnsupportedVersion { found: u32 },
    #[error("checkpoint is truncated")]
    Truncated,
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A trained model together with its training history.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub model: Model,
    pub history: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    pub train_config: Option<TrainConfig>,
}

impl Checkpoint {
    pub fn untrained(model: Model) -> Self {
        Self {
            model,
            history: Vec::new(),
            best_epoch: None,
            train_config: None,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            config: self.model.config.clone(),
            featurizer: self.model.featurizer.clone(),
            scheme: self.model.scheme.to_text(),
            history: self.history.clone(),
            best_epoch: self.best_epoch,
            train_config: self.train_config.clone(),
        };
        let json = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::with_capacity(json.len() + self.model.params.len() * 4 + 64);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        let params = &self.model.params;
        out.extend_from_slice(&(params.tensors.len() as u32).to_le_bytes());
        for t in &params.tensors {
            out.extend_from_slice(&(t.name.len() as u32).to_le_bytes());
            out.extend_from_slice(t.name.as_bytes());
            out.extend_from_slice(&(t.rows as u32).to_le_bytes());
            out.extend_from_slice(&(t.cols as u32).to_le_bytes());
            for &v in &params.values[t.range()] {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        let mut r = Reader { bytes, pos: 0 };
        if bytes.len() < MAGIC.len() {
            return Err(if MAGIC.starts_with(bytes) {
                CheckpointError::Truncated
            } else {
                CheckpointError::BadMagic
            });
        }
        if r.take(MAGIC.len())? != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(CheckpointError::UnsupportedVersion { found: version });
        }
        let header_len = usize::try_from(r.u64()?).map_err(|_| CheckpointError::Truncated)?;
        let header: Header = serde_json::from_slice(r.take(header_len)?)
            .map_err(|e| CheckpointError::Malformed(format!("header: {e}")))?;
        let count = r.u32()? as usize;
        let mut params = Params::new();
        for _ in 0..count {
            let name_len = r.u32()? as usize;
            let name = String::from_utf8(r.take(name_len)?.to_vec())
                .map_err(|_| CheckpointError::Malformed("tensor name is not UTF-8".into()))?;
            let rows = r.u32()? as usize;
            let cols = r.u32()? as usize;
            let len = rows.checked_mul(cols).ok_or(CheckpointError::Truncated)?;
            let data = r.take(len.checked_mul(4).ok_or(CheckpointError::Truncated)?)?;
            let offset = params.values.len();
            params.tensors.push(TensorSpec {
                name,
                rows,
                cols,
                offset,
            });
            params.values.extend(
                data.chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64),
            );
        }
        if r.pos != bytes.len() {
            return Err(CheckpointError::Malformed(
                "trailing bytes after the last tensor".into(),
            ));
        }
        let scheme = LabelScheme::from_text(&header.scheme)
            .map_err(|e| CheckpointError::Malformed(format!("scheme: {e}")))?;
        let model = Model::from_parts(header.config, header.featurizer, scheme, params)
            .map_err(|e| CheckpointError::Malformed(e.to_string()))?;
        Ok(Self {
            model,
            history: header.history,
            best_epoch: header.best_epoch,
            train_config: header.train_config,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    featurizer: Featurizer,
    scheme: String,
    history: Vec<EpochRecord>,
    best_epoch: Option<usize>,
    train_config: Option<TrainConfig>,
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        let end = self.pos.checked_add(n).ok_or(CheckpointError::Truncated)?;
        let out = self
            .bytes
            .get(self.pos..end)
            .ok_or(CheckpointError::Truncated)?;
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn save(ckpt: &Checkpoint, path: &Path) -> Result<(), CheckpointError> {
    std::fs::write(path, ckpt.to_bytes())?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Checkpoint, CheckpointError> {
    Checkpoint::from_bytes(&std::fs::read(path)?)
}
