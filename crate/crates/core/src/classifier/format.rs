//! Binary model file.
//!
//! Layout, little-endian, no padding:
//!
//! ```text
//! "HOGSVM01"                      8 bytes
//! feature count N                 u32
//! version length L                u32
//! feature-order version           L bytes (UTF-8)
//! weights                         N x f32
//! bias                            f32
//! ```

use std::fs;
use std::path::Path;

use super::SvmModel;
use crate::descriptor::DESCRIPTOR_LEN;

pub const MODEL_MAGIC: &[u8; 8] = b"HOGSVM01";

#[derive(Debug, thiserror::Error)]
pub enum ModelFormatError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic")]
    BadMagic,
    #[error("feature count mismatch: file declares {declared}, engine expects {expected}")]
    CountMismatch { declared: u32, expected: usize },
    #[error("truncated model file: {section} needs {needed} bytes at offset {offset}, {available} available")]
    Truncated {
        section: &'static str,
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error("{0} trailing bytes after bias")]
    TrailingBytes(usize),
    #[error("feature-order version is not valid UTF-8")]
    BadVersion,
    #[error("model contains a non-finite value")]
    NonFinite,
}

pub fn encode_model(model: &SvmModel) -> Vec<u8> {
    let version = model.feature_order_version().as_bytes();
    let mut out = Vec::with_capacity(16 + version.len() + 4 * (model.weights().len() + 1));
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&(model.weights().len() as u32).to_le_bytes());
    out.extend_from_slice(&(version.len() as u32).to_le_bytes());
    out.extend_from_slice(version);
    for w in model.weights() {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out.extend_from_slice(&model.bias().to_le_bytes());
    out
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, section: &'static str) -> Result<&'a [u8], ModelFormatError> {
        let available = self.data.len() - self.pos;
        if available < n {
            return Err(ModelFormatError::Truncated {
                section,
                offset: self.pos,
                needed: n,
                available,
            });
        }
        let out = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self, section: &'static str) -> Result<u32, ModelFormatError> {
        Ok(u32::from_le_bytes(self.take(4, section)?.try_into().unwrap()))
    }

    fn f32(&mut self, section: &'static str) -> Result<f32, ModelFormatError> {
        Ok(f32::from_le_bytes(self.take(4, section)?.try_into().unwrap()))
    }
}

pub fn decode_model(data: &[u8]) -> Result<SvmModel, ModelFormatError> {
    let head = &data[..data.len().min(MODEL_MAGIC.len())];
    if head != &MODEL_MAGIC[..head.len()] {
        return Err(ModelFormatError::BadMagic);
    }
    let mut r = Reader { data, pos: 0 };
    r.take(MODEL_MAGIC.len(), "magic")?;
    let declared = r.u32("feature count")?;
    if declared as usize != DESCRIPTOR_LEN {
        return Err(ModelFormatError::CountMismatch {
            declared,
            expected: DESCRIPTOR_LEN,
        });
    }
    let version_len = r.u32("version length")? as usize;
    let version = std::str::from_utf8(r.take(version_len, "version")?)
        .map_err(|_| ModelFormatError::BadVersion)?
        .to_owned();
    let raw = r.take(4 * DESCRIPTOR_LEN, "weights")?;
    let weights = raw
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let bias = r.f32("bias")?;
    let rest = data.len() - r.pos;
    if rest != 0 {
        return Err(ModelFormatError::TrailingBytes(rest));
    }
    SvmModel::with_version(weights, bias, version).map_err(|_| ModelFormatError::NonFinite)
}

pub fn save_model(model: &SvmModel, path: impl AsRef<Path>) -> Result<(), ModelFormatError> {
    fs::write(path, encode_model(model))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SvmModel, ModelFormatError> {
    decode_model(&fs::read(path)?)
}
