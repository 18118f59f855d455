//! On-disk μ block cache.
//!
//! Layout of one block file (all integers little-endian):
//!
//! | bytes            | content                                   |
//! |------------------|-------------------------------------------|
//! | 4                | magic `"MUBK"`                            |
//! | 4                | format version, `u32` = 1                 |
//! | 8                | start, `u64`                              |
//! | 8                | count, `u64`                              |
//! | ceil(count / 4)  | 2-bit codes, value `i` at byte `i / 4`, bit offset `2·(i mod 4)` |
//!
//! Codes: `00` → 0, `01` → +1, `10` → −1; `11` is rejected on read.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::serde_exact;
use sha2::{Digest, Sha256};

use super::block::{ArithFunction, MobiusBlock};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"MUBK";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 24;

pub fn encode_block(block: &MobiusBlock) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + block.packed().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&block.start().to_le_bytes());
    out.extend_from_slice(&block.len().to_le_bytes());
    out.extend_from_slice(block.packed());
    out
}

pub fn decode_block(bytes: &[u8]) -> Result<MobiusBlock> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "file has {} bytes, header needs {HEADER_LEN}",
            bytes.len()
        )));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let start = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let count = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    MobiusBlock::from_packed(
        ArithFunction::Mobius,
        start,
        count,
        bytes[HEADER_LEN..].to_vec(),
    )
}

pub fn checksum(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StoreStatus {
    Written,
    Unchanged,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredBlock {
    pub file: String,
    #[serde(with = "serde_exact::display")]
    pub start: u64,
    #[serde(with = "serde_exact::display")]
    pub count: u64,
    pub sha256: String,
    pub status: StoreStatus,
}

/// A directory of μ block files keyed by `(start, count)`.
#[derive(Debug, Clone)]
pub struct BlockCache {
    dir: PathBuf,
}

impl BlockCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn file_name(start: u64, count: u64) -> String {
        format!("mu-{start:020}-{count}.mubk")
    }

    pub fn path_for(&self, start: u64, count: u64) -> PathBuf {
        self.dir.join(Self::file_name(start, count))
    }

    /// Writes `block` unless an identical file is already present.
    pub fn store(&self, block: &MobiusBlock) -> Result<StoredBlock> {
        if block.function() != ArithFunction::Mobius {
            return Err(Error::argument("only μ blocks are cached"));
        }
        fs::create_dir_all(&self.dir)?;
        let bytes = encode_block(block);
        let sum = checksum(&bytes);
        let path = self.path_for(block.start(), block.len());
        let status = match fs::read(&path) {
            Ok(existing) if checksum(&existing) == sum => StoreStatus::Unchanged,
            _ => {
                let tmp = path.with_extension("mubk.tmp");
                fs::write(&tmp, &bytes)?;
                fs::rename(&tmp, &path)?;
                StoreStatus::Written
            }
        };
        Ok(StoredBlock {
            file: Self::file_name(block.start(), block.len()),
            start: block.start(),
            count: block.len(),
            sha256: sum,
            status,
        })
    }

    pub fn load(&self, start: u64, count: u64) -> Result<Option<MobiusBlock>> {
        let path = self.path_for(start, count);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let block = decode_block(&bytes)?;
        if block.start() != start || block.len() != count {
            return Err(Error::Format(format!(
                "{} holds [{}, +{}), expected [{start}, +{count})",
                path.display(),
                block.start(),
                block.len()
            )));
        }
        Ok(Some(block))
    }
}
