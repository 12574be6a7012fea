//! Represented-value bitmaps with an optional on-disk cache.
//!
//! Cache file layout (all integers little-endian):
//!
//! ```text
//! b"TUVREP1"          7 bytes
//! matrix entries      9 x i64, row-major
//! N                   u64
//! bitmap              ceil((N + 1) / 8) bytes, bit m set iff m is represented
//! ```
//!
//! Files are named by the SHA-256 of the matrix entries and the bound.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use sha2::{Digest, Sha256};

use crate::bitmap::Bitmap;
use crate::error::{Error, Result};
use crate::qform::GramMatrix;
use crate::repenum::represented_bitmap;

pub const CACHE_MAGIC: &[u8; 7] = b"TUVREP1";

/// Hex SHA-256 of the row-major matrix entries as little-endian i64.
pub fn form_key(form: &GramMatrix) -> String {
    let mut hasher = Sha256::new();
    for e in form.matrix().row_major() {
        hasher.update(e.to_le_bytes());
    }
    hex::encode(hasher.finalize())
}

pub fn encode_cache_file(form: &GramMatrix, bitmap: &Bitmap) -> Vec<u8> {
    let bound = bitmap.len() - 1;
    let mut out = Vec::with_capacity(7 + 80 + bitmap.len() as usize / 8 + 1);
    out.extend_from_slice(CACHE_MAGIC);
    for e in form.matrix().row_major() {
        out.extend_from_slice(&e.to_le_bytes());
    }
    out.extend_from_slice(&bound.to_le_bytes());
    out.extend_from_slice(&bitmap.to_bytes());
    out
}

/// Parses a cache file, returning the stored form, bound and bitmap.
pub fn decode_cache_file(bytes: &[u8]) -> std::result::Result<(GramMatrix, u64, Bitmap), String> {
    let rest = bytes
        .strip_prefix(CACHE_MAGIC.as_slice())
        .ok_or("bad magic")?;
    if rest.len() < 80 {
        return Err("truncated header".into());
    }
    let mut entries = [0i64; 9];
    for (i, e) in entries.iter_mut().enumerate() {
        *e = i64::from_le_bytes(rest[i * 8..i * 8 + 8].try_into().unwrap());
    }
    let bound = u64::from_le_bytes(rest[72..80].try_into().unwrap());
    let form = GramMatrix::from_row_major(entries).map_err(|e| e.to_string())?;
    let len = bound.checked_add(1).ok_or("bound out of range")?;
    let bitmap = Bitmap::from_bytes(len, &rest[80..]).ok_or("bitmap length mismatch")?;
    Ok((form, bound, bitmap))
}

/// Provides represented-value bitmaps, memoised in memory and optionally on disk.
///
/// The cache never changes results: a file whose header does not match the
/// request is ignored and recomputed.
#[derive(Debug, Default)]
pub struct Sweeper {
    cache_dir: Option<PathBuf>,
    memo: Mutex<HashMap<GramMatrix, Arc<Bitmap>>>,
}

impl Sweeper {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn with_cache_dir(dir: impl Into<PathBuf>) -> Self {
        Sweeper {
            cache_dir: Some(dir.into()),
            memo: Mutex::default(),
        }
    }

    pub fn cache_dir(&self) -> Option<&Path> {
        self.cache_dir.as_deref()
    }

    fn cache_path(&self, form: &GramMatrix, bound: u64) -> Option<PathBuf> {
        self.cache_dir
            .as_ref()
            .map(|d| d.join(format!("{}_{bound}.tuvrep", &form_key(form)[..32])))
    }

    /// Bitmap of `Q(form)` over `0..=bound`.
    pub fn bitmap(&self, form: &GramMatrix, bound: u64) -> Result<Arc<Bitmap>> {
        if let Some(b) = self.memo.lock().unwrap().get(form) {
            if b.len() == bound + 1 {
                return Ok(b.clone());
            }
            if b.len() > bound + 1 {
                return Ok(Arc::new(b.truncated(bound + 1)));
            }
        }
        let bitmap = Arc::new(self.load_or_compute(form, bound)?);
        let mut memo = self.memo.lock().unwrap();
        let keep = memo.get(form).is_none_or(|old| old.len() < bitmap.len());
        if keep {
            memo.insert(*form, bitmap.clone());
        }
        Ok(bitmap)
    }

    fn load_or_compute(&self, form: &GramMatrix, bound: u64) -> Result<Bitmap> {
        let Some(path) = self.cache_path(form, bound) else {
            return represented_bitmap(form, bound);
        };
        if let Ok(bytes) = fs::read(&path) {
            if let Ok((f, n, b)) = decode_cache_file(&bytes) {
                if f == *form && n == bound {
                    return Ok(b);
                }
            }
        }
        let bitmap = represented_bitmap(form, bound)?;
        let dir = path.parent().expect("cache path has a parent");
        fs::create_dir_all(dir).map_err(|e| Error::Cache {
            path: dir.display().to_string(),
            message: e.to_string(),
        })?;
        fs::write(&path, encode_cache_file(form, &bitmap)).map_err(|e| Error::Cache {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Ok(bitmap)
    }
}
