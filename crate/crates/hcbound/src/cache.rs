//! On-disk cache of block families.
//!
//! File layout (little endian):
//!
//! ```text
//! magic    b"HCFAM"
//! version  u32
//! n        u8
//! reduce   u8      0 = D4, 1 = D4 + weak
//! classes  u32
//! class    (representative u32, multiplicity u32) × classes
//! index    u32 × 2^(n²)
//! checksum u32     CRC-32 over everything above
//! ```
//!
//! Loading goes through `BlockFamily::from_parts`, which re-checks that the
//! stored partition is closed under the reduction. A file that fails any check
//! is rebuilt and rewritten.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};

use hcbound_core::blocks::{BlockFamily, Mask, Reduction};

pub const MAGIC: &[u8; 5] = b"HCFAM";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Built,
    /// The stored file was unusable; carries the reason.
    Rebuilt(String),
}

pub fn cache_path(dir: &Path, n: usize, reduction: Reduction) -> PathBuf {
    let tag = match reduction {
        Reduction::D4 => "d4",
        Reduction::D4Weak => "d4weak",
    };
    dir.join(format!("family-n{n}-{tag}.hcfam"))
}

pub fn encode(family: &BlockFamily) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * family.class_count() + 4 * family.index().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(family.n() as u8);
    out.push(match family.reduction() {
        Reduction::D4 => 0,
        Reduction::D4Weak => 1,
    });
    out.extend_from_slice(&(family.class_count() as u32).to_le_bytes());
    for c in family.classes() {
        out.extend_from_slice(&c.representative.mask().to_le_bytes());
        out.extend_from_slice(&(c.multiplicity as u32).to_le_bytes());
    }
    for &c in family.index() {
        out.extend_from_slice(&c.to_le_bytes());
    }
    let sum = crc32fast::hash(&out);
    out.extend_from_slice(&sum.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let end = self.at.checked_add(k).filter(|&e| e <= self.bytes.len());
        let Some(end) = end else { bail!("file is truncated") };
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into()?))
    }
}

pub fn decode(bytes: &[u8]) -> Result<BlockFamily> {
    if bytes.len() < MAGIC.len() + 4 {
        bail!("file is truncated");
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    if crc32fast::hash(body) != u32::from_le_bytes(tail.try_into()?) {
        bail!("checksum mismatch");
    }
    let mut r = Reader { bytes: body, at: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        bail!("bad magic");
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        bail!("format version {version}, expected {FORMAT_VERSION}");
    }
    let n = r.u8()? as usize;
    let reduction = match r.u8()? {
        0 => Reduction::D4,
        1 => Reduction::D4Weak,
        t => bail!("unknown reduction tag {t}"),
    };
    if !(1..=hcbound_core::blocks::MAX_REDUCED).contains(&n) {
        bail!("block size {n} out of range");
    }
    let count = r.u32()? as usize;
    if count > 1 << (n * n) {
        bail!("more classes than masks");
    }
    let mut classes: Vec<(Mask, usize)> = Vec::with_capacity(count);
    for _ in 0..count {
        let rep = r.u32()?;
        let mult = r.u32()? as usize;
        classes.push((rep, mult));
    }
    let index = (0..1usize << (n * n)).map(|_| r.u32()).collect::<Result<Vec<u32>>>()?;
    if r.at != body.len() {
        bail!("trailing bytes");
    }
    Ok(BlockFamily::from_parts(n, reduction, &classes, index)?)
}

/// Loads the family from `dir`, building (and writing) it when absent or
/// unusable. Without a directory the family is always built.
pub fn load_or_build(
    dir: Option<&Path>,
    n: usize,
    reduction: Reduction,
) -> Result<(Arc<BlockFamily>, CacheStatus)> {
    let Some(dir) = dir else {
        return Ok((Arc::new(BlockFamily::build(n, reduction)?), CacheStatus::Built));
    };
    let path = cache_path(dir, n, reduction);
    let mut status = CacheStatus::Built;
    if path.exists() {
        let loaded = fs::read(&path).map_err(anyhow::Error::from).and_then(|b| decode(&b)).and_then(|f| {
            if f.n() == n && f.reduction() == reduction {
                Ok(f)
            } else {
                bail!("file holds a different family")
            }
        });
        match loaded {
            Ok(f) => return Ok((Arc::new(f), CacheStatus::Hit)),
            Err(e) => status = CacheStatus::Rebuilt(format!("{}: {e}", path.display())),
        }
    }
    let family = BlockFamily::build(n, reduction)?;
    fs::create_dir_all(dir).with_context(|| format!("creating cache directory {}", dir.display()))?;
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, encode(&family)).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, &path).with_context(|| format!("writing {}", path.display()))?;
    Ok((Arc::new(family), status))
}
