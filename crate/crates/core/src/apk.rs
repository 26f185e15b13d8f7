//! APK container reading.
//!
//! An APK is a ZIP archive. Only the central directory is trusted for entry
//! enumeration; each entry's payload is located through its local header and
//! checked against the central-directory sizes and CRC on extraction.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::digest::sha256_hex;

pub const MANIFEST_ENTRY: &str = "AndroidManifest.xml";

const LOCAL_HEADER_SIG: u32 = 0x0403_4b50;
const CENTRAL_HEADER_SIG: u32 = 0x0201_4b50;
const EOCD_SIG: u32 = 0x0605_4b50;
const EOCD_LEN: usize = 22;
const MAX_COMMENT_LEN: usize = 0xFFFF;

pub const METHOD_STORED: u16 = 0;
pub const METHOD_DEFLATE: u16 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArchiveError {
    #[error("malformed archive: {0}")]
    MalformedArchive(&'static str),
    #[error("duplicate archive entry {0:?}")]
    DuplicateEntry(String),
    #[error("archive has no {MANIFEST_ENTRY}")]
    MissingManifest,
    #[error("archive has no classes.dex")]
    MissingDex,
    #[error("cannot extract {entry}: {reason}")]
    DecompressionFailure { entry: String, reason: String },
}

/// Central-directory metadata for one entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EntryMeta {
    pub compressed_size: u64,
    pub uncompressed_size: u64,
    pub compression_method: u16,
    /// Offset of the entry's local file header.
    pub offset: u64,
    pub crc32: u32,
    pub flags: u16,
}

#[derive(Debug, Clone)]
pub struct ApkArchive<'a> {
    data: &'a [u8],
    entries: BTreeMap<String, EntryMeta>,
    source_digest: String,
}

/// The artifacts the audit pipeline consumes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactBundle {
    pub manifest_bytes: Vec<u8>,
    /// `classes.dex`, `classes2.dex`, ... in suffix order.
    pub dex_entries: Vec<(String, Vec<u8>)>,
    pub package_digest: String,
}

fn u16_at(data: &[u8], at: usize) -> Option<u16> {
    data.get(at..at + 2).map(|b| u16::from_le_bytes([b[0], b[1]]))
}

fn u32_at(data: &[u8], at: usize) -> Option<u32> {
    data.get(at..at + 4)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
}

fn find_eocd(data: &[u8]) -> Option<usize> {
    if data.len() < EOCD_LEN {
        return None;
    }
    let last = data.len() - EOCD_LEN;
    let first = last.saturating_sub(MAX_COMMENT_LEN);
    (first..=last)
        .rev()
        .find(|&at| u32_at(data, at) == Some(EOCD_SIG))
}

/// Enumerates the central directory of a ZIP archive.
pub fn open_archive(data: &[u8]) -> Result<ApkArchive<'_>, ArchiveError> {
    use ArchiveError::MalformedArchive as Bad;

    let eocd = find_eocd(data).ok_or(Bad("end of central directory not found"))?;
    let disk = u16_at(data, eocd + 4).unwrap_or(0);
    let cd_disk = u16_at(data, eocd + 6).unwrap_or(0);
    let total = u16_at(data, eocd + 10).ok_or(Bad("truncated end record"))?;
    let cd_size = u32_at(data, eocd + 12).ok_or(Bad("truncated end record"))?;
    let cd_offset = u32_at(data, eocd + 16).ok_or(Bad("truncated end record"))?;
    if disk != 0 || cd_disk != 0 {
        return Err(Bad("multi-disk archives are not supported"));
    }
    if total == 0xFFFF || cd_offset == 0xFFFF_FFFF || cd_size == 0xFFFF_FFFF {
        return Err(Bad("zip64 archives are not supported"));
    }
    let cd_start = cd_offset as usize;
    let cd_end = cd_start
        .checked_add(cd_size as usize)
        .ok_or(Bad("central directory out of range"))?;
    if cd_end > eocd {
        return Err(Bad("central directory out of range"));
    }

    let mut entries = BTreeMap::new();
    let mut at = cd_start;
    for _ in 0..total {
        if at + 46 > cd_end || u32_at(data, at) != Some(CENTRAL_HEADER_SIG) {
            return Err(Bad("truncated central directory"));
        }
        let flags = u16_at(data, at + 8).unwrap_or(0);
        let method = u16_at(data, at + 10).unwrap_or(0);
        let crc32 = u32_at(data, at + 16).unwrap_or(0);
        let compressed = u32_at(data, at + 20).unwrap_or(0);
        let uncompressed = u32_at(data, at + 24).unwrap_or(0);
        let name_len = u16_at(data, at + 28).unwrap_or(0) as usize;
        let extra_len = u16_at(data, at + 30).unwrap_or(0) as usize;
        let comment_len = u16_at(data, at + 32).unwrap_or(0) as usize;
        let offset = u32_at(data, at + 42).unwrap_or(0);
        let name_start = at + 46;
        let next = name_start + name_len + extra_len + comment_len;
        if next > cd_end {
            return Err(Bad("truncated central directory"));
        }
        let name = String::from_utf8_lossy(&data[name_start..name_start + name_len]).into_owned();
        let meta = EntryMeta {
            compressed_size: compressed as u64,
            uncompressed_size: uncompressed as u64,
            compression_method: method,
            offset: offset as u64,
            crc32,
            flags,
        };
        if entries.insert(name.clone(), meta).is_some() {
            return Err(ArchiveError::DuplicateEntry(name));
        }
        at = next;
    }

    Ok(ApkArchive {
        data,
        entries,
        source_digest: sha256_hex(data),
    })
}

/// Numeric position of a root-level multidex entry: `classes.dex` is 1,
/// `classesN.dex` is N for N >= 2.
pub fn dex_suffix(name: &str) -> Option<u32> {
    let middle = name.strip_prefix("classes")?.strip_suffix(".dex")?;
    if middle.is_empty() {
        return Some(1);
    }
    if middle.starts_with('0') || !middle.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    middle.parse::<u32>().ok().filter(|&n| n >= 2)
}

impl<'a> ApkArchive<'a> {
    pub fn entries(&self) -> &BTreeMap<String, EntryMeta> {
        &self.entries
    }

    pub fn source_digest(&self) -> &str {
        &self.source_digest
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Dex entry names in multidex order.
    pub fn dex_names(&self) -> Vec<&str> {
        let mut names: Vec<(u32, &str)> = self
            .entries
            .keys()
            .filter_map(|n| dex_suffix(n).map(|k| (k, n.as_str())))
            .collect();
        names.sort_unstable();
        names.into_iter().map(|(_, n)| n).collect()
    }

    /// Decompresses one entry, checking size and CRC against the central
    /// directory.
    pub fn read_entry(&self, name: &str) -> Result<Vec<u8>, ArchiveError> {
        let meta = self
            .entries
            .get(name)
            .ok_or(ArchiveError::MalformedArchive("entry not in central directory"))?;
        let fail = |reason: &str| ArchiveError::DecompressionFailure {
            entry: name.to_string(),
            reason: reason.to_string(),
        };
        if meta.flags & 0x1 != 0 {
            return Err(fail("entry is encrypted"));
        }
        let local = meta.offset as usize;
        if u32_at(self.data, local) != Some(LOCAL_HEADER_SIG) {
            return Err(ArchiveError::MalformedArchive("bad local header signature"));
        }
        let name_len = u16_at(self.data, local + 26).ok_or(fail("truncated local header"))? as usize;
        let extra_len = u16_at(self.data, local + 28).ok_or(fail("truncated local header"))? as usize;
        let start = local + 30 + name_len + extra_len;
        let end = start
            .checked_add(meta.compressed_size as usize)
            .ok_or(fail("entry size overflows"))?;
        let raw = self.data.get(start..end).ok_or(fail("entry data truncated"))?;

        let out = match meta.compression_method {
            METHOD_STORED => raw.to_vec(),
            METHOD_DEFLATE => miniz_oxide::inflate::decompress_to_vec_with_limit(
                raw,
                meta.uncompressed_size as usize,
            )
            .map_err(|_| fail("invalid deflate stream"))?,
            _ => return Err(fail("unsupported compression method")),
        };
        if out.len() as u64 != meta.uncompressed_size {
            return Err(fail("size does not match central directory"));
        }
        if crc32fast::hash(&out) != meta.crc32 {
            return Err(fail("crc mismatch"));
        }
        Ok(out)
    }
}

/// Pulls the manifest and every dex entry out of an archive.
pub fn extract_bundle(archive: &ApkArchive<'_>) -> Result<ArtifactBundle, ArchiveError> {
    if !archive.entries.contains_key(MANIFEST_ENTRY) {
        return Err(ArchiveError::MissingManifest);
    }
    let dex_names = archive.dex_names();
    if !dex_names.contains(&"classes.dex") {
        return Err(ArchiveError::MissingDex);
    }
    let manifest_bytes = archive.read_entry(MANIFEST_ENTRY)?;
    if manifest_bytes.is_empty() {
        return Err(ArchiveError::MissingManifest);
    }
    let dex_entries = dex_names
        .into_iter()
        .map(|name| Ok((name.to_string(), archive.read_entry(name)?)))
        .collect::<Result<Vec<_>, ArchiveError>>()?;
    Ok(ArtifactBundle {
        manifest_bytes,
        dex_entries,
        package_digest: archive.source_digest.clone(),
    })
}
