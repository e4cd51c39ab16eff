//! Binary container for one example.
//!
//! Layout: magic `QDS1`, format version (u16 LE), metadata length (u32 LE),
//! UTF-8 JSON metadata, the arrays in metadata order (row-major, f64 LE, complex
//! values as interleaved re/im pairs) and a trailing u64 LE FNV-1a checksum of
//! every preceding byte.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

use super::record::{ArrayData, Dtype, ExampleRecord, NamedArray};

pub const MAGIC: &[u8; 4] = b"QDS1";
pub const FORMAT_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 4;
const CHECKSUM_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("bad magic {found:?}, expected \"QDS1\"")]
    BadMagic { found: [u8; 4] },
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("file truncated: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("checksum mismatch: stored {stored:016x}, computed {computed:016x}")]
    Checksum { stored: u64, computed: u64 },
    #[error("malformed metadata: {0}")]
    Metadata(String),
    #[error("array {array}: {detail}")]
    Shape { array: String, detail: String },
    #[error("{0} unexpected bytes after the last array")]
    TrailingBytes(usize),
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn encode(record: &ExampleRecord) -> Result<Vec<u8>, FormatError> {
    record.check_shapes()?;
    let meta = serde_json::to_vec(&record.metadata).map_err(|e| FormatError::Metadata(e.to_string()))?;
    let meta_len = u32::try_from(meta.len())
        .map_err(|_| FormatError::Metadata("metadata exceeds 4 GiB".into()))?;
    let payload: usize = record
        .arrays
        .iter()
        .map(|a| a.data.len() * a.data.dtype().bytes_per_element())
        .sum();
    let mut out = Vec::with_capacity(HEADER_LEN + meta.len() + payload + CHECKSUM_LEN);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&meta_len.to_le_bytes());
    out.extend_from_slice(&meta);
    for a in &record.arrays {
        match &a.data {
            ArrayData::Real(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            ArrayData::Complex(v) => v.iter().for_each(|z| {
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }),
        }
    }
    let sum = fnv1a64(&out);
    out.extend_from_slice(&sum.to_le_bytes());
    Ok(out)
}

fn need(bytes: &[u8], needed: usize) -> Result<(), FormatError> {
    if bytes.len() < needed {
        Err(FormatError::Truncated {
            needed,
            available: bytes.len(),
        })
    } else {
        Ok(())
    }
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

pub fn decode(bytes: &[u8]) -> Result<ExampleRecord, FormatError> {
    need(bytes, HEADER_LEN)?;
    let found: [u8; 4] = bytes[..4].try_into().expect("4 bytes");
    if &found != MAGIC {
        return Err(FormatError::BadMagic { found });
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    need(bytes, HEADER_LEN + CHECKSUM_LEN)?;
    let body_len = bytes.len() - CHECKSUM_LEN;
    let stored = u64::from_le_bytes(bytes[body_len..].try_into().expect("8 bytes"));
    let computed = fnv1a64(&bytes[..body_len]);
    if stored != computed {
        return Err(FormatError::Checksum { stored, computed });
    }
    let body = &bytes[..body_len];

    let meta_len = u32::from_le_bytes(bytes[6..10].try_into().expect("4 bytes")) as usize;
    need(body, HEADER_LEN + meta_len)?;
    let metadata: serde_json::Value = serde_json::from_slice(&body[HEADER_LEN..HEADER_LEN + meta_len])
        .map_err(|e| FormatError::Metadata(e.to_string()))?;

    let mut record = ExampleRecord {
        metadata,
        arrays: Vec::new(),
    };
    let mut at = HEADER_LEN + meta_len;
    for spec in record.declared_arrays()? {
        let n = spec.num_elements();
        let width = spec.dtype.bytes_per_element();
        let end = n
            .checked_mul(width)
            .and_then(|b| b.checked_add(at))
            .ok_or_else(|| FormatError::Shape {
                array: spec.name.clone(),
                detail: format!("shape {:?} overflows", spec.shape),
            })?;
        need(body, end)?;
        let data = match spec.dtype {
            Dtype::F64 => ArrayData::Real((0..n).map(|i| f64_at(body, at + 8 * i)).collect()),
            Dtype::C128 => ArrayData::Complex(
                (0..n)
                    .map(|i| Complex64::new(f64_at(body, at + 16 * i), f64_at(body, at + 16 * i + 8)))
                    .collect(),
            ),
        };
        record.arrays.push(NamedArray {
            name: spec.name,
            shape: spec.shape,
            data,
        });
        at = end;
    }
    if at != body.len() {
        return Err(FormatError::TrailingBytes(body.len() - at));
    }
    Ok(record)
}

pub fn write_example(path: &Path, record: &ExampleRecord) -> crate::error::Result<u64> {
    let bytes = encode(record)?;
    fs::write(path, &bytes)?;
    Ok(u64::from_le_bytes(bytes[bytes.len() - CHECKSUM_LEN..].try_into().expect("8 bytes")))
}

pub fn read_example(path: &Path) -> crate::error::Result<ExampleRecord> {
    let bytes = fs::read(path)?;
    Ok(decode(&bytes)?)
}
