//! Binary raster container.
//!
//! All integers and floats are little-endian.
//!
//! | offset       | size | field                                   |
//! |--------------|------|-----------------------------------------|
//! | 0            | 4    | magic `NAVR`                            |
//! | 4            | 2    | version, currently 1                    |
//! | 6            | 2    | channels: 1 depth, 2 flow               |
//! | 8            | 4    | width                                   |
//! | 12           | 4    | height                                  |
//! | 16           | 4·n  | `f32` payload, row-major, interleaved   |
//! | 16 + 4·n     | 4    | CRC-32 (IEEE) of every preceding byte   |
//!
//! with `n = width · height · channels`. Width and height are at least 1.
//! Flow values must be finite. Depth values must be finite or NaN, where
//! NaN marks a pixel without valid depth.

use std::path::Path;

use super::{write_bytes, IoError};
use crate::raster::{Raster, RasterKind};

pub const RASTER_MAGIC: [u8; 4] = *b"NAVR";
pub const RASTER_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 16;
pub const TRAILER_LEN: usize = 4;

fn check_values(kind: RasterKind, data: &[f32]) -> Result<(), IoError> {
    let bad = data.iter().position(|v| match kind {
        RasterKind::Depth => v.is_infinite(),
        RasterKind::Flow => !v.is_finite(),
    });
    match bad {
        Some(index) => Err(IoError::NonFiniteValue { index }),
        None => Ok(()),
    }
}

pub fn encode_raster(raster: &Raster) -> Result<Vec<u8>, IoError> {
    if raster.width() == 0 || raster.height() == 0 {
        return Err(IoError::DimensionMismatch(format!(
            "raster is {}x{}",
            raster.width(),
            raster.height()
        )));
    }
    check_values(raster.kind(), raster.data())?;
    let mut out = Vec::with_capacity(HEADER_LEN + raster.data().len() * 4 + TRAILER_LEN);
    out.extend_from_slice(&RASTER_MAGIC);
    out.extend_from_slice(&RASTER_VERSION.to_le_bytes());
    out.extend_from_slice(&raster.channels().to_le_bytes());
    out.extend_from_slice(&raster.width().to_le_bytes());
    out.extend_from_slice(&raster.height().to_le_bytes());
    for v in raster.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    Ok(out)
}

fn u16_at(bytes: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([bytes[at], bytes[at + 1]])
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("four bytes"))
}

pub fn decode_raster(bytes: &[u8]) -> Result<Raster, IoError> {
    if bytes.len() < 4 {
        return Err(IoError::TruncatedHeader { len: bytes.len() });
    }
    let magic: [u8; 4] = bytes[..4].try_into().expect("four bytes");
    if magic != RASTER_MAGIC {
        return Err(IoError::BadMagic(magic));
    }
    if bytes.len() < HEADER_LEN {
        return Err(IoError::TruncatedHeader { len: bytes.len() });
    }
    let version = u16_at(bytes, 4);
    if version != RASTER_VERSION {
        return Err(IoError::VersionUnsupported(version as u32));
    }
    let channels = u16_at(bytes, 6);
    let kind = RasterKind::from_channels(channels)
        .ok_or_else(|| IoError::DimensionMismatch(format!("unsupported channel count {channels}")))?;
    let width = u32_at(bytes, 8);
    let height = u32_at(bytes, 12);
    if width == 0 || height == 0 {
        return Err(IoError::DimensionMismatch(format!("raster is {width}x{height}")));
    }
    let expected = width as u64 * height as u64 * channels as u64 * 4;
    let got = (bytes.len() - HEADER_LEN) as u64;
    let needed = expected + TRAILER_LEN as u64;
    if got < needed {
        return Err(IoError::TruncatedPayload {
            expected,
            got: got.saturating_sub(TRAILER_LEN as u64),
        });
    }
    if got > needed {
        return Err(IoError::DimensionMismatch(format!(
            "{} trailing bytes after the checksum",
            got - needed
        )));
    }
    let body_end = HEADER_LEN + expected as usize;
    let stored = u32_at(bytes, body_end);
    let computed = crc32fast::hash(&bytes[..body_end]);
    if stored != computed {
        return Err(IoError::ChecksumMismatch { stored, computed });
    }
    let data: Vec<f32> = bytes[HEADER_LEN..body_end]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("four bytes")))
        .collect();
    check_values(kind, &data)?;
    Ok(Raster::from_vec(kind, width, height, data).expect("length checked above"))
}

pub fn write_raster(raster: &Raster, path: &Path) -> Result<(), IoError> {
    write_bytes(path, &encode_raster(raster)?)
}

pub fn read_raster(path: &Path) -> Result<Raster, IoError> {
    let bytes = std::fs::read(path).map_err(|e| IoError::io(path, e))?;
    decode_raster(&bytes)
}
