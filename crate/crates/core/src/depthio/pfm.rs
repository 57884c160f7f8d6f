//! Portable float map, single channel (`Pf`).
//!
//! Header: magic, width and height, and a scale factor whose sign selects the
//! byte order (negative means little-endian). Scanlines are stored bottom to
//! top. Non-finite samples are treated as missing data.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{check_dims, io_err, DepthIoError, Grid, Result};

struct Header {
    width: usize,
    height: usize,
    little_endian: bool,
    data_offset: usize,
}

fn parse_header(path: &Path, bytes: &[u8]) -> Result<Header> {
    let malformed = |reason: &str| DepthIoError::MalformedHeader {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };

    let mut pos = 0;
    let mut tokens = Vec::with_capacity(4);
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(malformed("header ended early"));
        }
        let tok = std::str::from_utf8(&bytes[start..pos]).map_err(|_| malformed("non-ASCII header"))?;
        tokens.push(tok);
    }
    // exactly one whitespace byte separates the scale from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(malformed("missing separator after scale"));
    }
    pos += 1;

    match tokens[0] {
        "Pf" => {}
        "PF" => {
            return Err(DepthIoError::Unsupported(format!(
                "{}: three-channel PFM",
                path.display()
            )))
        }
        _ => return Err(malformed("bad magic, expected Pf")),
    }
    let width: usize = tokens[1].parse().map_err(|_| malformed("bad width"))?;
    let height: usize = tokens[2].parse().map_err(|_| malformed("bad height"))?;
    let scale: f64 = tokens[3].parse().map_err(|_| malformed("bad scale"))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(malformed("scale must be finite and non-zero"));
    }
    check_dims(width, height)?;

    Ok(Header {
        width,
        height,
        little_endian: scale < 0.0,
        data_offset: pos,
    })
}

pub fn read_pfm(path: &Path) -> Result<Grid> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    decode_pfm(path, &bytes)
}

pub(crate) fn decode_pfm(path: &Path, bytes: &[u8]) -> Result<Grid> {
    let header = parse_header(path, bytes)?;
    let (w, h) = (header.width, header.height);
    let expected = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(4))
        .ok_or(DepthIoError::DimensionOverflow { width: w, height: h })?;
    let data = &bytes[header.data_offset..];
    if data.len() < expected {
        return Err(DepthIoError::TruncatedData {
            path: path.to_path_buf(),
            expected,
            found: data.len(),
        });
    }

    let mut values = vec![0.0; w * h];
    for (i, chunk) in data[..expected].chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if header.little_endian {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        };
        let (file_row, x) = (i / w, i % w);
        let y = h - 1 - file_row;
        values[y * w + x] = f64::from(v);
    }
    Grid::from_values(w, h, values)
}

/// Writes a little-endian `Pf` file. Values are narrowed to `f32`; invalid
/// pixels are stored as NaN.
pub fn write_pfm(path: &Path, grid: &Grid) -> Result<()> {
    let bytes = encode_pfm(grid);
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(&bytes).map_err(io_err(path))
}

pub(crate) fn encode_pfm(grid: &Grid) -> Vec<u8> {
    let (w, h) = (grid.width(), grid.height());
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * 4);
    for y in (0..h).rev() {
        for x in 0..w {
            let i = y * w + x;
            let v = if grid.mask()[i] {
                grid.values()[i] as f32
            } else {
                f32::NAN
            };
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}
