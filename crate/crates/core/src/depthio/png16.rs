//! 16-bit grayscale PNG rasters. A stored value of 0 marks a missing pixel;
//! every other value `raw` decodes to `raw / scale`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Cursor};
use std::path::Path;

use super::{io_err, DepthIoError, Grid, Result};

fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(DepthIoError::Unsupported(format!("PNG16 scale must be positive, got {scale}")))
    }
}

pub fn read_png16(path: &Path, scale: f64) -> Result<Grid> {
    check_scale(scale)?;
    let file = File::open(path).map_err(io_err(path))?;
    decode_png16(path, BufReader::new(file), scale)
}

pub(crate) fn decode_png16<R: std::io::BufRead + std::io::Seek>(path: &Path, r: R, scale: f64) -> Result<Grid> {
    let malformed = |reason: String| DepthIoError::MalformedHeader {
        path: path.to_path_buf(),
        reason,
    };
    let mut reader = png::Decoder::new(r)
        .read_info()
        .map_err(|e| malformed(e.to_string()))?;
    let info = reader.info();
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Sixteen {
        return Err(DepthIoError::Unsupported(format!(
            "{}: expected 16-bit grayscale, found {:?} at {:?}",
            path.display(),
            info.color_type,
            info.bit_depth
        )));
    }
    let size = reader
        .output_buffer_size()
        .ok_or(DepthIoError::DimensionOverflow {
            width: info.width as usize,
            height: info.height as usize,
        })?;
    let mut buf = vec![0u8; size];
    let out = reader.next_frame(&mut buf).map_err(|e| malformed(e.to_string()))?;
    let (w, h) = (out.width as usize, out.height as usize);

    let mut values = Vec::with_capacity(w * h);
    let mut mask = Vec::with_capacity(w * h);
    for y in 0..h {
        let row = &buf[y * out.line_size..y * out.line_size + 2 * w];
        for px in row.chunks_exact(2) {
            let raw = u16::from_be_bytes([px[0], px[1]]);
            values.push(f64::from(raw) / scale);
            mask.push(raw != 0);
        }
    }
    Grid::new(w, h, values, mask)
}

/// Quantizes valid values to `round(v * scale)`; each must land in `1..=65535`.
pub fn write_png16(path: &Path, grid: &Grid, scale: f64) -> Result<()> {
    let bytes = encode_png16(grid, scale)?;
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    std::io::Write::write_all(&mut w, &bytes).map_err(io_err(path))
}

pub(crate) fn encode_png16(grid: &Grid, scale: f64) -> Result<Vec<u8>> {
    check_scale(scale)?;
    let mut data = Vec::with_capacity(grid.len() * 2);
    for (index, (&v, &m)) in grid.values().iter().zip(grid.mask()).enumerate() {
        let raw = if m {
            let q = (v * scale).round();
            if !(1.0..=65535.0).contains(&q) {
                return Err(DepthIoError::ValueOutOfRange { index, value: v, scale });
            }
            q as u16
        } else {
            0
        };
        data.extend_from_slice(&raw.to_be_bytes());
    }

    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(Cursor::new(&mut out), grid.width() as u32, grid.height() as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Sixteen);
        let encode_err = |e: png::EncodingError| DepthIoError::Unsupported(e.to_string());
        let mut writer = enc.write_header().map_err(encode_err)?;
        writer.write_image_data(&data).map_err(encode_err)?;
        writer.finish().map_err(encode_err)?;
    }
    Ok(out)
}
