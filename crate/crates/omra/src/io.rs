//! Sequence and flow files.
//!
//! Raw RGB24 is frames concatenated, three interleaved bytes per pixel,
//! row-major. A PNG directory holds `frame_00000.png`, `frame_00001.png`, ...

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use image::{ImageFormat, RgbImage};
use omra_core::{FlowField, Frame, Sequence};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    PngDir,
    RawRgb24,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Format, String> {
        match s {
            "png_dir" => Ok(Format::PngDir),
            "raw_rgb24" => Ok(Format::RawRgb24),
            _ => Err(format!("unknown format `{s}` (expected png_dir or raw_rgb24)")),
        }
    }
}

pub fn png_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("frame_{index:05}.png"))
}

pub fn load_sequence(path: &Path, format: Format, width: usize, height: usize, count: usize) -> Result<Sequence> {
    let frames = match format {
        Format::RawRgb24 => load_raw(path, width, height, count)?,
        Format::PngDir => (0..count).map(|i| load_png(path, i, width, height)).collect::<Result<_>>()?,
    };
    Ok(Sequence::new(frames, 30.0)?)
}

fn load_raw(path: &Path, width: usize, height: usize, count: usize) -> Result<Vec<Frame>> {
    let data = fs::read(path).map_err(|source| Error::Io { path: path.into(), source })?;
    let frame_len = 3 * width * height;
    if data.len() < frame_len * count {
        return Err(Error::TruncatedRaw {
            index: data.len() / frame_len.max(1),
            needed: frame_len * count,
            found: data.len(),
        });
    }
    data.chunks_exact(frame_len)
        .take(count)
        .map(|rgb| Frame::from_interleaved_rgb(width, height, rgb).map_err(Error::from))
        .collect()
}

fn load_png(dir: &Path, index: usize, width: usize, height: usize) -> Result<Frame> {
    let path = png_path(dir, index);
    let bytes = fs::read(&path).map_err(|source| Error::FrameIo { index, path: path.clone(), source })?;
    let img = image::load_from_memory_with_format(&bytes, ImageFormat::Png)
        .map_err(|source| Error::Png { index, source })?
        .to_rgb8();
    let found = (img.width() as usize, img.height() as usize);
    if found != (width, height) {
        return Err(Error::FrameSize { index, expected: (width, height), found });
    }
    Ok(Frame::from_interleaved_rgb(width, height, img.as_raw())?)
}

/// Writes the true region of every frame.
pub fn save_sequence(seq: &Sequence, path: &Path, format: Format) -> Result<()> {
    match format {
        Format::RawRgb24 => {
            let data: Vec<u8> = seq.frames.iter().flat_map(|f| f.to_interleaved_rgb()).collect();
            fs::write(path, data).map_err(|source| Error::Io { path: path.into(), source })
        }
        Format::PngDir => {
            fs::create_dir_all(path).map_err(|source| Error::Io { path: path.into(), source })?;
            for (index, f) in seq.frames.iter().enumerate() {
                let img = RgbImage::from_raw(f.width() as u32, f.height() as u32, f.to_interleaved_rgb())
                    .expect("buffer sized from frame");
                img.save_with_format(png_path(path, index), ImageFormat::Png)
                    .map_err(|source| Error::Png { index, source })?;
            }
            Ok(())
        }
    }
}

/// Flow dump: `u32` width and height, then the dx plane and the dy plane as
/// `i16` quarter-pel values, all little-endian.
pub fn encode_flow_dump(flow: &FlowField) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(8 + 4 * flow.dx.len());
    out.extend_from_slice(&(flow.width as u32).to_le_bytes());
    out.extend_from_slice(&(flow.height as u32).to_le_bytes());
    for &v in flow.dx.iter().chain(&flow.dy) {
        let v = i16::try_from(v).map_err(|_| Error::BadFlowDump("component exceeds i16"))?;
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_flow_dump(data: &[u8]) -> Result<FlowField> {
    let dim = |i: usize| -> Result<usize> {
        let b = data.get(i..i + 4).ok_or(Error::BadFlowDump("short header"))?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize)
    };
    let (width, height) = (dim(0)?, dim(4)?);
    let n = width * height;
    if data.len() != 8 + 4 * n {
        return Err(Error::BadFlowDump("length does not match header"));
    }
    let vals: Vec<i32> =
        data[8..].chunks_exact(2).map(|b| i16::from_le_bytes([b[0], b[1]]) as i32).collect();
    Ok(FlowField { width, height, dx: vals[..n].to_vec(), dy: vals[n..].to_vec() })
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Io { path: path.into(), source })
}

pub fn write_file(path: &Path, data: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, data).map_err(|source| Error::Io { path: path.into(), source })
}
