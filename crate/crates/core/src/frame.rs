//! Planar RGB frames, sequences and the distortion measure.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Coded frames are padded so both dimensions are a multiple of this.
pub const PAD_MULTIPLE: usize = 64;

/// Planar 3-channel 8-bit image.
///
/// `width`/`height` are the true image size. Samples are stored over the
/// padded area in row-major order; the padding is an edge replica of the true
/// region. Frames at working resolution (after downsampling) carry no padding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub(crate) width: usize,
    pub(crate) height: usize,
    pub(crate) padded_width: usize,
    pub(crate) padded_height: usize,
    pub(crate) planes: [Vec<u8>; 3],
}

fn round_up(v: usize, m: usize) -> usize {
    v.div_ceil(m) * m
}

impl Frame {
    /// Builds a frame from three `width * height` planes, padding to 64.
    pub fn from_planes(width: usize, height: usize, planes: [Vec<u8>; 3]) -> Result<Frame> {
        for p in &planes {
            if p.len() != width * height {
                return Err(Error::BadPlaneLength { expected: width * height, found: p.len() });
            }
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidConfig("empty frame"));
        }
        let pw = round_up(width, PAD_MULTIPLE);
        let ph = round_up(height, PAD_MULTIPLE);
        if pw == width && ph == height {
            return Ok(Frame { width, height, padded_width: pw, padded_height: ph, planes });
        }
        let planes = planes.map(|p| {
            let mut out = Vec::with_capacity(pw * ph);
            for y in 0..ph {
                let row = &p[y.min(height - 1) * width..][..width];
                out.extend_from_slice(row);
                out.resize(out.len() + pw - width, row[width - 1]);
            }
            out
        });
        Ok(Frame { width, height, padded_width: pw, padded_height: ph, planes })
    }

    /// Frame whose stored area is exactly `width * height` (no padding).
    pub fn unpadded(width: usize, height: usize, planes: [Vec<u8>; 3]) -> Result<Frame> {
        for p in &planes {
            if p.len() != width * height {
                return Err(Error::BadPlaneLength { expected: width * height, found: p.len() });
            }
        }
        Ok(Frame { width, height, padded_width: width, padded_height: height, planes })
    }

    /// Interleaved `R,G,B` bytes, row-major, exactly `3 * width * height` long.
    pub fn from_interleaved_rgb(width: usize, height: usize, rgb: &[u8]) -> Result<Frame> {
        if rgb.len() != 3 * width * height {
            return Err(Error::BadPlaneLength { expected: 3 * width * height, found: rgb.len() });
        }
        let mut planes = [
            Vec::with_capacity(width * height),
            Vec::with_capacity(width * height),
            Vec::with_capacity(width * height),
        ];
        for px in rgb.chunks_exact(3) {
            for c in 0..3 {
                planes[c].push(px[c]);
            }
        }
        Frame::from_planes(width, height, planes)
    }

    /// True region as interleaved `R,G,B` bytes.
    pub fn to_interleaved_rgb(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(3 * self.width * self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                let i = y * self.padded_width + x;
                out.extend(self.planes.iter().map(|p| p[i]));
            }
        }
        out
    }

    /// Constant frame, padded to 64.
    pub fn filled(width: usize, height: usize, value: u8) -> Frame {
        let pw = round_up(width.max(1), PAD_MULTIPLE);
        let ph = round_up(height.max(1), PAD_MULTIPLE);
        Frame {
            width,
            height,
            padded_width: pw,
            padded_height: ph,
            planes: [vec![value; pw * ph], vec![value; pw * ph], vec![value; pw * ph]],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn padded_width(&self) -> usize {
        self.padded_width
    }

    pub fn padded_height(&self) -> usize {
        self.padded_height
    }

    pub fn planes(&self) -> &[Vec<u8>; 3] {
        &self.planes
    }

    pub fn plane(&self, c: usize) -> &[u8] {
        &self.planes[c]
    }

    /// Sample at padded coordinates.
    pub fn sample(&self, c: usize, x: usize, y: usize) -> u8 {
        self.planes[c][y * self.padded_width + x]
    }

    pub fn set_sample(&mut self, c: usize, x: usize, y: usize, v: u8) {
        self.planes[c][y * self.padded_width + x] = v;
    }

    /// Same geometry, every sample set to `value`.
    pub(crate) fn constant_like(&self, value: u8) -> Frame {
        let n = self.padded_width * self.padded_height;
        Frame {
            width: self.width,
            height: self.height,
            padded_width: self.padded_width,
            padded_height: self.padded_height,
            planes: [vec![value; n], vec![value; n], vec![value; n]],
        }
    }

    pub(crate) fn stored_dims(&self) -> (usize, usize) {
        (self.padded_width, self.padded_height)
    }

    /// Drops whatever sits in the padding and rebuilds it from the true region.
    pub fn crop(&self) -> Frame {
        if self.padded_width == self.width && self.padded_height == self.height {
            return self.clone();
        }
        let planes = self.planes.clone().map(|p| {
            let mut out = Vec::with_capacity(self.width * self.height);
            for y in 0..self.height {
                out.extend_from_slice(&p[y * self.padded_width..][..self.width]);
            }
            out
        });
        // The true region is non-empty, so re-padding cannot fail.
        Frame::from_planes(self.width, self.height, planes).expect("true region is well formed")
    }
}

/// Frames in display order. All share the same dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct Sequence {
    pub frames: Vec<Frame>,
    pub frame_rate: f64,
}

impl Sequence {
    pub fn new(frames: Vec<Frame>, frame_rate: f64) -> Result<Sequence> {
        if let Some(first) = frames.first() {
            for f in &frames[1..] {
                if (f.width, f.height) != (first.width, first.height) {
                    return Err(Error::DimensionMismatch {
                        expected: (first.width, first.height),
                        found: (f.width, f.height),
                    });
                }
            }
        }
        Ok(Sequence { frames, frame_rate })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dims(&self) -> Option<(usize, usize)> {
        self.frames.first().map(|f| (f.width, f.height))
    }
}

/// Sum of squared differences over the true region of all three channels.
pub(crate) fn sse(a: &Frame, b: &Frame) -> Result<u64> {
    if (a.width, a.height) != (b.width, b.height) {
        return Err(Error::DimensionMismatch {
            expected: (a.width, a.height),
            found: (b.width, b.height),
        });
    }
    let mut acc = 0u64;
    for c in 0..3 {
        for y in 0..a.height {
            let ra = &a.planes[c][y * a.padded_width..][..a.width];
            let rb = &b.planes[c][y * b.padded_width..][..b.width];
            acc += ra
                .iter()
                .zip(rb)
                .map(|(&p, &q)| {
                    let d = p as i32 - q as i32;
                    (d * d) as u64
                })
                .sum::<u64>();
        }
    }
    Ok(acc)
}

/// Mean squared error over the `3 * width * height` true-region samples.
pub fn mse(a: &Frame, b: &Frame) -> Result<f64> {
    let total = sse(a, b)?;
    Ok(total as f64 / (3 * a.width * a.height) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> Frame {
        let planes = [0usize, 1, 2].map(|c| {
            (0..w * h).map(|i| ((i % w) * 2 + (i / w) * 3 + c * 50) as u8).collect::<Vec<_>>()
        });
        Frame::from_planes(w, h, planes).unwrap()
    }

    #[test]
    fn padding_replicates_edges() {
        let f = ramp(100, 50);
        assert_eq!((f.padded_width(), f.padded_height()), (128, 64));
        for c in 0..3 {
            assert_eq!(f.sample(c, 120, 30), f.sample(c, 99, 30));
            assert_eq!(f.sample(c, 10, 63), f.sample(c, 10, 49));
            assert_eq!(f.sample(c, 127, 63), f.sample(c, 99, 49));
        }
    }

    #[test]
    fn already_aligned_is_untouched() {
        let f = ramp(64, 64);
        assert_eq!((f.padded_width(), f.padded_height()), (64, 64));
        assert_eq!(f.crop(), f);
    }

    #[test]
    fn crop_discards_padding_content() {
        let f = ramp(100, 50);
        let mut g = f.clone();
        g.set_sample(0, 120, 60, 7);
        assert_eq!(g.crop(), f);
    }

    #[test]
    fn mse_cases() {
        let z = Frame::filled(64, 64, 0);
        let w = Frame::filled(64, 64, 255);
        assert_eq!(mse(&z, &z).unwrap(), 0.0);
        assert_eq!(mse(&z, &w).unwrap(), 65025.0);
        let mut d = z.clone();
        d.set_sample(1, 5, 9, 3);
        assert_eq!(mse(&z, &d).unwrap(), 9.0 / (3.0 * 64.0 * 64.0));
    }

    #[test]
    fn mse_ignores_padding() {
        let a = ramp(100, 50);
        let mut b = a.clone();
        b.set_sample(2, 110, 55, 0);
        assert_eq!(mse(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn mse_dimension_mismatch() {
        let a = Frame::filled(64, 64, 0);
        let b = Frame::filled(32, 64, 0);
        assert!(matches!(mse(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn interleaved_round_trip() {
        let f = ramp(70, 33);
        let rgb = f.to_interleaved_rgb();
        assert_eq!(rgb.len(), 3 * 70 * 33);
        assert_eq!(Frame::from_interleaved_rgb(70, 33, &rgb).unwrap(), f);
    }
}
