//! Spatial resampling of frames and flow fields.
//!
//! Downsampling is an iterated 2x2 box average. Upsampling is bilinear with
//! half-sample phase alignment: output sample `i` reads input position
//! `(i + 0.5) / s - 0.5`, clamped to the edge. All arithmetic is integer so
//! encoder and decoder agree bit for bit.

use alloc::vec::Vec;

use crate::frame::Frame;
use crate::motion::FlowField;
use crate::{Error, Result};

/// Downsampling factor, one of 1, 2, 4, 8.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScaleFactor(u8);

impl ScaleFactor {
    pub const ONE: ScaleFactor = ScaleFactor(1);
    pub const ALL: [ScaleFactor; 4] = [ScaleFactor(1), ScaleFactor(2), ScaleFactor(4), ScaleFactor(8)];

    pub fn new(s: u32) -> Result<ScaleFactor> {
        match s {
            1 | 2 | 4 | 8 => Ok(ScaleFactor(s as u8)),
            _ => Err(Error::InvalidScale(s)),
        }
    }

    pub fn from_log2(l: u8) -> Result<ScaleFactor> {
        if l > 3 {
            return Err(Error::InvalidScale(1 << l.min(31)));
        }
        Ok(ScaleFactor(1 << l))
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    pub fn log2(self) -> u8 {
        self.0.trailing_zeros() as u8
    }
}

impl core::fmt::Display for ScaleFactor {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One 2x box pass over a plane. Dimensions must be even.
pub(crate) fn downsample2_plane(src: &[u8], w: usize, h: usize) -> Vec<u8> {
    let (ow, oh) = (w / 2, h / 2);
    let mut out = Vec::with_capacity(ow * oh);
    for y in 0..oh {
        let r0 = &src[2 * y * w..][..w];
        let r1 = &src[(2 * y + 1) * w..][..w];
        for x in 0..ow {
            let sum = r0[2 * x] as u32 + r0[2 * x + 1] as u32 + r1[2 * x] as u32 + r1[2 * x + 1] as u32;
            out.push(((sum + 2) >> 2) as u8);
        }
    }
    out
}

pub fn downsample_frame(frame: &Frame, s: ScaleFactor) -> Frame {
    if s.get() == 1 {
        return frame.clone();
    }
    let (mut w, mut h) = frame.stored_dims();
    let mut planes = frame.planes.clone();
    for _ in 0..s.log2() {
        planes = planes.map(|p| downsample2_plane(&p, w, h));
        w /= 2;
        h /= 2;
    }
    Frame { width: w, height: h, padded_width: w, padded_height: h, planes }
}

/// Taps and weights (out of `2s`) for output index `i` along an axis of `n`
/// input samples.
#[inline]
fn taps(i: usize, s: usize, n: usize) -> (usize, usize, i64, i64) {
    let num = 2 * i as i64 + 1 - s as i64;
    let den = 2 * s as i64;
    let i0 = num.div_euclid(den);
    let frac = num.rem_euclid(den);
    let last = n as i64 - 1;
    let c0 = i0.clamp(0, last) as usize;
    let c1 = (i0 + 1).clamp(0, last) as usize;
    (c0, c1, den - frac, frac)
}

/// Bilinear upsampling of an integer plane by `s`, returning the unnormalised
/// weighted sums (scale `4 s^2`).
fn upsample_sums(src: &[i32], w: usize, h: usize, s: usize) -> Vec<i64> {
    let (ow, oh) = (w * s, h * s);
    let xt: Vec<_> = (0..ow).map(|x| taps(x, s, w)).collect();
    let mut out = Vec::with_capacity(ow * oh);
    for y in 0..oh {
        let (y0, y1, wy0, wy1) = taps(y, s, h);
        let r0 = &src[y0 * w..][..w];
        let r1 = &src[y1 * w..][..w];
        for &(x0, x1, wx0, wx1) in &xt {
            let top = wx0 * r0[x0] as i64 + wx1 * r0[x1] as i64;
            let bot = wx0 * r1[x0] as i64 + wx1 * r1[x1] as i64;
            out.push(wy0 * top + wy1 * bot);
        }
    }
    out
}

/// Integer division rounding half away from zero.
#[inline]
pub(crate) fn div_round(num: i64, den: i64) -> i64 {
    debug_assert!(den > 0);
    if num >= 0 {
        (num + den / 2) / den
    } else {
        -((-num + den / 2) / den)
    }
}

pub fn upsample_frame(frame: &Frame, s: ScaleFactor, target: (usize, usize)) -> Result<Frame> {
    let (w, h) = frame.stored_dims();
    let s = s.get();
    if target != (w * s, h * s) {
        return Err(Error::DimensionMismatch { expected: (w * s, h * s), found: target });
    }
    if s == 1 {
        return Ok(frame.clone());
    }
    let norm = (4 * s * s) as i64;
    let planes = frame.planes.clone().map(|p| {
        let src: Vec<i32> = p.iter().map(|&v| v as i32).collect();
        upsample_sums(&src, w, h, s)
            .into_iter()
            .map(|v| div_round(v, norm).clamp(0, 255) as u8)
            .collect::<Vec<u8>>()
    });
    Ok(Frame {
        width: target.0,
        height: target.1,
        padded_width: target.0,
        padded_height: target.1,
        planes,
    })
}

/// Bilinear upsampling of both components, then every vector multiplied by
/// `s`. Units stay quarter-pel; the product is rounded once.
pub fn upsample_flow(flow: &FlowField, s: ScaleFactor, target: (usize, usize)) -> Result<FlowField> {
    let (w, h) = (flow.width, flow.height);
    let s = s.get();
    if target != (w * s, h * s) {
        return Err(Error::DimensionMismatch { expected: (w * s, h * s), found: target });
    }
    if s == 1 {
        return Ok(flow.clone());
    }
    // sum / (4 s^2) * s == sum / (4 s)
    let norm = (4 * s) as i64;
    let up = |c: &[i32]| -> Vec<i32> {
        upsample_sums(c, w, h, s).into_iter().map(|v| div_round(v, norm) as i32).collect()
    };
    Ok(FlowField { width: target.0, height: target.1, dx: up(&flow.dx), dy: up(&flow.dy) })
}
