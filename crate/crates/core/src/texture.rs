//! Residual and intra coding with an 8x8 orthonormal DCT, uniform
//! quantisation and Exp-Golomb run/level coding.
//!
//! Each block is written as `ue(n_nonzero)` followed, for every nonzero
//! level in zigzag order, by `ue(zero_run)` and `se(level)`. Planes are coded
//! R, G, B; blocks in raster order within a plane.

use alloc::vec::Vec;

use crate::entropy::{BitReader, BitWriter};
use crate::frame::Frame;
use crate::gop::FrameKind;
use crate::{Error, Result};

/// Step growth per temporal level, and the extra factor for non-reference B frames.
pub const LEVEL_STEP_RATIO: f64 = 1.2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantParams {
    pub q_base: f64,
    pub temporal_level: u32,
    pub kind: FrameKind,
}

impl QuantParams {
    pub fn intra(q_base: f64) -> QuantParams {
        QuantParams { q_base, temporal_level: 0, kind: FrameKind::Intra }
    }

    /// `q_base * 1.2^level`, times another 1.2 for non-reference frames, at least 1.
    pub fn step(&self) -> f64 {
        let mut step = self.q_base * libm::pow(LEVEL_STEP_RATIO, self.temporal_level as f64);
        if self.kind == FrameKind::NonRefB {
            step *= LEVEL_STEP_RATIO;
        }
        step.max(1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TexturePayload {
    pub bytes: Vec<u8>,
    pub bit_count: u64,
}

#[rustfmt::skip]
pub const ZIGZAG: [usize; 64] = [
     0,  1,  8, 16,  9,  2,  3, 10,
    17, 24, 32, 25, 18, 11,  4,  5,
    12, 19, 26, 33, 40, 48, 41, 34,
    27, 20, 13,  6,  7, 14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36,
    29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46,
    53, 60, 61, 54, 47, 55, 62, 63,
];

/// Orthonormal 8-point DCT-II basis.
#[derive(Clone, Debug)]
pub struct Dct8 {
    basis: [[f64; 8]; 8],
}

impl Default for Dct8 {
    fn default() -> Self {
        Dct8::new()
    }
}

impl Dct8 {
    pub fn new() -> Dct8 {
        let mut basis = [[0.0; 8]; 8];
        for (k, row) in basis.iter_mut().enumerate() {
            let alpha = if k == 0 { libm::sqrt(1.0 / 8.0) } else { libm::sqrt(2.0 / 8.0) };
            for (n, v) in row.iter_mut().enumerate() {
                *v = alpha * libm::cos((2 * n + 1) as f64 * k as f64 * core::f64::consts::PI / 16.0);
            }
        }
        Dct8 { basis }
    }

    /// Row-major 8x8 samples to row-major coefficients (`[v * 8 + u]`).
    pub fn forward(&self, block: &[f64; 64]) -> [f64; 64] {
        let c = &self.basis;
        let mut rows = [0.0; 64];
        for y in 0..8 {
            for u in 0..8 {
                rows[y * 8 + u] = (0..8).map(|n| c[u][n] * block[y * 8 + n]).sum();
            }
        }
        let mut out = [0.0; 64];
        for v in 0..8 {
            for u in 0..8 {
                out[v * 8 + u] = (0..8).map(|y| c[v][y] * rows[y * 8 + u]).sum();
            }
        }
        out
    }

    pub fn inverse(&self, coefs: &[f64; 64]) -> [f64; 64] {
        let c = &self.basis;
        let mut cols = [0.0; 64];
        for y in 0..8 {
            for u in 0..8 {
                cols[y * 8 + u] = (0..8).map(|v| c[v][y] * coefs[v * 8 + u]).sum();
            }
        }
        let mut out = [0.0; 64];
        for y in 0..8 {
            for x in 0..8 {
                out[y * 8 + x] = (0..8).map(|u| c[u][x] * cols[y * 8 + u]).sum();
            }
        }
        out
    }
}

pub fn dct8_forward(block: &[f64; 64]) -> [f64; 64] {
    Dct8::new().forward(block)
}

pub fn dct8_inverse(coefs: &[f64; 64]) -> [f64; 64] {
    Dct8::new().inverse(coefs)
}

fn check_dims(x: &Frame, predictor: &Frame) -> Result<(usize, usize)> {
    let dims = x.stored_dims();
    if predictor.stored_dims() != dims || (x.width, x.height) != (predictor.width, predictor.height) {
        return Err(Error::DimensionMismatch { expected: dims, found: predictor.stored_dims() });
    }
    if !dims.0.is_multiple_of(8) || !dims.1.is_multiple_of(8) {
        return Err(Error::DimensionMismatch { expected: (dims.0 / 8 * 8, dims.1 / 8 * 8), found: dims });
    }
    Ok(dims)
}

/// Adds the dequantised block to the predictor, rounding and clamping.
fn reconstruct_block(
    dct: &Dct8,
    levels: &[i32; 64],
    step: f64,
    pred: &[u8],
    out: &mut [u8],
    w: usize,
    x0: usize,
    y0: usize,
) {
    let mut coefs = [0.0; 64];
    for (c, &l) in coefs.iter_mut().zip(levels) {
        *c = l as f64 * step;
    }
    let res = dct.inverse(&coefs);
    for y in 0..8 {
        for x in 0..8 {
            let i = (y0 + y) * w + x0 + x;
            let v = pred[i] as f64 + libm::round(res[y * 8 + x]);
            out[i] = v.clamp(0.0, 255.0) as u8;
        }
    }
}

pub fn encode_residual(x: &Frame, predictor: &Frame, qp: &QuantParams) -> Result<(TexturePayload, Frame)> {
    let (w, h) = check_dims(x, predictor)?;
    let step = qp.step();
    let dct = Dct8::new();
    let mut wr = BitWriter::new();
    let mut recon = predictor.clone();
    for c in 0..3 {
        let (src, pred) = (&x.planes[c], &predictor.planes[c]);
        for by in (0..h).step_by(8) {
            for bx in (0..w).step_by(8) {
                let mut block = [0.0; 64];
                for y in 0..8 {
                    for xx in 0..8 {
                        let i = (by + y) * w + bx + xx;
                        block[y * 8 + xx] = src[i] as f64 - pred[i] as f64;
                    }
                }
                let coefs = dct.forward(&block);
                let mut levels = [0i32; 64];
                for (l, &cf) in levels.iter_mut().zip(&coefs) {
                    *l = libm::round(cf / step) as i32;
                }
                let nonzero = levels.iter().filter(|&&l| l != 0).count();
                wr.put_ue(nonzero as u32);
                let mut run = 0u32;
                for &zz in &ZIGZAG {
                    let l = levels[zz];
                    if l == 0 {
                        run += 1;
                    } else {
                        wr.put_ue(run);
                        wr.put_se(l);
                        run = 0;
                    }
                }
                if nonzero > 0 {
                    reconstruct_block(&dct, &levels, step, pred, &mut recon.planes[c], w, bx, by);
                }
            }
        }
    }
    let bit_count = wr.bit_count();
    Ok((TexturePayload { bytes: wr.finish(), bit_count }, recon))
}

pub fn decode_residual(payload: &[u8], predictor: &Frame, qp: &QuantParams) -> Result<Frame> {
    let (w, h) = check_dims(predictor, predictor)?;
    let step = qp.step();
    let dct = Dct8::new();
    let mut rd = BitReader::new(payload);
    let mut recon = predictor.clone();
    for c in 0..3 {
        let pred = &predictor.planes[c];
        for by in (0..h).step_by(8) {
            for bx in (0..w).step_by(8) {
                let nonzero = rd.get_ue()?;
                if nonzero > 64 {
                    return Err(Error::ZigzagOverrun);
                }
                if nonzero == 0 {
                    continue;
                }
                let mut levels = [0i32; 64];
                let mut pos = 0usize;
                for _ in 0..nonzero {
                    pos += rd.get_ue()? as usize;
                    if pos >= 64 {
                        return Err(Error::ZigzagOverrun);
                    }
                    let l = rd.get_se()?;
                    if l == 0 {
                        return Err(Error::Corrupt("zero level coded as nonzero"));
                    }
                    levels[ZIGZAG[pos]] = l;
                    pos += 1;
                }
                reconstruct_block(&dct, &levels, step, pred, &mut recon.planes[c], w, bx, by);
            }
        }
    }
    Ok(recon)
}

/// Intra coding: the residual pipeline against a constant-128 predictor.
pub fn encode_intra(x: &Frame, q_base: f64) -> Result<(TexturePayload, Frame)> {
    encode_residual(x, &x.constant_like(128), &QuantParams::intra(q_base))
}

/// `template` supplies the frame geometry; its samples are ignored.
pub fn decode_intra(payload: &[u8], template: &Frame, q_base: f64) -> Result<Frame> {
    decode_residual(payload, &template.constant_like(128), &QuantParams::intra(q_base))
}
