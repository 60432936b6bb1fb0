//! Operating points and rate-distortion sweeps.

use std::thread;
use std::time::{Duration, Instant};

use omra_core::metrics::{bits_per_pixel, mean_psnr, psnr, RdCurve, RdPoint};
use omra_core::{encode_sequence, EncodeOutput, EncoderConfig, Sequence};

use crate::error::{Error, Result};

pub const DEFAULT_Q_LIST: [f64; 4] = omra_core::engine::Q_BASE_LADDER;

#[derive(Clone, Debug)]
pub struct OperatingPoint {
    pub q_base: f64,
    pub point: RdPoint,
    pub output: EncodeOutput,
    pub encode_time: Duration,
}

/// `base` with its quantiser replaced; lambda follows the new quantiser.
pub fn config_at(base: &EncoderConfig, q_base: f64) -> EncoderConfig {
    EncoderConfig::new(q_base, base.variant)
        .with_intra_period(base.intra_period)
        .with_scales(base.scale_set.clone())
        .with_estimator(base.estimator)
}

/// Mean per-frame PSNR and bits per pixel of one encode.
pub fn rd_point(seq: &Sequence, out: &EncodeOutput) -> Result<RdPoint> {
    let (w, h) = seq.dims().ok_or_else(|| Error::Parse("empty sequence".into()))?;
    let per_frame = seq.frames.iter().zip(&out.reconstructions).map(|(a, b)| psnr(a, b));
    let per_frame: Vec<f64> = per_frame.collect::<std::result::Result<_, _>>()?;
    Ok(RdPoint { bpp: bits_per_pixel(out.total_bits(), w, h, seq.len()), psnr: mean_psnr(per_frame) })
}

pub fn evaluate(seq: &Sequence, cfg: &EncoderConfig) -> Result<OperatingPoint> {
    let start = Instant::now();
    let output = encode_sequence(seq, cfg)?;
    let encode_time = start.elapsed();
    Ok(OperatingPoint { q_base: cfg.q_base(), point: rd_point(seq, &output)?, output, encode_time })
}

/// One encode per quantiser, run on separate threads. Results follow `q_list`.
pub fn rd_sweep(seq: &Sequence, base: &EncoderConfig, q_list: &[f64]) -> Result<Vec<OperatingPoint>> {
    thread::scope(|s| {
        let handles: Vec<_> =
            q_list.iter().map(|&q| s.spawn(move || evaluate(seq, &config_at(base, q)))).collect();
        handles.into_iter().map(|h| h.join().expect("encoder thread panicked")).collect()
    })
}

pub fn curve(points: &[OperatingPoint]) -> Result<RdCurve> {
    Ok(RdCurve::new(points.iter().map(|p| p.point).collect())?)
}
