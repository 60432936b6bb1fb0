//! Sequence encoder and decoder with per-frame motion resolution search.
//!
//! Every B frame is encoded once per candidate scale; the candidate with the
//! lowest `lambda * mse + bits` is written. The reconstruction of the chosen
//! candidate becomes the reference for later frames, and the decoder
//! reproduces it bit for bit from the stream and its own decoded references.

use alloc::vec;
use alloc::vec::Vec;

use crate::container::{self, record_overhead, BitstreamHeader, FrameRecord};
pub use crate::container::Variant;
use crate::frame::{mse, Frame, Sequence};
use crate::gop::{build_plan, FrameKind, GopPlan, PlanEntry};
use crate::metrics::psnr_from_mse;
use crate::motion::{
    estimate_flow, predict_flows, rate_constrained_flow, synthesize_predictor, EstimatorConfig, FlowField,
};
use crate::motion_codec::{decode_flows, encode_flows, DEFAULT_GRID};
use crate::resample::{downsample_frame, upsample_flow, upsample_frame, ScaleFactor};
use crate::texture::{decode_intra, decode_residual, encode_intra, encode_residual, QuantParams};
use crate::{Error, Result};

/// `lambda = LAMBDA_PER_Q2 * q_base^2`.
pub const LAMBDA_PER_Q2: f64 = 0.85;

/// Quality ladder used for four-point RD curves.
pub const Q_BASE_LADDER: [f64; 4] = [8.0, 12.0, 18.0, 27.0];

/// Decoded sequences carry no timing; this is what they report.
pub const DEFAULT_FRAME_RATE: f64 = 30.0;

#[derive(Clone, Debug, PartialEq)]
pub struct EncoderConfig {
    q_base_tenths: u16,
    lambda_hundredths: u32,
    pub intra_period: u32,
    pub variant: Variant,
    pub estimator: EstimatorConfig,
    /// Candidate scales for the searching variants. Ignored by `FixedS`.
    pub scale_set: Vec<ScaleFactor>,
}

impl EncoderConfig {
    /// Intra period 32, default estimator, all four scales and
    /// `lambda = 0.85 q_base^2`. Values are stored at header precision.
    pub fn new(q_base: f64, variant: Variant) -> EncoderConfig {
        let q_base_tenths = libm::round(q_base * 10.0).clamp(1.0, u16::MAX as f64) as u16;
        let q = q_base_tenths as f64 / 10.0;
        EncoderConfig {
            q_base_tenths,
            lambda_hundredths: lambda_code(LAMBDA_PER_Q2 * q * q),
            intra_period: 32,
            variant,
            estimator: EstimatorConfig::default(),
            scale_set: ScaleFactor::ALL.to_vec(),
        }
    }

    pub fn with_intra_period(mut self, p: u32) -> Self {
        self.intra_period = p;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda_hundredths = lambda_code(lambda);
        self
    }

    pub fn with_scales(mut self, scales: Vec<ScaleFactor>) -> Self {
        self.scale_set = scales;
        self
    }

    pub fn with_estimator(mut self, estimator: EstimatorConfig) -> Self {
        self.estimator = estimator;
        self
    }

    pub fn q_base(&self) -> f64 {
        self.q_base_tenths as f64 / 10.0
    }

    pub fn lambda(&self) -> f64 {
        self.lambda_hundredths as f64 / 100.0
    }

    /// Scales actually searched.
    pub fn candidate_scales(&self) -> Vec<ScaleFactor> {
        match self.variant {
            Variant::FixedS(s) => vec![s],
            _ => {
                let mut s = self.scale_set.clone();
                s.sort();
                s.dedup();
                s
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.estimator.validate()?;
        if self.lambda_hundredths == 0 {
            return Err(Error::InvalidConfig("lambda must be positive"));
        }
        if !crate::gop::INTRA_PERIODS.contains(&self.intra_period) {
            return Err(Error::InvalidIntraPeriod(self.intra_period));
        }
        let scales = self.candidate_scales();
        if scales.is_empty() {
            return Err(Error::InvalidConfig("empty scale set"));
        }
        if self.variant == Variant::Omra && !scales.contains(&ScaleFactor::ONE) {
            return Err(Error::InvalidConfig("the OMRA scale set must contain 1"));
        }
        Ok(())
    }

    fn from_header(h: &BitstreamHeader, estimator: EstimatorConfig) -> EncoderConfig {
        EncoderConfig {
            q_base_tenths: h.q_base_tenths,
            lambda_hundredths: h.lambda_hundredths,
            intra_period: h.intra_period as u32,
            variant: h.variant,
            estimator,
            scale_set: ScaleFactor::ALL.to_vec(),
        }
    }
}

fn lambda_code(lambda: f64) -> u32 {
    libm::round(lambda * 100.0).clamp(0.0, u32::MAX as f64) as u32
}

/// One evaluated scale for a B frame.
#[derive(Clone, Debug, PartialEq)]
pub struct RdCandidate {
    pub scale: ScaleFactor,
    pub reconstruction: Frame,
    pub motion: Vec<u8>,
    pub texture: Vec<u8>,
    pub motion_bits: u64,
    pub texture_bits: u64,
    /// Frame header byte plus both length prefixes.
    pub header_bits: u64,
    pub distortion: f64,
    pub cost: f64,
}

impl RdCandidate {
    pub fn total_bits(&self) -> u64 {
        self.motion_bits + self.texture_bits + self.header_bits
    }
}

/// Whether the estimator pyramid fits a frame downsampled by `s`.
pub fn scale_feasible(width: usize, height: usize, s: ScaleFactor, est: &EstimatorConfig) -> bool {
    let s = s.get();
    width.is_multiple_of(s) && height.is_multiple_of(s) && est.fits(width / s, height / s) && (width / s).is_multiple_of(DEFAULT_GRID)
        && (height / s).is_multiple_of(DEFAULT_GRID)
}

/// Largest decodable motion component for a variant at scale `s`, quarter-pel.
fn motion_limit(variant: Variant, s: ScaleFactor, est: &EstimatorConfig) -> i32 {
    match variant {
        Variant::VariantA => est.cap_quarter_pel() * s.get() as i32,
        _ => est.cap_quarter_pel(),
    }
}

fn with_geometry_of(mut frame: Frame, template: &Frame) -> Frame {
    frame.width = template.width;
    frame.height = template.height;
    frame.padded_width = template.padded_width;
    frame.padded_height = template.padded_height;
    frame
}

/// Decoder-side flow predictors and the resolution at which flows are coded.
struct MotionContext {
    mp_past: FlowField,
    mp_future: FlowField,
    /// Low-resolution references, present unless `s == 1`.
    low_refs: Option<(Frame, Frame)>,
}

fn motion_context(
    variant: Variant,
    s: ScaleFactor,
    past: &Frame,
    future: &Frame,
    est: &EstimatorConfig,
) -> Result<MotionContext> {
    let low_refs = (s.get() > 1).then(|| (downsample_frame(past, s), downsample_frame(future, s)));
    let (mp_past, mp_future) = match (variant, &low_refs) {
        (Variant::VariantA, _) | (_, None) => predict_flows(past, future, est)?,
        (_, Some((p, f))) => predict_flows(p, f, est)?,
    };
    Ok(MotionContext { mp_past, mp_future, low_refs })
}

/// Temporal predictor from decoded flows. Shared by encoder and decoder.
fn temporal_predictor(
    variant: Variant,
    s: ScaleFactor,
    past: &Frame,
    future: &Frame,
    ctx: &MotionContext,
    flow_past: &FlowField,
    flow_future: &FlowField,
) -> Result<Frame> {
    let full = past.stored_dims();
    match (variant, &ctx.low_refs) {
        (Variant::VariantA, _) | (_, None) => synthesize_predictor(past, future, flow_past, flow_future),
        (Variant::VariantB, Some((lp, lf))) => {
            let low = synthesize_predictor(lp, lf, flow_past, flow_future)?;
            Ok(with_geometry_of(upsample_frame(&low, s, full)?, past))
        }
        (_, Some(_)) => {
            let up_past = upsample_flow(flow_past, s, full)?;
            let up_future = upsample_flow(flow_future, s, full)?;
            synthesize_predictor(past, future, &up_past, &up_future)
        }
    }
}

/// SAD-per-bit multiplier for motion decisions on a `dims` field: the square
/// root of the squared-error value of one bit under `lambda * mse + bits`.
fn lambda_sad(lambda: f64, dims: (usize, usize)) -> f64 {
    libm::sqrt(3.0 * (dims.0 * dims.1) as f64 / lambda)
}

/// Codes `x` between two decoded references with motion at `1/s` resolution.
pub fn encode_bframe_at_scale(
    x: &Frame,
    past: &Frame,
    future: &Frame,
    s: ScaleFactor,
    qp: &QuantParams,
    cfg: &EncoderConfig,
) -> Result<RdCandidate> {
    let est = &cfg.estimator;
    let (w, h) = x.stored_dims();
    if !scale_feasible(w, h, s, est) {
        return Err(Error::ScaleInfeasible { scale: s.get() as u32, width: w / s.get(), height: h / s.get() });
    }
    let ctx = motion_context(cfg.variant, s, past, future, est)?;
    let (m_past, m_future) = match &ctx.low_refs {
        None => (estimate_flow(x, past, est)?, estimate_flow(x, future, est)?),
        Some((lp, lf)) => {
            let xs = downsample_frame(x, s);
            (estimate_flow(&xs, lp, est)?, estimate_flow(&xs, lf, est)?)
        }
    };
    let (m_past, m_future) = match (cfg.variant, &ctx.low_refs) {
        (Variant::VariantA, Some(_)) => (upsample_flow(&m_past, s, (w, h))?, upsample_flow(&m_future, s, (w, h))?),
        _ => (m_past, m_future),
    };
    // Motion decision runs at the resolution the flows are coded at.
    let low;
    let (xc, pc, fc) = match (cfg.variant, &ctx.low_refs) {
        (Variant::VariantA, _) | (_, None) => (x, past, future),
        (_, Some((lp, lf))) => {
            low = downsample_frame(x, s);
            (&low, lp, lf)
        }
    };
    let lsad = lambda_sad(cfg.lambda(), m_past.dims());
    let m_past = rate_constrained_flow(xc, pc, &m_past, &ctx.mp_past, DEFAULT_GRID, lsad)?;
    let m_future = rate_constrained_flow(xc, fc, &m_future, &ctx.mp_future, DEFAULT_GRID, lsad)?;
    let (payload, hat_past, hat_future) =
        encode_flows(&m_past, &m_future, &ctx.mp_past, &ctx.mp_future, DEFAULT_GRID)?;
    let predictor = temporal_predictor(cfg.variant, s, past, future, &ctx, &hat_past, &hat_future)?;
    let (tex, reconstruction) = encode_residual(x, &predictor, qp)?;

    let distortion = mse(x, &reconstruction)?;
    let motion_bits = 8 * payload.bytes.len() as u64;
    let texture_bits = 8 * tex.bytes.len() as u64;
    let header_bits = 8 * record_overhead(payload.bytes.len(), tex.bytes.len()) as u64;
    let cost = cfg.lambda() * distortion + (motion_bits + texture_bits + header_bits) as f64;
    Ok(RdCandidate {
        scale: s,
        reconstruction,
        motion: payload.bytes,
        texture: tex.bytes,
        motion_bits,
        texture_bits,
        header_bits,
        distortion,
        cost,
    })
}

/// Minimum-cost candidate; equal costs go to the smaller scale.
pub fn select_scale(candidates: Vec<RdCandidate>) -> Result<RdCandidate> {
    candidates
        .into_iter()
        .reduce(|best, c| {
            if c.cost < best.cost || (c.cost == best.cost && c.scale < best.scale) {
                c
            } else {
                best
            }
        })
        .ok_or(Error::EmptyCandidates)
}

fn decode_bframe(
    variant: Variant,
    s: ScaleFactor,
    motion: &[u8],
    texture: &[u8],
    past: &Frame,
    future: &Frame,
    qp: &QuantParams,
    est: &EstimatorConfig,
) -> Result<Frame> {
    let (w, h) = past.stored_dims();
    if !scale_feasible(w, h, s, est) {
        return Err(Error::Corrupt("signaled scale does not fit the frame"));
    }
    let ctx = motion_context(variant, s, past, future, est)?;
    let dims = ctx.mp_past.dims();
    let (fp, ff) = decode_flows(
        motion,
        &ctx.mp_past,
        &ctx.mp_future,
        dims,
        DEFAULT_GRID,
        motion_limit(variant, s, est),
    )?;
    let predictor = temporal_predictor(variant, s, past, future, &ctx, &fp, &ff)?;
    decode_residual(texture, &predictor, qp)
}

fn quant_params(cfg_q: f64, entry: &PlanEntry) -> QuantParams {
    QuantParams { q_base: cfg_q, temporal_level: entry.temporal_level, kind: entry.kind }
}

/// Per-frame summary, in coding order.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameReport {
    pub coding_order: usize,
    pub display_index: usize,
    pub temporal_level: u32,
    pub kind: FrameKind,
    pub scale: ScaleFactor,
    pub motion_bits: u64,
    pub texture_bits: u64,
    pub header_bits: u64,
    pub total_bits: u64,
    pub mse: f64,
    pub psnr: f64,
    /// RD cost of the written candidate (B frames only).
    pub cost: Option<f64>,
    /// Every evaluated `(scale, cost)` pair (B frames only).
    pub candidates: Vec<(ScaleFactor, f64)>,
}

#[derive(Clone, Debug)]
pub struct EncodeOutput {
    pub bitstream: Vec<u8>,
    pub reports: Vec<FrameReport>,
    /// Encoder-side reconstructions in display order, cropped to true size.
    pub reconstructions: Vec<Frame>,
    pub plan: GopPlan,
}

impl EncodeOutput {
    pub fn total_bits(&self) -> u64 {
        8 * self.bitstream.len() as u64
    }
}

pub fn encode_sequence(seq: &Sequence, cfg: &EncoderConfig) -> Result<EncodeOutput> {
    cfg.validate()?;
    let (width, height) = seq.dims().ok_or(Error::InvalidConfig("empty sequence"))?;
    let n = seq.len();
    if width > u16::MAX as usize || height > u16::MAX as usize || n > u16::MAX as usize {
        return Err(Error::InvalidConfig("sequence exceeds 16-bit header fields"));
    }
    let (pw, ph) = seq.frames[0].stored_dims();
    if !scale_feasible(pw, ph, ScaleFactor::ONE, &cfg.estimator) {
        return Err(Error::ScaleInfeasible { scale: 1, width: pw, height: ph });
    }
    let plan = build_plan(n, cfg.intra_period)?;
    let scales: Vec<ScaleFactor> =
        cfg.candidate_scales().into_iter().filter(|&s| scale_feasible(pw, ph, s, &cfg.estimator)).collect();
    if scales.is_empty() {
        let s = cfg.candidate_scales()[0];
        return Err(Error::ScaleInfeasible { scale: s.get() as u32, width: pw / s.get(), height: ph / s.get() });
    }

    let header = BitstreamHeader {
        variant: cfg.variant,
        width: width as u16,
        height: height as u16,
        frame_count: n as u16,
        intra_period: cfg.intra_period as u8,
        q_base_tenths: cfg.q_base_tenths,
        lambda_hundredths: cfg.lambda_hundredths,
    };
    let mut bitstream = Vec::new();
    header.write(&mut bitstream);

    let mut recon: Vec<Option<Frame>> = vec![None; n];
    let mut reports = Vec::with_capacity(n);
    for (coding_order, entry) in plan.entries.iter().enumerate() {
        let x = &seq.frames[entry.display_index];
        let (record_kind, scale, motion, texture, rec, cost, candidates) = if entry.kind.is_b() {
            let (p, f) = references(&recon, entry)?;
            let qp = quant_params(cfg.q_base(), entry);
            let mut cands = Vec::with_capacity(scales.len());
            for &s in &scales {
                cands.push(encode_bframe_at_scale(x, p, f, s, &qp, cfg)?);
            }
            let evaluated: Vec<_> = cands.iter().map(|c| (c.scale, c.cost)).collect();
            let best = select_scale(cands)?;
            (entry.kind, best.scale, best.motion, best.texture, best.reconstruction, Some(best.cost), evaluated)
        } else {
            let (tex, rec) = encode_intra(x, cfg.q_base())?;
            (FrameKind::Intra, ScaleFactor::ONE, Vec::new(), tex.bytes, rec, None, Vec::new())
        };
        let record = FrameRecord { kind: record_kind, scale, motion: &motion, texture: &texture };
        container::write_record(&mut bitstream, &record);
        let frame_mse = mse(x, &rec)?;
        let header_bits = 8 * record_overhead(motion.len(), texture.len()) as u64;
        reports.push(FrameReport {
            coding_order,
            display_index: entry.display_index,
            temporal_level: entry.temporal_level,
            kind: entry.kind,
            scale,
            motion_bits: 8 * motion.len() as u64,
            texture_bits: 8 * texture.len() as u64,
            header_bits,
            total_bits: record.total_bits(),
            mse: frame_mse,
            psnr: psnr_from_mse(frame_mse),
            cost,
            candidates,
        });
        recon[entry.display_index] = Some(rec);
    }
    let reconstructions = recon.into_iter().map(|f| f.expect("plan covers every frame").crop()).collect();
    Ok(EncodeOutput { bitstream, reports, reconstructions, plan })
}

fn references<'a>(recon: &'a [Option<Frame>], entry: &PlanEntry) -> Result<(&'a Frame, &'a Frame)> {
    let get = |i: Option<usize>| {
        i.and_then(|i| recon.get(i)?.as_ref()).ok_or(Error::Corrupt("reference not yet decoded"))
    };
    Ok((get(entry.ref_past)?, get(entry.ref_future)?))
}

/// Decodes with the default estimator configuration.
pub fn decode_sequence(bitstream: &[u8]) -> Result<Sequence> {
    decode_sequence_with(bitstream, &EstimatorConfig::default())
}

/// The stream does not carry estimator settings; a stream produced with a
/// non-default estimator must be decoded with the same one.
pub fn decode_sequence_with(bitstream: &[u8], est: &EstimatorConfig) -> Result<Sequence> {
    let (header, records) = container::parse(bitstream)?;
    let cfg = EncoderConfig::from_header(&header, *est);
    let n = header.frame_count as usize;
    let plan = build_plan(n, cfg.intra_period).map_err(|_| Error::Corrupt("frame count / intra period"))?;
    let template = Frame::filled(header.width as usize, header.height as usize, 128);
    let mut recon: Vec<Option<Frame>> = vec![None; n];
    for (entry, rec) in plan.entries.iter().zip(&records) {
        if rec.kind != entry.kind {
            return Err(Error::Corrupt("frame kind disagrees with the prediction structure"));
        }
        let frame = if entry.kind.is_b() {
            if let Variant::FixedS(s) = cfg.variant {
                if rec.scale != s {
                    return Err(Error::Corrupt("scale differs from the fixed scale"));
                }
            }
            let (p, f) = references(&recon, entry)?;
            let qp = quant_params(cfg.q_base(), entry);
            decode_bframe(cfg.variant, rec.scale, rec.motion, rec.texture, p, f, &qp, est)?
        } else {
            if rec.scale != ScaleFactor::ONE || !rec.motion.is_empty() {
                return Err(Error::Corrupt("intra frame with motion"));
            }
            decode_intra(rec.texture, &template, cfg.q_base())?
        };
        recon[entry.display_index] = Some(frame);
    }
    let frames = recon.into_iter().map(|f| f.expect("plan covers every frame").crop()).collect();
    Sequence::new(frames, DEFAULT_FRAME_RATE)
}
