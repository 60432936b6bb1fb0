//! Motion estimation, flow prediction, backward warping and bidirectional
//! predictor synthesis.
//!
//! The estimator is a coarse-to-fine block matcher whose total reach is
//! bounded: with `L` pyramid levels and a per-level search radius `r`, no
//! vector can exceed `CAP = r * (2^L - 1)` pixels. Large displacements are
//! therefore only recoverable by running it on downsampled frames.

use alloc::vec;
use alloc::vec::Vec;

use crate::frame::Frame;
use crate::resample::{div_round, downsample2_plane};
use crate::{Error, Result};

/// Dense displacement field in quarter-pel integer units (`q` means `q/4` px).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowField {
    pub width: usize,
    pub height: usize,
    pub dx: Vec<i32>,
    pub dy: Vec<i32>,
}

impl FlowField {
    pub fn zeros(width: usize, height: usize) -> FlowField {
        FlowField::constant(width, height, 0, 0)
    }

    pub fn constant(width: usize, height: usize, qx: i32, qy: i32) -> FlowField {
        FlowField { width, height, dx: vec![qx; width * height], dy: vec![qy; width * height] }
    }

    pub fn get(&self, x: usize, y: usize) -> (i32, i32) {
        let i = y * self.width + x;
        (self.dx[i], self.dy[i])
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn negated(&self) -> FlowField {
        FlowField {
            width: self.width,
            height: self.height,
            dx: self.dx.iter().map(|v| -v).collect(),
            dy: self.dy.iter().map(|v| -v).collect(),
        }
    }

    /// Largest absolute component, in quarter-pel units.
    pub fn max_abs(&self) -> i32 {
        self.dx.iter().chain(&self.dy).map(|v| v.abs()).max().unwrap_or(0)
    }

    /// Component-wise halving, rounding toward zero.
    pub fn halved(&self) -> FlowField {
        FlowField {
            width: self.width,
            height: self.height,
            dx: self.dx.iter().map(|v| v / 2).collect(),
            dy: self.dy.iter().map(|v| v / 2).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EstimatorConfig {
    pub pyramid_levels: u32,
    /// Block edge in pixels, identical at every pyramid level.
    pub block: usize,
    /// Full-search radius in pixels at every level.
    pub search_radius: i32,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig { pyramid_levels: 3, block: 8, search_radius: 4 }
    }
}

impl EstimatorConfig {
    /// Largest displacement the estimator can return, in pixels.
    pub fn cap_pixels(&self) -> i32 {
        self.search_radius * ((1 << self.pyramid_levels) - 1)
    }

    pub fn cap_quarter_pel(&self) -> i32 {
        4 * self.cap_pixels()
    }

    /// Both frame dimensions must be a multiple of this.
    pub fn alignment(&self) -> usize {
        self.block << (self.pyramid_levels - 1)
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        width > 0 && height > 0 && width.is_multiple_of(self.alignment()) && height.is_multiple_of(self.alignment())
    }

    pub fn validate(&self) -> Result<()> {
        if self.pyramid_levels == 0 || self.pyramid_levels > 8 {
            return Err(Error::InvalidConfig("pyramid_levels must be in 1..=8"));
        }
        if self.block < 2 || !self.block.is_multiple_of(2) || self.block > 64 {
            return Err(Error::InvalidConfig("block must be even and in 2..=64"));
        }
        if self.search_radius < 1 || self.search_radius > 64 {
            return Err(Error::InvalidConfig("search_radius must be in 1..=64"));
        }
        Ok(())
    }
}

/// One vector per `block x block` tile, quarter-pel units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockLattice {
    pub cols: usize,
    pub rows: usize,
    pub block: usize,
    pub dx: Vec<i32>,
    pub dy: Vec<i32>,
}

impl BlockLattice {
    /// Dense field by bilinear interpolation between block vectors. Each
    /// vector is anchored on pixel `(b * block + block / 2)`, so sampling the
    /// expanded field there gives the lattice back unchanged.
    pub fn expand(&self) -> FlowField {
        let (w, h, b) = (self.cols * self.block, self.rows * self.block, self.block);
        let bi = b as i64;
        let taps = |p: usize, n: usize| {
            let num = p as i64 - bi / 2;
            let i0 = num.div_euclid(bi);
            let frac = num.rem_euclid(bi);
            let last = n as i64 - 1;
            (i0.clamp(0, last) as usize, (i0 + 1).clamp(0, last) as usize, bi - frac, frac)
        };
        let xt: Vec<_> = (0..w).map(|x| taps(x, self.cols)).collect();
        let norm = bi * bi;
        let mut dx = Vec::with_capacity(w * h);
        let mut dy = Vec::with_capacity(w * h);
        for y in 0..h {
            let (r0, r1, wy0, wy1) = taps(y, self.rows);
            for &(c0, c1, wx0, wx1) in &xt {
                let interp = |plane: &[i32]| {
                    let top = wx0 * plane[r0 * self.cols + c0] as i64
                        + wx1 * plane[r0 * self.cols + c1] as i64;
                    let bot = wx0 * plane[r1 * self.cols + c0] as i64
                        + wx1 * plane[r1 * self.cols + c1] as i64;
                    div_round(wy0 * top + wy1 * bot, norm) as i32
                };
                dx.push(interp(&self.dx));
                dy.push(interp(&self.dy));
            }
        }
        FlowField { width: w, height: h, dx, dy }
    }

    /// Block-center samples of a dense field.
    pub fn sample(flow: &FlowField, block: usize) -> Result<BlockLattice> {
        if !flow.width.is_multiple_of(block) || !flow.height.is_multiple_of(block) || flow.width == 0 {
            return Err(Error::DimensionMismatch {
                expected: (flow.width / block * block, flow.height / block * block),
                found: flow.dims(),
            });
        }
        let (cols, rows) = (flow.width / block, flow.height / block);
        let mut dx = Vec::with_capacity(cols * rows);
        let mut dy = Vec::with_capacity(cols * rows);
        for by in 0..rows {
            for bx in 0..cols {
                let (vx, vy) = flow.get(bx * block + block / 2, by * block + block / 2);
                dx.push(vx);
                dy.push(vy);
            }
        }
        Ok(BlockLattice { cols, rows, block, dx, dy })
    }
}

fn luma(frame: &Frame) -> Vec<u8> {
    let [r, g, b] = &frame.planes;
    r.iter()
        .zip(g)
        .zip(b)
        .map(|((&r, &g), &b)| ((r as u32 + 2 * g as u32 + b as u32 + 2) >> 2) as u8)
        .collect()
}

struct Plane<'a> {
    data: &'a [u8],
    w: usize,
    h: usize,
}

impl Plane<'_> {
    /// SAD between the cur block at `(x0, y0)` and the ref block displaced by
    /// `(vx, vy)` integer pixels. Reference reads clamp to the edge.
    fn sad(cur: &Plane, refp: &Plane, x0: usize, y0: usize, b: usize, vx: i32, vy: i32) -> u32 {
        let rx = x0 as i64 + vx as i64;
        let ry = y0 as i64 + vy as i64;
        let inside = rx >= 0
            && ry >= 0
            && rx + b as i64 <= refp.w as i64
            && ry + b as i64 <= refp.h as i64;
        let mut acc = 0u32;
        if inside {
            let (rx, ry) = (rx as usize, ry as usize);
            for j in 0..b {
                let c = &cur.data[(y0 + j) * cur.w + x0..][..b];
                let r = &refp.data[(ry + j) * refp.w + rx..][..b];
                acc += c.iter().zip(r).map(|(&p, &q)| (p as i32 - q as i32).unsigned_abs()).sum::<u32>();
            }
        } else {
            let (mw, mh) = (refp.w as i64 - 1, refp.h as i64 - 1);
            for j in 0..b {
                let yy = (ry + j as i64).clamp(0, mh) as usize;
                let c = &cur.data[(y0 + j) * cur.w + x0..][..b];
                for (i, &p) in c.iter().enumerate() {
                    let xx = (rx + i as i64).clamp(0, mw) as usize;
                    acc += (p as i32 - refp.data[yy * refp.w + xx] as i32).unsigned_abs();
                }
            }
        }
        acc
    }
}

/// SAD of the cur block at `(x0, y0)` against the reference read at a
/// quarter-pel displacement, interpolated exactly as [`warp`] does.
fn qpel_sad(cur: &Plane, refp: &Plane, x0: usize, y0: usize, b: usize, qx: i32, qy: i32) -> u32 {
    let (mw, mh) = (refp.w as i64 - 1, refp.h as i64 - 1);
    let mut acc = 0u32;
    for j in 0..b {
        let py = 4 * (y0 + j) as i64 + qy as i64;
        let (y0r, fy) = (py.div_euclid(4), py.rem_euclid(4));
        let (ya, yb) = (y0r.clamp(0, mh) as usize, (y0r + 1).clamp(0, mh) as usize);
        for i in 0..b {
            let px = 4 * (x0 + i) as i64 + qx as i64;
            let (x0r, fx) = (px.div_euclid(4), px.rem_euclid(4));
            let (xa, xb) = (x0r.clamp(0, mw) as usize, (x0r + 1).clamp(0, mw) as usize);
            let at = |x: usize, y: usize| refp.data[y * refp.w + x] as i64;
            let top = (4 - fx) * at(xa, ya) + fx * at(xb, ya);
            let bot = (4 - fx) * at(xa, yb) + fx * at(xb, yb);
            let r = ((4 - fy) * top + fy * bot + 8) >> 4;
            acc += (cur.data[(y0 + j) * cur.w + x0 + i] as i64 - r).unsigned_abs() as u32;
        }
    }
    acc
}

/// Total order used by the search: SAD, then squared magnitude, then dy, then dx.
fn better(a: (u32, i32, i32), b: (u32, i32, i32)) -> bool {
    let key = |(sad, vx, vy): (u32, i32, i32)| (sad, vx * vx + vy * vy, vy, vx);
    key(a) < key(b)
}

fn search(
    cur: &Plane,
    refp: &Plane,
    b: usize,
    init: &[(i32, i32)],
    cols: usize,
    rows: usize,
    radius: i32,
) -> Vec<(i32, i32)> {
    let mut out = Vec::with_capacity(cols * rows);
    for by in 0..rows {
        for bx in 0..cols {
            let (cx, cy) = init[by * cols + bx];
            let mut best: Option<(u32, i32, i32)> = None;
            for oy in -radius..=radius {
                for ox in -radius..=radius {
                    let (vx, vy) = (cx + ox, cy + oy);
                    let sad = Plane::sad(cur, refp, bx * b, by * b, b, vx, vy);
                    let cand = (sad, vx, vy);
                    if best.is_none_or(|cur_best| better(cand, cur_best)) {
                        best = Some(cand);
                    }
                }
            }
            let (_, vx, vy) = best.expect("search window is non-empty");
            out.push((vx, vy));
        }
    }
    out
}

/// Quarter-pel offset from a parabola through SADs at -1, 0, +1, limited to
/// +-3 quarter pels. An exact match is not refined.
fn parabolic_offset(sm: u32, s0: u32, sp: u32) -> i32 {
    let den = sm as i64 - 2 * s0 as i64 + sp as i64;
    if den <= 0 || s0 == 0 {
        return 0;
    }
    // 4 * (sm - sp) / (2 * den)
    div_round(2 * (sm as i64 - sp as i64), den).clamp(-3, 3) as i32
}

/// Per-block backward vectors mapping `cur` into `reference`.
pub fn estimate_lattice(cur: &Frame, reference: &Frame, cfg: &EstimatorConfig) -> Result<BlockLattice> {
    cfg.validate()?;
    let (w, h) = cur.stored_dims();
    if reference.stored_dims() != (w, h) {
        return Err(Error::DimensionMismatch { expected: (w, h), found: reference.stored_dims() });
    }
    if !cfg.fits(w, h) {
        return Err(Error::DimensionMismatch {
            expected: (w.div_ceil(cfg.alignment()) * cfg.alignment(), h.div_ceil(cfg.alignment()) * cfg.alignment()),
            found: (w, h),
        });
    }
    let levels = cfg.pyramid_levels as usize;
    let mut cur_pyr = vec![(luma(cur), w, h)];
    let mut ref_pyr = vec![(luma(reference), w, h)];
    for _ in 1..levels {
        let (c, lw, lh) = cur_pyr.last().expect("pyramid is non-empty");
        let (r, _, _) = ref_pyr.last().expect("pyramid is non-empty");
        let (lw, lh) = (*lw, *lh);
        let (nc, nr) = (downsample2_plane(c, lw, lh), downsample2_plane(r, lw, lh));
        cur_pyr.push((nc, lw / 2, lh / 2));
        ref_pyr.push((nr, lw / 2, lh / 2));
    }

    let b = cfg.block;
    let mut vectors: Vec<(i32, i32)> = Vec::new();
    let mut prev_cols = 0;
    for level in (0..levels).rev() {
        let (lw, lh) = (cur_pyr[level].1, cur_pyr[level].2);
        let (cols, rows) = (lw / b, lh / b);
        let init: Vec<(i32, i32)> = if level == levels - 1 {
            vec![(0, 0); cols * rows]
        } else {
            (0..rows)
                .flat_map(|by| (0..cols).map(move |bx| (bx, by)))
                .map(|(bx, by)| {
                    let (px, py) = vectors[(by / 2) * prev_cols + bx / 2];
                    (2 * px, 2 * py)
                })
                .collect()
        };
        let cur_p = Plane { data: &cur_pyr[level].0, w: lw, h: lh };
        let ref_p = Plane { data: &ref_pyr[level].0, w: lw, h: lh };
        vectors = search(&cur_p, &ref_p, b, &init, cols, rows, cfg.search_radius);
        prev_cols = cols;
    }

    let cur_p = Plane { data: &cur_pyr[0].0, w, h };
    let ref_p = Plane { data: &ref_pyr[0].0, w, h };
    let (cols, rows) = (w / b, h / b);
    let cap = cfg.cap_quarter_pel();
    let mut dx = Vec::with_capacity(cols * rows);
    let mut dy = Vec::with_capacity(cols * rows);
    for by in 0..rows {
        for bx in 0..cols {
            let (vx, vy) = vectors[by * cols + bx];
            let sad = |ox: i32, oy: i32| Plane::sad(&cur_p, &ref_p, bx * b, by * b, b, vx + ox, vy + oy);
            let s0 = sad(0, 0);
            let fx = parabolic_offset(sad(-1, 0), s0, sad(1, 0));
            let fy = parabolic_offset(sad(0, -1), s0, sad(0, 1));
            dx.push((4 * vx + fx).clamp(-cap, cap));
            dy.push((4 * vy + fy).clamp(-cap, cap));
        }
    }
    Ok(BlockLattice { cols, rows, block: b, dx, dy })
}

/// Dense backward flow mapping `cur` pixels into `reference`.
pub fn estimate_flow(cur: &Frame, reference: &Frame, cfg: &EstimatorConfig) -> Result<FlowField> {
    Ok(estimate_lattice(cur, reference, cfg)?.expand())
}

/// Encoder-side motion decision against a predictor field.
///
/// Per `block x block` lattice cell in raster order, the estimated vector `m`
/// is kept only if `sad + lambda_sad * bits` is lower than at the predictor
/// vector. `bits` is the signed Exp-Golomb length of each nonzero component
/// of the residual minus its left neighbour's decided residual, plus one run
/// symbol, mirroring the motion payload.
pub fn rate_constrained_flow(
    cur: &Frame,
    reference: &Frame,
    m: &FlowField,
    mp: &FlowField,
    block: usize,
    lambda_sad: f64,
) -> Result<FlowField> {
    let (w, h) = cur.stored_dims();
    for f in [m, mp] {
        if f.dims() != (w, h) {
            return Err(Error::DimensionMismatch { expected: (w, h), found: f.dims() });
        }
    }
    if reference.stored_dims() != (w, h) {
        return Err(Error::DimensionMismatch { expected: (w, h), found: reference.stored_dims() });
    }
    let lm = BlockLattice::sample(m, block)?;
    let lp = BlockLattice::sample(mp, block)?;
    let (cl, rl) = (luma(cur), luma(reference));
    let cur_p = Plane { data: &cl, w, h };
    let ref_p = Plane { data: &rl, w, h };
    let bits = |d: i32| if d == 0 { 0 } else { crate::entropy::se_len(d) + 1 };
    let mut out = BlockLattice { dx: Vec::with_capacity(lm.dx.len()), dy: Vec::with_capacity(lm.dy.len()), ..lm };
    for by in 0..lm.rows {
        let mut left = (0i32, 0i32);
        for bx in 0..lm.cols {
            let i = by * lm.cols + bx;
            let (vx, vy, px, py) = (lm.dx[i], lm.dy[i], lp.dx[i], lp.dy[i]);
            let keep = (vx, vy) == (px, py) || {
                let rate_m = bits(vx - px - left.0) + bits(vy - py - left.1);
                let rate_p = bits(-left.0) + bits(-left.1);
                let sad_m = qpel_sad(&cur_p, &ref_p, bx * block, by * block, block, vx, vy) as f64;
                let sad_p = qpel_sad(&cur_p, &ref_p, bx * block, by * block, block, px, py) as f64;
                sad_m + lambda_sad * f64::from(rate_m) < sad_p + lambda_sad * f64::from(rate_p)
            };
            let (ox, oy) = if keep { (vx, vy) } else { (px, py) };
            left = (ox - px, oy - py);
            out.dx.push(ox);
            out.dy.push(oy);
        }
    }
    Ok(out.expand())
}

/// Flow predictors for a B frame midway between two references, assuming
/// linear motion: with `G` the flow from the future reference to the past
/// one, the predictors are `G/2` (toward past) and `-G/2` (toward future).
pub fn predict_flows(
    ref_past: &Frame,
    ref_future: &Frame,
    cfg: &EstimatorConfig,
) -> Result<(FlowField, FlowField)> {
    let g = estimate_flow(ref_future, ref_past, cfg)?;
    let past = g.halved();
    let future = past.negated();
    Ok((past, future))
}

/// Backward warp: each output pixel `p` reads `reference` at `p + flow(p)`
/// with bilinear interpolation. Positions outside the frame are clamped and
/// flagged `false` in the mask.
pub fn warp(reference: &Frame, flow: &FlowField) -> Result<(Frame, Vec<bool>)> {
    let (w, h) = reference.stored_dims();
    if flow.dims() != (w, h) {
        return Err(Error::DimensionMismatch { expected: (w, h), found: flow.dims() });
    }
    let (max_x, max_y) = (4 * (w as i64 - 1), 4 * (h as i64 - 1));
    let mut out = reference.clone();
    let mut mask = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let qx = 4 * x as i64 + flow.dx[i] as i64;
            let qy = 4 * y as i64 + flow.dy[i] as i64;
            mask.push((0..=max_x).contains(&qx) && (0..=max_y).contains(&qy));
            let (x0, fx) = (qx.div_euclid(4), qx.rem_euclid(4));
            let (y0, fy) = (qy.div_euclid(4), qy.rem_euclid(4));
            let cx = |v: i64| v.clamp(0, w as i64 - 1) as usize;
            let cy = |v: i64| v.clamp(0, h as i64 - 1) as usize;
            let (xa, xb, ya, yb) = (cx(x0), cx(x0 + 1), cy(y0), cy(y0 + 1));
            for c in 0..3 {
                let p = &reference.planes[c];
                let top = (4 - fx) * p[ya * w + xa] as i64 + fx * p[ya * w + xb] as i64;
                let bot = (4 - fx) * p[yb * w + xa] as i64 + fx * p[yb * w + xb] as i64;
                out.planes[c][i] = (((4 - fy) * top + fy * bot + 8) >> 4) as u8;
            }
        }
    }
    Ok((out, mask))
}

/// Bidirectional temporal predictor from two references and their flows.
///
/// Where both warps land inside their reference the two are averaged; where
/// only one does, that one is used.
pub fn synthesize_predictor(
    ref_past: &Frame,
    ref_future: &Frame,
    flow_past: &FlowField,
    flow_future: &FlowField,
) -> Result<Frame> {
    if ref_past.stored_dims() != ref_future.stored_dims() {
        return Err(Error::DimensionMismatch {
            expected: ref_past.stored_dims(),
            found: ref_future.stored_dims(),
        });
    }
    let (wp, mp) = warp(ref_past, flow_past)?;
    let (wf, mf) = warp(ref_future, flow_future)?;
    let mut out = wp.clone();
    for c in 0..3 {
        for (i, o) in out.planes[c].iter_mut().enumerate() {
            let (a, b) = (wp.planes[c][i] as u16, wf.planes[c][i] as u16);
            *o = match (mp[i], mf[i]) {
                (true, false) => a as u8,
                (false, true) => b as u8,
                _ => ((a + b + 1) >> 1) as u8,
            };
        }
    }
    Ok(out)
}
