#![allow(dead_code)]

use omra_core::Frame;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Periodic random texture: bilinear value noise on 32, 16, 8 and 4 px lattices.
pub fn texture(w: usize, h: usize, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planes = [0, 1, 2].map(|_| {
        let mut acc = vec![0.0f64; w * h];
        for (period, weight) in [(32usize, 0.4), (16, 0.3), (8, 0.2), (4, 0.1)] {
            let (gw, gh) = (w.div_ceil(period), h.div_ceil(period));
            let grid: Vec<f64> = (0..gw * gh).map(|_| rng.random::<f64>() * 255.0).collect();
            for y in 0..h {
                for x in 0..w {
                    let (fx, fy) = (x as f64 * gw as f64 / w as f64, y as f64 * gh as f64 / h as f64);
                    let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
                    let (ax, ay) = (fx - x0 as f64, fy - y0 as f64);
                    let g = |i: usize, j: usize| grid[(j % gh) * gw + i % gw];
                    let top = g(x0, y0) * (1.0 - ax) + g(x0 + 1, y0) * ax;
                    let bot = g(x0, y0 + 1) * (1.0 - ax) + g(x0 + 1, y0 + 1) * ax;
                    acc[y * w + x] += weight * (top * (1.0 - ay) + bot * ay);
                }
            }
        }
        acc.into_iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect::<Vec<u8>>()
    });
    Frame::from_planes(w, h, planes).unwrap()
}

/// Uniform random samples.
pub fn noise_frame(w: usize, h: usize, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planes = [0, 1, 2].map(|_| (0..w * h).map(|_| rng.random::<u8>()).collect::<Vec<u8>>());
    Frame::from_planes(w, h, planes).unwrap()
}

/// `out(p) = f(p + (dx, dy))` with wrap-around, over the true region.
pub fn shifted(f: &Frame, dx: i64, dy: i64) -> Frame {
    let (w, h) = (f.width() as i64, f.height() as i64);
    let planes = [0, 1, 2].map(|c| {
        let mut out = Vec::with_capacity((w * h) as usize);
        for y in 0..h {
            for x in 0..w {
                out.push(f.sample(c, (x + dx).rem_euclid(w) as usize, (y + dy).rem_euclid(h) as usize));
            }
        }
        out
    });
    Frame::from_planes(w as usize, h as usize, planes).unwrap()
}

/// Frames `t = 0..n` of a pan: frame `t` is `base` read at `p - t * v`.
pub fn pan(base: &Frame, n: usize, vx: i64, vy: i64) -> Vec<Frame> {
    (0..n as i64).map(|t| shifted(base, -t * vx, -t * vy)).collect()
}
