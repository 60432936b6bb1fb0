//! Seeded synthetic sequences: a periodic texture panned with wrap-around.

use omra_core::{Frame, Sequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Value-noise octaves as (lattice period, weight); equal weights per octave.
const OCTAVES: [(usize, f64); 6] = [(64, 1.0), (32, 1.0), (16, 1.0), (8, 1.0), (4, 1.0), (2, 1.0)];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MotionKind {
    PanWrap,
    Static,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    /// Pixels per frame.
    pub velocity: (f64, f64),
    pub texture_seed: u64,
    pub noise_sigma: f64,
    pub motion: MotionKind,
}

impl SynthSpec {
    pub fn pan(width: usize, height: usize, frame_count: usize, velocity: (f64, f64)) -> SynthSpec {
        SynthSpec {
            width,
            height,
            frame_count,
            velocity,
            texture_seed: 1,
            noise_sigma: 0.0,
            motion: MotionKind::PanWrap,
        }
    }

    pub fn still(width: usize, height: usize, frame_count: usize, noise_sigma: f64) -> SynthSpec {
        SynthSpec {
            velocity: (0.0, 0.0),
            noise_sigma,
            motion: MotionKind::Static,
            ..SynthSpec::pan(width, height, frame_count, (0.0, 0.0))
        }
    }
}

/// Periodic RGB texture stored as `f64` so sub-pixel shifts stay exact.
struct Texture {
    width: usize,
    height: usize,
    planes: [Vec<f64>; 3],
}

fn lattice_value(grid: &[f64], gw: usize, gh: usize, x: f64, y: f64) -> f64 {
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let at = |i: f64, j: f64| {
        let i = (i as i64).rem_euclid(gw as i64) as usize;
        let j = (j as i64).rem_euclid(gh as i64) as usize;
        grid[j * gw + i]
    };
    let top = at(x0, y0) * (1.0 - fx) + at(x0 + 1.0, y0) * fx;
    let bottom = at(x0, y0 + 1.0) * (1.0 - fx) + at(x0 + 1.0, y0 + 1.0) * fx;
    top * (1.0 - fy) + bottom * fy
}

impl Texture {
    fn generate(width: usize, height: usize, seed: u64) -> Texture {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let planes = [0, 1, 2].map(|_| {
            let mut acc = vec![0.0; width * height];
            for &(period, weight) in &OCTAVES {
                // Lattice wraps with the frame, so the texture is periodic.
                let gw = width.div_ceil(period).max(1);
                let gh = height.div_ceil(period).max(1);
                let grid: Vec<f64> = (0..gw * gh).map(|_| rng.random::<f64>()).collect();
                for y in 0..height {
                    let gy = y as f64 * gh as f64 / height as f64;
                    for x in 0..width {
                        let gx = x as f64 * gw as f64 / width as f64;
                        acc[y * width + x] += weight * lattice_value(&grid, gw, gh, gx, gy);
                    }
                }
            }
            // Stretch to the full 8-bit range for strong block-matching contrast.
            let (lo, hi) = acc.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            let span = (hi - lo).max(1e-9);
            acc.iter().map(|&v| 16.0 + 223.0 * (v - lo) / span).collect()
        });
        Texture { width, height, planes }
    }

    /// Value at `(x, y)` with circular bilinear interpolation.
    fn sample(&self, c: usize, x: f64, y: f64) -> f64 {
        let (w, h) = (self.width as i64, self.height as i64);
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = (x - x0, y - y0);
        let p = &self.planes[c];
        let at = |i: i64, j: i64| p[(j.rem_euclid(h) * w + i.rem_euclid(w)) as usize];
        let (i, j) = (x0 as i64, y0 as i64);
        let top = at(i, j) * (1.0 - fx) + at(i + 1, j) * fx;
        let bottom = at(i, j + 1) * (1.0 - fx) + at(i + 1, j + 1) * fx;
        top * (1.0 - fy) + bottom * fy
    }
}

/// Deterministic sequence for `spec`. Frame `t` shows the texture moved by
/// `t * velocity`, so content at `p` in frame 0 sits at `p + t * velocity`.
pub fn synth(spec: &SynthSpec) -> Sequence {
    let tex = Texture::generate(spec.width, spec.height, spec.texture_seed);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(spec.texture_seed ^ 0x9e37_79b9_7f4a_7c15);
    let normal = (spec.noise_sigma > 0.0).then(|| Normal::new(0.0, spec.noise_sigma).expect("finite sigma"));
    let frames = (0..spec.frame_count)
        .map(|t| {
            let (ox, oy) = match spec.motion {
                MotionKind::PanWrap => (spec.velocity.0 * t as f64, spec.velocity.1 * t as f64),
                MotionKind::Static => (0.0, 0.0),
            };
            let planes = [0, 1, 2].map(|c| {
                let mut out = Vec::with_capacity(spec.width * spec.height);
                for y in 0..spec.height {
                    for x in 0..spec.width {
                        let mut v = tex.sample(c, x as f64 - ox, y as f64 - oy);
                        if let Some(n) = &normal {
                            v += n.sample(&mut noise_rng);
                        }
                        out.push(v.round().clamp(0.0, 255.0) as u8);
                    }
                }
                out
            });
            Frame::from_planes(spec.width, spec.height, planes).expect("planes sized from spec")
        })
        .collect();
    Sequence::new(frames, 30.0).expect("all frames share the spec size")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_without_noise_is_constant_in_time() {
        let s = synth(&SynthSpec::still(40, 24, 4, 0.0));
        assert!(s.frames.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn integer_pan_is_circular_shift() {
        let s = synth(&SynthSpec::pan(64, 32, 4, (3.0, 0.0)));
        let (f0, f3) = (&s.frames[0], &s.frames[3]);
        for c in 0..3 {
            for y in 0..32 {
                for x in 0..64 {
                    assert_eq!(f3.sample(c, (x + 9) % 64, y), f0.sample(c, x, y));
                }
            }
        }
    }

    #[test]
    fn deterministic() {
        let mut spec = SynthSpec::pan(48, 48, 3, (1.5, -0.5));
        spec.noise_sigma = 2.0;
        assert_eq!(synth(&spec), synth(&spec));
        spec.texture_seed = 2;
        assert_ne!(synth(&spec).frames[0], synth(&SynthSpec { texture_seed: 1, ..spec }).frames[0]);
    }

    #[test]
    fn full_range_contrast() {
        let s = synth(&SynthSpec::still(64, 64, 1, 0.0));
        let p = s.frames[0].plane(1);
        assert!(p.iter().min().unwrap() <= &20 && p.iter().max().unwrap() >= &235);
    }
}
