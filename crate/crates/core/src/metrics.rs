//! PSNR, bits per pixel and Bjøntegaard delta rate.

use alloc::vec::Vec;

use crate::frame::{mse, Frame};
use crate::{Error, Result};

/// PSNR for 8-bit samples. Identical frames give `f64::INFINITY`.
pub fn psnr(a: &Frame, b: &Frame) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b)?))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * libm::log10(255.0 * 255.0 / mse)
    }
}

/// Value substituted for lossless frames when averaging PSNR over a sequence.
pub const LOSSLESS_PSNR_DB: f64 = 100.0;

/// Mean of per-frame PSNRs, lossless frames counted as [`LOSSLESS_PSNR_DB`].
pub fn mean_psnr(per_frame: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for p in per_frame {
        sum += p.min(LOSSLESS_PSNR_DB);
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// `total_bits / (width * height * frame_count)` over the true (uncropped) size.
pub fn bits_per_pixel(total_bits: u64, width: usize, height: usize, frame_count: usize) -> f64 {
    total_bits as f64 / (width * height * frame_count) as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RdPoint {
    pub bpp: f64,
    pub psnr: f64,
}

/// Operating points sorted by rate. Rate strictly increases, quality never drops.
#[derive(Clone, Debug, PartialEq)]
pub struct RdCurve {
    points: Vec<RdPoint>,
}

impl RdCurve {
    /// Sorts by bpp and validates monotonicity.
    pub fn new(mut points: Vec<RdPoint>) -> Result<RdCurve> {
        if points.len() < 4 {
            return Err(Error::WrongPointCount(points.len()));
        }
        if points.iter().any(|p| !(p.bpp > 0.0) || !p.psnr.is_finite()) {
            return Err(Error::NonMonotoneCurve);
        }
        points.sort_by(|a, b| a.bpp.total_cmp(&b.bpp));
        for pair in points.windows(2) {
            if !(pair[1].bpp > pair[0].bpp) || pair[1].psnr < pair[0].psnr {
                return Err(Error::NonMonotoneCurve);
            }
        }
        Ok(RdCurve { points })
    }

    pub fn points(&self) -> &[RdPoint] {
        &self.points
    }

    fn psnr_range(&self) -> (f64, f64) {
        (self.points[0].psnr, self.points[self.points.len() - 1].psnr)
    }
}

/// Cubic `log10(bpp)` as a function of PSNR through four points, in the
/// normalised variable `t = (psnr - center) / scale`.
#[derive(Clone, Copy, Debug)]
pub struct CubicFit {
    pub coef: [f64; 4],
    pub center: f64,
    pub scale: f64,
}

impl CubicFit {
    pub fn through(points: &[RdPoint]) -> Result<CubicFit> {
        if points.len() != 4 {
            return Err(Error::WrongPointCount(points.len()));
        }
        let center = points.iter().map(|p| p.psnr).sum::<f64>() / 4.0;
        let scale = points.iter().map(|p| libm::fabs(p.psnr - center)).fold(0.0, f64::max);
        if scale == 0.0 {
            return Err(Error::NonMonotoneCurve);
        }
        // Vandermonde system, Gaussian elimination with partial pivoting.
        let mut a = [[0.0f64; 5]; 4];
        for (row, p) in a.iter_mut().zip(points) {
            let t = (p.psnr - center) / scale;
            *row = [1.0, t, t * t, t * t * t, libm::log10(p.bpp)];
        }
        for col in 0..4 {
            let pivot = (col..4)
                .max_by(|&i, &j| libm::fabs(a[i][col]).total_cmp(&libm::fabs(a[j][col])))
                .expect("non-empty range");
            if libm::fabs(a[pivot][col]) < 1e-12 {
                // Repeated PSNR values.
                return Err(Error::NonMonotoneCurve);
            }
            a.swap(col, pivot);
            for r in 0..4 {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    for c in col..5 {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
        let coef = [a[0][4] / a[0][0], a[1][4] / a[1][1], a[2][4] / a[2][2], a[3][4] / a[3][3]];
        Ok(CubicFit { coef, center, scale })
    }

    pub fn eval(&self, psnr: f64) -> f64 {
        let t = (psnr - self.center) / self.scale;
        let [c0, c1, c2, c3] = self.coef;
        c0 + t * (c1 + t * (c2 + t * c3))
    }

    /// Exact integral over `[lo, hi]` in PSNR.
    pub fn integrate(&self, lo: f64, hi: f64) -> f64 {
        let anti = |psnr: f64| {
            let t = (psnr - self.center) / self.scale;
            let [c0, c1, c2, c3] = self.coef;
            t * (c0 + t * (c1 / 2.0 + t * (c2 / 3.0 + t * c3 / 4.0)))
        };
        self.scale * (anti(hi) - anti(lo))
    }
}

/// Average rate difference of `test` against `anchor` at equal PSNR, in
/// percent. Negative means `test` needs fewer bits.
pub fn bd_rate(anchor: &RdCurve, test: &RdCurve) -> Result<f64> {
    for c in [anchor, test] {
        if c.points.len() != 4 {
            return Err(Error::WrongPointCount(c.points.len()));
        }
    }
    let fa = CubicFit::through(&anchor.points)?;
    let ft = CubicFit::through(&test.points)?;
    let (alo, ahi) = anchor.psnr_range();
    let (tlo, thi) = test.psnr_range();
    let (lo, hi) = (alo.max(tlo), ahi.min(thi));
    if !(hi > lo) {
        return Err(Error::NoOverlap);
    }
    let avg = (ft.integrate(lo, hi) - fa.integrate(lo, hi)) / (hi - lo);
    Ok((libm::pow(10.0, avg) - 1.0) * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn curve(pts: &[(f64, f64)]) -> RdCurve {
        RdCurve::new(pts.iter().map(|&(bpp, psnr)| RdPoint { bpp, psnr }).collect()).unwrap()
    }

    #[test]
    fn psnr_cases() {
        let z = Frame::filled(64, 64, 0);
        let w = Frame::filled(64, 64, 255);
        assert_eq!(psnr(&z, &z).unwrap(), f64::INFINITY);
        assert!(psnr(&z, &w).unwrap().abs() < 1e-12);
        assert!((psnr_from_mse(1.0) - 48.1308).abs() < 1e-3);
    }

    #[test]
    fn identity_and_constant_offset() {
        let a = curve(&[(0.1, 30.0), (0.2, 33.0), (0.4, 36.5), (0.8, 39.0)]);
        assert_eq!(bd_rate(&a, &a).unwrap(), 0.0);
        let b = curve(&[(0.11, 30.0), (0.22, 33.0), (0.44, 36.5), (0.88, 39.0)]);
        assert!((bd_rate(&a, &b).unwrap() - 10.0).abs() < 0.01);
    }

    #[test]
    fn curve_validation() {
        let pts = |v: &[(f64, f64)]| v.iter().map(|&(bpp, psnr)| RdPoint { bpp, psnr }).collect::<Vec<_>>();
        assert!(RdCurve::new(pts(&[(0.1, 30.0), (0.2, 29.0), (0.3, 31.0), (0.4, 32.0)])).is_err());
        assert!(RdCurve::new(pts(&[(0.1, 30.0), (0.1, 31.0), (0.3, 31.0), (0.4, 32.0)])).is_err());
        assert!(RdCurve::new(pts(&[(0.1, 30.0), (0.2, 31.0), (0.3, 32.0)])).is_err());
        // Unsorted input is accepted and sorted.
        let c = RdCurve::new(pts(&[(0.4, 32.0), (0.1, 30.0), (0.3, 31.5), (0.2, 31.0)])).unwrap();
        assert_eq!(c.points()[0].bpp, 0.1);
    }

    #[test]
    fn disjoint_curves() {
        let a = curve(&[(0.1, 30.0), (0.2, 31.0), (0.3, 32.0), (0.4, 33.0)]);
        let b = curve(&[(0.1, 40.0), (0.2, 41.0), (0.3, 42.0), (0.4, 43.0)]);
        assert_eq!(bd_rate(&a, &b), Err(Error::NoOverlap));
    }

    #[test]
    fn repeated_psnr_cannot_be_fit() {
        let a = curve(&[(0.1, 30.0), (0.2, 30.0), (0.3, 32.0), (0.4, 33.0)]);
        let b = curve(&[(0.1, 30.0), (0.2, 31.0), (0.3, 32.0), (0.4, 33.0)]);
        assert_eq!(bd_rate(&a, &b), Err(Error::NonMonotoneCurve));
    }

    #[test]
    fn mean_psnr_caps_lossless() {
        assert_eq!(mean_psnr(vec![f64::INFINITY, 40.0]), 70.0);
    }
}
