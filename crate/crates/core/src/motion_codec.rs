//! Conditional coding of the two flow fields of a B frame.
//!
//! Both flows are reduced to one vector per `grid x grid` block. The vector
//! minus the decoder-side predictor is predicted once more from its left
//! neighbour. Planes are written in the order past.dx, past.dy, future.dx,
//! future.dy; each as `ue(nonzero count)` followed by `ue(zero run), se(value)`
//! per nonzero value in raster order.

use alloc::vec::Vec;

use crate::entropy::{BitReader, BitWriter};
use crate::motion::{BlockLattice, FlowField};
use crate::{Error, Result};

pub const DEFAULT_GRID: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MotionPayload {
    pub bytes: Vec<u8>,
    /// Codeword bits, excluding the zero padding of the last byte.
    pub bit_count: u64,
}

fn check_dims(fields: &[&FlowField], dims: (usize, usize), grid: usize) -> Result<()> {
    for f in fields {
        if f.dims() != dims {
            return Err(Error::DimensionMismatch { expected: dims, found: f.dims() });
        }
    }
    if grid == 0 || !dims.0.is_multiple_of(grid) || !dims.1.is_multiple_of(grid) || dims.0 == 0 || dims.1 == 0 {
        return Err(Error::DimensionMismatch {
            expected: (dims.0.div_ceil(grid.max(1)) * grid, dims.1.div_ceil(grid.max(1)) * grid),
            found: dims,
        });
    }
    Ok(())
}

fn write_plane(w: &mut BitWriter, diffs: &[i32]) {
    w.put_ue(diffs.iter().filter(|&&d| d != 0).count() as u32);
    let mut run = 0u32;
    for &d in diffs {
        if d == 0 {
            run += 1;
        } else {
            w.put_ue(run);
            w.put_se(d);
            run = 0;
        }
    }
}

fn read_plane(r: &mut BitReader<'_>, n: usize) -> Result<Vec<i32>> {
    let nonzero = r.get_ue()? as usize;
    if nonzero > n {
        return Err(Error::Corrupt("motion nonzero count exceeds block count"));
    }
    let mut out = alloc::vec![0i32; n];
    let mut pos = 0usize;
    for _ in 0..nonzero {
        pos += r.get_ue()? as usize;
        let d = r.get_se()?;
        if pos >= n || d == 0 {
            return Err(Error::Corrupt("motion run overruns the plane"));
        }
        out[pos] = d;
        pos += 1;
    }
    Ok(out)
}

fn lattice_planes(l: &BlockLattice) -> [&[i32]; 2] {
    [&l.dx, &l.dy]
}

pub fn encode_flows(
    m_past: &FlowField,
    m_future: &FlowField,
    mp_past: &FlowField,
    mp_future: &FlowField,
    grid: usize,
) -> Result<(MotionPayload, FlowField, FlowField)> {
    let dims = m_past.dims();
    check_dims(&[m_past, m_future, mp_past, mp_future], dims, grid)?;
    let lp = BlockLattice::sample(m_past, grid)?;
    let lf = BlockLattice::sample(m_future, grid)?;
    let pp = BlockLattice::sample(mp_past, grid)?;
    let pf = BlockLattice::sample(mp_future, grid)?;
    let cols = lp.cols;

    let mut w = BitWriter::new();
    let mut diffs = Vec::with_capacity(lp.dx.len());
    for (vals, preds) in lattice_planes(&lp).into_iter().zip(lattice_planes(&pp)).chain(
        lattice_planes(&lf).into_iter().zip(lattice_planes(&pf)),
    ) {
        diffs.clear();
        for (row_v, row_p) in vals.chunks_exact(cols).zip(preds.chunks_exact(cols)) {
            let mut left = 0i32;
            for (&v, &p) in row_v.iter().zip(row_p) {
                let residual = v - p;
                diffs.push(residual - left);
                left = residual;
            }
        }
        write_plane(&mut w, &diffs);
    }
    let bit_count = w.bit_count();
    let payload = MotionPayload { bytes: w.finish(), bit_count };
    Ok((payload, lp.expand(), lf.expand()))
}

/// Inverse of [`encode_flows`]. Any reconstructed component whose magnitude
/// exceeds `limit` (quarter-pel) marks the stream as corrupt.
pub fn decode_flows(
    payload: &[u8],
    mp_past: &FlowField,
    mp_future: &FlowField,
    dims: (usize, usize),
    grid: usize,
    limit: i32,
) -> Result<(FlowField, FlowField)> {
    check_dims(&[mp_past, mp_future], dims, grid)?;
    let pp = BlockLattice::sample(mp_past, grid)?;
    let pf = BlockLattice::sample(mp_future, grid)?;
    let (cols, rows) = (pp.cols, pp.rows);
    let mut r = BitReader::new(payload);
    let mut decode_plane = |pred: &[i32]| -> Result<Vec<i32>> {
        let diffs = read_plane(&mut r, cols * rows)?;
        let mut out = Vec::with_capacity(cols * rows);
        for (row_p, row_d) in pred.chunks_exact(cols).zip(diffs.chunks_exact(cols)) {
            let mut left = 0i64;
            for (&p, &d) in row_p.iter().zip(row_d) {
                let residual = left + d as i64;
                let v = residual + p as i64;
                if v.abs() > limit as i64 {
                    return Err(Error::MotionOutOfRange {
                        value: v.clamp(i32::MIN as i64, i32::MAX as i64) as i32,
                        limit,
                    });
                }
                out.push(v as i32);
                left = residual;
            }
        }
        Ok(out)
    };
    let past_dx = decode_plane(&pp.dx)?;
    let past_dy = decode_plane(&pp.dy)?;
    let fut_dx = decode_plane(&pf.dx)?;
    let fut_dy = decode_plane(&pf.dy)?;
    let past = BlockLattice { cols, rows, block: grid, dx: past_dx, dy: past_dy };
    let future = BlockLattice { cols, rows, block: grid, dx: fut_dx, dy: fut_dy };
    Ok((past.expand(), future.expand()))
}
