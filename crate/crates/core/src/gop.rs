//! Hierarchical bi-directional prediction plan.
//!
//! Each GOP `[a, a + P]` is closed: both anchors are intra frames. The
//! interior is coded by midpoint recursion, depth first, left half before
//! right half. The midpoint of the whole GOP sits at temporal level 1; the
//! deepest level (odd display indices) is never referenced.

use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FrameKind {
    Intra,
    RefB,
    NonRefB,
}

impl FrameKind {
    /// Two-bit code used in the per-frame header.
    pub fn code(self) -> u8 {
        match self {
            FrameKind::Intra => 0,
            FrameKind::RefB => 1,
            FrameKind::NonRefB => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<FrameKind> {
        match code {
            0 => Some(FrameKind::Intra),
            1 => Some(FrameKind::RefB),
            2 => Some(FrameKind::NonRefB),
            _ => None,
        }
    }

    pub fn is_b(self) -> bool {
        self != FrameKind::Intra
    }

    pub fn short_name(self) -> &'static str {
        match self {
            FrameKind::Intra => "I",
            FrameKind::RefB => "RefB",
            FrameKind::NonRefB => "NonRefB",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlanEntry {
    pub display_index: usize,
    pub kind: FrameKind,
    pub ref_past: Option<usize>,
    pub ref_future: Option<usize>,
    pub temporal_level: u32,
}

impl PlanEntry {
    /// `(display - past, future - display)` for a B frame.
    pub fn reference_distance(&self) -> Result<(usize, usize)> {
        match (self.kind, self.ref_past, self.ref_future) {
            (FrameKind::Intra, _, _) | (_, None, _) | (_, _, None) => {
                Err(Error::NotBFrame(self.display_index))
            }
            (_, Some(p), Some(f)) => Ok((self.display_index - p, f - self.display_index)),
        }
    }
}

/// Entries in coding order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GopPlan {
    pub entries: Vec<PlanEntry>,
    pub intra_period: u32,
}

pub const INTRA_PERIODS: [u32; 6] = [2, 4, 8, 16, 32, 64];

pub fn build_plan(frame_count: usize, intra_period: u32) -> Result<GopPlan> {
    if !INTRA_PERIODS.contains(&intra_period) {
        return Err(Error::InvalidIntraPeriod(intra_period));
    }
    let p = intra_period as usize;
    if frame_count == 0 || !(frame_count - 1).is_multiple_of(p) {
        return Err(Error::PartialGop { frame_count, intra_period });
    }
    let deepest = intra_period.trailing_zeros();
    let mut entries = Vec::with_capacity(frame_count);
    entries.push(intra(0));
    let mut start = 0;
    while start + p < frame_count {
        entries.push(intra(start + p));
        bisect(start, start + p, 1, deepest, &mut entries);
        start += p;
    }
    Ok(GopPlan { entries, intra_period })
}

fn intra(display_index: usize) -> PlanEntry {
    PlanEntry {
        display_index,
        kind: FrameKind::Intra,
        ref_past: None,
        ref_future: None,
        temporal_level: 0,
    }
}

fn bisect(lo: usize, hi: usize, level: u32, deepest: u32, out: &mut Vec<PlanEntry>) {
    if hi - lo < 2 {
        return;
    }
    let mid = (lo + hi) / 2;
    out.push(PlanEntry {
        display_index: mid,
        kind: if level == deepest { FrameKind::NonRefB } else { FrameKind::RefB },
        ref_past: Some(lo),
        ref_future: Some(hi),
        temporal_level: level,
    });
    bisect(lo, mid, level + 1, deepest, out);
    bisect(mid, hi, level + 1, deepest, out);
}

impl GopPlan {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_temporal_level(&self) -> u32 {
        self.entries.iter().map(|e| e.temporal_level).max().unwrap_or(0)
    }

    /// Plan dump: `coding_order,display_index,kind,ref_past,ref_future,temporal_level`.
    /// Missing references are written as empty fields.
    pub fn to_csv(&self) -> alloc::string::String {
        use core::fmt::Write;
        let mut s = alloc::string::String::from(
            "coding_order,display_index,kind,ref_past,ref_future,temporal_level\n",
        );
        let opt = |v: Option<usize>| v.map(|v| alloc::format!("{v}")).unwrap_or_default();
        for (i, e) in self.entries.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                i,
                e.display_index,
                e.kind.short_name(),
                opt(e.ref_past),
                opt(e.ref_future),
                e.temporal_level
            );
        }
        s
    }
}
