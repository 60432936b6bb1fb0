//! CSV reports: RD curves, per-frame profiles and scale histograms.

use omra_core::container::{self, record_overhead};
use omra_core::gop::build_plan;
use omra_core::metrics::{psnr, RdPoint};
use omra_core::{decode_sequence, FrameKind, FrameReport, ScaleFactor, Sequence};

use crate::error::{Error, Result};

fn to_string(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("ascii csv")
}

/// `psnr,bpp` rows.
pub fn rd_csv(points: &[RdPoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["psnr", "bpp"]).expect("in-memory writer");
    for p in points {
        w.write_record([format!("{:.6}", p.psnr), format!("{:.8}", p.bpp)]).expect("in-memory writer");
    }
    to_string(w)
}

/// Parses `psnr,bpp` rows; columns are located by header name.
pub fn parse_rd_csv(text: &str) -> Result<Vec<RdPoint>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse(format!("missing column `{name}`")))
    };
    let (ip, ib) = (col("psnr")?, col("bpp")?);
    let mut points = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Parse(format!("row {}: bad number", line + 1)))
        };
        points.push(RdPoint { psnr: num(ip)?, bpp: num(ib)? });
    }
    Ok(points)
}

/// One frame of a per-frame profile.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileRow {
    pub display_index: usize,
    pub coding_order: usize,
    pub temporal_level: u32,
    pub kind: FrameKind,
    pub scale: ScaleFactor,
    pub motion_bits: u64,
    pub texture_bits: u64,
    pub header_bits: u64,
    pub total_bits: u64,
    pub psnr: Option<f64>,
}

/// Rows in display order from encoder reports.
pub fn profile_from_reports(reports: &[FrameReport]) -> Vec<ProfileRow> {
    let mut rows: Vec<ProfileRow> = reports
        .iter()
        .map(|r| ProfileRow {
            display_index: r.display_index,
            coding_order: r.coding_order,
            temporal_level: r.temporal_level,
            kind: r.kind,
            scale: r.scale,
            motion_bits: r.motion_bits,
            texture_bits: r.texture_bits,
            header_bits: r.header_bits,
            total_bits: r.total_bits,
            psnr: Some(r.psnr),
        })
        .collect();
    rows.sort_by_key(|r| r.display_index);
    rows
}

/// Rows in display order from a bitstream alone. With the source sequence,
/// the stream is decoded and PSNR filled in.
pub fn profile_from_stream(bitstream: &[u8], original: Option<&Sequence>) -> Result<Vec<ProfileRow>> {
    let (header, records) = container::parse(bitstream).map_err(Error::Bitstream)?;
    let plan = build_plan(header.frame_count as usize, header.intra_period as u32).map_err(Error::Bitstream)?;
    let decoded = match original {
        Some(seq) => {
            let dec = decode_sequence(bitstream).map_err(Error::Bitstream)?;
            if seq.len() != dec.len() {
                return Err(Error::Parse(format!("stream has {} frames, input has {}", dec.len(), seq.len())));
            }
            Some(dec)
        }
        None => None,
    };
    let mut rows = Vec::with_capacity(records.len());
    for (coding_order, (entry, rec)) in plan.entries.iter().zip(&records).enumerate() {
        let psnr = match (&decoded, original) {
            (Some(dec), Some(seq)) => {
                Some(psnr(&seq.frames[entry.display_index], &dec.frames[entry.display_index])?)
            }
            _ => None,
        };
        rows.push(ProfileRow {
            display_index: entry.display_index,
            coding_order,
            temporal_level: entry.temporal_level,
            kind: rec.kind,
            scale: rec.scale,
            motion_bits: 8 * rec.motion.len() as u64,
            texture_bits: 8 * rec.texture.len() as u64,
            header_bits: 8 * record_overhead(rec.motion.len(), rec.texture.len()) as u64,
            total_bits: rec.total_bits(),
            psnr,
        });
    }
    rows.sort_by_key(|r| r.display_index);
    Ok(rows)
}

pub fn profile_csv(rows: &[ProfileRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "display_index",
        "coding_order",
        "temporal_level",
        "kind",
        "scale",
        "motion_bits",
        "texture_bits",
        "header_bits",
        "total_bits",
        "psnr",
    ])
    .expect("in-memory writer");
    for r in rows {
        w.write_record([
            r.display_index.to_string(),
            r.coding_order.to_string(),
            r.temporal_level.to_string(),
            r.kind.short_name().to_string(),
            r.scale.to_string(),
            r.motion_bits.to_string(),
            r.texture_bits.to_string(),
            r.header_bits.to_string(),
            r.total_bits.to_string(),
            r.psnr.map(|p| format!("{p:.4}")).unwrap_or_default(),
        ])
        .expect("in-memory writer");
    }
    to_string(w)
}

/// Relative frequency of each scale (1, 2, 4, 8) per display position within
/// the intra period, over every GOP. Positions without frames are omitted.
pub fn scale_histogram(rows: &[ProfileRow], intra_period: usize) -> Vec<(usize, [f64; 4])> {
    let mut counts = vec![[0u64; 4]; intra_period];
    for r in rows {
        counts[r.display_index % intra_period][r.scale.log2() as usize] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .filter_map(|(pos, c)| {
            let total: u64 = c.iter().sum();
            (total > 0).then(|| (pos, c.map(|n| n as f64 / total as f64)))
        })
        .collect()
}

pub fn scale_hist_csv(hist: &[(usize, [f64; 4])]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["position", "s1", "s2", "s4", "s8"]).expect("in-memory writer");
    for (pos, f) in hist {
        let mut rec = vec![pos.to_string()];
        rec.extend(f.iter().map(|v| format!("{v:.6}")));
        w.write_record(rec).expect("in-memory writer");
    }
    to_string(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(display_index: usize, s: u32) -> ProfileRow {
        ProfileRow {
            display_index,
            coding_order: display_index,
            temporal_level: 1,
            kind: FrameKind::RefB,
            scale: ScaleFactor::new(s).unwrap(),
            motion_bits: 8,
            texture_bits: 16,
            header_bits: 24,
            total_bits: 48,
            psnr: None,
        }
    }

    #[test]
    fn rd_csv_round_trip() {
        let pts = vec![RdPoint { psnr: 30.5, bpp: 0.125 }, RdPoint { psnr: 33.25, bpp: 0.5 }];
        let text = rd_csv(&pts);
        assert!(text.starts_with("psnr,bpp\n"));
        assert_eq!(parse_rd_csv(&text).unwrap(), pts);
        assert_eq!(parse_rd_csv("bpp, psnr\n0.1, 30\n").unwrap(), [RdPoint { psnr: 30.0, bpp: 0.1 }]);
        assert!(parse_rd_csv("psnr\n30\n").is_err());
        assert!(parse_rd_csv("psnr,bpp\nx,1\n").is_err());
    }

    #[test]
    fn histogram_rows_sum_to_one() {
        let rows: Vec<_> = (0..9).map(|i| row(i, if i % 2 == 0 { 1 } else { 4 })).collect();
        let hist = scale_histogram(&rows, 4);
        assert_eq!(hist.len(), 4);
        for (_, f) in &hist {
            assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(hist[1].1, [0.0, 0.0, 1.0, 0.0]);
        let text = scale_hist_csv(&hist);
        assert_eq!(text.lines().next().unwrap(), "position,s1,s2,s4,s8");
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn profile_columns() {
        let text = profile_csv(&[row(3, 2)]);
        assert_eq!(text.lines().nth(1).unwrap(), "3,3,1,RefB,2,8,16,24,48,");
    }
}
