//! Byte layout of a coded sequence.
//!
//! ```text
//! "OMRA" | version u8 | variant u8 | fixed log2 s u8 | width u16 | height u16
//! | frame_count u16 | intra_period u8 | q_base u16 (tenths) | lambda u32 (hundredths)
//! then per frame, in coding order:
//! header u8 (kind << 6 | log2 s << 4) | LEB128 motion len | motion | LEB128 texture len | texture
//! ```
//! Multi-byte integers are little-endian.

use alloc::vec::Vec;

use crate::entropy::{leb128_len, read_leb128, write_leb128};
use crate::gop::FrameKind;
use crate::resample::ScaleFactor;
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"OMRA";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 20;

/// How motion resolution is chosen and where resampling happens.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Compress low-res flows, upsample decoded flows, warp at full resolution.
    Omra,
    /// Upsample low-res flows first, then compress and warp at full resolution.
    VariantA,
    /// Compress and warp at low resolution, upsample the predictor.
    VariantB,
    /// One scale for every B frame, pipeline as in `Omra`.
    FixedS(ScaleFactor),
}

impl Variant {
    pub fn code(self) -> u8 {
        match self {
            Variant::Omra => 0,
            Variant::VariantA => 1,
            Variant::VariantB => 2,
            Variant::FixedS(_) => 3,
        }
    }

    fn fixed_log2(self) -> u8 {
        match self {
            Variant::FixedS(s) => s.log2(),
            _ => 0,
        }
    }

    fn from_codes(code: u8, fixed_log2: u8) -> Result<Variant> {
        let v = match code {
            0 => Variant::Omra,
            1 => Variant::VariantA,
            2 => Variant::VariantB,
            3 => Variant::FixedS(
                ScaleFactor::from_log2(fixed_log2).map_err(|_| Error::Corrupt("fixed scale"))?,
            ),
            _ => return Err(Error::Corrupt("unknown variant")),
        };
        if code != 3 && fixed_log2 != 0 {
            return Err(Error::Corrupt("fixed scale set for a searching variant"));
        }
        Ok(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BitstreamHeader {
    pub variant: Variant,
    pub width: u16,
    pub height: u16,
    pub frame_count: u16,
    pub intra_period: u8,
    pub q_base_tenths: u16,
    pub lambda_hundredths: u32,
}

impl BitstreamHeader {
    pub fn write(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(self.variant.code());
        out.push(self.variant.fixed_log2());
        out.extend_from_slice(&self.width.to_le_bytes());
        out.extend_from_slice(&self.height.to_le_bytes());
        out.extend_from_slice(&self.frame_count.to_le_bytes());
        out.push(self.intra_period);
        out.extend_from_slice(&self.q_base_tenths.to_le_bytes());
        out.extend_from_slice(&self.lambda_hundredths.to_le_bytes());
    }

    pub fn parse(data: &[u8]) -> Result<BitstreamHeader> {
        if data.len() < 4 || data[..4] != MAGIC {
            return Err(Error::BadMagic);
        }
        if data.len() < HEADER_LEN {
            return Err(Error::BitstreamExhausted);
        }
        if data[4] != VERSION {
            return Err(Error::UnsupportedVersion(data[4]));
        }
        let u16_at = |i: usize| u16::from_le_bytes([data[i], data[i + 1]]);
        let h = BitstreamHeader {
            variant: Variant::from_codes(data[5], data[6])?,
            width: u16_at(7),
            height: u16_at(9),
            frame_count: u16_at(11),
            intra_period: data[13],
            q_base_tenths: u16_at(14),
            lambda_hundredths: u32::from_le_bytes([data[16], data[17], data[18], data[19]]),
        };
        if h.width == 0 || h.height == 0 || h.frame_count == 0 {
            return Err(Error::Corrupt("empty geometry"));
        }
        if h.q_base_tenths == 0 {
            return Err(Error::Corrupt("zero q_base"));
        }
        Ok(h)
    }
}

/// One coded frame as laid out in the stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameRecord<'a> {
    pub kind: FrameKind,
    pub scale: ScaleFactor,
    pub motion: &'a [u8],
    pub texture: &'a [u8],
}

impl FrameRecord<'_> {
    /// Serialized size in bits, headers included.
    pub fn total_bits(&self) -> u64 {
        8 * (record_overhead(self.motion.len(), self.texture.len()) + self.motion.len() + self.texture.len())
            as u64
    }
}

/// Bytes spent on the frame header and the two length prefixes.
pub fn record_overhead(motion_len: usize, texture_len: usize) -> usize {
    1 + leb128_len(motion_len as u64) + leb128_len(texture_len as u64)
}

pub fn frame_header_byte(kind: FrameKind, scale: ScaleFactor) -> u8 {
    (kind.code() << 6) | (scale.log2() << 4)
}

pub fn write_record(out: &mut Vec<u8>, rec: &FrameRecord<'_>) {
    out.push(frame_header_byte(rec.kind, rec.scale));
    write_leb128(out, rec.motion.len() as u64);
    out.extend_from_slice(rec.motion);
    write_leb128(out, rec.texture.len() as u64);
    out.extend_from_slice(rec.texture);
}

fn take<'a>(data: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    let (len, used) = read_leb128(&data[*pos..])?;
    *pos += used;
    let len = usize::try_from(len).map_err(|_| Error::Corrupt("length overflow"))?;
    let end = pos.checked_add(len).ok_or(Error::Corrupt("length overflow"))?;
    let slice = data.get(*pos..end).ok_or(Error::BitstreamExhausted)?;
    *pos = end;
    Ok(slice)
}

/// Splits a stream into its header and per-frame records (coding order).
pub fn parse(data: &[u8]) -> Result<(BitstreamHeader, Vec<FrameRecord<'_>>)> {
    let header = BitstreamHeader::parse(data)?;
    let mut pos = HEADER_LEN;
    let mut records = Vec::with_capacity(header.frame_count as usize);
    for _ in 0..header.frame_count {
        let byte = *data.get(pos).ok_or(Error::BitstreamExhausted)?;
        pos += 1;
        if byte & 0x0f != 0 {
            return Err(Error::Corrupt("reserved frame header bits set"));
        }
        let kind = FrameKind::from_code(byte >> 6).ok_or(Error::Corrupt("frame kind"))?;
        let scale = ScaleFactor::from_log2((byte >> 4) & 0x3)?;
        let motion = take(data, &mut pos)?;
        let texture = take(data, &mut pos)?;
        records.push(FrameRecord { kind, scale, motion, texture });
    }
    if pos != data.len() {
        return Err(Error::Corrupt("trailing bytes after last frame"));
    }
    Ok((header, records))
}
