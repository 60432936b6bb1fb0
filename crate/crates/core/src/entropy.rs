//! MSB-first bit I/O and order-0 Exp-Golomb codes.

use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Default, Debug, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u8,
    filled: u8,
    bits: u64,
}

impl BitWriter {
    pub fn new() -> BitWriter {
        BitWriter::default()
    }

    pub fn put_bit(&mut self, bit: bool) {
        self.acc = (self.acc << 1) | bit as u8;
        self.filled += 1;
        self.bits += 1;
        if self.filled == 8 {
            self.bytes.push(self.acc);
            self.acc = 0;
            self.filled = 0;
        }
    }

    /// Lowest `n` bits of `v`, most significant first.
    pub fn put_bits(&mut self, v: u64, n: u32) {
        for i in (0..n).rev() {
            self.put_bit((v >> i) & 1 == 1);
        }
    }

    /// `ue(v)`: `bitlen(v+1) - 1` zeros followed by `v + 1` in binary.
    pub fn put_ue(&mut self, v: u32) {
        let x = v as u64 + 1;
        let len = 64 - x.leading_zeros();
        self.put_bits(0, len - 1);
        self.put_bits(x, len);
    }

    /// `se(v)`: positive `v` maps to `2v - 1`, the rest to `-2v`.
    pub fn put_se(&mut self, v: i32) {
        let mapped = if v > 0 { 2 * v as i64 - 1 } else { -2 * v as i64 };
        self.put_ue(mapped as u32);
    }

    /// Codeword bits written so far, excluding final padding.
    pub fn bit_count(&self) -> u64 {
        self.bits
    }

    /// Pads the last byte with zeros.
    pub fn finish(mut self) -> Vec<u8> {
        if self.filled > 0 {
            self.bytes.push(self.acc << (8 - self.filled));
        }
        self.bytes
    }
}

/// Length in bits of the `ue` codeword for `v`.
pub fn ue_len(v: u32) -> u32 {
    2 * (64 - (v as u64 + 1).leading_zeros()) - 1
}

pub fn se_len(v: i32) -> u32 {
    let mapped = if v > 0 { 2 * v as i64 - 1 } else { -2 * v as i64 };
    ue_len(mapped as u32)
}

#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> BitReader<'a> {
        BitReader { data, pos: 0 }
    }

    pub fn get_bit(&mut self) -> Result<bool> {
        let byte = *self.data.get(self.pos / 8).ok_or(Error::BitstreamExhausted)?;
        let bit = (byte >> (7 - self.pos % 8)) & 1 == 1;
        self.pos += 1;
        Ok(bit)
    }

    pub fn get_bits(&mut self, n: u32) -> Result<u64> {
        let mut v = 0u64;
        for _ in 0..n {
            v = (v << 1) | self.get_bit()? as u64;
        }
        Ok(v)
    }

    pub fn get_ue(&mut self) -> Result<u32> {
        let mut zeros = 0u32;
        while !self.get_bit()? {
            zeros += 1;
            if zeros > 32 {
                return Err(Error::Corrupt("exp-golomb prefix longer than 32 bits"));
            }
        }
        let rest = self.get_bits(zeros)?;
        let v = ((1u64 << zeros) | rest) - 1;
        u32::try_from(v).map_err(|_| Error::Corrupt("exp-golomb value overflows u32"))
    }

    pub fn get_se(&mut self) -> Result<i32> {
        let k = self.get_ue()? as i64;
        let v = if k % 2 == 1 { (k + 1) / 2 } else { -(k / 2) };
        i32::try_from(v).map_err(|_| Error::Corrupt("signed exp-golomb value overflows i32"))
    }

    /// Bits consumed so far.
    pub fn position(&self) -> u64 {
        self.pos as u64
    }
}

/// Unsigned LEB128.
pub fn write_leb128(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

pub fn leb128_len(v: u64) -> usize {
    let bits = 64 - v.leading_zeros() as usize;
    bits.div_ceil(7).max(1)
}

/// Decodes a LEB128 value from the front of `data`, returning it and the
/// number of bytes consumed.
pub fn read_leb128(data: &[u8]) -> Result<(u64, usize)> {
    let mut v = 0u64;
    for (i, &byte) in data.iter().enumerate() {
        if i >= 10 {
            return Err(Error::Corrupt("LEB128 value too long"));
        }
        v |= ((byte & 0x7f) as u64) << (7 * i);
        if byte & 0x80 == 0 {
            return Ok((v, i + 1));
        }
    }
    Err(Error::BitstreamExhausted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn bits_of(f: impl FnOnce(&mut BitWriter)) -> alloc::string::String {
        let mut w = BitWriter::new();
        f(&mut w);
        let n = w.bit_count() as usize;
        let bytes = w.finish();
        let mut r = BitReader::new(&bytes);
        (0..n).map(|_| if r.get_bit().unwrap() { '1' } else { '0' }).collect()
    }

    #[test]
    fn ue_codewords() {
        assert_eq!(bits_of(|w| w.put_ue(0)), "1");
        assert_eq!(bits_of(|w| w.put_ue(1)), "010");
        assert_eq!(bits_of(|w| w.put_ue(2)), "011");
        assert_eq!(bits_of(|w| w.put_ue(3)), "00100");
        assert_eq!(bits_of(|w| w.put_ue(6)), "00111");
        assert_eq!(bits_of(|w| w.put_ue(7)), "0001000");
    }

    #[test]
    fn se_codewords() {
        assert_eq!(bits_of(|w| w.put_se(0)), "1");
        assert_eq!(bits_of(|w| w.put_se(1)), "010");
        assert_eq!(bits_of(|w| w.put_se(-1)), "011");
        assert_eq!(bits_of(|w| w.put_se(2)), "00100");
        assert_eq!(bits_of(|w| w.put_se(-2)), "00101");
    }

    #[test]
    fn padding_and_count() {
        let mut w = BitWriter::new();
        w.put_ue(1);
        assert_eq!(w.bit_count(), 3);
        assert_eq!(w.finish(), vec![0b0100_0000]);
    }

    #[test]
    fn read_past_end() {
        let mut r = BitReader::new(&[0x00]);
        assert_eq!(r.get_ue(), Err(Error::BitstreamExhausted));
        let mut r = BitReader::new(&[]);
        assert_eq!(r.get_se(), Err(Error::BitstreamExhausted));
    }

    #[test]
    fn extreme_values() {
        let mut w = BitWriter::new();
        w.put_ue(u32::MAX - 1);
        w.put_se(i32::MAX);
        w.put_se(-i32::MAX);
        let bytes = w.finish();
        let mut r = BitReader::new(&bytes);
        assert_eq!(r.get_ue().unwrap(), u32::MAX - 1);
        assert_eq!(r.get_se().unwrap(), i32::MAX);
        assert_eq!(r.get_se().unwrap(), -i32::MAX);
    }

    #[test]
    fn leb128() {
        for v in [0u64, 1, 127, 128, 300, 16383, 16384, u32::MAX as u64] {
            let mut out = Vec::new();
            write_leb128(&mut out, v);
            assert_eq!(out.len(), leb128_len(v));
            assert_eq!(read_leb128(&out).unwrap(), (v, out.len()));
        }
        assert_eq!(read_leb128(&[0x80]), Err(Error::BitstreamExhausted));
    }
}
