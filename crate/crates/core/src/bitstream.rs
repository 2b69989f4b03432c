//! MSB-first bit packing over byte buffers.
//!
//! Stream bit `8 * i` is bit 7 of byte `i`. Every codec in this crate writes
//! through [`BitWriter`] and reads back through [`BitReader`].

use crate::error::{Error, Result};

#[inline]
fn check_width(count: u32) -> Result<()> {
    if count > 64 {
        return Err(Error::FieldTooWide(count));
    }
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct BitWriter {
    buf: Vec<u8>,
    bit_len: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of bits written so far. Flush padding never counts.
    #[inline]
    pub fn bit_len(&self) -> u64 {
        self.bit_len
    }

    /// Append the `count` low bits of `value`, most significant first.
    pub fn write_bits(&mut self, value: u64, count: u32) -> Result<()> {
        check_width(count)?;
        if count < 64 && value >> count != 0 {
            return Err(Error::ValueOutOfRange { value, count });
        }
        let mut remaining = count;
        while remaining > 0 {
            let used = (self.bit_len % 8) as u32;
            if used == 0 {
                self.buf.push(0);
            }
            let free = 8 - used;
            let take = free.min(remaining);
            let chunk = ((value >> (remaining - take)) & ((1u64 << take) - 1)) as u8;
            let last = self.buf.len() - 1;
            self.buf[last] |= chunk << (free - take);
            remaining -= take;
            self.bit_len += u64::from(take);
        }
        Ok(())
    }

    #[inline]
    pub fn write_bit(&mut self, bit: bool) {
        // a single bit always fits
        let _ = self.write_bits(u64::from(bit), 1);
    }

    /// Bytes written so far; the final partial byte is zero-padded.
    pub fn as_bytes(&self) -> &[u8] {
        &self.buf
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}

#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    buf: &'a [u8],
    cursor: u64,
    limit: u64,
}

impl<'a> BitReader<'a> {
    /// Reader over the whole buffer.
    pub fn new(buf: &'a [u8]) -> Self {
        Self {
            buf,
            cursor: 0,
            limit: buf.len() as u64 * 8,
        }
    }

    /// Reader over the first `limit` bits of `buf`.
    pub fn with_limit(buf: &'a [u8], limit: u64) -> Result<Self> {
        if limit > buf.len() as u64 * 8 {
            return Err(Error::EndOfStream);
        }
        Ok(Self {
            buf,
            cursor: 0,
            limit,
        })
    }

    #[inline]
    pub fn position(&self) -> u64 {
        self.cursor
    }

    #[inline]
    pub fn limit(&self) -> u64 {
        self.limit
    }

    #[inline]
    pub fn remaining(&self) -> u64 {
        self.limit - self.cursor
    }

    pub fn read_bits(&mut self, count: u32) -> Result<u64> {
        check_width(count)?;
        if u64::from(count) > self.remaining() {
            return Err(Error::EndOfStream);
        }
        let mut value = 0u64;
        let mut remaining = count;
        while remaining > 0 {
            let byte = self.buf[(self.cursor / 8) as usize];
            let used = (self.cursor % 8) as u32;
            let avail = 8 - used;
            let take = avail.min(remaining);
            let chunk = (byte >> (avail - take)) & ((1u16 << take) - 1) as u8;
            value = (value << take) | u64::from(chunk);
            remaining -= take;
            self.cursor += u64::from(take);
        }
        Ok(value)
    }

    #[inline]
    pub fn read_bit(&mut self) -> Result<bool> {
        Ok(self.read_bits(1)? == 1)
    }
}
