//! Reference codecs: zero-value compression (ZVC), zero-run coding with raw
//! non-zero values, and plain bit-plane compression over the whole stream.
//! All three frame their output in the same container as the main codec.

use crate::bitstream::{BitReader, BitWriter};
use crate::bpc::{self, BpcParams};
use crate::codec::{check_words, element_count, expect_fully_consumed, payload_reader};
use crate::container::{CompressedStream, DType, Header, Method};
use crate::error::{Error, Result};
use crate::zero_rle::{self, RleParams};

/// ZVC mask group size, independent of the word width.
pub const ZVC_GROUP: usize = 32;

fn check_width(m: u32) -> Result<()> {
    if !(1..=32).contains(&m) {
        return Err(Error::InvalidParams(format!(
            "word width m={m} outside 1..=32"
        )));
    }
    Ok(())
}

fn stream(method: Method, m: u32, n: u8, k: u8, count: usize, w: BitWriter) -> CompressedStream {
    CompressedStream {
        header: Header {
            method,
            m: m as u8,
            n,
            k,
            dtype: DType::Unsigned,
            element_count: count as u64,
            payload_bits: w.bit_len(),
        },
        payload: w.into_bytes(),
    }
}

fn expect_method(s: &CompressedStream, method: Method) -> Result<u32> {
    if s.header.method != method {
        return Err(Error::BadFormat(format!(
            "expected a {method} stream, found {}",
            s.header.method
        )));
    }
    let m = u32::from(s.header.m);
    check_width(m).map_err(|e| Error::BadFormat(e.to_string()))?;
    Ok(m)
}

pub fn zvc_size_bits(words: &[u32], m: u32) -> u64 {
    let groups = words.len().div_ceil(ZVC_GROUP) as u64;
    let nonzeros = words.iter().filter(|&&w| w != 0).count() as u64;
    groups * ZVC_GROUP as u64 + nonzeros * u64::from(m)
}

pub fn zvc_compress(words: &[u32], m: u32) -> Result<CompressedStream> {
    check_width(m)?;
    check_words(words, m)?;
    let mut w = BitWriter::new();
    for group in words.chunks(ZVC_GROUP) {
        let mask = group.iter().enumerate().fold(0u64, |acc, (i, &v)| {
            acc | (u64::from(v != 0) << (ZVC_GROUP - 1 - i))
        });
        w.write_bits(mask, ZVC_GROUP as u32)?;
        for &v in group.iter().filter(|&&v| v != 0) {
            w.write_bits(u64::from(v), m)?;
        }
    }
    Ok(stream(Method::Zvc, m, 0, 0, words.len(), w))
}

pub fn zvc_decompress(s: &CompressedStream) -> Result<Vec<u32>> {
    let m = expect_method(s, Method::Zvc)?;
    let count = element_count(s)?;
    let mut r = payload_reader(s)?;
    let mut out = Vec::with_capacity(count.min(s.header.payload_bits as usize));
    while out.len() < count {
        let mask = r.read_bits(ZVC_GROUP as u32)?;
        let used = (count - out.len()).min(ZVC_GROUP);
        if used < ZVC_GROUP && mask & ((1u64 << (ZVC_GROUP - used)) - 1) != 0 {
            return Err(Error::CorruptBlock("mask bits set past the last element"));
        }
        for i in 0..used {
            if mask >> (ZVC_GROUP - 1 - i) & 1 == 1 {
                let v = r.read_bits(m)? as u32;
                if v == 0 {
                    return Err(Error::CorruptBlock("zero value under a set mask bit"));
                }
                out.push(v);
            } else {
                out.push(0);
            }
        }
    }
    expect_fully_consumed(&r)?;
    Ok(out)
}

pub fn zero_rle_only_size_bits(words: &[u32], m: u32, p: RleParams) -> u64 {
    let flags: Vec<bool> = words.iter().map(|&w| w != 0).collect();
    let nonzeros = flags.iter().filter(|&&f| f).count() as u64;
    zero_rle::encoded_size_bits(&flags, p) + nonzeros * u64::from(m)
}

pub fn zero_rle_only_compress(words: &[u32], m: u32, p: RleParams) -> Result<CompressedStream> {
    check_width(m)?;
    check_words(words, m)?;
    let mut w = BitWriter::new();
    let mut zeros = 0u64;
    for &v in words {
        if v == 0 {
            zeros += 1;
            continue;
        }
        zero_rle::write_zero_burst(&mut w, zeros, p)?;
        zeros = 0;
        w.write_bit(true);
        w.write_bits(u64::from(v), m)?;
    }
    zero_rle::write_zero_burst(&mut w, zeros, p)?;
    Ok(stream(Method::ZeroRle, m, 0, p.k() as u8, words.len(), w))
}

pub fn zero_rle_only_decompress(s: &CompressedStream) -> Result<Vec<u32>> {
    let m = expect_method(s, Method::ZeroRle)?;
    let p = RleParams::new(u32::from(s.header.k)).map_err(|e| Error::BadFormat(e.to_string()))?;
    let count = element_count(s)?;
    let mut r = payload_reader(s)?;
    let mut out = Vec::with_capacity(count.min(s.header.payload_bits as usize));
    while out.len() < count {
        if r.read_bit()? {
            let v = r.read_bits(m)? as u32;
            if v == 0 {
                return Err(Error::CorruptBlock("zero value after a non-zero flag"));
            }
            out.push(v);
        } else {
            let burst = zero_rle::read_burst_length(&mut r, p)?;
            if burst > (count - out.len()) as u64 {
                return Err(Error::DecodeOverrun);
            }
            out.resize(out.len() + burst as usize, 0);
        }
    }
    expect_fully_consumed(&r)?;
    Ok(out)
}

pub fn raw_bpc_size_bits(words: &[u32], p: BpcParams) -> Result<u64> {
    let mut block = Vec::with_capacity(p.block_len());
    let mut bits = 0;
    for chunk in words.chunks(p.block_len()) {
        block.clear();
        block.extend_from_slice(chunk);
        block.resize(p.block_len(), 0);
        bits += bpc::block_size_bits(&block, p)?;
    }
    Ok(bits)
}

pub fn raw_bpc_compress(words: &[u32], p: BpcParams) -> Result<CompressedStream> {
    check_words(words, p.word_bits())?;
    let mut w = BitWriter::new();
    let mut block = Vec::with_capacity(p.block_len());
    for chunk in words.chunks(p.block_len()) {
        block.clear();
        block.extend_from_slice(chunk);
        block.resize(p.block_len(), 0);
        bpc::encode_block(&block, p, &mut w)?;
    }
    Ok(stream(
        Method::Bpc,
        p.word_bits(),
        p.block_len() as u8,
        0,
        words.len(),
        w,
    ))
}

pub fn raw_bpc_decompress(s: &CompressedStream) -> Result<Vec<u32>> {
    let m = expect_method(s, Method::Bpc)?;
    let p =
        BpcParams::new(m, usize::from(s.header.n)).map_err(|e| Error::BadFormat(e.to_string()))?;
    let count = element_count(s)?;
    let mut r: BitReader<'_> = payload_reader(s)?;
    let mut out = Vec::with_capacity(count.min(s.header.payload_bits as usize));
    while out.len() < count {
        let words = bpc::decode_block(&mut r, p)?;
        let used = (count - out.len()).min(p.block_len());
        if words[used..].iter().any(|&w| w != 0) {
            return Err(Error::CorruptBlock("non-zero block padding"));
        }
        out.extend_from_slice(&words[..used]);
    }
    expect_fully_consumed(&r)?;
    Ok(out)
}
