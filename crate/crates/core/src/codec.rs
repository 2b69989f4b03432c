//! The combined codec: a zero/non-zero flag stream with zero-run coding, and
//! the non-zero words packed into bit-plane blocks.
//!
//! Flags and blocks share one bitstream. Each zero burst becomes run symbols,
//! each non-zero word a `1` flag; right after the `n`-th pending `1` flag the
//! `n` buffered non-zero words are emitted as one block. At the end of the
//! input a partially filled block is padded with zero words and the decoder
//! drops the padding by counting flags.

use crate::bitstream::{BitReader, BitWriter};
use crate::bpc::{self, BpcParams};
use crate::container::{CompressedStream, DType, Header, Method};
use crate::error::{Error, Result};
use crate::zero_rle::{self, RleParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EbpcParams {
    pub m: u32,
    pub n: usize,
    pub k: u32,
    pub dtype: DType,
}

impl Default for EbpcParams {
    fn default() -> Self {
        Self {
            m: 16,
            n: 16,
            k: 4,
            dtype: DType::Unsigned,
        }
    }
}

impl EbpcParams {
    pub fn new(m: u32, n: usize, k: u32) -> Result<Self> {
        let p = Self {
            m,
            n,
            k,
            dtype: DType::Unsigned,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_dtype(mut self, dtype: DType) -> Self {
        self.dtype = dtype;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.bpc()?;
        self.rle()?;
        Ok(())
    }

    pub fn bpc(&self) -> Result<BpcParams> {
        BpcParams::new(self.m, self.n)
    }

    pub fn rle(&self) -> Result<RleParams> {
        RleParams::new(self.k)
    }

    pub(crate) fn max_word(&self) -> u32 {
        (((1u64) << self.m) - 1) as u32
    }
}

pub(crate) fn check_words(words: &[u32], m: u32) -> Result<()> {
    let max = ((1u64 << m) - 1) as u32;
    match words.iter().find(|&&w| w > max) {
        Some(&w) => Err(Error::ValueOutOfRange {
            value: u64::from(w),
            count: m,
        }),
        None => Ok(()),
    }
}

/// Streaming encoder; feed words one at a time with [`Encoder::push`].
#[derive(Debug)]
pub struct Encoder {
    params: EbpcParams,
    bpc: BpcParams,
    rle: RleParams,
    zero_run: u64,
    pending: Vec<u32>,
    writer: BitWriter,
    count: u64,
}

impl Encoder {
    pub fn new(params: EbpcParams) -> Result<Self> {
        Ok(Self {
            bpc: params.bpc()?,
            rle: params.rle()?,
            params,
            zero_run: 0,
            pending: Vec::with_capacity(params.n),
            writer: BitWriter::new(),
            count: 0,
        })
    }

    pub fn push(&mut self, word: u32) -> Result<()> {
        if word > self.params.max_word() {
            return Err(Error::ValueOutOfRange {
                value: u64::from(word),
                count: self.params.m,
            });
        }
        self.count += 1;
        if word == 0 {
            self.zero_run += 1;
            if self.zero_run == self.rle.max_burst() {
                zero_rle::write_zero_burst(&mut self.writer, self.zero_run, self.rle)?;
                self.zero_run = 0;
            }
            return Ok(());
        }
        zero_rle::write_zero_burst(&mut self.writer, self.zero_run, self.rle)?;
        self.zero_run = 0;
        self.writer.write_bit(true);
        self.pending.push(word);
        if self.pending.len() == self.params.n {
            bpc::encode_block(&self.pending, self.bpc, &mut self.writer)?;
            self.pending.clear();
        }
        Ok(())
    }

    /// Non-zero words waiting for their block; always below `n`.
    pub fn buffered_nonzeros(&self) -> usize {
        self.pending.len()
    }

    /// Bits of state carried between words: the buffered words plus the
    /// zero-run counter, which never reaches `2^k`.
    pub fn state_bits(&self) -> u64 {
        self.pending.len() as u64 * u64::from(self.params.m) + u64::from(self.params.k)
    }

    pub fn bits_written(&self) -> u64 {
        self.writer.bit_len()
    }

    pub fn finish(mut self) -> Result<CompressedStream> {
        zero_rle::write_zero_burst(&mut self.writer, self.zero_run, self.rle)?;
        if !self.pending.is_empty() {
            self.pending.resize(self.params.n, 0);
            bpc::encode_block(&self.pending, self.bpc, &mut self.writer)?;
        }
        let header = Header {
            method: Method::Ebpc,
            m: self.params.m as u8,
            n: self.params.n as u8,
            k: self.params.k as u8,
            dtype: self.params.dtype,
            element_count: self.count,
            payload_bits: self.writer.bit_len(),
        };
        Ok(CompressedStream {
            header,
            payload: self.writer.into_bytes(),
        })
    }
}

pub fn compress(words: &[u32], p: EbpcParams) -> Result<CompressedStream> {
    check_words(words, p.m)?;
    let mut enc = Encoder::new(p)?;
    for &w in words {
        enc.push(w)?;
    }
    enc.finish()
}

pub(crate) fn params_from_header(h: &Header) -> Result<EbpcParams> {
    let p = EbpcParams {
        m: u32::from(h.m),
        n: usize::from(h.n),
        k: u32::from(h.k),
        dtype: h.dtype,
    };
    p.validate()
        .map_err(|e| Error::BadFormat(format!("container parameters: {e}")))?;
    Ok(p)
}

pub(crate) fn payload_reader(s: &CompressedStream) -> Result<BitReader<'_>> {
    BitReader::with_limit(&s.payload, s.header.payload_bits)
}

pub(crate) fn expect_fully_consumed(r: &BitReader<'_>) -> Result<()> {
    if r.remaining() != 0 {
        return Err(Error::TrailingBits {
            consumed: r.position(),
            declared: r.limit(),
        });
    }
    Ok(())
}

pub(crate) fn element_count(s: &CompressedStream) -> Result<usize> {
    usize::try_from(s.header.element_count)
        .map_err(|_| Error::BadFormat("element count does not fit in memory".into()))
}

pub fn decompress(s: &CompressedStream) -> Result<Vec<u32>> {
    if s.header.method != Method::Ebpc {
        return Err(Error::BadFormat(format!(
            "expected an ebpc stream, found {}",
            s.header.method
        )));
    }
    let p = params_from_header(&s.header)?;
    let (bpc_params, rle) = (p.bpc()?, p.rle()?);
    let count = element_count(s)?;
    let mut r = payload_reader(s)?;

    // the header count is untrusted; only use it as a capacity hint
    let mut out = Vec::with_capacity(count.min(s.header.payload_bits as usize));
    let mut slots: Vec<usize> = Vec::with_capacity(p.n);

    let fill = |out: &mut Vec<u32>, slots: &mut Vec<usize>, r: &mut BitReader<'_>| -> Result<()> {
        let words = bpc::decode_block(r, bpc_params)?;
        for (i, &w) in words.iter().enumerate() {
            match slots.get(i) {
                Some(_) if w == 0 => {
                    return Err(Error::CorruptBlock("zero word at a non-zero flag"))
                }
                Some(&slot) => out[slot] = w,
                None if w != 0 => return Err(Error::CorruptBlock("non-zero block padding")),
                None => {}
            }
        }
        slots.clear();
        Ok(())
    };

    while out.len() < count {
        if r.read_bit()? {
            slots.push(out.len());
            out.push(0);
            if slots.len() == p.n {
                fill(&mut out, &mut slots, &mut r)?;
            }
        } else {
            let burst = zero_rle::read_burst_length(&mut r, rle)?;
            let decoded = out.len() as u64 + burst;
            if decoded > count as u64 {
                return Err(Error::CountMismatch {
                    decoded,
                    declared: count as u64,
                });
            }
            out.resize(decoded as usize, 0);
        }
    }
    if !slots.is_empty() {
        fill(&mut out, &mut slots, &mut r)?;
    }
    expect_fully_consumed(&r)?;
    Ok(out)
}

/// Payload length of [`compress`] in bits, computed without building the
/// stream.
pub fn compressed_size_bits(words: &[u32], p: EbpcParams) -> Result<u64> {
    check_words(words, p.m)?;
    let (bpc_params, rle) = (p.bpc()?, p.rle()?);
    let mut bits = 0u64;
    let mut zeros = 0u64;
    let mut block = Vec::with_capacity(p.n);
    for &w in words {
        if w == 0 {
            zeros += 1;
            continue;
        }
        bits += rle.symbols_for_burst(zeros) * rle.symbol_bits() + 1;
        zeros = 0;
        block.push(w);
        if block.len() == p.n {
            bits += bpc::block_size_bits(&block, bpc_params)?;
            block.clear();
        }
    }
    bits += rle.symbols_for_burst(zeros) * rle.symbol_bits();
    if !block.is_empty() {
        block.resize(p.n, 0);
        bits += bpc::block_size_bits(&block, bpc_params)?;
    }
    Ok(bits)
}

pub fn f32_to_words(values: &[f32]) -> Vec<u32> {
    values.iter().map(|v| v.to_bits()).collect()
}

pub fn words_to_f32(words: &[u32]) -> Vec<f32> {
    words.iter().map(|&w| f32::from_bits(w)).collect()
}

/// Compress `f32` values by their bit patterns; only `+0.0` counts as zero.
pub fn compress_f32(values: &[f32], n: usize, k: u32) -> Result<CompressedStream> {
    let p = EbpcParams::new(32, n, k)?.with_dtype(DType::Float);
    compress(&f32_to_words(values), p)
}

pub fn decompress_f32(s: &CompressedStream) -> Result<Vec<f32>> {
    if s.header.dtype != DType::Float || s.header.m != 32 {
        return Err(Error::BadFormat(
            "stream does not hold 32-bit floats".into(),
        ));
    }
    decompress(s).map(|w| words_to_f32(&w))
}
