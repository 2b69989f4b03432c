//! Run-length coding of the zero/non-zero flag stream.
//!
//! A zero burst is written as a `0` prefix followed by a `k`-bit field
//! holding `length - 1`, so one symbol covers bursts of `1..=2^k`. Longer
//! bursts are split greedily into maximal symbols. Every non-zero flag is a
//! single `1` bit.

use crate::bitstream::{BitReader, BitWriter};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RleParams {
    k: u32,
}

impl RleParams {
    pub const MIN_K: u32 = 1;
    pub const MAX_K: u32 = 6;

    pub fn new(k: u32) -> Result<Self> {
        if !(Self::MIN_K..=Self::MAX_K).contains(&k) {
            return Err(Error::InvalidParams(format!(
                "zero-run field width k={k} outside {}..={}",
                Self::MIN_K,
                Self::MAX_K
            )));
        }
        Ok(Self { k })
    }

    #[inline]
    pub fn k(self) -> u32 {
        self.k
    }

    /// Longest burst a single run symbol can carry.
    #[inline]
    pub fn max_burst(self) -> u64 {
        1 << self.k
    }

    #[inline]
    pub fn symbol_bits(self) -> u64 {
        1 + u64::from(self.k)
    }

    /// Number of run symbols needed for a burst of `zeros`.
    #[inline]
    pub fn symbols_for_burst(self, zeros: u64) -> u64 {
        zeros.div_ceil(self.max_burst())
    }
}

/// Emit the run symbols for a burst of `zeros` zero flags.
pub(crate) fn write_zero_burst(w: &mut BitWriter, mut zeros: u64, p: RleParams) -> Result<()> {
    while zeros > 0 {
        let chunk = zeros.min(p.max_burst());
        w.write_bit(false);
        w.write_bits(chunk - 1, p.k)?;
        zeros -= chunk;
    }
    Ok(())
}

/// Read the length carried by one run symbol whose `0` prefix has already
/// been consumed.
#[inline]
pub(crate) fn read_burst_length(r: &mut BitReader<'_>, p: RleParams) -> Result<u64> {
    Ok(r.read_bits(p.k)? + 1)
}

pub fn encode_flags(flags: &[bool], p: RleParams, w: &mut BitWriter) -> Result<()> {
    let mut zeros = 0u64;
    for &nonzero in flags {
        if nonzero {
            write_zero_burst(w, zeros, p)?;
            zeros = 0;
            w.write_bit(true);
        } else {
            zeros += 1;
        }
    }
    write_zero_burst(w, zeros, p)
}

pub fn decode_flags(
    r: &mut BitReader<'_>,
    element_count: usize,
    p: RleParams,
) -> Result<Vec<bool>> {
    let mut flags = Vec::with_capacity(element_count);
    while flags.len() < element_count {
        if r.read_bit()? {
            flags.push(true);
        } else {
            let burst = read_burst_length(r, p)?;
            let left = (element_count - flags.len()) as u64;
            if burst > left {
                return Err(Error::DecodeOverrun);
            }
            flags.resize(flags.len() + burst as usize, false);
        }
    }
    Ok(flags)
}

/// Encoded length of `flags` in bits, without writing anything.
pub fn encoded_size_bits(flags: &[bool], p: RleParams) -> u64 {
    let mut bits = 0;
    let mut zeros = 0;
    for &nonzero in flags {
        if nonzero {
            bits += 1 + p.symbols_for_burst(zeros) * p.symbol_bits();
            zeros = 0;
        } else {
            zeros += 1;
        }
    }
    bits + p.symbols_for_burst(zeros) * p.symbol_bits()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits_of(w: &BitWriter) -> String {
        let mut r = BitReader::with_limit(w.as_bytes(), w.bit_len()).unwrap();
        (0..w.bit_len())
            .map(|_| if r.read_bit().unwrap() { '1' } else { '0' })
            .collect()
    }

    fn flags_from(pattern: &str) -> Vec<bool> {
        pattern.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn rejects_bad_k() {
        assert!(RleParams::new(0).is_err());
        assert!(RleParams::new(7).is_err());
        assert_eq!(RleParams::new(6).unwrap().max_burst(), 64);
    }

    #[test]
    fn five_zeros_then_one() {
        let p = RleParams::new(4).unwrap();
        let mut w = BitWriter::new();
        encode_flags(&flags_from("000001"), p, &mut w).unwrap();
        assert_eq!(bits_of(&w), "0".to_owned() + "0100" + "1");
    }

    #[test]
    fn lone_nonzero_is_one_bit() {
        for k in 1..=6 {
            let mut w = BitWriter::new();
            encode_flags(&[true], RleParams::new(k).unwrap(), &mut w).unwrap();
            assert_eq!(bits_of(&w), "1");
        }
    }

    #[test]
    fn long_burst_is_split() {
        let p = RleParams::new(4).unwrap();
        let mut w = BitWriter::new();
        encode_flags(&[false; 20], p, &mut w).unwrap();
        assert_eq!(bits_of(&w), "01111".to_owned() + "00011");
    }

    #[test]
    fn decode_examples() {
        let p = RleParams::new(4).unwrap();
        // 0 0100 1 packed MSB-first
        let bytes = [0b0010_0100];
        let mut r = BitReader::with_limit(&bytes, 6).unwrap();
        assert_eq!(decode_flags(&mut r, 6, p).unwrap(), flags_from("000001"));
        assert_eq!(r.remaining(), 0);

        let bytes = [0b1000_0000];
        let mut r = BitReader::with_limit(&bytes, 1).unwrap();
        assert_eq!(decode_flags(&mut r, 1, p).unwrap(), vec![true]);
    }

    #[test]
    fn decode_overrun_and_eos() {
        let p = RleParams::new(4).unwrap();
        let bytes = [0b0010_0100];
        let mut r = BitReader::with_limit(&bytes, 6).unwrap();
        assert!(matches!(
            decode_flags(&mut r, 3, p),
            Err(Error::DecodeOverrun)
        ));
        let mut r = BitReader::with_limit(&bytes, 6).unwrap();
        assert!(matches!(
            decode_flags(&mut r, 7, p),
            Err(Error::EndOfStream)
        ));
    }

    fn sparse_flags() -> impl Strategy<Value = Vec<bool>> {
        (0.0f64..=1.0)
            .prop_flat_map(|density| prop::collection::vec(prop::bool::weighted(density), 0..400))
    }

    proptest! {
        #[test]
        fn round_trip_and_size(flags in sparse_flags(), k in 1u32..=6) {
            let p = RleParams::new(k).unwrap();
            let mut w = BitWriter::new();
            encode_flags(&flags, p, &mut w).unwrap();
            prop_assert_eq!(w.bit_len(), encoded_size_bits(&flags, p));

            // closed form: nonzeros + (1+k) * sum over bursts of ceil(z / 2^k)
            let nonzeros = flags.iter().filter(|&&f| f).count() as u64;
            let symbols: u64 = flags
                .split(|&f| f)
                .map(|burst| (burst.len() as u64).div_ceil(1 << k))
                .sum();
            prop_assert_eq!(w.bit_len(), nonzeros + (1 + u64::from(k)) * symbols);

            let mut r = BitReader::with_limit(w.as_bytes(), w.bit_len()).unwrap();
            prop_assert_eq!(decode_flags(&mut r, flags.len(), p).unwrap(), flags);
            prop_assert_eq!(r.remaining(), 0);
        }

        #[test]
        fn one_bit_mask_never_loses_to_k1(flags in sparse_flags()) {
            let p = RleParams::new(1).unwrap();
            prop_assert!(flags.len() as u64 <= encoded_size_bits(&flags, p));
        }
    }
}
