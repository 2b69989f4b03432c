//! Byte framing shared by every codec.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "EBPC"
//!      4     1  version (1)
//!      5     1  m, word width in bits
//!      6     1  n, block size (0 when unused)
//!      7     1  k, zero-run field width (0 when unused)
//!      8     1  dtype tag (0 unsigned, 1 float bit pattern)
//!      9     1  method tag (0 ebpc, 1 zvc, 2 zero-rle, 3 bpc)
//!     10     2  reserved, zero
//!     12     8  element count, u64 LE
//!     20     8  payload bits, u64 LE
//!     28     *  payload, ceil(payload bits / 8) bytes, MSB-first
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"EBPC";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ebpc,
    Zvc,
    ZeroRle,
    Bpc,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Zvc, Method::ZeroRle, Method::Bpc, Method::Ebpc];

    pub fn tag(self) -> u8 {
        match self {
            Method::Ebpc => 0,
            Method::Zvc => 1,
            Method::ZeroRle => 2,
            Method::Bpc => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        Ok(match tag {
            0 => Method::Ebpc,
            1 => Method::Zvc,
            2 => Method::ZeroRle,
            3 => Method::Bpc,
            _ => return Err(Error::BadFormat(format!("unknown method tag {tag}"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Ebpc => "ebpc",
            Method::Zvc => "zvc",
            Method::ZeroRle => "zero-rle",
            Method::Bpc => "bpc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DType {
    #[default]
    Unsigned,
    /// IEEE bit patterns reinterpreted as unsigned words.
    Float,
}

impl DType {
    pub fn tag(self) -> u8 {
        match self {
            DType::Unsigned => 0,
            DType::Float => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(DType::Unsigned),
            1 => Ok(DType::Float),
            _ => Err(Error::BadFormat(format!("unknown dtype tag {tag}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub method: Method,
    pub m: u8,
    pub n: u8,
    pub k: u8,
    pub dtype: DType,
    pub element_count: u64,
    pub payload_bits: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedStream {
    pub header: Header,
    pub payload: Vec<u8>,
}

impl CompressedStream {
    pub fn element_count(&self) -> u64 {
        self.header.element_count
    }

    pub fn payload_bits(&self) -> u64 {
        self.header.payload_bits
    }

    pub fn uncompressed_bits(&self) -> u64 {
        self.header.element_count * u64::from(self.header.m)
    }

    /// Uncompressed over payload bits; the fixed header is not counted.
    /// Infinite for an empty payload.
    pub fn ratio(&self) -> f64 {
        self.uncompressed_bits() as f64 / self.header.payload_bits as f64
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&[VERSION, h.m, h.n, h.k, h.dtype.tag(), h.method.tag(), 0, 0]);
        out.extend_from_slice(&h.element_count.to_le_bytes());
        out.extend_from_slice(&h.payload_bits.to_le_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::BadFormat(format!(
                "container truncated: {} bytes, header needs {HEADER_LEN}",
                bytes.len()
            )));
        }
        if bytes[..4] != MAGIC {
            return Err(Error::BadFormat("bad magic, expected \"EBPC\"".into()));
        }
        if bytes[4] != VERSION {
            return Err(Error::BadFormat(format!(
                "unsupported version {}",
                bytes[4]
            )));
        }
        if bytes[10..12] != [0, 0] {
            return Err(Error::BadFormat(
                "reserved header bytes are not zero".into(),
            ));
        }
        let u64_at = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        let header = Header {
            m: bytes[5],
            n: bytes[6],
            k: bytes[7],
            dtype: DType::from_tag(bytes[8])?,
            method: Method::from_tag(bytes[9])?,
            element_count: u64_at(12),
            payload_bits: u64_at(20),
        };
        let payload = &bytes[HEADER_LEN..];
        let expected = header.payload_bits.div_ceil(8);
        if payload.len() as u64 != expected {
            return Err(Error::BadFormat(format!(
                "payload is {} bytes, header declares {expected}",
                payload.len()
            )));
        }
        Ok(Self {
            header,
            payload: payload.to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CompressedStream {
        CompressedStream {
            header: Header {
                method: Method::Ebpc,
                m: 16,
                n: 16,
                k: 4,
                dtype: DType::Unsigned,
                element_count: 32,
                payload_bits: 10,
            },
            payload: vec![0b0111_1011, 0b1100_0000],
        }
    }

    #[test]
    fn header_layout_is_fixed() {
        let bytes = sample().to_bytes();
        assert_eq!(bytes.len(), HEADER_LEN + 2);
        assert_eq!(&bytes[..12], b"EBPC\x01\x10\x10\x04\x00\x00\x00\x00");
        assert_eq!(&bytes[12..20], &32u64.to_le_bytes());
        assert_eq!(&bytes[20..28], &10u64.to_le_bytes());
        assert_eq!(CompressedStream::from_bytes(&bytes).unwrap(), sample());
    }

    #[test]
    fn rejects_malformed_headers() {
        let good = sample().to_bytes();
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(
            CompressedStream::from_bytes(&bad),
            Err(Error::BadFormat(_))
        ));
        let mut bad = good.clone();
        bad[4] = 2;
        assert!(CompressedStream::from_bytes(&bad).is_err());
        let mut bad = good.clone();
        bad[9] = 9;
        assert!(CompressedStream::from_bytes(&bad).is_err());
        assert!(CompressedStream::from_bytes(&good[..good.len() - 1]).is_err());
        assert!(CompressedStream::from_bytes(&good[..10]).is_err());
        let mut long = good;
        long.push(0);
        assert!(CompressedStream::from_bytes(&long).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(Method::from_tag(m.tag()).unwrap(), m);
        }
        assert!("lz4".parse::<Method>().is_err());
    }
}
