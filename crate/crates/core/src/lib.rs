//! Lossless streaming compression for sparse fixed-point tensor data.
//!
//! The main codec splits a word stream into a zero/non-zero flag stream,
//! run-length codes the zero bursts, and packs the non-zero words with
//! block-wise bit-plane compression, all in one bitstream. Reference codecs
//! (ZVC, zero-run coding alone, plain bit-plane compression) and an analysis
//! harness for measuring compression ratios on tensor corpora live
//! alongside it.

pub mod analysis;
pub mod baseline;
pub mod bitstream;
pub mod bpc;
pub mod codec;
pub mod container;
pub mod error;
pub mod synthetic;
pub mod tensor;
pub mod zero_rle;

pub use codec::{compress, compressed_size_bits, decompress, EbpcParams, Encoder};
pub use container::{CompressedStream, DType, Method};
pub use error::{Error, Result};
pub use tensor::{Layout, TensorRecord};

use bpc::BpcParams;
use zero_rle::RleParams;

/// Compress with any method. `params.m` applies to all of them; `n` and `k`
/// only where the method uses them.
pub fn compress_with(
    method: Method,
    words: &[u32],
    params: EbpcParams,
) -> Result<CompressedStream> {
    match method {
        Method::Ebpc => codec::compress(words, params),
        Method::Zvc => baseline::zvc_compress(words, params.m),
        Method::ZeroRle => {
            baseline::zero_rle_only_compress(words, params.m, RleParams::new(params.k)?)
        }
        Method::Bpc => baseline::raw_bpc_compress(words, BpcParams::new(params.m, params.n)?),
    }
}

/// Payload bits `compress_with` would produce.
pub fn size_bits_with(method: Method, words: &[u32], params: EbpcParams) -> Result<u64> {
    match method {
        Method::Ebpc => codec::compressed_size_bits(words, params),
        Method::Zvc => Ok(baseline::zvc_size_bits(words, params.m)),
        Method::ZeroRle => Ok(baseline::zero_rle_only_size_bits(
            words,
            params.m,
            RleParams::new(params.k)?,
        )),
        Method::Bpc => baseline::raw_bpc_size_bits(words, BpcParams::new(params.m, params.n)?),
    }
}

/// Decode a stream of any method, chosen by its header.
pub fn decompress_any(s: &CompressedStream) -> Result<Vec<u32>> {
    match s.header.method {
        Method::Ebpc => codec::decompress(s),
        Method::Zvc => baseline::zvc_decompress(s),
        Method::ZeroRle => baseline::zero_rle_only_decompress(s),
        Method::Bpc => baseline::raw_bpc_decompress(s),
    }
}
