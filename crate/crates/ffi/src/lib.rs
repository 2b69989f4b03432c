//! C ABI over the `ebpc` codec.
//!
//! Results come back through opaque handles that the caller releases with
//! the matching `*_free` function. Every entry point returns an
//! [`EbpcStatus`]; `ebpc_last_error` gives the detailed message for the most
//! recent failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ebpc::{CompressedStream, EbpcParams, Error, Method};

/// Status codes shared by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EbpcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParams = 2,
    /// An input word does not fit in the word width.
    ValueOutOfRange = 3,
    /// The stream is truncated or does not decode.
    CorruptStream = 4,
    /// The bytes are not a valid container.
    BadFormat = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EbpcMethod {
    Ebpc = 0,
    Zvc = 1,
    ZeroRle = 2,
    Bpc = 3,
}

impl From<EbpcMethod> for Method {
    fn from(m: EbpcMethod) -> Self {
        match m {
            EbpcMethod::Ebpc => Method::Ebpc,
            EbpcMethod::Zvc => Method::Zvc,
            EbpcMethod::ZeroRle => Method::ZeroRle,
            EbpcMethod::Bpc => Method::Bpc,
        }
    }
}

/// A serialized container: header plus payload.
pub struct EbpcBuffer {
    bytes: Vec<u8>,
    payload_bits: u64,
}

/// Decoded words.
pub struct EbpcWords {
    words: Vec<u32>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn status_of(e: &Error) -> EbpcStatus {
    match e {
        Error::InvalidParams(_) | Error::FieldTooWide(_) | Error::WrongLength { .. } => {
            EbpcStatus::InvalidParams
        }
        Error::ValueOutOfRange { .. } => EbpcStatus::ValueOutOfRange,
        Error::EndOfStream
        | Error::DecodeOverrun
        | Error::CorruptBlock(_)
        | Error::TrailingBits { .. }
        | Error::CountMismatch { .. } => EbpcStatus::CorruptStream,
        Error::BadFormat(_) => EbpcStatus::BadFormat,
        _ => EbpcStatus::Internal,
    }
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

/// Run `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (EbpcStatus, String)>) -> EbpcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EbpcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            EbpcStatus::Internal
        }
    }
}

fn lib_err(e: Error) -> (EbpcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (EbpcStatus, String) {
    (EbpcStatus::NullPointer, format!("{name} is null"))
}

/// # Safety
/// `ptr` must point to `len` readable items unless `len` is 0.
unsafe fn slice<'a, T>(
    ptr: *const T,
    len: usize,
    name: &str,
) -> Result<&'a [T], (EbpcStatus, String)> {
    if len == 0 {
        Ok(&[])
    } else if ptr.is_null() {
        Err(null(name))
    } else {
        Ok(std::slice::from_raw_parts(ptr, len))
    }
}

fn params(m: u32, n: usize, k: u32) -> Result<EbpcParams, (EbpcStatus, String)> {
    EbpcParams::new(m, n, k).map_err(lib_err)
}

/// Compress `len` words of width `m` with block size `n` and run field width
/// `k` using `method`. On success `*out` owns a new buffer.
///
/// # Safety
/// `words` must point to `len` readable words (or may be null when `len` is
/// 0) and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ebpc_compress_with(
    method: EbpcMethod,
    words: *const u32,
    len: usize,
    m: u32,
    n: usize,
    k: u32,
    out: *mut *mut EbpcBuffer,
) -> EbpcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let words = slice(words, len, "words")?;
        let stream =
            ebpc::compress_with(method.into(), words, params(m, n, k)?).map_err(lib_err)?;
        let buffer = EbpcBuffer {
            payload_bits: stream.payload_bits(),
            bytes: stream.to_bytes(),
        };
        *out = Box::into_raw(Box::new(buffer));
        Ok(())
    })
}

/// [`ebpc_compress_with`] using the EBPC method.
///
/// # Safety
/// As for [`ebpc_compress_with`].
#[no_mangle]
pub unsafe extern "C" fn ebpc_compress(
    words: *const u32,
    len: usize,
    m: u32,
    n: usize,
    k: u32,
    out: *mut *mut EbpcBuffer,
) -> EbpcStatus {
    ebpc_compress_with(EbpcMethod::Ebpc, words, len, m, n, k, out)
}

/// Payload size in bits EBPC would produce, without building the stream.
///
/// # Safety
/// `words` as for [`ebpc_compress_with`]; `out_bits` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ebpc_compressed_size_bits(
    words: *const u32,
    len: usize,
    m: u32,
    n: usize,
    k: u32,
    out_bits: *mut u64,
) -> EbpcStatus {
    guard(|| {
        if out_bits.is_null() {
            return Err(null("out_bits"));
        }
        let words = slice(words, len, "words")?;
        *out_bits = ebpc::compressed_size_bits(words, params(m, n, k)?).map_err(lib_err)?;
        Ok(())
    })
}

/// Decode a container produced by any method. On success `*out` owns the
/// decoded words.
///
/// # Safety
/// `bytes` must point to `len` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ebpc_decompress(
    bytes: *const u8,
    len: usize,
    out: *mut *mut EbpcWords,
) -> EbpcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let bytes = slice(bytes, len, "bytes")?;
        let stream = CompressedStream::from_bytes(bytes).map_err(lib_err)?;
        let words = ebpc::decompress_any(&stream).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(EbpcWords { words }));
        Ok(())
    })
}

/// # Safety
/// `buf` must be null or a live buffer from this library.
#[no_mangle]
pub unsafe extern "C" fn ebpc_buffer_data(buf: *const EbpcBuffer) -> *const u8 {
    buf.as_ref().map_or(ptr::null(), |b| b.bytes.as_ptr())
}

/// Length in bytes, header included.
///
/// # Safety
/// `buf` must be null or a live buffer from this library.
#[no_mangle]
pub unsafe extern "C" fn ebpc_buffer_len(buf: *const EbpcBuffer) -> usize {
    buf.as_ref().map_or(0, |b| b.bytes.len())
}

/// # Safety
/// `buf` must be null or a live buffer from this library.
#[no_mangle]
pub unsafe extern "C" fn ebpc_buffer_payload_bits(buf: *const EbpcBuffer) -> u64 {
    buf.as_ref().map_or(0, |b| b.payload_bits)
}

/// # Safety
/// `buf` must be null or a buffer from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ebpc_buffer_free(buf: *mut EbpcBuffer) {
    if !buf.is_null() {
        drop(Box::from_raw(buf));
    }
}

/// # Safety
/// `words` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ebpc_words_data(words: *const EbpcWords) -> *const u32 {
    words.as_ref().map_or(ptr::null(), |w| w.words.as_ptr())
}

/// # Safety
/// `words` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ebpc_words_len(words: *const EbpcWords) -> usize {
    words.as_ref().map_or(0, |w| w.words.len())
}

/// # Safety
/// `words` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ebpc_words_free(words: *mut EbpcWords) {
    if !words.is_null() {
        drop(Box::from_raw(words));
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn ebpc_status_message(status: EbpcStatus) -> *const c_char {
    let msg: &'static CStr = match status {
        EbpcStatus::Ok => c"ok",
        EbpcStatus::NullPointer => c"null pointer argument",
        EbpcStatus::InvalidParams => c"invalid parameters",
        EbpcStatus::ValueOutOfRange => c"word does not fit the word width",
        EbpcStatus::CorruptStream => c"corrupt or truncated stream",
        EbpcStatus::BadFormat => c"not a valid container",
        EbpcStatus::Internal => c"internal error",
    };
    msg.as_ptr()
}

/// Message for the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ebpc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
