//! C ABI over the cjkpack codec and metrics.
//!
//! Every fallible function returns a [`CjkStatus`]; on failure a message is
//! available from [`cjk_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their matching `*_free` function.
//! Output buffers follow one rule: when `cap` is too small the call returns
//! `CJK_STATUS_BUFFER_TOO_SMALL` and writes the required length to `out_len`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cjkpack::{
    bitcodec, metrics, DecodeMode, Error, FreqHistogram, PackedChar, PrefixClass, SemanticToken,
    StreamDecoder, VocabMap,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CjkStatus {
    Ok = 0,
    NullPointer = 1,
    IneligibleChar = 2,
    PayloadOutOfRange = 3,
    NotBaseline = 4,
    Decode = 5,
    Vocab = 6,
    UnknownId = 7,
    InvalidArgument = 8,
    BufferTooSmall = 9,
    InvalidUtf8 = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CjkDecodeMode {
    Strict = 0,
    Lenient = 1,
}

impl From<CjkDecodeMode> for DecodeMode {
    fn from(m: CjkDecodeMode) -> Self {
        match m {
            CjkDecodeMode::Strict => DecodeMode::Strict,
            CjkDecodeMode::Lenient => DecodeMode::Lenient,
        }
    }
}

/// A repacked character. `prefix_bits6` is 0x39, 0x3A or 0x3B.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CjkPackedChar {
    pub prefix_bits6: u8,
    pub hi: u16,
    pub lo: u16,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CjkEncodeReport {
    pub input_len: usize,
    pub output_len: usize,
    pub reduction: f64,
    pub prefix_emissions: usize,
    pub prefix_switches: usize,
    pub compressed_chars: usize,
    pub raw_bytes_passed: usize,
}

/// Opaque id layout handle.
pub struct CjkVocabMap(VocabMap);

/// Opaque incremental decoder handle.
pub struct CjkDecoder {
    map: VocabMap,
    mode: DecodeMode,
    inner: StreamDecoder,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> CjkStatus {
    match e {
        Error::IneligibleChar(..) => CjkStatus::IneligibleChar,
        Error::PayloadOutOfRange(_) => CjkStatus::PayloadOutOfRange,
        Error::NotBaseline { .. } => CjkStatus::NotBaseline,
        Error::Decode { .. } => CjkStatus::Decode,
        Error::Vocab(_) => CjkStatus::Vocab,
        Error::UnknownId(_) => CjkStatus::UnknownId,
        _ => CjkStatus::InvalidArgument,
    }
}

/// Runs `f`, translating errors and panics into a status code.
fn guard<F>(f: F) -> CjkStatus
where
    F: FnOnce() -> Result<(), CjkStatus>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CjkStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_last_error("internal panic");
            CjkStatus::Panic
        }
    }
}

fn fail(e: Error) -> CjkStatus {
    set_last_error(e.to_string());
    status_of(&e)
}

fn null(what: &str) -> CjkStatus {
    set_last_error(format!("{what} is null"));
    CjkStatus::NullPointer
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], CjkStatus> {
    if len == 0 {
        Ok(&[])
    } else if ptr.is_null() {
        Err(null(what))
    } else {
        Ok(std::slice::from_raw_parts(ptr, len))
    }
}

unsafe fn write_out<T: Copy>(out: *mut T, value: T, what: &str) -> Result<(), CjkStatus> {
    if out.is_null() {
        return Err(null(what));
    }
    *out = value;
    Ok(())
}

unsafe fn copy_to_buffer(
    src: &[u32],
    out: *mut u32,
    cap: usize,
    out_len: *mut usize,
) -> Result<(), CjkStatus> {
    write_out(out_len, src.len(), "out_len")?;
    if src.len() > cap {
        set_last_error(format!("buffer holds {cap} ids, need {}", src.len()));
        return Err(CjkStatus::BufferTooSmall);
    }
    if !src.is_empty() {
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    }
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn cjk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cjk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Shared 6-bit prefix of a lead byte, or 0 when the byte is not in E4..EF.
#[no_mangle]
pub extern "C" fn cjk_classify_lead_byte(b: u8) -> u8 {
    bitcodec::classify_lead_byte(b).map_or(0, PrefixClass::bits6)
}

#[no_mangle]
pub unsafe extern "C" fn cjk_pack_char(
    b1: u8,
    b2: u8,
    b3: u8,
    out: *mut CjkPackedChar,
) -> CjkStatus {
    guard(|| {
        let p = bitcodec::pack_char(b1, b2, b3).map_err(fail)?;
        write_out(
            out,
            CjkPackedChar {
                prefix_bits6: p.prefix().bits6(),
                hi: p.hi(),
                lo: p.lo(),
            },
            "out",
        )
    })
}

/// Writes the three UTF-8 bytes of `packed` to `out[0..3]`.
#[no_mangle]
pub unsafe extern "C" fn cjk_unpack_char(packed: CjkPackedChar, out: *mut u8) -> CjkStatus {
    guard(|| {
        let prefix = PrefixClass::from_bits6(packed.prefix_bits6).ok_or_else(|| {
            set_last_error(format!(
                "0x{:02X} is not a prefix class",
                packed.prefix_bits6
            ));
            CjkStatus::InvalidArgument
        })?;
        let p = PackedChar::new(prefix, packed.hi, packed.lo).map_err(fail)?;
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(bitcodec::unpack_char(p).as_ptr(), out, 3);
        Ok(())
    })
}

/// Default layout: bytes at `base`, extended payloads at `base + 256`, prefixes at `base + 512`.
#[no_mangle]
pub extern "C" fn cjk_vocab_map_new_contiguous(base: u32) -> *mut CjkVocabMap {
    if base > u32::MAX - cjkpack::tokenstream::RESERVED_IDS {
        set_last_error("base too large");
        return ptr::null_mut();
    }
    Box::into_raw(Box::new(CjkVocabMap(VocabMap::contiguous(base))))
}

/// Parses a JSON vocabulary map (`byte_ids`, `ext_ids`, `prefix_ids`, optional `vocab_size`).
#[no_mangle]
pub unsafe extern "C" fn cjk_vocab_map_from_json(
    json: *const c_char,
    out: *mut *mut CjkVocabMap,
) -> CjkStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| {
            set_last_error(e.to_string());
            CjkStatus::InvalidUtf8
        })?;
        let vm = VocabMap::from_json(text).map_err(|e| match e {
            Error::Json(_) => {
                set_last_error(e.to_string());
                CjkStatus::Vocab
            }
            e => fail(e),
        })?;
        write_out(out, Box::into_raw(Box::new(CjkVocabMap(vm))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn cjk_vocab_map_free(vm: *mut CjkVocabMap) {
    if !vm.is_null() {
        drop(Box::from_raw(vm));
    }
}

/// Compresses one baseline id sequence. The output is never longer than the input.
#[no_mangle]
pub unsafe extern "C" fn cjk_encode_ids(
    vm: *const CjkVocabMap,
    ids: *const u32,
    len: usize,
    out: *mut u32,
    cap: usize,
    out_len: *mut usize,
    report: *mut CjkEncodeReport,
) -> CjkStatus {
    guard(|| {
        let vm = &vm.as_ref().ok_or_else(|| null("vm"))?.0;
        let ids = slice(ids, len, "ids")?;
        let toks = cjkpack::from_ids(ids, vm).map_err(fail)?;
        let (packed, rep) = cjkpack::encode_stream(&toks).map_err(fail)?;
        let packed_ids = cjkpack::to_ids(&packed, vm).map_err(fail)?;
        if !report.is_null() {
            *report = CjkEncodeReport {
                input_len: rep.input_len,
                output_len: rep.output_len,
                reduction: rep.reduction,
                prefix_emissions: rep.prefix_emissions,
                prefix_switches: rep.prefix_switches,
                compressed_chars: rep.compressed_chars,
                raw_bytes_passed: rep.raw_bytes_passed,
            };
        }
        copy_to_buffer(&packed_ids, out, cap, out_len)
    })
}

/// Restores one compressed id sequence. The output is at most `len * 3 / 2` ids.
/// `decode_errors` (optional) receives the number of skipped problems in lenient mode.
#[no_mangle]
pub unsafe extern "C" fn cjk_decode_ids(
    vm: *const CjkVocabMap,
    ids: *const u32,
    len: usize,
    mode: CjkDecodeMode,
    out: *mut u32,
    cap: usize,
    out_len: *mut usize,
    decode_errors: *mut usize,
) -> CjkStatus {
    guard(|| {
        let vm = &vm.as_ref().ok_or_else(|| null("vm"))?.0;
        let ids = slice(ids, len, "ids")?;
        let toks = cjkpack::from_ids(ids, vm).map_err(fail)?;
        let rep = cjkpack::decode_stream(&toks, mode.into()).map_err(fail)?;
        if !decode_errors.is_null() {
            *decode_errors = rep.decode_errors();
        }
        let restored = cjkpack::to_ids(&rep.tokens, vm).map_err(fail)?;
        copy_to_buffer(&restored, out, cap, out_len)
    })
}

/// Creates an incremental decoder bound to a copy of `vm`.
#[no_mangle]
pub unsafe extern "C" fn cjk_decoder_new(
    vm: *const CjkVocabMap,
    mode: CjkDecodeMode,
) -> *mut CjkDecoder {
    match vm.as_ref() {
        Some(vm) => Box::into_raw(Box::new(CjkDecoder {
            map: vm.0.clone(),
            mode: mode.into(),
            inner: StreamDecoder::new(mode.into()),
        })),
        None => {
            set_last_error("vm is null");
            ptr::null_mut()
        }
    }
}

/// Feeds one id. Completed baseline ids (0, 1 or 3 of them) are written to `out[0..3]`.
#[no_mangle]
pub unsafe extern "C" fn cjk_decoder_push(
    dec: *mut CjkDecoder,
    id: u32,
    out: *mut u32,
    out_len: *mut usize,
) -> CjkStatus {
    guard(|| {
        let dec = dec.as_mut().ok_or_else(|| null("dec"))?;
        let tok: SemanticToken = dec.map.token_of(id).map_err(fail)?;
        let mut emitted = Vec::with_capacity(3);
        dec.inner.push(tok, &mut emitted).map_err(fail)?;
        let ids = cjkpack::to_ids(&emitted, &dec.map).map_err(fail)?;
        copy_to_buffer(&ids, out, 3, out_len)
    })
}

/// Ends the current sequence and resets the decoder for the next one.
/// `decode_errors` (optional) receives the lenient-mode error count for the sequence.
#[no_mangle]
pub unsafe extern "C" fn cjk_decoder_finish(
    dec: *mut CjkDecoder,
    decode_errors: *mut usize,
) -> CjkStatus {
    guard(|| {
        let dec = dec.as_mut().ok_or_else(|| null("dec"))?;
        let inner = std::mem::replace(&mut dec.inner, StreamDecoder::new(dec.mode));
        let issues = inner.finish().map_err(fail)?;
        if !decode_errors.is_null() {
            *decode_errors = issues.len();
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cjk_decoder_free(dec: *mut CjkDecoder) {
    if !dec.is_null() {
        drop(Box::from_raw(dec));
    }
}

#[no_mangle]
pub unsafe extern "C" fn cjk_relative_gain(
    control_len: u64,
    experimental_len: u64,
    out: *mut f64,
) -> CjkStatus {
    guard(|| {
        let g = metrics::relative_gain(control_len, experimental_len).map_err(fail)?;
        write_out(out, g, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn cjk_perceived_tps(tps: f64, gain: f64, out: *mut f64) -> CjkStatus {
    guard(|| {
        let v = metrics::perceived_tps(tps, gain).map_err(fail)?;
        write_out(out, v, "out")
    })
}

unsafe fn histogram(
    counts: *const u64,
    len: usize,
    vocab_size: usize,
) -> Result<FreqHistogram, CjkStatus> {
    let counts = slice(counts, len, "counts")?;
    let mut h = FreqHistogram::new(vocab_size);
    for (i, &c) in counts.iter().enumerate() {
        let id = u32::try_from(i).map_err(|_| {
            set_last_error("too many counts");
            CjkStatus::InvalidArgument
        })?;
        h.add(id, c);
    }
    Ok(h)
}

/// Rényi entropy in nats of the distribution given by `counts[0..len]`.
#[no_mangle]
pub unsafe extern "C" fn cjk_renyi_entropy(
    counts: *const u64,
    len: usize,
    alpha: f64,
    out: *mut f64,
) -> CjkStatus {
    guard(|| {
        let h = histogram(counts, len, len)?;
        let v = metrics::renyi_entropy(&h, alpha).map_err(fail)?;
        write_out(out, v, "out")
    })
}

/// Rényi entropy divided by `ln(vocab_size)`.
#[no_mangle]
pub unsafe extern "C" fn cjk_renyi_efficiency(
    counts: *const u64,
    len: usize,
    vocab_size: usize,
    alpha: f64,
    out: *mut f64,
) -> CjkStatus {
    guard(|| {
        let h = histogram(counts, len, vocab_size)?;
        let v = metrics::renyi_efficiency(&h, alpha).map_err(fail)?;
        write_out(out, v, "out")
    })
}
