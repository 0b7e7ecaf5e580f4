//! Lossless sub-byte compression of UTF-8 byte-fallback token runs.
//!
//! Byte-fallback tokenizers spell each uncovered CJK character as three byte
//! tokens whose lead bytes share one of three 6-bit prefixes. This crate
//! repacks those characters as a shared prefix token followed by two 9-bit
//! payload tokens per character, and ships the measurement tools used to
//! judge the trade-off: length reduction, Rényi efficiency and perceived
//! throughput.
//!
//! ```
//! use cjkpack::{decode_stream, encode_stream, tokenize, DecodeMode, SubwordVocab};
//!
//! let vocab = SubwordVocab::byte_only();
//! let base = tokenize("众唤众", &vocab);
//! let (packed, report) = encode_stream(&base).unwrap();
//! assert_eq!((base.len(), packed.len()), (9, 7));
//! assert!((report.reduction - 2.0 / 9.0).abs() < 1e-12);
//! assert_eq!(decode_stream(&packed, DecodeMode::Strict).unwrap().tokens, base);
//! ```

pub mod bitcodec;
pub mod cli;
mod error;
pub mod metrics;
pub mod streamfile;
pub mod tokenizer;
pub mod tokenstream;

pub use bitcodec::{classify_lead_byte, pack_char, unpack_char, PackedChar, PrefixClass};
pub use error::{Error, Result};
pub use metrics::{
    byte_portion, length_reduction_report, perceived_tps, relative_gain, renyi_efficiency,
    renyi_entropy, FreqHistogram, LengthReport, Scheme, Scope, ThroughputReport,
};
pub use tokenizer::{detokenize, tokenize, Detokenized, SubwordVocab};
pub use tokenstream::{
    decode_stream, encode_stream, from_ids, segment_byte_runs, to_ids, DecodeErrorKind,
    DecodeIssue, DecodeMode, DecodeReport, EncodeReport, SemanticToken, StreamDecoder, VocabMap,
};
