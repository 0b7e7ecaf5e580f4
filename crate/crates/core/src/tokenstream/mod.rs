//! Whole-sequence transforms between baseline byte-fallback streams and the
//! compressed prefix + 9-bit payload form.

mod ids;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bitcodec::{self, PackedChar, PrefixClass, PAYLOAD_MAX};
use crate::error::{Error, Result};

pub use ids::{from_ids, to_ids, VocabMap, VocabMapFile, RESERVED_IDS};

/// One element of a token stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemanticToken {
    /// A vocabulary entry, carried by its tokenizer id.
    Subword(u32),
    /// A byte-fallback token, or a 9-bit payload below 256.
    Byte(u8),
    /// A 9-bit payload in `256..=511`.
    ExtByte(u16),
    /// Shared 6-bit prefix for the payload pairs that follow.
    Prefix(PrefixClass),
}

impl SemanticToken {
    /// The token carrying a 9-bit payload value.
    pub fn payload(v: u16) -> SemanticToken {
        debug_assert!(v <= PAYLOAD_MAX);
        match u8::try_from(v) {
            Ok(b) => SemanticToken::Byte(b),
            Err(_) => SemanticToken::ExtByte(v),
        }
    }

    pub fn payload_value(self) -> Option<u16> {
        match self {
            SemanticToken::Byte(b) => Some(u16::from(b)),
            SemanticToken::ExtByte(v) => Some(v),
            _ => None,
        }
    }

    /// Byte, extended payload or prefix: everything that is not a subword.
    pub fn is_byte_class(self) -> bool {
        !matches!(self, SemanticToken::Subword(_))
    }

    pub fn is_baseline(self) -> bool {
        matches!(self, SemanticToken::Subword(_) | SemanticToken::Byte(_))
    }
}

impl fmt::Display for SemanticToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemanticToken::Subword(id) => write!(f, "subword#{id}"),
            SemanticToken::Byte(b) => write!(f, "0x{b:02X}"),
            SemanticToken::ExtByte(v) => write!(f, "0x{v:03X}"),
            SemanticToken::Prefix(p) => write!(f, "{p}"),
        }
    }
}

/// A maximal span of byte tokens, split into a raw head and a compressible tail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ByteRun {
    /// Offset of the first byte token in the source stream.
    pub start: usize,
    pub bytes: Vec<u8>,
    /// `bytes[..split]` passes through raw; `bytes[split..]` is a whole number
    /// of eligible 3-byte characters.
    pub split: usize,
}

impl ByteRun {
    pub fn raw(&self) -> &[u8] {
        &self.bytes[..self.split]
    }

    pub fn compressible(&self) -> &[u8] {
        &self.bytes[self.split..]
    }

    pub fn chars(&self) -> usize {
        (self.bytes.len() - self.split) / 3
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Segment {
    Subword(u32),
    Bytes(ByteRun),
}

/// Start of the longest suffix of `bytes` made entirely of eligible characters.
fn compressible_split(bytes: &[u8]) -> usize {
    let mut split = bytes.len();
    while split >= 3 {
        let c = &bytes[split - 3..split];
        if !bitcodec::is_eligible(c[0], c[1], c[2]) {
            break;
        }
        split -= 3;
    }
    split
}

/// Splits a baseline stream into subwords and maximal byte runs.
///
/// Within a run only the maximal eligible suffix is marked compressible:
/// once a prefix is active the decoder reads payload pairs until the next
/// subword, prefix or end of stream, so raw bytes can precede a compressed
/// segment but never follow one.
pub fn segment_byte_runs(stream: &[SemanticToken]) -> Result<Vec<Segment>> {
    let mut segments = Vec::new();
    let mut run: Option<ByteRun> = None;
    for (i, &tok) in stream.iter().enumerate() {
        match tok {
            SemanticToken::Byte(b) => run
                .get_or_insert_with(|| ByteRun {
                    start: i,
                    bytes: Vec::new(),
                    split: 0,
                })
                .bytes
                .push(b),
            SemanticToken::Subword(id) => {
                if let Some(r) = run.take() {
                    segments.push(Segment::Bytes(r));
                }
                segments.push(Segment::Subword(id));
            }
            _ => return Err(Error::NotBaseline { position: i }),
        }
    }
    segments.extend(run.map(Segment::Bytes));
    for seg in &mut segments {
        if let Segment::Bytes(r) = seg {
            r.split = compressible_split(&r.bytes);
        }
    }
    Ok(segments)
}

/// Counters describing one encode pass.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EncodeReport {
    pub input_len: usize,
    pub output_len: usize,
    /// `(input_len - output_len) / input_len`, or 0 for an empty input.
    pub reduction: f64,
    /// Prefix tokens emitted, one per compressed segment plus one per class change.
    pub prefix_emissions: usize,
    /// Class changes inside compressed segments.
    pub prefix_switches: usize,
    pub compressed_chars: usize,
    pub raw_bytes_passed: usize,
}

impl EncodeReport {
    /// Folds another report into this one, as if the two inputs had been concatenated.
    pub fn merge(&mut self, other: &EncodeReport) {
        self.input_len += other.input_len;
        self.output_len += other.output_len;
        self.prefix_emissions += other.prefix_emissions;
        self.prefix_switches += other.prefix_switches;
        self.compressed_chars += other.compressed_chars;
        self.raw_bytes_passed += other.raw_bytes_passed;
        self.reduction = reduction(self.input_len, self.output_len);
    }
}

pub(crate) fn reduction(before: usize, after: usize) -> f64 {
    if before == 0 {
        0.0
    } else {
        (before as f64 - after as f64) / before as f64
    }
}

/// Compresses a baseline stream.
pub fn encode_stream(stream: &[SemanticToken]) -> Result<(Vec<SemanticToken>, EncodeReport)> {
    let segments = segment_byte_runs(stream)?;
    let mut out = Vec::with_capacity(stream.len());
    let mut report = EncodeReport {
        input_len: stream.len(),
        ..EncodeReport::default()
    };
    for seg in segments {
        let run = match seg {
            Segment::Subword(id) => {
                out.push(SemanticToken::Subword(id));
                continue;
            }
            Segment::Bytes(run) => run,
        };
        out.extend(run.raw().iter().map(|&b| SemanticToken::Byte(b)));
        report.raw_bytes_passed += run.split;

        let mut current: Option<PrefixClass> = None;
        for c in run.compressible().chunks_exact(3) {
            let packed = bitcodec::pack_char(c[0], c[1], c[2])?;
            if current != Some(packed.prefix()) {
                if current.is_some() {
                    report.prefix_switches += 1;
                }
                current = Some(packed.prefix());
                out.push(SemanticToken::Prefix(packed.prefix()));
                report.prefix_emissions += 1;
            }
            out.push(SemanticToken::payload(packed.hi()));
            out.push(SemanticToken::payload(packed.lo()));
            report.compressed_chars += 1;
        }
    }
    report.output_len = out.len();
    report.reduction = reduction(report.input_len, report.output_len);
    Ok((out, report))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecodeMode {
    #[default]
    Strict,
    Lenient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeErrorKind {
    /// Extended payload with no active prefix.
    OrphanExtByte,
    /// Payload segment interrupted or ended after an odd number of payloads.
    UnpairedPayload,
    /// A payload pair whose re-aligned trailing bytes are not continuation bytes.
    InvalidPair,
}

impl fmt::Display for DecodeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecodeErrorKind::OrphanExtByte => "extended payload without an active prefix",
            DecodeErrorKind::UnpairedPayload => "payload segment ends mid-pair",
            DecodeErrorKind::InvalidPair => "payload pair does not re-align to continuation bytes",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeIssue {
    /// Offset in the compressed stream of the first offending token.
    pub position: usize,
    pub kind: DecodeErrorKind,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DecodeReport {
    /// Baseline-form output.
    pub tokens: Vec<SemanticToken>,
    /// Skipped problems, in stream order. Always empty in strict mode.
    pub issues: Vec<DecodeIssue>,
}

impl DecodeReport {
    pub fn decode_errors(&self) -> usize {
        self.issues.len()
    }

    pub fn error_positions(&self) -> Vec<usize> {
        self.issues.iter().map(|i| i.position).collect()
    }
}

/// Incremental decoder for compressed streams.
///
/// Tokens are fed one at a time, so partial model output can be decoded as
/// it is generated. A prefix token opens a payload segment that lasts until
/// the next subword, prefix or end of stream; every two payloads inside it
/// re-align to one 3-byte character.
#[derive(Clone, Debug)]
pub struct StreamDecoder {
    mode: DecodeMode,
    prefix: Option<PrefixClass>,
    pending: Option<(u16, usize)>,
    position: usize,
    issues: Vec<DecodeIssue>,
}

impl StreamDecoder {
    pub fn new(mode: DecodeMode) -> Self {
        StreamDecoder {
            mode,
            prefix: None,
            pending: None,
            position: 0,
            issues: Vec::new(),
        }
    }

    pub fn active_prefix(&self) -> Option<PrefixClass> {
        self.prefix
    }

    pub fn issues(&self) -> &[DecodeIssue] {
        &self.issues
    }

    fn fail(&mut self, kind: DecodeErrorKind, position: usize) -> Result<()> {
        match self.mode {
            DecodeMode::Strict => Err(Error::Decode { kind, position }),
            DecodeMode::Lenient => {
                self.issues.push(DecodeIssue { position, kind });
                Ok(())
            }
        }
    }

    fn flush_pending(&mut self) -> Result<()> {
        match self.pending.take() {
            Some((_, pos)) => self.fail(DecodeErrorKind::UnpairedPayload, pos),
            None => Ok(()),
        }
    }

    /// Consumes one token, appending any completed baseline tokens to `out`.
    pub fn push(&mut self, tok: SemanticToken, out: &mut Vec<SemanticToken>) -> Result<()> {
        let pos = self.position;
        self.position += 1;
        match tok {
            SemanticToken::Subword(_) => {
                self.flush_pending()?;
                self.prefix = None;
                out.push(tok);
            }
            SemanticToken::Prefix(p) => {
                self.flush_pending()?;
                self.prefix = Some(p);
            }
            SemanticToken::Byte(_) | SemanticToken::ExtByte(_) => {
                let value = tok.payload_value().expect("payload token");
                let Some(prefix) = self.prefix else {
                    return match tok {
                        SemanticToken::Byte(b) => {
                            out.push(SemanticToken::Byte(b));
                            Ok(())
                        }
                        _ => self.fail(DecodeErrorKind::OrphanExtByte, pos),
                    };
                };
                if value > PAYLOAD_MAX {
                    // only reachable through a hand-built ExtByte
                    return self.fail(DecodeErrorKind::OrphanExtByte, pos);
                }
                match self.pending.take() {
                    None => self.pending = Some((value, pos)),
                    Some((hi, hi_pos)) => {
                        let packed = PackedChar::new(prefix, hi, value)?;
                        let bytes = bitcodec::unpack_char(packed);
                        if !(bitcodec::is_continuation(bytes[1])
                            && bitcodec::is_continuation(bytes[2]))
                        {
                            return self.fail(DecodeErrorKind::InvalidPair, hi_pos);
                        }
                        out.extend(bytes.map(SemanticToken::Byte));
                    }
                }
            }
        }
        Ok(())
    }

    /// Signals end of stream and returns the recorded issues.
    pub fn finish(mut self) -> Result<Vec<DecodeIssue>> {
        self.flush_pending()?;
        Ok(self.issues)
    }
}

/// Restores a baseline stream from its compressed form.
pub fn decode_stream(stream: &[SemanticToken], mode: DecodeMode) -> Result<DecodeReport> {
    let mut decoder = StreamDecoder::new(mode);
    let mut tokens = Vec::with_capacity(stream.len() + stream.len() / 2);
    for &tok in stream {
        decoder.push(tok, &mut tokens)?;
    }
    let issues = decoder.finish()?;
    Ok(DecodeReport { tokens, issues })
}
