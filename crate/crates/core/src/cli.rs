//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O, 4 vocabulary mismatch, 5 strict
//! decode failure, 6 malformed input file, 7 ineligible character, 8 invalid
//! numeric argument.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bitcodec::{self, PackedChar};
use crate::error::{Error, Result};
use crate::metrics::{self, CorpusStats, Scheme, DEFAULT_ALPHA};
use crate::streamfile::{self, IdFormat};
use crate::tokenizer::{detokenize, tokenize, SubwordVocab};
use crate::tokenstream::{
    decode_stream, encode_stream, from_ids, to_ids, DecodeErrorKind, DecodeMode, EncodeReport,
    VocabMap,
};

#[derive(Debug, Parser)]
#[command(
    name = "cjkpack",
    version,
    about = "Sub-byte compression of CJK byte-fallback tokens"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tokenize (text input) and compress token sequences.
    Encode(EncodeArgs),
    /// Decompress token sequences, optionally detokenizing to text.
    Decode(DecodeArgs),
    /// Sequence-length and entropy report over a corpus.
    Analyze(AnalyzeArgs),
    /// Relative gain between two reference tokenizations.
    Compare(CompareArgs),
    /// Perceived tokens-per-second from a measured throughput.
    Tps(TpsArgs),
    /// Show how one 3-byte character is repacked.
    Pack(PackArgs),
}

#[derive(Debug, Args)]
pub struct VocabArgs {
    /// JSON id layout for byte, extended and prefix tokens.
    #[arg(long)]
    pub vocab_map: Option<PathBuf>,
    /// Subword vocabulary, one surface form per line.
    #[arg(long)]
    pub subword_vocab: Option<PathBuf>,
}

impl VocabArgs {
    fn load(&self) -> Result<SubwordVocab> {
        let map = match &self.vocab_map {
            Some(p) => VocabMap::load(p)?,
            None => VocabMap::default(),
        };
        match &self.subword_vocab {
            Some(p) => SubwordVocab::load(p, map),
            None => SubwordVocab::from_entries(Vec::<(String, u32)>::new(), map),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// UTF-8 text, one sequence per line (newline kept inside the sequence).
    Text,
    Ids,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Ids,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub vocab: VocabArgs,
    /// Input format.
    #[arg(long)]
    pub format: InputFormat,
    /// Output id format.
    #[arg(long, value_enum, default_value_t = IdFormat::Ids)]
    pub emit: IdFormat,
    /// Compressed stream destination (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub report: ReportFormat,
    /// Report destination (stderr when absent).
    #[arg(long)]
    pub report_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub vocab: VocabArgs,
    /// Input id format.
    #[arg(long, value_enum)]
    pub format: IdFormat,
    /// Output format.
    #[arg(long)]
    pub emit: OutputFormat,
    #[arg(long, value_enum, default_value_t = DecodeMode::Strict)]
    pub mode: DecodeMode,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub report: ReportFormat,
    #[arg(long)]
    pub report_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Corpus files or directories (directories are walked recursively).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub vocab: VocabArgs,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Corpus label in the report (defaults to the first input path).
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub report: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory to receive ranked frequency histograms as CSV.
    #[arg(long)]
    pub histogram_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Reference tokenized with the control tokenizer.
    pub control: PathBuf,
    /// Reference tokenized with the experimental tokenizer.
    pub experimental: PathBuf,
    #[arg(long, value_enum, default_value_t = IdFormat::Ids)]
    pub format: IdFormat,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub report: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TpsArgs {
    /// Measured tokens per second.
    #[arg(long, conflicts_with_all = ["tokens_out", "seconds"])]
    pub tps: Option<f64>,
    /// Tokens emitted during the measurement.
    #[arg(long, requires = "seconds")]
    pub tokens_out: Option<u64>,
    /// Wall-clock seconds of the measurement.
    #[arg(long, requires = "tokens_out")]
    pub seconds: Option<f64>,
    /// Control reference tokenization file.
    #[arg(long, conflicts_with = "control_len", requires = "experimental")]
    pub control: Option<PathBuf>,
    /// Experimental reference tokenization file.
    #[arg(long, conflicts_with = "experimental_len", requires = "control")]
    pub experimental: Option<PathBuf>,
    #[arg(long, requires = "experimental_len")]
    pub control_len: Option<u64>,
    #[arg(long, requires = "control_len")]
    pub experimental_len: Option<u64>,
    #[arg(long, value_enum, default_value_t = IdFormat::Ids)]
    pub format: IdFormat,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub report: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PackArgs {
    /// Three bytes as hex, e.g. "E4 BC 97" or "e4bc97".
    pub hex: String,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub report: ReportFormat,
}

impl clap::ValueEnum for DecodeMode {
    fn value_variants<'a>() -> &'a [Self] {
        &[DecodeMode::Strict, DecodeMode::Lenient]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            DecodeMode::Strict => "strict",
            DecodeMode::Lenient => "lenient",
        }))
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Encode(a) => cmd_encode(&a),
        Command::Decode(a) => cmd_decode(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Tps(a) => cmd_tps(&a),
        Command::Pack(a) => cmd_pack(&a),
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::io(p, e))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open_report(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::io(p, e))?,
        )),
        None => Box::new(io::stderr().lock()),
    })
}

fn finish(mut w: Box<dyn Write>, path: Option<&Path>) -> Result<()> {
    w.flush()
        .map_err(|e| Error::io(path.unwrap_or(Path::new("<stdout>")), e))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(w: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io("<report>", e))
}

/// Writes a flat serializable record as a two-line CSV table.
fn write_record_csv<T: Serialize>(w: &mut dyn Write, value: &T) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.serialize(value)?;
    wr.flush().map_err(|e| Error::io("<report>", e))
}

fn report_flat<T: Serialize>(w: &mut dyn Write, format: ReportFormat, value: &T) -> Result<()> {
    match format {
        ReportFormat::Json => write_json(w, value),
        ReportFormat::Csv => write_record_csv(w, value),
        ReportFormat::Text => {
            let v = serde_json::to_value(value)?;
            if let serde_json::Value::Object(map) = v {
                for (k, v) in map {
                    writeln!(w, "{k} {v}").map_err(|e| Error::io("<report>", e))?;
                }
            }
            Ok(())
        }
    }
}

/// Sequences of the input, each as tokenizer ids in baseline form.
fn baseline_sequences(
    path: &Path,
    format: InputFormat,
    vocab: &SubwordVocab,
) -> Result<Vec<Vec<crate::SemanticToken>>> {
    match format {
        InputFormat::Text => {
            let text = read_text(path)?;
            Ok(text
                .split_inclusive('\n')
                .map(|line| tokenize(line, vocab))
                .collect())
        }
        InputFormat::Ids | InputFormat::Json => {
            let idf = if format == InputFormat::Ids {
                IdFormat::Ids
            } else {
                IdFormat::Json
            };
            streamfile::read_sequences(path, idf)?
                .iter()
                .map(|ids| from_ids(ids, vocab.map()))
                .collect()
        }
    }
}

#[derive(Serialize)]
struct EncodeSummary {
    sequences: usize,
    #[serde(flatten)]
    report: EncodeReport,
}

pub fn cmd_encode(a: &EncodeArgs) -> Result<()> {
    let vocab = a.vocab.load()?;
    let seqs = baseline_sequences(&a.input, a.format, &vocab)?;
    let mut out = open_out(a.out.as_deref())?;
    let mut total = EncodeReport::default();
    for (line, seq) in seqs.iter().enumerate() {
        let (packed, rep) = encode_stream(seq).map_err(|e| match e {
            Error::NotBaseline { .. } => Error::Parse {
                path: a.input.clone(),
                line: line + 1,
                msg: e.to_string(),
            },
            e => e,
        })?;
        total.merge(&rep);
        streamfile::write_sequence(&mut out, &to_ids(&packed, vocab.map())?, a.emit)
            .map_err(|e| Error::io(a.out.as_deref().unwrap_or(Path::new("<stdout>")), e))?;
    }
    finish(out, a.out.as_deref())?;
    let summary = EncodeSummary {
        sequences: seqs.len(),
        report: total,
    };
    let mut rw = open_report(a.report_out.as_deref())?;
    report_flat(&mut *rw, a.report, &summary)?;
    finish(rw, a.report_out.as_deref())
}

#[derive(Serialize)]
struct SequenceIssue {
    sequence: usize,
    position: usize,
    kind: DecodeErrorKind,
}

#[derive(Serialize)]
struct DecodeSummary {
    sequences: usize,
    input_len: usize,
    output_len: usize,
    decode_errors: usize,
    invalid_utf8_spans: usize,
    errors: Vec<SequenceIssue>,
}

pub fn cmd_decode(a: &DecodeArgs) -> Result<()> {
    let vocab = a.vocab.load()?;
    let seqs = streamfile::read_sequences(&a.input, a.format)?;
    let mut summary = DecodeSummary {
        sequences: seqs.len(),
        input_len: 0,
        output_len: 0,
        decode_errors: 0,
        invalid_utf8_spans: 0,
        errors: Vec::new(),
    };
    let mut out = open_out(a.out.as_deref())?;
    let out_path = a.out.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    for (i, ids) in seqs.iter().enumerate() {
        let toks = from_ids(ids, vocab.map())?;
        let decoded = decode_stream(&toks, a.mode).inspect_err(|e| {
            eprintln!("{}: sequence {}: {e}", a.input.display(), i + 1);
        })?;
        summary.input_len += toks.len();
        summary.output_len += decoded.tokens.len();
        summary.decode_errors += decoded.decode_errors();
        summary
            .errors
            .extend(decoded.issues.iter().map(|is| SequenceIssue {
                sequence: i + 1,
                position: is.position,
                kind: is.kind,
            }));
        match a.emit {
            OutputFormat::Text => {
                let d = detokenize(&decoded.tokens, &vocab)?;
                summary.invalid_utf8_spans += d.invalid_spans;
                out.write_all(d.text.as_bytes())
                    .map_err(|e| Error::io(&out_path, e))?;
            }
            OutputFormat::Ids | OutputFormat::Json => {
                let f = if a.emit == OutputFormat::Ids {
                    IdFormat::Ids
                } else {
                    IdFormat::Json
                };
                streamfile::write_sequence(&mut out, &to_ids(&decoded.tokens, vocab.map())?, f)
                    .map_err(|e| Error::io(&out_path, e))?;
            }
        }
    }
    finish(out, a.out.as_deref())?;
    let mut rw = open_report(a.report_out.as_deref())?;
    match a.report {
        ReportFormat::Csv => {
            let mut wr = csv::Writer::from_writer(&mut *rw);
            wr.write_record(["sequence", "position", "kind"])?;
            for e in &summary.errors {
                wr.serialize(e)?;
            }
            wr.flush().map_err(|e| Error::io("<report>", e))?;
        }
        _ => write_json(&mut *rw, &summary)?,
    }
    finish(rw, a.report_out.as_deref())
}

fn collect_files(path: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let meta = std::fs::metadata(path).map_err(|e| Error::io(path, e))?;
    if meta.is_dir() {
        let mut entries = std::fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .map(|e| e.map(|e| e.path()))
            .collect::<io::Result<Vec<_>>>()
            .map_err(|e| Error::io(path, e))?;
        entries.sort();
        for p in entries {
            collect_files(&p, out)?;
        }
    } else {
        out.push(path.to_owned());
    }
    Ok(())
}

pub fn cmd_analyze(a: &AnalyzeArgs) -> Result<()> {
    if !(a.alpha > 0.0 && a.alpha.is_finite()) {
        return Err(Error::InvalidAlpha(a.alpha));
    }
    let vocab = a.vocab.load()?;
    let mut files = Vec::new();
    for p in &a.inputs {
        collect_files(p, &mut files)?;
    }
    // read everything up front so a bad file aborts before any report is written
    let texts = files
        .iter()
        .map(|p| read_text(p))
        .collect::<Result<Vec<_>>>()?;
    let docs: Vec<&str> = texts.iter().flat_map(|t| t.split_inclusive('\n')).collect();

    let name = a
        .name
        .clone()
        .unwrap_or_else(|| a.inputs[0].display().to_string());

    use rayon::prelude::*;
    let stats = docs
        .par_iter()
        .try_fold(CorpusStats::default, |mut acc, doc| {
            acc.add_document(doc, &vocab)?;
            Ok::<_, Error>(acc)
        })
        .try_reduce(CorpusStats::default, |x, y| Ok(x.merge(y)))?;

    if let Some(dir) = &a.histogram_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let base_bytes = metrics::byte_portion(&stats.baseline, vocab.map(), Scheme::Baseline);
        let ours_bytes = metrics::byte_portion(&stats.ours, vocab.map(), Scheme::Augmented);
        for (file, h) in [
            ("baseline.csv", &stats.baseline),
            ("ours.csv", &stats.ours),
            ("baseline_bytes.csv", &base_bytes),
            ("ours_bytes.csv", &ours_bytes),
        ] {
            let p = dir.join(file);
            let f = File::create(&p).map_err(|e| Error::io(&p, e))?;
            h.write_csv(BufWriter::new(f))?;
        }
    }

    let report = stats.report(&name, &vocab, a.alpha)?;
    let mut w = open_out(a.out.as_deref())?;
    match a.report {
        ReportFormat::Csv => report.write_csv(&mut w)?,
        ReportFormat::Json => write_json(&mut *w, &report)?,
        ReportFormat::Text => {
            let io_err = |e| Error::io("<report>", e);
            writeln!(
                w,
                "corpus {} ({} sequences, alpha {})",
                report.corpus, report.documents, report.alpha
            )
            .map_err(io_err)?;
            for r in &report.rows {
                let eff = |e: Option<f64>| e.map_or("-".to_owned(), |e| format!("{e:.4}"));
                writeln!(
                    w,
                    "{:<13} baseline {:>10} ours {:>10} diff {:>7.2}% eff {} -> {}",
                    r.scope.to_string(),
                    r.baseline_len,
                    r.ours_len,
                    r.diff * 100.0,
                    eff(r.baseline_eff),
                    eff(r.ours_eff)
                )
                .map_err(io_err)?;
            }
        }
    }
    finish(w, a.out.as_deref())
}

#[derive(Serialize)]
struct CompareSummary {
    control_tokens: u64,
    experimental_tokens: u64,
    relative_gain: f64,
}

pub fn cmd_compare(a: &CompareArgs) -> Result<()> {
    let control = streamfile::total_tokens(&streamfile::read_sequences(&a.control, a.format)?);
    let experimental =
        streamfile::total_tokens(&streamfile::read_sequences(&a.experimental, a.format)?);
    let gain = metrics::relative_gain(control, experimental)?;
    let mut w = open_out(a.out.as_deref())?;
    match a.report {
        ReportFormat::Text => writeln!(w, "{gain:.4}").map_err(|e| Error::io("<stdout>", e))?,
        f => report_flat(
            &mut *w,
            f,
            &CompareSummary {
                control_tokens: control,
                experimental_tokens: experimental,
                relative_gain: gain,
            },
        )?,
    }
    finish(w, a.out.as_deref())
}

#[derive(Serialize)]
struct TpsSummary {
    tokens_out: Option<u64>,
    total_time: Option<f64>,
    tps: f64,
    reference_tokens_control: u64,
    reference_tokens_experimental: u64,
    relative_gain: f64,
    perceived_tps: f64,
}

pub fn cmd_tps(a: &TpsArgs) -> Result<()> {
    let (control, experimental) = match (
        &a.control,
        &a.experimental,
        a.control_len,
        a.experimental_len,
    ) {
        (Some(c), Some(e), _, _) => (
            streamfile::total_tokens(&streamfile::read_sequences(c, a.format)?),
            streamfile::total_tokens(&streamfile::read_sequences(e, a.format)?),
        ),
        (_, _, Some(c), Some(e)) => (c, e),
        _ => {
            return Err(Error::InvalidArgument(
                "need --control/--experimental files or --control-len/--experimental-len".into(),
            ))
        }
    };
    let summary = match (a.tps, a.tokens_out, a.seconds) {
        (Some(tps), _, _) => {
            let gain = metrics::relative_gain(control, experimental)?;
            TpsSummary {
                tokens_out: None,
                total_time: None,
                tps,
                reference_tokens_control: control,
                reference_tokens_experimental: experimental,
                relative_gain: gain,
                perceived_tps: metrics::perceived_tps(tps, gain)?,
            }
        }
        (None, Some(n), Some(secs)) => {
            let r = metrics::ThroughputReport::new(n, secs, control, experimental)?;
            TpsSummary {
                tokens_out: Some(r.tokens_out),
                total_time: Some(r.total_time),
                tps: r.tps,
                reference_tokens_control: control,
                reference_tokens_experimental: experimental,
                relative_gain: r.relative_gain,
                perceived_tps: r.perceived_tps,
            }
        }
        _ => {
            return Err(Error::InvalidArgument(
                "need --tps or --tokens-out with --seconds".into(),
            ))
        }
    };
    let mut w = open_out(a.out.as_deref())?;
    match a.report {
        ReportFormat::Text => writeln!(
            w,
            "tps {:.2}\nrelative_gain {:.4}\nperceived_tps {:.2}",
            summary.tps, summary.relative_gain, summary.perceived_tps
        )
        .map_err(|e| Error::io("<stdout>", e))?,
        f => report_flat(&mut *w, f, &summary)?,
    }
    finish(w, a.out.as_deref())
}

fn parse_hex_bytes(s: &str) -> Result<Vec<u8>> {
    let digits: String = s
        .chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .collect();
    let digits = digits.replace("0x", "").replace("0X", "");
    if !digits.len().is_multiple_of(2) || !digits.chars().all(|c| c.is_ascii_hexdigit()) {
        return Err(Error::InvalidArgument(format!(
            "not a hex byte string: {s:?}"
        )));
    }
    Ok((0..digits.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&digits[i..i + 2], 16).expect("checked hex"))
        .collect())
}

#[derive(Serialize)]
struct PackSummary {
    bytes: [u8; 3],
    prefix: String,
    prefix_bits6: u8,
    hi: u16,
    lo: u16,
    unpacked: [u8; 3],
}

pub fn cmd_pack(a: &PackArgs) -> Result<()> {
    let bytes = parse_hex_bytes(&a.hex)?;
    let [b1, b2, b3]: [u8; 3] = bytes.as_slice().try_into().map_err(|_| {
        Error::InvalidArgument(format!("expected exactly 3 bytes, got {}", bytes.len()))
    })?;
    let packed: PackedChar = bitcodec::pack_char(b1, b2, b3)?;
    let unpacked = bitcodec::unpack_char(packed);
    let p = packed.prefix();
    let mut w = open_out(None)?;
    let io_err = |e| Error::io("<stdout>", e);
    match a.report {
        ReportFormat::Text => {
            writeln!(w, "bytes    {b1:02X} {b2:02X} {b3:02X}").map_err(io_err)?;
            writeln!(w, "bits     {b1:08b} {b2:08b} {b3:08b}").map_err(io_err)?;
            writeln!(w, "prefix   {p} 0x{:02X} 0b{:06b}", p.bits6(), p.bits6()).map_err(io_err)?;
            writeln!(
                w,
                "hi       0x{:03X} 0b{:09b}  = (b1 & 3) << 7 | (b2 & 254) >> 1",
                packed.hi(),
                packed.hi()
            )
            .map_err(io_err)?;
            writeln!(
                w,
                "lo       0x{:03X} 0b{:09b}  = (b2 & 1) << 8 | b3",
                packed.lo(),
                packed.lo()
            )
            .map_err(io_err)?;
            writeln!(
                w,
                "unpacked {:02X} {:02X} {:02X}",
                unpacked[0], unpacked[1], unpacked[2]
            )
            .map_err(io_err)?;
        }
        f => report_flat(
            &mut *w,
            f,
            &PackSummary {
                bytes: [b1, b2, b3],
                prefix: p.to_string(),
                prefix_bits6: p.bits6(),
                hi: packed.hi(),
                lo: packed.lo(),
                unpacked,
            },
        )?,
    }
    finish(w, None)
}
