//! Corpus measurements: token histograms, Rényi entropy and efficiency,
//! sequence-length reduction and throughput normalization.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokenizer::{tokenize, SubwordVocab};
use crate::tokenstream::{encode_stream, to_ids, EncodeReport, VocabMap, RESERVED_IDS};

/// Alpha used when the caller does not pick one.
pub const DEFAULT_ALPHA: f64 = 2.5;

/// Byte-class vocabulary of a plain byte-fallback tokenizer.
pub const BASELINE_BYTE_VOCAB: usize = 256;
/// Byte-class vocabulary once extended payloads and prefixes are added.
pub const AUGMENTED_BYTE_VOCAB: usize = RESERVED_IDS as usize;

/// Token frequency counts over a vocabulary of known size.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreqHistogram {
    counts: BTreeMap<u32, u64>,
    total: u64,
    vocab_size: usize,
}

impl FreqHistogram {
    pub fn new(vocab_size: usize) -> Self {
        FreqHistogram {
            vocab_size,
            ..FreqHistogram::default()
        }
    }

    pub fn from_ids<I: IntoIterator<Item = u32>>(ids: I, vocab_size: usize) -> Self {
        let mut h = FreqHistogram::new(vocab_size);
        h.extend(ids);
        h
    }

    pub fn add(&mut self, id: u32, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(id).or_default() += count;
        self.total += count;
    }

    pub fn extend<I: IntoIterator<Item = u32>>(&mut self, ids: I) {
        for id in ids {
            self.add(id, 1);
        }
    }

    /// Adds another histogram's counts; the larger vocabulary size is kept.
    pub fn merge(&mut self, other: &FreqHistogram) {
        for (&id, &c) in &other.counts {
            self.add(id, c);
        }
        self.vocab_size = self.vocab_size.max(other.vocab_size);
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn set_vocab_size(&mut self, vocab_size: usize) {
        self.vocab_size = vocab_size;
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts.get(&id).copied().unwrap_or(0)
    }

    /// Number of distinct tokens observed.
    pub fn support(&self) -> usize {
        self.counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.counts.iter().map(|(&id, &c)| (id, c))
    }

    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        let total = self.total as f64;
        self.counts.values().map(move |&c| c as f64 / total)
    }

    /// `(id, count, rank)` sorted by descending count, ties by ascending id; rank starts at 1.
    pub fn ranked(&self) -> Vec<(u32, u64, usize)> {
        let mut rows: Vec<_> = self.iter().collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        rows.into_iter()
            .enumerate()
            .map(|(i, (id, c))| (id, c, i + 1))
            .collect()
    }

    /// Writes `token_id,count,rank` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["token_id", "count", "rank"])?;
        for (id, c, rank) in self.ranked() {
            wr.serialize((id, c, rank))?;
        }
        wr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// Rényi entropy of order `alpha` in nats; `alpha == 1` gives Shannon entropy.
pub fn renyi_entropy(h: &FreqHistogram, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if h.total == 0 {
        return Err(Error::EmptyHistogram);
    }
    let entropy = if alpha == 1.0 {
        -h.probabilities().map(|p| p * p.ln()).sum::<f64>()
    } else {
        let power_sum: f64 = h.probabilities().map(|p| p.powf(alpha)).sum();
        power_sum.ln() / (1.0 - alpha)
    };
    // rounding can leave a point mass at -0.0 or a hair below zero
    Ok(entropy.max(0.0))
}

/// Rényi entropy scaled by `log |V|`.
pub fn renyi_efficiency(h: &FreqHistogram, alpha: f64) -> Result<f64> {
    if h.vocab_size < 2 {
        return Err(Error::VocabTooSmall(h.vocab_size));
    }
    Ok(renyi_entropy(h, alpha)? / (h.vocab_size as f64).ln())
}

/// Which byte-class vocabulary a histogram is measured against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// 256 byte-fallback tokens.
    Baseline,
    /// Bytes, 256 extended payloads and 3 prefix tokens.
    Augmented,
}

impl Scheme {
    pub fn byte_vocab_size(self) -> usize {
        match self {
            Scheme::Baseline => BASELINE_BYTE_VOCAB,
            Scheme::Augmented => AUGMENTED_BYTE_VOCAB,
        }
    }
}

/// Restricts a histogram to byte, extended-payload and prefix tokens.
pub fn byte_portion(h: &FreqHistogram, vm: &VocabMap, scheme: Scheme) -> FreqHistogram {
    let mut out = FreqHistogram::new(scheme.byte_vocab_size());
    for (id, c) in h.iter() {
        if vm.reserved(id).is_some() {
            out.add(id, c);
        }
    }
    out
}

/// Control length over experimental length for the same reference text.
pub fn relative_gain(control_len: u64, experimental_len: u64) -> Result<f64> {
    if experimental_len == 0 {
        return Err(Error::InvalidArgument(
            "experimental length must be positive".into(),
        ));
    }
    Ok(control_len as f64 / experimental_len as f64)
}

/// Measured throughput scaled by the relative gain.
pub fn perceived_tps(tps: f64, gain: f64) -> Result<f64> {
    if !(tps >= 0.0 && tps.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "tps must be non-negative, got {tps}"
        )));
    }
    if !(gain > 0.0 && gain.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "gain must be positive, got {gain}"
        )));
    }
    Ok(tps * gain)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub tokens_out: u64,
    /// Wall-clock seconds, as measured by the caller.
    pub total_time: f64,
    pub tps: f64,
    pub reference_tokens_control: u64,
    pub reference_tokens_experimental: u64,
    pub relative_gain: f64,
    pub perceived_tps: f64,
}

impl ThroughputReport {
    pub fn new(
        tokens_out: u64,
        total_time: f64,
        reference_tokens_control: u64,
        reference_tokens_experimental: u64,
    ) -> Result<Self> {
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "total time must be positive, got {total_time}"
            )));
        }
        let tps = tokens_out as f64 / total_time;
        let gain = relative_gain(reference_tokens_control, reference_tokens_experimental)?;
        Ok(ThroughputReport {
            tokens_out,
            total_time,
            tps,
            reference_tokens_control,
            reference_tokens_experimental,
            relative_gain: gain,
            perceived_tps: perceived_tps(tps, gain)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Total,
    BytePortion,
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scope::Total => "total",
            Scope::BytePortion => "byte_portion",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthRow {
    pub scope: Scope,
    pub baseline_len: u64,
    pub ours_len: u64,
    /// `(baseline_len - ours_len) / baseline_len`, 0 when the baseline is empty.
    pub diff: f64,
    /// `None` when the scope holds no tokens.
    pub baseline_eff: Option<f64>,
    pub ours_eff: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthReport {
    pub corpus: String,
    pub alpha: f64,
    pub documents: u64,
    pub rows: Vec<LengthRow>,
    pub encode: EncodeReport,
}

impl LengthReport {
    pub fn row(&self, scope: Scope) -> &LengthRow {
        self.rows
            .iter()
            .find(|r| r.scope == scope)
            .expect("reports carry both scopes")
    }

    /// One CSV row per (corpus, scope, form).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record([
            "corpus",
            "scope",
            "form",
            "length",
            "diff",
            "efficiency",
            "alpha",
        ])?;
        for row in &self.rows {
            for (form, len, eff) in [
                ("baseline", row.baseline_len, row.baseline_eff),
                ("ours", row.ours_len, row.ours_eff),
            ] {
                wr.serialize((
                    &self.corpus,
                    row.scope.to_string(),
                    form,
                    len,
                    row.diff,
                    eff,
                    self.alpha,
                ))?;
            }
        }
        wr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Baseline and compressed token histograms for a set of documents.
///
/// Accumulation is associative and commutative, so documents can be
/// processed in any order or in parallel and merged afterwards.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CorpusStats {
    pub documents: u64,
    pub baseline: FreqHistogram,
    pub ours: FreqHistogram,
    pub encode: EncodeReport,
}

impl CorpusStats {
    pub fn add_document(&mut self, text: &str, v: &SubwordVocab) -> Result<()> {
        let base = tokenize(text, v);
        let (ours, rep) = encode_stream(&base)?;
        self.baseline.extend(to_ids(&base, v.map())?);
        self.ours.extend(to_ids(&ours, v.map())?);
        self.encode.merge(&rep);
        self.documents += 1;
        Ok(())
    }

    pub fn merge(mut self, other: CorpusStats) -> CorpusStats {
        self.documents += other.documents;
        self.baseline.merge(&other.baseline);
        self.ours.merge(&other.ours);
        self.encode.merge(&other.encode);
        self
    }

    pub fn report(mut self, corpus: &str, v: &SubwordVocab, alpha: f64) -> Result<LengthReport> {
        check_alpha(alpha)?;
        self.baseline.set_vocab_size(v.baseline_vocab_size());
        self.ours.set_vocab_size(v.augmented_vocab_size());
        let base_bytes = byte_portion(&self.baseline, v.map(), Scheme::Baseline);
        let ours_bytes = byte_portion(&self.ours, v.map(), Scheme::Augmented);

        let eff = |h: &FreqHistogram| -> Result<Option<f64>> {
            if h.total() == 0 {
                Ok(None)
            } else {
                renyi_efficiency(h, alpha).map(Some)
            }
        };
        let row = |scope, b: &FreqHistogram, o: &FreqHistogram| -> Result<LengthRow> {
            Ok(LengthRow {
                scope,
                baseline_len: b.total(),
                ours_len: o.total(),
                diff: crate::tokenstream::reduction(b.total() as usize, o.total() as usize),
                baseline_eff: eff(b)?,
                ours_eff: eff(o)?,
            })
        };
        Ok(LengthReport {
            corpus: corpus.to_owned(),
            alpha,
            documents: self.documents,
            rows: vec![
                row(Scope::Total, &self.baseline, &self.ours)?,
                row(Scope::BytePortion, &base_bytes, &ours_bytes)?,
            ],
            encode: self.encode,
        })
    }
}

/// Tokenizes and encodes every document, then compares baseline and
/// compressed forms over the whole corpus and over its byte portion.
pub fn length_reduction_report<S>(
    corpus_name: &str,
    documents: &[S],
    v: &SubwordVocab,
    alpha: f64,
) -> Result<LengthReport>
where
    S: AsRef<str> + Sync,
{
    check_alpha(alpha)?;
    let stats = documents
        .par_iter()
        .try_fold(CorpusStats::default, |mut acc, doc| {
            acc.add_document(doc.as_ref(), v)?;
            Ok::<_, Error>(acc)
        })
        .try_reduce(CorpusStats::default, |a, b| Ok(a.merge(b)))?;
    stats.report(corpus_name, v, alpha)
}
