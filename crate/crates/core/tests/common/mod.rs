#![allow(dead_code)]

use cjkpack::SemanticToken;
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn bytes(bs: &[u8]) -> Vec<SemanticToken> {
    bs.iter().map(|&b| SemanticToken::Byte(b)).collect()
}

/// Random baseline stream mixing subwords, eligible CJK characters,
/// ineligible multi-byte characters and malformed byte fragments.
pub fn random_baseline_stream<R: Rng>(rng: &mut R, max_pieces: usize) -> Vec<SemanticToken> {
    let pieces = rng.gen_range(0..=max_pieces);
    let mut out = Vec::new();
    for _ in 0..pieces {
        match rng.gen_range(0..10) {
            0 | 1 => out.push(SemanticToken::Subword(rng.gen_range(515..50_000))),
            2..=5 => {
                // eligible: lead E4..EF, two continuation bytes
                let n = rng.gen_range(1..6);
                for _ in 0..n {
                    out.extend(bytes(&[
                        rng.gen_range(0xE4..=0xEF),
                        rng.gen_range(0x80..=0xBF),
                        rng.gen_range(0x80..=0xBF),
                    ]));
                }
            }
            6 => {
                // ineligible multi-byte: 2-byte, E0..E3 3-byte, or 4-byte
                let c = match rng.gen_range(0..3) {
                    0 => char::from_u32(rng.gen_range(0x80..0x800)),
                    1 => char::from_u32(rng.gen_range(0x800..0x4000)),
                    _ => char::from_u32(rng.gen_range(0x1_0000..0x11_0000)),
                }
                .unwrap_or('\u{1F600}');
                let mut buf = [0u8; 4];
                out.extend(bytes(c.encode_utf8(&mut buf).as_bytes()));
            }
            7 => out.extend(bytes(&[rng.gen_range(0x20..0x7F)])),
            _ => {
                // malformed fragment: arbitrary bytes
                let n = rng.gen_range(1..5);
                for _ in 0..n {
                    out.push(SemanticToken::Byte(rng.gen()));
                }
            }
        }
    }
    out
}

/// Shannon entropy in nats via `ln T - (1/T) Σ c ln c`, computed straight from counts.
pub fn shannon_from_counts(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let t = total as f64;
    let weighted: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| c as f64 * (c as f64).ln())
        .sum();
    t.ln() - weighted / t
}

/// Rényi entropy by the textbook formula, for orders other than 1.
pub fn renyi_from_counts(counts: &[u64], alpha: f64) -> f64 {
    let t: u64 = counts.iter().sum();
    let s: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| (c as f64 / t as f64).powf(alpha))
        .sum();
    s.ln() / (1.0 - alpha)
}

/// Deterministic mixed Hangul / CJK-ideograph corpus with Zipfian
/// character frequencies, words separated by ASCII spaces and punctuation.
/// Returns one string per line and the number of CJK characters generated.
pub fn synthetic_cjk_corpus(seed: u64, min_chars: usize) -> (Vec<String>, usize) {
    let mut rng = rng(seed);
    let mut hangul: Vec<char> = (0xAC00..0xD7A4).filter_map(char::from_u32).collect();
    let mut han: Vec<char> = (0x4E00..0x9FA6).filter_map(char::from_u32).collect();
    hangul.shuffle(&mut rng);
    han.shuffle(&mut rng);
    hangul.truncate(1500);
    han.truncate(2500);
    let zipf =
        |n: usize| WeightedIndex::new((0..n).map(|i| 1.0 / ((i + 1) as f64).powf(1.05))).unwrap();
    let (zk, zh) = (zipf(hangul.len()), zipf(han.len()));

    let mut lines = Vec::new();
    let mut chars = 0;
    while chars < min_chars {
        let korean = rng.gen_bool(0.5);
        let words = rng.gen_range(3..=10);
        let mut line = String::new();
        for w in 0..words {
            if w > 0 {
                line.push(' ');
            }
            for _ in 0..rng.gen_range(1..=4) {
                let c = if korean {
                    hangul[zk.sample(&mut rng)]
                } else {
                    han[zh.sample(&mut rng)]
                };
                line.push(c);
                chars += 1;
            }
            if rng.gen_bool(0.1) {
                line.push(',');
            }
        }
        line.push_str(".\n");
        lines.push(line);
    }
    (lines, chars)
}
