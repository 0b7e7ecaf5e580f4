//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::time::{Duration, Instant};

use cjkpack::metrics::DEFAULT_ALPHA;
use cjkpack::{
    decode_stream, encode_stream, length_reduction_report, pack_char, perceived_tps, relative_gain,
    renyi_efficiency, renyi_entropy, unpack_char, DecodeErrorKind, DecodeMode, Error,
    FreqHistogram, PrefixClass, Scope, SemanticToken, SubwordVocab, VocabMap,
};
use common::bytes;
use rand::Rng;
use SemanticToken::{Byte, ExtByte, Prefix, Subword};

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

fn ac1_exhaustive_bijection() -> Check {
    let start = Instant::now();
    let mut n = 0;
    for b1 in 0xE4u8..=0xEF {
        for b2 in 0x80u8..=0xBF {
            for b3 in 0x80u8..=0xBF {
                let p = pack_char(b1, b2, b3).map_err(|e| e.to_string())?;
                // independent route: split the 24-bit value on a 6/9/9 boundary
                let v = (u32::from(b1) << 16) | (u32::from(b2) << 8) | u32::from(b3);
                ensure!(
                    u32::from(p.prefix().bits6()) == v >> 18
                        && u32::from(p.hi()) == (v >> 9) & 0x1FF
                        && u32::from(p.lo()) == v & 0x1FF,
                    "pack mismatch at {b1:02X} {b2:02X} {b3:02X}"
                );
                ensure!(
                    unpack_char(p) == [b1, b2, b3],
                    "round trip failed at {b1:02X} {b2:02X} {b3:02X}"
                );
                n += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(n == 49_152, "checked {n} triples, expected 49152");
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("{n} triples in {elapsed:?}"))
}

const SUMMON: [u8; 9] = [0xE4, 0xBC, 0x97, 0xE5, 0x94, 0xA4, 0xE4, 0xBC, 0x97];

fn ac2_worked_encode() -> Check {
    let (out, rep) = encode_stream(&bytes(&SUMMON)).map_err(|e| e.to_string())?;
    let expect = vec![
        Prefix(PrefixClass::P1),
        Byte(0x5E),
        Byte(0x97),
        Byte(0xCA),
        Byte(0xA4),
        Byte(0x5E),
        Byte(0x97),
    ];
    ensure!(out == expect, "got {out:?}");
    let pct = rep.reduction * 100.0;
    ensure!((pct - 22.22).abs() <= 0.01, "reduction {pct:.4}%");
    Ok(format!("9 -> {} tokens, {pct:.2}%", out.len()))
}

fn ac3_prefix_switch() -> Check {
    let mut input = SUMMON.to_vec();
    input.extend([0xE8, 0xAA, 0x8D]);
    let (out, rep) = encode_stream(&bytes(&input)).map_err(|e| e.to_string())?;
    ensure!(
        out.len() == 10 && input.len() == 12,
        "lengths {} -> {}",
        input.len(),
        out.len()
    );
    ensure!(
        out[7..] == [Prefix(PrefixClass::P2), Byte(0x55), Byte(0x8D)],
        "tail {:?}",
        &out[7..]
    );
    let pct = rep.reduction * 100.0;
    ensure!((16.66..=16.67 + 0.01).contains(&pct), "reduction {pct:.4}%");
    Ok(format!("12 -> 10 tokens, {pct:.2}%"))
}

fn ac4_round_trip_fuzz() -> Check {
    let start = Instant::now();
    let mut rng = common::rng(0xC0FFEE);
    let cases = 100_000;
    let mut compressed = 0usize;
    for i in 0..cases {
        let s = common::random_baseline_stream(&mut rng, 12);
        let (enc, rep) = encode_stream(&s).map_err(|e| format!("case {i}: {e}"))?;
        compressed += rep.compressed_chars;
        let dec = decode_stream(&enc, DecodeMode::Strict).map_err(|e| format!("case {i}: {e}"))?;
        ensure!(dec.tokens == s, "case {i}: round trip mismatch");
        ensure!(dec.decode_errors() == 0, "case {i}: decode errors");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    ensure!(compressed > 0, "generator produced nothing compressible");
    Ok(format!(
        "{cases} streams, {compressed} chars compressed, {elapsed:?}"
    ))
}

fn ac5_throughput_fixtures() -> Check {
    let g1 = relative_gain(291_857, 282_423).map_err(|e| e.to_string())?;
    ensure!(round4(g1) == 1.0334, "en-zh gain {g1}");
    let g2 = relative_gain(189_800, 185_628).map_err(|e| e.to_string())?;
    ensure!(round4(g2) == 1.0225, "ja-ko gain {g2}");
    let cases = [
        (300.39, 1.0334, 310.43),
        (937.21, 1.0225, 958.28),
        (342.71, 253_540.0 / 251_261.0, 345.81),
    ];
    for (tps, gain, expect) in cases {
        let got = perceived_tps(tps, gain).map_err(|e| e.to_string())?;
        ensure!(
            (got - expect).abs() <= 0.05,
            "perceived_tps({tps}, {gain}) = {got}"
        );
    }
    Ok(format!("gains {g1:.4} {g2:.4}; perceived TPS within 0.05"))
}

fn ac6_entropy_properties() -> Check {
    for alpha in [0.5, 1.0, 2.0, 2.5] {
        for v in [2u32, 256, 515, 4096] {
            let h = FreqHistogram::from_ids(0..v, v as usize);
            let e = renyi_efficiency(&h, alpha).map_err(|e| e.to_string())?;
            ensure!(
                (e - 1.0).abs() <= 1e-9,
                "uniform |V|={v} alpha={alpha}: {e}"
            );
        }
        let point = FreqHistogram::from_ids([7; 50], 100);
        let e = renyi_efficiency(&point, alpha).map_err(|e| e.to_string())?;
        ensure!(e == 0.0, "point mass alpha={alpha}: {e}");
    }

    let mut rng = common::rng(6);
    let alphas = [0.25, 0.5, 0.999, 1.0, 1.001, 2.0, 2.5, 5.0];
    for i in 0..100 {
        let n = rng.gen_range(1..64);
        let counts: Vec<u64> = (0..n).map(|_| rng.gen_range(0..1000)).collect();
        if counts.iter().all(|&c| c == 0) {
            continue;
        }
        let mut h = FreqHistogram::new(1024);
        for (id, &c) in counts.iter().enumerate() {
            h.add(id as u32, c);
        }
        let shannon = renyi_entropy(&h, 1.0).map_err(|e| e.to_string())?;
        let oracle = common::shannon_from_counts(&counts);
        ensure!(
            (shannon - oracle).abs() <= 1e-12,
            "histogram {i}: {shannon} vs {oracle}"
        );

        let values: Vec<f64> = alphas
            .iter()
            .map(|&a| renyi_entropy(&h, a).unwrap())
            .collect();
        for w in values.windows(2) {
            ensure!(
                w[1] <= w[0] + 1e-12,
                "histogram {i}: not monotone in alpha: {values:?}"
            );
        }
    }
    Ok("uniform = 1, point mass = 0, Shannon matches oracle, monotone in alpha".into())
}

fn ac7_directional_corpus() -> Check {
    let (docs, chars) = common::synthetic_cjk_corpus(20_240_707, 100_000);
    ensure!(chars >= 100_000, "only {chars} characters");
    // subwords cover the ASCII separators only; every CJK character falls back to bytes
    let vocab = SubwordVocab::from_entries(
        [
            (" ", 600u32),
            (",", 601),
            (".\n", 602),
            (".", 603),
            ("\n", 604),
        ],
        VocabMap::default(),
    )
    .map_err(|e| e.to_string())?;
    let rep = length_reduction_report("synthetic", &docs, &vocab, DEFAULT_ALPHA)
        .map_err(|e| e.to_string())?;
    let t = rep.row(Scope::Total);
    let b = rep.row(Scope::BytePortion);
    ensure!(
        t.ours_len < t.baseline_len,
        "total {} -> {}",
        t.baseline_len,
        t.ours_len
    );
    ensure!(
        b.diff > t.diff,
        "byte diff {} <= total diff {}",
        b.diff,
        t.diff
    );
    let (be, oe) = (b.baseline_eff.unwrap(), b.ours_eff.unwrap());
    ensure!(oe < be, "byte-portion efficiency {be} -> {oe}");
    Ok(format!(
        "{chars} chars: total -{:.2}%, bytes -{:.2}%, byte eff {be:.4} -> {oe:.4}",
        t.diff * 100.0,
        b.diff * 100.0
    ))
}

fn ac8_asymptotic_bound() -> Check {
    let mut rng = common::rng(8);
    let mut notes = Vec::new();
    for n in [1usize, 10, 1000] {
        let mut input = Vec::with_capacity(3 * n);
        for _ in 0..n {
            input.extend(bytes(&[
                rng.gen_range(0xE4..=0xE7),
                rng.gen_range(0x80..=0xBF),
                rng.gen_range(0x80..=0xBF),
            ]));
        }
        let (out, rep) = encode_stream(&input).map_err(|e| e.to_string())?;
        ensure!(out.len() == 2 * n + 1, "n={n}: {} tokens", out.len());
        let expect = (n as f64 - 1.0) / (3.0 * n as f64);
        ensure!(
            rep.reduction == expect,
            "n={n}: {} != {expect}",
            rep.reduction
        );
        ensure!(rep.reduction < 1.0 / 3.0, "n={n}: bound exceeded");
        notes.push(format!("n={n}: {:.6}", rep.reduction));
    }
    Ok(notes.join(", "))
}

fn ac9_decode_error_accounting() -> Check {
    struct Case {
        name: &'static str,
        stream: Vec<SemanticToken>,
        strict_kind: DecodeErrorKind,
        lenient_out: Vec<SemanticToken>,
        positions: Vec<usize>,
    }
    let p1 = Prefix(PrefixClass::P1);
    let p2 = Prefix(PrefixClass::P2);
    let cases = vec![
        Case {
            name: "truncated pair at end of stream",
            stream: vec![p1, Byte(0x5E), Byte(0x97), Byte(0xCA)],
            strict_kind: DecodeErrorKind::UnpairedPayload,
            lenient_out: bytes(&[0xE4, 0xBC, 0x97]),
            positions: vec![3],
        },
        Case {
            name: "orphan payload before subword",
            stream: vec![p1, Byte(0x5E), Subword(600), p2, Byte(0x55), Byte(0x8D)],
            strict_kind: DecodeErrorKind::UnpairedPayload,
            lenient_out: [vec![Subword(600)], bytes(&[0xE8, 0xAA, 0x8D])].concat(),
            positions: vec![1],
        },
        Case {
            name: "orphan payload before prefix switch",
            stream: vec![
                p1,
                Byte(0x5E),
                Byte(0x97),
                Byte(0xCA),
                p2,
                Byte(0x55),
                Byte(0x8D),
            ],
            strict_kind: DecodeErrorKind::UnpairedPayload,
            lenient_out: bytes(&[0xE4, 0xBC, 0x97, 0xE8, 0xAA, 0x8D]),
            positions: vec![3],
        },
        Case {
            name: "prefixless ExtByte",
            stream: vec![ExtByte(463)],
            strict_kind: DecodeErrorKind::OrphanExtByte,
            lenient_out: vec![],
            positions: vec![0],
        },
        Case {
            name: "prefixless ExtByte between raw bytes",
            stream: vec![
                Byte(0x41),
                ExtByte(300),
                Byte(0x42),
                Subword(601),
                ExtByte(511),
            ],
            strict_kind: DecodeErrorKind::OrphanExtByte,
            lenient_out: vec![Byte(0x41), Byte(0x42), Subword(601)],
            positions: vec![1, 4],
        },
        Case {
            name: "compound corruption",
            stream: vec![
                ExtByte(256),
                p1,
                Byte(0x5E),
                p1,
                Byte(0x5E),
                Byte(0x97),
                Byte(0xCA),
                Subword(602),
                ExtByte(257),
            ],
            strict_kind: DecodeErrorKind::OrphanExtByte,
            lenient_out: [bytes(&[0xE4, 0xBC, 0x97]), vec![Subword(602)]].concat(),
            positions: vec![0, 2, 6, 8],
        },
    ];
    for c in &cases {
        match decode_stream(&c.stream, DecodeMode::Strict) {
            Err(Error::Decode { kind, position }) => {
                ensure!(kind == c.strict_kind, "{}: strict kind {kind:?}", c.name);
                ensure!(
                    position == c.positions[0],
                    "{}: strict position {position}",
                    c.name
                );
            }
            other => return Err(format!("{}: strict returned {other:?}", c.name)),
        }
        let r = decode_stream(&c.stream, DecodeMode::Lenient).map_err(|e| e.to_string())?;
        ensure!(
            r.tokens == c.lenient_out,
            "{}: lenient output {:?}",
            c.name,
            r.tokens
        );
        ensure!(
            r.decode_errors() == c.positions.len() && r.error_positions() == c.positions,
            "{}: lenient errors at {:?}",
            c.name,
            r.error_positions()
        );
    }

    // dropping one payload from a compressed segment always surfaces as an error
    let mut rng = common::rng(9);
    let mut trials = 0;
    while trials < 2_000 {
        let s = common::random_baseline_stream(&mut rng, 8);
        let (enc, _) = encode_stream(&s).map_err(|e| e.to_string())?;
        let mut in_segment = false;
        let payloads: Vec<usize> = enc
            .iter()
            .enumerate()
            .filter_map(|(i, t)| {
                match t {
                    Prefix(_) => in_segment = true,
                    Subword(_) => in_segment = false,
                    _ => {}
                }
                (in_segment && t.payload_value().is_some()).then_some(i)
            })
            .collect();
        if payloads.is_empty() {
            continue;
        }
        trials += 1;
        let mut broken = enc.clone();
        broken.remove(payloads[rng.gen_range(0..payloads.len())]);
        ensure!(
            decode_stream(&broken, DecodeMode::Strict).is_err(),
            "strict accepted a stream with a dropped payload"
        );
        let r = decode_stream(&broken, DecodeMode::Lenient).map_err(|e| e.to_string())?;
        ensure!(
            r.decode_errors() >= 1,
            "lenient reported no errors for a dropped payload"
        );
    }
    Ok(format!(
        "{} fixed cases, {trials} random truncations",
        cases.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "AC1 exhaustive pack/unpack bijection",
            ac1_exhaustive_bijection,
        ),
        ("AC2 worked example encode (22.22%)", ac2_worked_encode),
        (
            "AC3 worked example prefix switch (16.67%)",
            ac3_prefix_switch,
        ),
        ("AC4 round-trip fuzzing (1e5 streams)", ac4_round_trip_fuzz),
        (
            "AC5 relative gain / perceived TPS fixtures",
            ac5_throughput_fixtures,
        ),
        ("AC6 entropy properties", ac6_entropy_properties),
        (
            "AC7 directional corpus reproduction",
            ac7_directional_corpus,
        ),
        ("AC8 asymptotic 1/3 bound", ac8_asymptotic_bound),
        ("AC9 decode-error accounting", ac9_decode_error_accounting),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("PASS  {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL  {name}: panicked");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
