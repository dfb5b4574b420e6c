//! Acceptance criteria. Each test prints one PASS/FAIL line; run with
//! `cargo test --test acceptance -- --nocapture --test-threads=1` to see them.

mod common;

use std::fs;
use std::path::PathBuf;
use std::process::Command;

use cbf_entropy::format::{load, save};
use cbf_entropy::hash::{fnv1a64, FNV_OFFSET_BASIS};
use cbf_entropy::{
    bf_entropy, bf_entropy_uncorrected, certain_collision, ensemble_entropy, CountingBloomFilter, Error,
    FilterConfig, LogBase,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

const TOL: f64 = 1e-9;

fn verdict(id: u32, name: &str, ok: bool, detail: String) {
    println!("[{}] criterion {id}: {name} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} failed: {detail}");
}

fn estimate(f: &CountingBloomFilter) -> f64 {
    bf_entropy(f.counters(), f.config().num_hashes(), f.inserted_count(), LogBase::BITS).unwrap()
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

#[test]
fn criterion_1_worked_example() {
    let counters = [1u16, 1, 3, 2, 2];
    let expected = 2.0 * 3f64.log2() - 4.0 / 3.0;
    let certain = certain_collision(&counters, 3).unwrap().certain;
    let raw = bf_entropy_uncorrected(&counters, 3, 3, LogBase::BITS).unwrap();
    let corrected = bf_entropy(&counters, 3, 3, LogBase::BITS).unwrap();
    let ok = certain && (raw - expected).abs() <= TOL && (corrected - expected / 3.0).abs() <= TOL;
    verdict(
        1,
        "worked example",
        ok,
        format!("certain={certain} uncorrected={raw:.9} corrected={corrected:.9}"),
    );
}

#[test]
fn criterion_2_no_collision_equality() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    let (mut gated, mut worst) = (0, 0.0f64);
    for trial in 0..200u32 {
        let sample = random_multiset(&mut rng, 50, 20);
        let m = [1, 2, 3, 5][trial as usize % 4];
        let cfg = FilterConfig::new(1_048_576, m, rng.random()).unwrap();
        if trace_shares_cell(&cfg, &sample) {
            continue;
        }
        gated += 1;
        let f = build(cfg, &sample);
        worst = worst.max((estimate(&f) - exact_bits(&sample)).abs());
    }
    let ok = gated >= 100 && worst <= TOL;
    verdict(2, "no-collision equality", ok, format!("{gated}/200 collision-free, max |diff| = {worst:e}"));
}

#[test]
fn criterion_3_underestimation() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    let mut violations = 0;
    let mut strictly_lower = 0;
    for _ in 0..1000 {
        let sample = random_multiset(&mut rng, 50, 20);
        let cfg =
            FilterConfig::new(rng.random_range(8..=4096), rng.random_range(1..=8), rng.random()).unwrap();
        let (est, exact) = (estimate(&build(cfg, &sample)), exact_bits(&sample));
        violations += usize::from(est > exact + TOL);
        strictly_lower += usize::from(est < exact - TOL);
    }
    verdict(
        3,
        "underestimation",
        violations == 0,
        format!("{violations} violations, {strictly_lower}/1000 strictly lower"),
    );
}

#[test]
fn criterion_4_ensemble_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
    let mut failures = 0;
    for _ in 0..100 {
        let n = rng.random_range(20..200);
        let sample = zipf_sample(&mut rng, n, 60);
        let base = FilterConfig::new(
            rng.random_range(8..=512),
            rng.random_range(1..=6),
            rng.random_range(0..u64::MAX - 4),
        )
        .unwrap();
        let filters: Vec<_> = (0..4).map(|i| build(base.with_seed(base.seed() + i), &sample)).collect();
        let max = ensemble_entropy(&filters, LogBase::BITS).unwrap();
        let dominates = filters.iter().all(|f| max >= estimate(f));
        failures += usize::from(!dominates || max > exact_bits(&sample) + TOL);
    }
    verdict(4, "ensemble rule", failures == 0, format!("{failures}/100 trials failed"));
}

#[test]
fn criterion_5_detector_soundness() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC5);
    let (mut certain, mut unsound) = (0, 0);
    for _ in 0..1000 {
        let sample = random_multiset(&mut rng, 20, 5);
        let cfg =
            FilterConfig::new(rng.random_range(2..=256), rng.random_range(1..=6), rng.random()).unwrap();
        let f = build(cfg, &sample);
        if certain_collision(f.counters(), cfg.num_hashes()).unwrap().certain {
            certain += 1;
            unsound += usize::from(!trace_shares_cell(&cfg, &sample));
        }
    }
    let ok = unsound == 0 && certain > 0;
    verdict(5, "detector soundness", ok, format!("{certain} certain verdicts, {unsound} unsound"));
}

fn random_trace(
    rng: &mut ChaCha8Rng,
    f: &mut CountingBloomFilter,
    ops: usize,
    alphabet: u32,
) -> (usize, usize) {
    let m = u64::from(f.config().num_hashes());
    let (mut failed, mut broken) = (0, 0);
    for _ in 0..ops {
        let e = rng.random_range(0..alphabet).to_le_bytes();
        let before = f.clone();
        let res = if rng.random_bool(0.55) { f.insert(&e) } else { f.remove(&e) };
        if res.is_err() {
            failed += 1;
            broken += usize::from(*f != before);
        }
        broken += usize::from(f.stats().counter_sum != m * f.inserted_count());
    }
    (failed, broken)
}

#[test]
fn criterion_6_conservation() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC6);
    let mut f = CountingBloomFilter::new(FilterConfig::new(64, 3, 11).unwrap()).unwrap();
    let (failed_a, broken_a) = random_trace(&mut rng, &mut f, 10_000, 40);

    // Near-saturated single cell so overflows actually happen.
    let cfg = FilterConfig::new(1, 1, 0).unwrap();
    let mut g = CountingBloomFilter::from_parts(cfg, vec![u16::MAX - 3], u64::from(u16::MAX - 3)).unwrap();
    let (failed_b, broken_b) = random_trace(&mut rng, &mut g, 10_000, 5);

    let ok = broken_a + broken_b == 0 && failed_a > 0 && failed_b > 0;
    verdict(
        6,
        "conservation",
        ok,
        format!("{} failed ops, {} invariant breaks", failed_a + failed_b, broken_a + broken_b),
    );
}

#[test]
fn criterion_7_serialization() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC7);
    let mut mismatches = 0;
    let mut last = Vec::new();
    for _ in 0..500 {
        let cfg =
            FilterConfig::new(rng.random_range(1..=300), rng.random_range(1..=8), rng.random()).unwrap();
        let f = build(cfg, &random_multiset(&mut rng, 30, 6));
        let mut buf = Vec::new();
        save(&f, &mut buf).unwrap();
        mismatches += usize::from(load(&buf[..]).ok().as_ref() != Some(&f));
        last = buf;
    }

    let truncated = matches!(load(&last[..27]), Err(Error::TruncatedFile { .. }))
        && matches!(load(&last[..last.len() - 1]), Err(Error::TruncatedFile { .. }));
    let mut bad = last.clone();
    bad[..4].copy_from_slice(b"CBF2");
    let bad_magic = matches!(load(&bad[..]), Err(Error::BadMagic(_)));
    let mut bad = last.clone();
    let n = bad.len();
    bad[n - 2] ^= 0x01;
    let inconsistent = matches!(load(&bad[..]), Err(Error::InconsistentState { .. }));

    let ok = mismatches == 0 && truncated && bad_magic && inconsistent;
    verdict(
        7,
        "serialization",
        ok,
        format!("{mismatches} round-trip mismatches; truncated={truncated} bad_magic={bad_magic} sum_mismatch={inconsistent}"),
    );
}

#[test]
fn criterion_8_membership() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC8);
    let mut false_negatives = 0;
    for _ in 0..100 {
        let cfg =
            FilterConfig::new(rng.random_range(1..=2048), rng.random_range(1..=8), rng.random()).unwrap();
        let mut f = CountingBloomFilter::new(cfg).unwrap();
        let mut inserted = Vec::new();
        for _ in 0..100 {
            let e: [u8; 6] = rng.random();
            f.insert(&e).unwrap();
            false_negatives += usize::from(!f.contains(&e));
            inserted.push(e);
        }
        false_negatives += inserted.iter().filter(|e| !f.contains(&e[..])).count();
    }

    // Enumerate one-letter strings for two that split the cells and a third
    // that was never inserted but lands on an occupied cell.
    let cfg = FilterConfig::new(2, 1, 0).unwrap();
    let words: Vec<[u8; 1]> = (b'a'..=b'z').map(|c| [c]).collect();
    let cell = |w: &[u8]| reference_indexes(0, 2, 1, w)[0];
    let a = words.iter().find(|w| cell(&w[..]) == 0).unwrap();
    let b = words.iter().find(|w| cell(&w[..]) == 1).unwrap();
    let c = words.iter().find(|w| *w != a && *w != b).unwrap();
    let f = build(cfg, &[a, b]);
    let fp = f.contains(c);

    let ok = false_negatives == 0 && fp;
    verdict(
        8,
        "membership",
        ok,
        format!("{false_negatives} false negatives; {:?} is a false positive: {fp}", c[0] as char),
    );
}

#[test]
fn criterion_9_cross_implementation_determinism() {
    let hashes = fnv1a64(b"a") == 0xaf63_dc4c_8601_ec8c && fnv1a64(b"") == FNV_OFFSET_BASIS;

    let corpus = fixtures().join("corpus10.txt");
    let reference = fs::read(fixtures().join("corpus10.size64.m3.seed7.cbf")).unwrap();
    let elements: Vec<Vec<u8>> = fs::read(&corpus)
        .unwrap()
        .split(|&b| b == b'\n')
        .filter(|l| !l.is_empty())
        .map(<[u8]>::to_vec)
        .collect();
    assert_eq!(elements.len(), 10);
    let mut lib_bytes = Vec::new();
    save(&build(FilterConfig::new(64, 3, 7).unwrap(), &elements), &mut lib_bytes).unwrap();

    let dir = tempfile::TempDir::new().unwrap();
    let stem = dir.path().join("ref");
    let status = Command::new(env!("CARGO_BIN_EXE_cbf"))
        .args(["build", "--size", "64", "--hashes", "3", "--seed", "7", "--output"])
        .arg(&stem)
        .arg(&corpus)
        .output()
        .unwrap()
        .status;
    let cli_bytes = fs::read(dir.path().join("ref.0.cbf")).unwrap_or_default();

    let ok = hashes && status.success() && lib_bytes == reference && cli_bytes == reference;
    verdict(
        9,
        "cross-implementation determinism",
        ok,
        format!(
            "hash vectors={hashes} library file matches={} CLI file matches={}",
            lib_bytes == reference,
            cli_bytes == reference
        ),
    );
}
