//! Scan-vs-index timing over a seeded synthetic corpus.
//!
//! The index counts as successful when total indexed query time is far
//! below total linear-scan time; "far below" is `speedup > threshold`.

use std::time::{Duration, Instant};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::index::{build_index, query_index, IndexError};
use super::query::{parse_query, QueryAst};
use super::scan::scan_query;
use super::Document;

pub const DEFAULT_THRESHOLD: f64 = 10.0;
const MIN_DOC_TERMS: usize = 5;
const MAX_DOC_TERMS: usize = 50;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid benchmark config: {0}")]
    Config(&'static str),
    #[error("scan and index disagree on query {query:?}: {scan} vs {indexed} hits")]
    Mismatch {
        query: String,
        scan: usize,
        indexed: usize,
    },
    #[error(transparent)]
    Index(#[from] IndexError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub doc_count: usize,
    pub vocab_size: usize,
    pub queries: usize,
    pub seed: u64,
    pub threshold: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            doc_count: 50_000,
            vocab_size: 5_000,
            queries: 200,
            seed: 7,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub corpus_size: usize,
    pub vocab_size: usize,
    pub query_count: usize,
    pub seed: u64,
    pub threshold: f64,
    pub total_hits: usize,
    /// Every query returned identical hits, scores and order on both paths.
    pub results_equal: bool,
    pub build_time_s: f64,
    pub scan_time_total_s: f64,
    pub indexed_time_total_s: f64,
    pub scan_time_mean_s: f64,
    pub indexed_time_mean_s: f64,
    pub speedup: f64,
    pub success: bool,
}

fn term_name(rank: usize) -> String {
    format!("w{rank}")
}

/// Documents of 5–50 terms drawn with weight 1/(rank+1) over the vocabulary.
/// Ids are zero-padded so lexical order matches generation order.
pub fn generate_corpus(doc_count: usize, vocab_size: usize, seed: u64) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zipf = WeightedIndex::new((0..vocab_size).map(|r| 1.0 / (r as f64 + 1.0)))
        .expect("vocabulary is non-empty");
    let vocab: Vec<String> = (0..vocab_size).map(term_name).collect();
    let width = doc_count.saturating_sub(1).to_string().len();
    (0..doc_count)
        .map(|i| {
            let len = rng.gen_range(MIN_DOC_TERMS..=MAX_DOC_TERMS);
            let words: Vec<&str> = (0..len).map(|_| vocab[zipf.sample(&mut rng)].as_str()).collect();
            Document::new(format!("doc{i:0width$}"), words.join(" "))
        })
        .collect()
}

/// Queries of 1–3 terms drawn uniformly from the vocabulary, joined by
/// AND, OR or AND NOT. The first term is always positive.
pub fn generate_queries(count: usize, vocab_size: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=3);
            let mut q = term_name(rng.gen_range(0..vocab_size));
            for _ in 1..n {
                let op = ["AND", "OR", "AND NOT"][rng.gen_range(0..3)];
                q.push_str(&format!(" {op} {}", term_name(rng.gen_range(0..vocab_size))));
            }
            q
        })
        .collect()
}

pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport, BenchError> {
    if config.doc_count < 1 {
        return Err(BenchError::Config("doc_count must be at least 1"));
    }
    if config.queries < 1 {
        return Err(BenchError::Config("queries must be at least 1"));
    }
    if config.vocab_size < 2 {
        return Err(BenchError::Config("vocab_size must be at least 2"));
    }
    if !(config.threshold.is_finite() && config.threshold > 0.0) {
        return Err(BenchError::Config("threshold must be a positive number"));
    }

    let docs = generate_corpus(config.doc_count, config.vocab_size, config.seed);
    let queries: Vec<(String, QueryAst)> = generate_queries(config.queries, config.vocab_size, config.seed)
        .into_iter()
        .map(|q| {
            let ast = parse_query(&q).expect("generated queries are well-formed");
            (q, ast)
        })
        .collect();

    let started = Instant::now();
    let index = build_index(&docs)?;
    let build_time = started.elapsed();

    let mut scan_time = Duration::ZERO;
    let mut indexed_time = Duration::ZERO;
    let mut total_hits = 0;
    for (text, ast) in &queries {
        let t = Instant::now();
        let scanned = scan_query(&docs, ast);
        scan_time += t.elapsed();

        let t = Instant::now();
        let indexed = query_index(&index, ast);
        indexed_time += t.elapsed();

        if scanned != indexed {
            return Err(BenchError::Mismatch {
                query: text.clone(),
                scan: scanned.len(),
                indexed: indexed.len(),
            });
        }
        total_hits += indexed.len();
    }

    // A zero reading would make the ratio undefined; clamp to the timer's resolution.
    let indexed_time = indexed_time.max(Duration::from_nanos(1));
    let speedup = scan_time.as_secs_f64() / indexed_time.as_secs_f64();
    let n = queries.len() as f64;
    Ok(BenchReport {
        corpus_size: docs.len(),
        vocab_size: config.vocab_size,
        query_count: queries.len(),
        seed: config.seed,
        threshold: config.threshold,
        total_hits,
        results_equal: true,
        build_time_s: build_time.as_secs_f64(),
        scan_time_total_s: scan_time.as_secs_f64(),
        indexed_time_total_s: indexed_time.as_secs_f64(),
        scan_time_mean_s: scan_time.as_secs_f64() / n,
        indexed_time_mean_s: indexed_time.as_secs_f64() / n,
        speedup,
        success: speedup > config.threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_seeded() {
        let a = generate_corpus(20, 50, 3);
        assert_eq!(a, generate_corpus(20, 50, 3));
        assert_ne!(a, generate_corpus(20, 50, 4));
        assert_eq!(a[0].id, "doc00");
        for d in &a {
            let n = d.text.split(' ').count();
            assert!((MIN_DOC_TERMS..=MAX_DOC_TERMS).contains(&n));
        }
    }

    #[test]
    fn corpus_is_skewed_toward_low_ranks() {
        let docs = generate_corpus(300, 100, 1);
        let count = |w: &str| docs.iter().flat_map(|d| d.text.split(' ')).filter(|t| *t == w).count();
        assert!(count("w0") > 5 * count("w50").max(1));
    }

    #[test]
    fn queries_parse() {
        for q in generate_queries(100, 10, 0) {
            let ast = parse_query(&q).unwrap();
            assert!(!ast.positive_terms().is_empty());
        }
    }

    #[test]
    fn tiny_run_fails_huge_threshold() {
        let r = run_benchmark(&BenchConfig {
            doc_count: 1,
            vocab_size: 2,
            queries: 1,
            seed: 0,
            threshold: 1e9,
        })
        .unwrap();
        assert!(!r.success);
        assert!(r.results_equal);
        assert_eq!(r.corpus_size, 1);
        assert!((r.speedup - r.scan_time_total_s / r.indexed_time_total_s).abs() <= 1e-9 * r.speedup);
    }

    #[test]
    fn rejects_bad_config() {
        let base = BenchConfig { doc_count: 10, vocab_size: 10, queries: 1, seed: 0, threshold: 10.0 };
        for bad in [
            BenchConfig { doc_count: 0, ..base },
            BenchConfig { vocab_size: 1, ..base },
            BenchConfig { queries: 0, ..base },
            BenchConfig { threshold: f64::NAN, ..base },
        ] {
            assert!(matches!(run_benchmark(&bad), Err(BenchError::Config(_))));
        }
    }
}
