//! ROUGE metrics, the single-document summarization harness and the
//! adjusted Rand index used to score cluster recovery.
//!
//! Tokens are lowercased; punctuation-only tokens are ignored. There is no
//! stemming and no stopword removal.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::hash::Hash;
use std::io::BufRead;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cluster::ThemeCluster;
use crate::domain::{tokenize, Story, TokenSeq};
use crate::embed::Embedder;
use crate::summarize::{build_pool, select_summary, Methods, RankerModel, SummaryCandidate};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    pub fn new(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        RougeScore { precision, recall, f1 }
    }
}

fn words(seq: &TokenSeq) -> Vec<String> {
    seq.tokens.iter().filter(|t| !t.is_punct()).map(|t| t.lower.clone()).collect()
}

fn ngram_counts(words: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if words.len() >= n {
        for gram in words.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Clipped n-gram overlap.
///
/// # Panics
/// If `n == 0`.
pub fn rouge_n(candidate: &TokenSeq, reference: &TokenSeq, n: usize) -> RougeScore {
    assert!(n >= 1, "ROUGE-N needs n >= 1");
    let (c, r) = (words(candidate), words(reference));
    let (cc, rc) = (ngram_counts(&c, n), ngram_counts(&r, n));
    let matched: usize = cc.iter().map(|(g, &k)| k.min(rc.get(g).copied().unwrap_or(0))).sum();
    let total = |m: &HashMap<&[String], usize>| m.values().sum::<usize>();
    RougeScore::new(ratio(matched, total(&cc)), ratio(matched, total(&rc)))
}

pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut row = vec![0usize; b.len()];
    for x in a {
        let (mut diag, mut left) = (0, 0);
        for (cell, y) in row.iter_mut().zip(b) {
            let up = *cell;
            left = if x == y { diag + 1 } else { up.max(left) };
            *cell = left;
            diag = up;
        }
    }
    row.last().copied().unwrap_or(0)
}

/// Longest-common-subsequence F-measure with equal weight on P and R.
pub fn rouge_l(candidate: &TokenSeq, reference: &TokenSeq) -> RougeScore {
    rouge_l_words(&words(candidate), &words(reference))
}

/// ROUGE-L over already-normalized word sequences.
pub fn rouge_l_words<T: PartialEq>(candidate: &[T], reference: &[T]) -> RougeScore {
    let l = lcs_len(candidate, reference);
    RougeScore::new(ratio(l, candidate.len()), ratio(l, reference.len()))
}

pub fn rouge_n_text(candidate: &str, reference: &str, n: usize) -> RougeScore {
    rouge_n(&tokenize(candidate), &tokenize(reference), n)
}

pub fn rouge_l_text(candidate: &str, reference: &str) -> RougeScore {
    rouge_l(&tokenize(candidate), &tokenize(reference))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdsCase {
    pub story: Story,
    pub reference_summary: String,
}

/// Reads one `{"story":{...},"reference_summary":"..."}` per line.
pub fn read_sds_cases(reader: impl BufRead) -> Result<Vec<SdsCase>, Error> {
    let mut cases = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let case: SdsCase = serde_json::from_str(&line)?;
        case.story.validate()?;
        if case.reference_summary.trim().is_empty() {
            return Err(Error::Config(format!("sds case on line {}: empty reference summary", n + 1)));
        }
        cases.push(case);
    }
    Ok(cases)
}

/// How the harness picks a summary from each pool.
#[derive(Debug, Clone, Copy)]
pub enum SdsRanker<'a> {
    Model(&'a RankerModel),
    /// Scores candidates by ROUGE-L F1 against the case's reference.
    RougeLOracle,
}

pub const SDS_METRICS: [&str; 5] = ["ROUGE-1", "ROUGE-2", "ROUGE-3", "ROUGE-4", "ROUGE-L"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdsReport {
    pub method: Methods,
    pub cases: usize,
    /// Cases whose pool was empty; they score 0 everywhere.
    pub empty_pools: usize,
    /// Macro-averaged F1 per metric, in [`SDS_METRICS`] order.
    pub f1: Vec<(String, f64)>,
}

fn case_scores(summary: &str, reference: &str) -> [f64; 5] {
    let (c, r) = (tokenize(summary), tokenize(reference));
    [rouge_n(&c, &r, 1).f1, rouge_n(&c, &r, 2).f1, rouge_n(&c, &r, 3).f1, rouge_n(&c, &r, 4).f1, rouge_l(&c, &r).f1]
}

/// Summarizes every case as a one-story cluster and reports mean F1.
pub fn run_sds(
    cases: &[SdsCase],
    method: Methods,
    ranker: SdsRanker<'_>,
    embedder: &Embedder,
    max_body_sentences: usize,
) -> Result<SdsReport, Error> {
    if cases.is_empty() {
        return Err(Error::Config("run_sds needs at least one case".into()));
    }
    let mut sums = [0.0f64; 5];
    let mut empty_pools = 0;
    for case in cases {
        let cluster = ThemeCluster::embed(vec![Arc::new(case.story.clone())], embedder)?;
        let pool = match build_pool(&cluster, method, max_body_sentences) {
            Ok(pool) => pool,
            Err(_) => {
                empty_pools += 1;
                continue;
            }
        };
        let chosen = match ranker {
            SdsRanker::Model(model) => select_summary(model, &pool)?,
            SdsRanker::RougeLOracle => {
                let reference = tokenize(&case.reference_summary);
                let oracle = |c: &SummaryCandidate| rouge_l(&tokenize(&c.text), &reference).f1;
                select_summary(&oracle, &pool)?
            }
        };
        for (sum, s) in sums.iter_mut().zip(case_scores(&chosen.text, &case.reference_summary)) {
            *sum += s;
        }
    }
    let n = cases.len() as f64;
    Ok(SdsReport {
        method,
        cases: cases.len(),
        empty_pools,
        f1: SDS_METRICS.iter().zip(sums).map(|(m, s)| (m.to_string(), s / n)).collect(),
    })
}

/// Aligned text table with one column per report.
pub fn format_sds_table(reports: &[SdsReport]) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<9}", "metric");
    for r in reports {
        let _ = write!(out, " {:>12}", r.method.as_str());
    }
    out.push('\n');
    for (i, metric) in SDS_METRICS.iter().enumerate() {
        let _ = write!(out, "{metric:<9}");
        for r in reports {
            let _ = write!(out, " {:>12.4}", r.f1[i].1);
        }
        out.push('\n');
    }
    let _ = write!(out, "{:<9}", "cases");
    for r in reports {
        let _ = write!(out, " {:>12}", r.cases);
    }
    out.push('\n');
    let _ = write!(out, "{:<9}", "empty");
    for r in reports {
        let _ = write!(out, " {:>12}", r.empty_pools);
    }
    out.push('\n');
    out
}

fn choose2(n: usize) -> f64 {
    (n * n.saturating_sub(1)) as f64 / 2.0
}

/// Adjusted Rand index between two labelings of the same items. Identical
/// partitions score 1 even in the degenerate all-singletons or
/// single-cluster cases.
///
/// # Panics
/// If the labelings have different lengths.
pub fn adjusted_rand_index<A: Eq + Hash, B: Eq + Hash>(a: &[A], b: &[B]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must cover the same items");
    let mut joint: HashMap<(&A, &B), usize> = HashMap::new();
    let mut rows: HashMap<&A, usize> = HashMap::new();
    let mut cols: HashMap<&B, usize> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = joint.values().map(|&n| choose2(n)).sum();
    let row_sum: f64 = rows.values().map(|&n| choose2(n)).sum();
    let col_sum: f64 = cols.values().map(|&n| choose2(n)).sum();
    let total = choose2(a.len());
    let expected = if total > 0.0 { row_sum * col_sum / total } else { 0.0 };
    let max = 0.5 * (row_sum + col_sum);
    if (max - expected).abs() < f64::EPSILON {
        return if joint.len() == rows.len() && joint.len() == cols.len() { 1.0 } else { 0.0 };
    }
    (index - expected) / (max - expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn rouge_examples() {
        let s = rouge_n_text("the cat sat", "the cat sat on the mat", 1);
        assert!(close(s.precision, 1.0) && close(s.recall, 0.5) && close(s.f1, 2.0 / 3.0));
        let s = rouge_n_text("a b c", "a b c d", 2);
        assert!(close(s.precision, 1.0) && close(s.recall, 2.0 / 3.0) && close(s.f1, 0.8));
        let s = rouge_l_text("cat the sat", "the cat sat");
        assert!(close(s.precision, 2.0 / 3.0) && close(s.recall, 2.0 / 3.0) && close(s.f1, 2.0 / 3.0));
        assert_eq!(rouge_l_text("a b", "c d").f1, 0.0);
        assert_eq!(rouge_n_text("", "a", 1), RougeScore::default());
        assert_eq!(rouge_n_text("Stocks fell.", "stocks fell", 2).f1, 1.0);
    }

    #[test]
    fn ari_examples() {
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &["x", "x", "y", "y"]), 1.0);
        assert!(close(adjusted_rand_index(&[0, 0, 1, 1], &[0, 1, 0, 1]), -0.5));
        assert_eq!(adjusted_rand_index(&[0, 1, 2], &[5, 6, 7]), 1.0);
        assert_eq!(adjusted_rand_index(&[0, 0, 0], &[1, 1, 1]), 1.0);
        assert_eq!(adjusted_rand_index(&[0, 0, 0], &[1, 2, 3]), 0.0);
    }

    #[test]
    fn sds_identity_reference_scores_one() {
        let story = Story {
            id: "s".into(),
            headline: "Stocks fell sharply".into(),
            body: String::new(),
            source: "X".into(),
            ingested_at: 1,
            tags: Default::default(),
            online_cluster: None,
        };
        let cases = vec![SdsCase { story, reference_summary: "Stocks fell sharply".into() }];
        let embedder = Embedder::new(Default::default()).unwrap();
        let report = run_sds(&cases, Methods::Both, SdsRanker::RougeLOracle, &embedder, 2).unwrap();
        // a three-word summary has no 4-grams
        assert_eq!(report.f1.iter().map(|m| m.1).collect::<Vec<_>>(), [1.0, 1.0, 1.0, 0.0, 1.0]);
        assert!(format_sds_table(&[report]).contains("ROUGE-L"));
        assert!(run_sds(&[], Methods::Both, SdsRanker::RougeLOracle, &embedder, 2).is_err());
    }

    fn seq(ids: &[u8]) -> TokenSeq {
        ids.iter().map(|i| crate::domain::Token::new(format!("w{i}"))).collect()
    }

    proptest! {
        #[test]
        fn precision_recall_swap(a in proptest::collection::vec(0u8..4, 0..10), b in proptest::collection::vec(0u8..4, 0..10), n in 1usize..4) {
            let (x, y) = (seq(&a), seq(&b));
            let (f, r) = (rouge_n(&x, &y, n), rouge_n(&y, &x, n));
            prop_assert!(close(f.precision, r.recall) && close(f.recall, r.precision));
            let (f, r) = (rouge_l(&x, &y), rouge_l(&y, &x));
            prop_assert!(close(f.precision, r.recall) && close(f.recall, r.precision));
            for s in [rouge_n(&x, &y, n), rouge_l(&x, &y)] {
                prop_assert!((0.0..=1.0).contains(&s.f1) && s.f1 <= s.precision.max(s.recall) + 1e-12);
            }
        }

        #[test]
        fn ari_is_permutation_invariant(labels in proptest::collection::vec(0u8..4, 2..20), shift in 1u8..10) {
            let renamed: Vec<u8> = labels.iter().map(|l| l.wrapping_add(shift).wrapping_mul(3)).collect();
            prop_assert!(close(adjusted_rand_index(&labels, &renamed), 1.0));
        }
    }
}
