//! Micro-summaries for theme clusters.
//!
//! Two extractors fill a shared candidate pool from headlines and leading
//! body sentences: a tuple extractor producing who-does-what stubs and a
//! rule-based sentence compressor. A linear ranker picks the winner. Every
//! candidate is a token subsequence of its source sentence and at most
//! [`MAX_SUMMARY_CHARS`] characters long.

mod compress;
mod extract;
mod labels;
pub mod lexicon;
mod ranker;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::ThemeCluster;
use crate::domain::{normalize_text, render_tokens, tokenize, Token, TokenSeq};

pub use compress::compress_sentence;
pub use extract::extract_tuples;
pub use labels::{label_stats, read_labels, CandidateLabel, Grade, LabelStats, LabeledCandidate};
pub use lexicon::VerbLexicon;
pub use ranker::{pairwise_accuracy, train_ranker, RankerModel, LEARNING_RATE};

pub const MAX_SUMMARY_CHARS: usize = 50;
pub const DEFAULT_MAX_BODY_SENTENCES: usize = 2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SummarizeError {
    #[error("no summary candidates survived extraction")]
    NoCandidates,
    #[error("training labels carry no preference (all grades equal)")]
    NoTrainingSignal,
    #[error("invalid label record: {0}")]
    InvalidLabel(String),
    #[error("invalid ranker model: {0}")]
    InvalidModel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Tuple,
    Compression,
}

/// Which extractors feed the pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Methods {
    Tuple,
    Compression,
    #[default]
    Both,
}

impl Methods {
    pub fn includes(self, method: Method) -> bool {
        matches!(
            (self, method),
            (Methods::Both, _) | (Methods::Tuple, Method::Tuple) | (Methods::Compression, Method::Compression)
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Methods::Tuple => "tuple",
            Methods::Compression => "compression",
            Methods::Both => "both",
        }
    }
}

impl fmt::Display for Methods {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Methods {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tuple" => Ok(Methods::Tuple),
            "compression" => Ok(Methods::Compression),
            "both" => Ok(Methods::Both),
            other => Err(format!("unknown method {other:?} (expected tuple, compression or both)")),
        }
    }
}

/// Ranker features, in the order of [`FeatureVector::to_array`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct FeatureVector {
    pub length_chars: f64,
    pub token_count: f64,
    pub has_finite_verb: f64,
    pub starts_capitalized: f64,
    pub svo_complete: f64,
    pub salience: f64,
    pub from_headline: f64,
    pub method_is_tuple: f64,
}

impl FeatureVector {
    pub const LEN: usize = 8;
    pub const NAMES: [&'static str; Self::LEN] = [
        "length_chars",
        "token_count",
        "has_finite_verb",
        "starts_capitalized",
        "svo_complete",
        "salience",
        "from_headline",
        "method_is_tuple",
    ];

    pub fn to_array(&self) -> [f64; Self::LEN] {
        [
            self.length_chars,
            self.token_count,
            self.has_finite_verb,
            self.starts_capitalized,
            self.svo_complete,
            self.salience,
            self.from_headline,
            self.method_is_tuple,
        ]
    }

    pub fn from_array(a: [f64; Self::LEN]) -> Self {
        FeatureVector {
            length_chars: a[0],
            token_count: a[1],
            has_finite_verb: a[2],
            starts_capitalized: a[3],
            svo_complete: a[4],
            salience: a[5],
            from_headline: a[6],
            method_is_tuple: a[7],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryCandidate {
    pub text: String,
    pub method: Method,
    pub source_story: String,
    /// 0 is the headline; body sentences count from 1.
    pub source_sentence_index: usize,
    /// Tokens of the candidate, a subsequence of the source sentence.
    pub tokens: Vec<Token>,
    pub features: FeatureVector,
}

pub(crate) fn candidate_from_tokens(tokens: &[Token], method: Method) -> Option<SummaryCandidate> {
    if !tokens.iter().any(|t| !t.is_punct()) {
        return None;
    }
    let text = render_tokens(tokens).trim().to_string();
    Some(SummaryCandidate {
        text,
        method,
        source_story: String::new(),
        source_sentence_index: 0,
        tokens: tokens.to_vec(),
        features: FeatureVector::default(),
    })
}

/// Anything that can score a candidate.
pub trait Scorer {
    fn score(&self, candidate: &SummaryCandidate) -> f64;
}

impl<F: Fn(&SummaryCandidate) -> f64> Scorer for F {
    fn score(&self, candidate: &SummaryCandidate) -> f64 {
        self(candidate)
    }
}

pub fn score(model: &RankerModel, candidate: &SummaryCandidate) -> f64 {
    model.score_features(&candidate.features)
}

/// Highest-scoring candidate; ties prefer the shorter, then the
/// lexicographically smaller text.
pub fn select_summary<'a, S: Scorer + ?Sized>(
    scorer: &S,
    pool: &'a [SummaryCandidate],
) -> Result<&'a SummaryCandidate, SummarizeError> {
    let mut best: Option<(&SummaryCandidate, f64, usize)> = None;
    for candidate in pool {
        let s = scorer.score(candidate);
        let len = candidate.text.chars().count();
        let better = match best {
            None => true,
            Some((b, bs, blen)) => s > bs || (s == bs && (len < blen || (len == blen && candidate.text < b.text))),
        };
        if better {
            best = Some((candidate, s, len));
        }
    }
    best.map(|(c, _, _)| c).ok_or(SummarizeError::NoCandidates)
}

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "inc", "corp", "co", "ltd", "plc", "jr", "sr", "st", "gov", "sen", "rep", "gen",
    "no", "vs", "etc", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec", "u.s",
    "u.k", "e.g", "i.e",
];

/// Splits normalized text into sentences at `.`, `!` or `?` followed by a
/// capitalized token, unless the period closes a known abbreviation.
pub fn split_sentences(text: &str) -> Vec<TokenSeq> {
    let tokens = tokenize(text).tokens;
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        current.push(tok.clone());
        let terminal = matches!(tok.surface.as_str(), "." | "!" | "?");
        let next_capital = tokens
            .get(i + 1)
            .and_then(|t| t.surface.chars().find(|c| c.is_alphanumeric()).or_else(|| t.surface.chars().next()))
            .is_some_and(|c| c.is_uppercase() || !c.is_alphanumeric());
        let abbreviation =
            tok.surface == "." && i > 0 && ABBREVIATIONS.contains(&tokens[i - 1].lower.trim_end_matches('.'));
        if terminal && next_capital && !abbreviation {
            sentences.push(TokenSeq { tokens: std::mem::take(&mut current) });
        }
    }
    if !current.is_empty() {
        sentences.push(TokenSeq { tokens: current });
    }
    sentences
}

/// Cluster-relative informativeness of words: document frequency within
/// the cluster weighted by an inverse-frequency term.
#[derive(Debug, Clone, Default)]
pub struct SalienceModel {
    doc_freq: HashMap<String, usize>,
    docs: usize,
}

impl SalienceModel {
    pub fn from_texts<'a>(docs: impl IntoIterator<Item = &'a str>) -> Self {
        let mut model = SalienceModel::default();
        for doc in docs {
            model.docs += 1;
            let words: HashSet<String> =
                tokenize(doc).tokens.into_iter().filter(|t| !t.is_punct()).map(|t| t.lower).collect();
            for w in words {
                *model.doc_freq.entry(w).or_default() += 1;
            }
        }
        model
    }

    pub fn word_weight(&self, lower: &str) -> f64 {
        if lexicon::is_function_word(lower) {
            return 0.0;
        }
        match self.doc_freq.get(lower) {
            Some(&df) if self.docs > 0 => {
                let n = self.docs as f64;
                let df = df as f64;
                (df / n) * (1.0 + n / df).ln()
            }
            _ => 0.0,
        }
    }

    /// Mean word weight over the non-punctuation tokens.
    pub fn salience(&self, tokens: &[Token]) -> f64 {
        let words: Vec<&Token> = tokens.iter().filter(|t| !t.is_punct()).collect();
        if words.is_empty() {
            return 0.0;
        }
        words.iter().map(|t| self.word_weight(&t.lower)).sum::<f64>() / words.len() as f64
    }
}

pub fn compute_features(
    candidate: &SummaryCandidate,
    salience: &SalienceModel,
    lexicon: &VerbLexicon,
) -> FeatureVector {
    let tokens = &candidate.tokens;
    let groups = extract::verb_groups(tokens, lexicon);
    let svo = groups.iter().any(|g| {
        g.start > 0
            && extract::is_nounish(&tokens[g.start - 1], lexicon)
            && tokens[g.end..].iter().any(|t| !t.is_punct())
    });
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    FeatureVector {
        length_chars: candidate.text.chars().count() as f64,
        token_count: tokens.iter().filter(|t| !t.is_punct()).count() as f64,
        has_finite_verb: flag((0..tokens.len()).any(|i| extract::is_verb_at(tokens, i, lexicon))),
        starts_capitalized: flag(candidate.text.chars().next().is_some_and(char::is_uppercase)),
        svo_complete: flag(svo),
        salience: salience.salience(tokens),
        from_headline: flag(candidate.source_sentence_index == 0),
        method_is_tuple: flag(candidate.method == Method::Tuple),
    }
}

/// Source sentences of a story: the headline, then up to
/// `max_body_sentences` leading body sentences.
pub fn story_sentences(headline: &str, body: &str, max_body_sentences: usize) -> Vec<TokenSeq> {
    let mut sentences = vec![tokenize(&normalize_text(headline))];
    sentences.extend(split_sentences(&normalize_text(body)).into_iter().take(max_body_sentences));
    sentences
}

/// Runs the selected extractors over every member's headline and leading
/// body sentences, dedups case-insensitively (first occurrence wins) and
/// computes features.
pub fn build_pool(
    cluster: &ThemeCluster,
    methods: Methods,
    max_body_sentences: usize,
) -> Result<Vec<SummaryCandidate>, SummarizeError> {
    let lexicon = VerbLexicon::english();
    let salience =
        SalienceModel::from_texts(cluster.members.iter().flat_map(|s| [s.headline.as_str(), s.body.as_str()]));
    let mut seen = HashSet::new();
    let mut pool = Vec::new();
    for story in &cluster.members {
        for (index, sentence) in
            story_sentences(&story.headline, &story.body, max_body_sentences).into_iter().enumerate()
        {
            if sentence.is_empty() {
                continue;
            }
            let mut found = Vec::new();
            if methods.includes(Method::Tuple) {
                found.extend(extract_tuples(&sentence, lexicon));
            }
            if methods.includes(Method::Compression) {
                found.extend(compress_sentence(&sentence, lexicon));
            }
            for mut candidate in found {
                if !seen.insert(candidate.text.to_lowercase()) {
                    continue;
                }
                candidate.source_story = story.id.clone();
                candidate.source_sentence_index = index;
                candidate.features = compute_features(&candidate, &salience, lexicon);
                pool.push(candidate);
            }
        }
    }
    if pool.is_empty() {
        Err(SummarizeError::NoCandidates)
    } else {
        Ok(pool)
    }
}

/// True when `needle` occurs in order (not necessarily contiguously) in `haystack`.
pub fn is_token_subsequence(needle: &[Token], haystack: &[Token]) -> bool {
    let mut it = haystack.iter();
    needle.iter().all(|n| it.any(|h| h.surface == n.surface))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Story;
    use crate::embed::Embedder;
    use std::sync::Arc;

    fn cluster(stories: &[(&str, &str)]) -> ThemeCluster {
        let e = Embedder::new(Default::default()).unwrap();
        let members = stories
            .iter()
            .enumerate()
            .map(|(i, (h, b))| {
                Arc::new(Story {
                    id: format!("s{i}"),
                    headline: h.to_string(),
                    body: b.to_string(),
                    source: "BN".into(),
                    ingested_at: 1,
                    tags: Default::default(),
                    online_cluster: None,
                })
            })
            .collect();
        ThemeCluster::embed(members, &e).unwrap()
    }

    #[test]
    fn split_examples() {
        assert_eq!(split_sentences("Stocks fell. Bonds rose.").len(), 2);
        assert_eq!(split_sentences("Pompeo in UK for Trade Talks").len(), 1);
        assert!(split_sentences("").is_empty());
        assert_eq!(split_sentences("Mr. Smith went to the U.K. on Monday. Then he left.").len(), 2);
        assert_eq!(split_sentences("Apple Inc. Reported results! Shares rose?").len(), 2);
        assert_eq!(split_sentences("It fell 3.5. then rose").len(), 1);
    }

    #[test]
    fn pool_method_gating() {
        let c = cluster(&[("Facebook warns revenue growth is slowing, analysts said", "")]);
        let tuples = build_pool(&c, Methods::Tuple, 2).unwrap();
        assert!(tuples.iter().all(|c| c.method == Method::Tuple));
        let both = build_pool(&c, Methods::Both, 2).unwrap();
        let compression = build_pool(&c, Methods::Compression, 2).unwrap();
        let texts: HashSet<String> = both.iter().map(|c| c.text.to_lowercase()).collect();
        for c in tuples.iter().chain(&compression) {
            assert!(texts.contains(&c.text.to_lowercase()));
        }
    }

    #[test]
    fn verbless_cluster_has_no_candidates() {
        let long = "the extraordinarily lengthy and thoroughly uninformative fragment of words";
        let c = cluster(&[(long, "")]);
        assert_eq!(build_pool(&c, Methods::Both, 2), Err(SummarizeError::NoCandidates));
    }

    #[test]
    fn score_examples() {
        let c = cluster(&[("Facebook, the social media giant, warns revenue growth slowing", "")]);
        let pool = build_pool(&c, Methods::Both, 0).unwrap();
        let zero = RankerModel::zeros();
        assert!(pool.iter().all(|c| score(&zero, c) == 0.0));

        let mut one_hot = RankerModel::zeros();
        one_hot.weights[2] = 1.0;
        let lex = VerbLexicon::english();
        let verbal =
            candidate_from_tokens(&tokenize("Facebook Warns Revenue Growth Slowing").tokens, Method::Compression)
                .unwrap();
        let fragment = candidate_from_tokens(&tokenize("the social media giant").tokens, Method::Compression).unwrap();
        let sal = SalienceModel::default();
        let fv = |c: &SummaryCandidate| SummaryCandidate { features: compute_features(c, &sal, lex), ..c.clone() };
        let (verbal, fragment) = (fv(&verbal), fv(&fragment));
        assert_eq!(score(&one_hot, &verbal), 1.0);
        assert_eq!(score(&one_hot, &fragment), 0.0);

        // hand-computed with the default weights and zero salience:
        // verbal: 0.6 + 2.0 (svo) + 1.5 (verb) + 0.5 (headline) - 0.02 * 37 = 3.86
        // fragment: 0.6 + 0.5 (headline) - 0.02 * 22 = 0.66
        let model = RankerModel::default();
        assert!((score(&model, &verbal) - 3.86).abs() < 1e-9);
        assert!((score(&model, &fragment) - 0.66).abs() < 1e-9);
    }

    #[test]
    fn select_tie_rules() {
        let mk = |t: &str| candidate_from_tokens(&tokenize(t).tokens, Method::Tuple).unwrap();
        let zero = RankerModel::zeros();
        let single = vec![mk("Britain to Leave the EU")];
        assert_eq!(select_summary(&zero, &single).unwrap().text, "Britain to Leave the EU");
        let pool = vec![mk("aaaa aaaa aaaa aaaa aaaa aaaa aaaa aaaa aaaa"), mk("bbbb bbbb bbbb bbbb bbbb bbbb")];
        assert_eq!(select_summary(&zero, &pool).unwrap().text.len(), 29);
        let pool = vec![mk("b"), mk("a")];
        assert_eq!(select_summary(&zero, &pool).unwrap().text, "a");
        assert_eq!(select_summary(&zero, &[]), Err(SummarizeError::NoCandidates));
    }

    #[test]
    fn pool_is_deterministic_and_extractive() {
        let c = cluster(&[
            (
                "Britain to Leave the EU",
                "Prime Minister Boris Johnson hailed the beginning, officials said. The vote passed.",
            ),
            (
                "Sturgeon Demands Scottish Independence Vote",
                "Scotland, a U.K. nation, wants a vote (again) after Brexit.",
            ),
        ]);
        let a = build_pool(&c, Methods::Both, 2).unwrap();
        let b = build_pool(&c, Methods::Both, 2).unwrap();
        assert_eq!(a, b);
        for cand in &a {
            assert!(cand.text.chars().count() <= MAX_SUMMARY_CHARS);
            let story = c.members.iter().find(|s| s.id == cand.source_story).unwrap();
            let sentence = &story_sentences(&story.headline, &story.body, 2)[cand.source_sentence_index];
            assert!(is_token_subsequence(&tokenize(&cand.text).tokens, &sentence.tokens), "{}", cand.text);
            assert!(cand.features.is_finite() && cand.features.salience >= 0.0);
        }
    }
}
