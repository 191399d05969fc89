//! Rule-based sentence compression.
//!
//! Deletable spans are found by five rules (parentheticals, appositives,
//! trailing attribution, leading adverbials, trailing subordinate clauses);
//! every subset of the first six spans yields one variant.

use std::collections::HashSet;

use crate::domain::{Token, TokenSeq};

use super::lexicon::{is_function_word, VerbLexicon};
use super::{candidate_from_tokens, Method, SummaryCandidate, MAX_SUMMARY_CHARS};

const MAX_SPANS: usize = 6;
const MAX_APPOSITIVE_TOKENS: usize = 8;
const MAX_LEADING_ADVERBIAL: usize = 6;
const SUBORDINATE_STARTERS: &[&str] = &["which", "who", "after", "because", "as", "while"];
const ATTRIBUTION_VERBS: &[&str] = &["said", "says", "say", "reported", "reports", "told"];
const MAX_ATTRIBUTION_SUBJECT: usize = 4;

type Span = (usize, usize);

fn parentheticals(tokens: &[Token]) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut stack: Vec<(usize, &str)> = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        match t.surface.as_str() {
            "(" => stack.push((i, ")")),
            "[" => stack.push((i, "]")),
            close @ (")" | "]") => {
                if let Some(pos) = stack.iter().rposition(|(_, c)| *c == close) {
                    let (open, _) = stack[pos];
                    stack.truncate(pos);
                    spans.push((open, i + 1));
                }
            }
            _ => {}
        }
    }
    spans
}

fn appositives(tokens: &[Token], lexicon: &VerbLexicon) -> Vec<Span> {
    let commas: Vec<usize> = (0..tokens.len()).filter(|&i| tokens[i].surface == ",").collect();
    commas
        .windows(2)
        .filter(|w| {
            let (a, b) = (w[0], w[1]);
            let inner = &tokens[a + 1..b];
            a > 0
                && !inner.is_empty()
                && inner.len() <= MAX_APPOSITIVE_TOKENS
                && b + 1 < tokens.len()
                && !inner.iter().any(|t| lexicon.is_verb(t))
        })
        .map(|w| (w[0], w[1] + 1))
        .collect()
}

fn attributions(tokens: &[Token]) -> Vec<Span> {
    let n = tokens.len();
    let mut spans = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        if t.surface != "," || i == 0 {
            continue;
        }
        let rest: Vec<&str> = tokens[i + 1..].iter().filter(|t| !t.is_punct()).map(|t| t.lower.as_str()).collect();
        let is_attribution = match rest.as_slice() {
            ["according", "to", ..] => true,
            [first, ..] if ATTRIBUTION_VERBS.contains(first) => true,
            ["sources", "say"] | ["sources", "said"] => true,
            words => {
                words.len() >= 2
                    && words.len() <= MAX_ATTRIBUTION_SUBJECT + 1
                    && ATTRIBUTION_VERBS.contains(words.last().expect("non-empty"))
            }
        };
        if is_attribution {
            spans.push((i, n));
        }
    }
    spans
}

fn leading_adverbial(tokens: &[Token]) -> Vec<Span> {
    match tokens.iter().position(|t| t.surface == ",") {
        Some(c) if (1..=MAX_LEADING_ADVERBIAL).contains(&c) && c + 1 < tokens.len() => vec![(0, c + 1)],
        _ => Vec::new(),
    }
}

fn subordinate_clauses(tokens: &[Token]) -> Vec<Span> {
    let n = tokens.len();
    (2..n)
        .filter(|&i| SUBORDINATE_STARTERS.contains(&tokens[i].lower.as_str()))
        .map(|i| if tokens[i - 1].surface == "," { (i - 1, n) } else { (i, n) })
        .collect()
}

pub(crate) fn deletable_spans(tokens: &[Token], lexicon: &VerbLexicon) -> Vec<Span> {
    let mut spans = Vec::new();
    spans.extend(parentheticals(tokens));
    spans.extend(appositives(tokens, lexicon));
    spans.extend(attributions(tokens));
    spans.extend(leading_adverbial(tokens));
    spans.extend(subordinate_clauses(tokens));
    let mut seen = HashSet::new();
    spans.retain(|s| seen.insert(*s));
    spans.truncate(MAX_SPANS);
    spans
}

fn trim_edges(tokens: &mut Vec<Token>) {
    while tokens.last().is_some_and(|t| t.is_punct() && !matches!(t.surface.as_str(), "%" | ")" | "’" | "”")) {
        tokens.pop();
    }
    while tokens.last().is_some_and(|t| is_function_word(&t.lower)) {
        tokens.pop();
    }
    let lead = tokens
        .iter()
        .take_while(|t| {
            (t.is_punct() && !matches!(t.surface.as_str(), "(" | "‘" | "“" | "$"))
                || matches!(t.lower.as_str(), "and" | "but" | "or")
        })
        .count();
    tokens.drain(..lead);
}

/// All compression variants of `sentence` that fit the summary length,
/// starting with the unmodified sentence.
pub fn compress_sentence(sentence: &TokenSeq, lexicon: &VerbLexicon) -> Vec<SummaryCandidate> {
    let tokens = &sentence.tokens;
    let spans = deletable_spans(tokens, lexicon);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for mask in 0u32..(1 << spans.len()) {
        let mut deleted = vec![false; tokens.len()];
        for (bit, &(a, b)) in spans.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                deleted[a..b].iter_mut().for_each(|d| *d = true);
            }
        }
        let mut kept: Vec<Token> = tokens.iter().zip(&deleted).filter(|(_, d)| !**d).map(|(t, _)| t.clone()).collect();
        trim_edges(&mut kept);
        let Some(candidate) = candidate_from_tokens(&kept, Method::Compression) else {
            continue;
        };
        if candidate.text.chars().count() <= MAX_SUMMARY_CHARS && seen.insert(candidate.text.clone()) {
            out.push(candidate);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::tokenize;

    fn texts(s: &str) -> Vec<String> {
        compress_sentence(&tokenize(s), VerbLexicon::english()).into_iter().map(|c| c.text).collect()
    }

    #[test]
    fn attribution_rule() {
        assert!(texts("Stocks fell sharply, according to analysts").contains(&"Stocks fell sharply".to_string()));
        assert!(texts("Oil prices rose, analysts said.").contains(&"Oil prices rose".to_string()));
        assert!(texts("Merger talks stalled, sources say").contains(&"Merger talks stalled".to_string()));
    }

    #[test]
    fn appositive_rule() {
        let got = texts("Facebook, the social media giant, warns growth slowing");
        assert!(got.contains(&"Facebook warns growth slowing".to_string()), "{got:?}");
    }

    #[test]
    fn parenthetical_and_adverbial_rules() {
        let got = texts("On Tuesday, Amazon (AMZN) shares rose after strong holiday sales figures");
        assert!(got.contains(&"Amazon shares rose".to_string()), "{got:?}");
        assert!(got.contains(&"Amazon (AMZN) shares rose".to_string()), "{got:?}");
    }

    #[test]
    fn nothing_deletable_and_too_long() {
        let s = "Regulators approved the extraordinarily complicated cross border merger yesterday";
        assert!(s.len() > 50);
        assert!(texts(s).is_empty());
    }

    #[test]
    fn identity_variant_first() {
        assert_eq!(texts("Pompeo in UK for Trade Talks"), ["Pompeo in UK for Trade Talks"]);
    }

    #[test]
    fn variant_count_is_bounded() {
        let s = "Meanwhile, A (x), B (y), C (z), D (w), E, F, and G rose, which was odd, analysts said";
        assert!(texts(s).len() <= 64);
    }
}
