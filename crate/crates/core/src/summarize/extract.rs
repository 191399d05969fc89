//! Who-does-what stubs: a noun span, a verb group and a short object.

use crate::domain::{Token, TokenSeq};

use super::lexicon::{is_function_word, VerbLexicon, CONJUNCTIONS, DETERMINERS, PREPOSITIONS, SUBORDINATORS};
use super::{candidate_from_tokens, Method, SummaryCandidate, MAX_SUMMARY_CHARS};

const MAX_OBJECT_TOKENS: usize = 6;
const BOUNDARY_PUNCT: &[&str] = &[",", ";", ":", ".", "!", "?", "(", ")", "[", "]", "—", "–"];
const GROUP_ADVERBS: &[&str] = &["not", "also", "still", "now", "n't"];

pub(crate) fn is_boundary(tok: &Token) -> bool {
    BOUNDARY_PUNCT.contains(&tok.surface.as_str()) || SUBORDINATORS.contains(&tok.lower.as_str())
}

/// Tokens that may sit inside a subject noun phrase.
pub(crate) fn is_nounish(tok: &Token, lexicon: &VerbLexicon) -> bool {
    let w = tok.lower.as_str();
    !tok.is_punct()
        && !lexicon.is_verb(tok)
        && !PREPOSITIONS.contains(&w)
        && !CONJUNCTIONS.contains(&w)
        && !SUBORDINATORS.contains(&w)
}

/// A verb group: `[start, end)` over the sentence tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct VerbGroup {
    pub start: usize,
    pub end: usize,
}

/// A verb-form token right after a determiner is read as a noun ("the rise").
pub(crate) fn is_verb_at(tokens: &[Token], i: usize, lexicon: &VerbLexicon) -> bool {
    lexicon.is_verb(&tokens[i]) && !(i > 0 && DETERMINERS.contains(&tokens[i - 1].lower.as_str()))
}

/// Finds verb groups that have a noun-ish token immediately to their left.
/// Headline infinitives ("Britain to Leave") count, with "to" opening the group.
pub(crate) fn verb_groups(tokens: &[Token], lexicon: &VerbLexicon) -> Vec<VerbGroup> {
    let mut groups = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let starts_infinitive = tokens[i].lower == "to"
            && i + 1 < tokens.len()
            && is_verb_at(tokens, i + 1, lexicon)
            && i > 0
            && is_nounish(&tokens[i - 1], lexicon);
        if !(is_verb_at(tokens, i, lexicon) || starts_infinitive) {
            i += 1;
            continue;
        }
        let start = i;
        i += 1;
        while i < tokens.len() && (is_verb_at(tokens, i, lexicon) || GROUP_ADVERBS.contains(&tokens[i].lower.as_str()))
        {
            i += 1;
        }
        groups.push(VerbGroup { start, end: i });
    }
    groups
}

/// Start index of the longest noun-ish run ending just before `end`.
/// "of" is allowed inside the run ("Bank of England").
pub(crate) fn subject_start(tokens: &[Token], end: usize, lexicon: &VerbLexicon) -> Option<usize> {
    let mut start = end;
    while start > 0 {
        let tok = &tokens[start - 1];
        let noun_use = lexicon.is_verb(tok) && !is_verb_at(tokens, start - 1, lexicon);
        let joins = tok.lower == "of" && start < end && start >= 2 && is_nounish(&tokens[start - 2], lexicon);
        if is_nounish(tok, lexicon) || noun_use || joins {
            start -= 1;
        } else {
            break;
        }
    }
    (start < end).then_some(start)
}

fn trim_trailing(tokens: &mut Vec<Token>, keep: usize) {
    while tokens.len() > keep {
        let last = tokens.last().expect("non-empty");
        if last.is_punct() && !matches!(last.surface.as_str(), "%" | "’" | "'" | "\"" | "”")
            || is_function_word(&last.lower)
        {
            tokens.pop();
        } else {
            break;
        }
    }
}

/// One candidate per verb group: subject span + verb group + up to six
/// object tokens, cut back until it fits in the summary length.
pub fn extract_tuples(sentence: &TokenSeq, lexicon: &VerbLexicon) -> Vec<SummaryCandidate> {
    let tokens = &sentence.tokens;
    let mut out = Vec::new();
    for group in verb_groups(tokens, lexicon) {
        let Some(subject) = subject_start(tokens, group.start, lexicon) else {
            continue;
        };
        let mut span: Vec<Token> = tokens[subject..group.end].to_vec();
        let head_len = span.len();
        span.extend(tokens[group.end..].iter().take(MAX_OBJECT_TOKENS).take_while(|t| !is_boundary(t)).cloned());
        trim_trailing(&mut span, head_len);
        loop {
            if let Some(candidate) = candidate_from_tokens(&span, Method::Tuple) {
                if candidate.text.chars().count() <= MAX_SUMMARY_CHARS {
                    out.push(candidate);
                    break;
                }
            }
            if span.len() <= head_len {
                break;
            }
            span.pop();
            trim_trailing(&mut span, head_len);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::tokenize;

    fn texts(s: &str) -> Vec<String> {
        extract_tuples(&tokenize(s), VerbLexicon::english()).into_iter().map(|c| c.text).collect()
    }

    #[test]
    fn facebook_warns() {
        let got = texts("Facebook warns revenue growth is slowing this quarter");
        assert!(got.contains(&"Facebook warns revenue growth is slowing".to_string()), "{got:?}");
    }

    #[test]
    fn verbless_fragment() {
        assert!(texts("The beginning").is_empty());
    }

    #[test]
    fn overlong_subject_is_dropped() {
        let subject = "Extraordinarily Longwinded Multinational Conglomerate Holdings Corporation";
        assert!(subject.len() > 50);
        assert!(texts(&format!("{subject} warns investors")).is_empty());
    }

    #[test]
    fn headline_styles() {
        assert!(texts("Britain to Leave the EU").contains(&"Britain to Leave the EU".to_string()));
        assert!(texts("Facebook Stock Drops 7% Despite Earnings Beat")
            .contains(&"Facebook Stock Drops 7% Despite Earnings Beat".to_string()));
        let got = texts("Bank of England Would Keep Interest Rate Unchanged");
        assert!(got.contains(&"Bank of England Would Keep Interest Rate Unchanged".to_string()), "{got:?}");
    }

    #[test]
    fn object_stops_at_clause_boundary() {
        let got = texts("Stocks fell sharply, according to analysts");
        assert_eq!(got, ["Stocks fell sharply"]);
    }
}
