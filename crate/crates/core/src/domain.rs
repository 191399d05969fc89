//! Core value types shared by every stage of the pipeline, plus text
//! normalization and tokenization.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

/// Seconds since the Unix epoch, UTC.
pub type Timestamp = i64;

/// Identifier of an online cluster assigned at ingestion time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OnlineClusterId(pub String);

impl OnlineClusterId {
    pub fn from_seq(seq: u64) -> Self {
        OnlineClusterId(format!("oc{seq:08}"))
    }
}

impl fmt::Display for OnlineClusterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("unknown tag kind {0:?}")]
    UnknownTagKind(String),
    #[error("invalid tag value {0:?}: expected [A-Z0-9_.]+")]
    InvalidTagValue(String),
    #[error("malformed tag {0:?}: expected KIND:VALUE")]
    MalformedTag(String),
    #[error("invalid story: {0}")]
    InvalidStory(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TagKind {
    Topic,
    Company,
    Region,
    Person,
    Source,
}

impl TagKind {
    pub const ALL: [TagKind; 5] = [TagKind::Topic, TagKind::Company, TagKind::Region, TagKind::Person, TagKind::Source];

    pub fn as_str(self) -> &'static str {
        match self {
            TagKind::Topic => "TOPIC",
            TagKind::Company => "COMPANY",
            TagKind::Region => "REGION",
            TagKind::Person => "PERSON",
            TagKind::Source => "SOURCE",
        }
    }
}

impl FromStr for TagKind {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TagKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| DomainError::UnknownTagKind(s.to_string()))
    }
}

/// An ingestion-time tag such as `TOPIC:ECOM` or `COMPANY:AMZN`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Tag {
    kind: TagKind,
    value: String,
}

impl Tag {
    pub fn new(kind: TagKind, value: impl Into<String>) -> Result<Self, DomainError> {
        let value = value.into();
        if !is_valid_tag_value(&value) {
            return Err(DomainError::InvalidTagValue(value));
        }
        Ok(Tag { kind, value })
    }

    pub fn kind(&self) -> TagKind {
        self.kind
    }

    pub fn value(&self) -> &str {
        &self.value
    }
}

fn is_valid_tag_value(value: &str) -> bool {
    !value.is_empty() && value.bytes().all(|b| b.is_ascii_uppercase() || b.is_ascii_digit() || b == b'_' || b == b'.')
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind.as_str(), self.value)
    }
}

impl FromStr for Tag {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, value) = s.split_once(':').ok_or_else(|| DomainError::MalformedTag(s.to_string()))?;
        Tag::new(kind.parse()?, value)
    }
}

impl<'de> Deserialize<'de> for Tag {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            kind: TagKind,
            value: String,
        }
        let raw = Raw::deserialize(deserializer)?;
        Tag::new(raw.kind, raw.value).map_err(serde::de::Error::custom)
    }
}

/// An ingested news article.
///
/// The JSON form omits `online_cluster`; it is assigned during ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Story {
    pub id: String,
    pub headline: String,
    #[serde(default)]
    pub body: String,
    pub source: String,
    pub ingested_at: Timestamp,
    #[serde(default)]
    pub tags: BTreeSet<Tag>,
    #[serde(skip)]
    pub online_cluster: Option<OnlineClusterId>,
}

impl Story {
    pub fn validate(&self) -> Result<(), DomainError> {
        if self.id.is_empty() {
            return Err(DomainError::InvalidStory("empty id".into()));
        }
        if self.headline.trim().is_empty() {
            return Err(DomainError::InvalidStory(format!("story {}: empty headline", self.id)));
        }
        if self.ingested_at <= 0 {
            return Err(DomainError::InvalidStory(format!("story {}: ingested_at must be positive", self.id)));
        }
        Ok(())
    }

    pub fn has_tag(&self, tag: &Tag) -> bool {
        self.tags.contains(tag)
    }

    /// Parses one journal line and validates it.
    pub fn from_json_line(line: &str) -> Result<Story, crate::Error> {
        let story: Story = serde_json::from_str(line)?;
        story.validate()?;
        Ok(story)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("story serialization cannot fail")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub lower: String,
}

impl Token {
    pub fn new(surface: impl Into<String>) -> Self {
        let surface = surface.into();
        let lower = surface.to_lowercase();
        Token { surface, lower }
    }

    /// True when the token carries no letters or digits.
    pub fn is_punct(&self) -> bool {
        !self.surface.chars().any(char::is_alphanumeric)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSeq {
    pub tokens: Vec<Token>,
}

impl TokenSeq {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.surface.as_str())
    }

    pub fn lowers(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.lower.as_str())
    }

    /// Tokens with punctuation-only entries removed.
    pub fn words(&self) -> TokenSeq {
        TokenSeq { tokens: self.tokens.iter().filter(|t| !t.is_punct()).cloned().collect() }
    }

    /// Joins surfaces with single spaces.
    pub fn join(&self) -> String {
        self.surfaces().collect::<Vec<_>>().join(" ")
    }
}

impl FromIterator<Token> for TokenSeq {
    fn from_iter<I: IntoIterator<Item = Token>>(iter: I) -> Self {
        TokenSeq { tokens: iter.into_iter().collect() }
    }
}

/// NFC-normalizes, strips control characters, collapses whitespace runs and trims.
pub fn normalize_text(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.nfc() {
        if c.is_whitespace() {
            pending_space = true;
            continue;
        }
        if c.is_control() {
            continue;
        }
        if pending_space && !out.is_empty() {
            out.push(' ');
        }
        pending_space = false;
        out.push(c);
    }
    out
}

fn is_punct_char(c: char) -> bool {
    !c.is_alphanumeric()
}

/// Dotted abbreviation such as "U.K" (the final period is checked by the caller).
fn is_dotted_acronym(core: &str) -> bool {
    let parts: Vec<&str> = core.split('.').collect();
    parts.len() >= 2
        && parts.iter().all(|p| !p.is_empty() && p.chars().count() <= 3 && p.chars().all(char::is_alphabetic))
}

/// Whitespace tokenizer that peels leading and trailing punctuation into
/// single-character tokens. Internal punctuation is kept, and the final
/// period of a dotted acronym ("U.K.") stays attached.
pub fn tokenize(text: &str) -> TokenSeq {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut start = 0;
        while start < chars.len() && is_punct_char(chars[start]) {
            tokens.push(Token::new(chars[start].to_string()));
            start += 1;
        }
        if start == chars.len() {
            continue;
        }
        let mut end = chars.len();
        let mut trailing = Vec::new();
        while end > start && is_punct_char(chars[end - 1]) {
            if chars[end - 1] == '.' {
                let core: String = chars[start..end - 1].iter().collect();
                if is_dotted_acronym(&core) {
                    break;
                }
            }
            trailing.push(Token::new(chars[end - 1].to_string()));
            end -= 1;
        }
        tokens.push(Token::new(chars[start..end].iter().collect::<String>()));
        tokens.extend(trailing.into_iter().rev());
    }
    TokenSeq { tokens }
}

const OPENING: &[&str] = &["(", "[", "{", "‘", "“", "$", "#", "@", "£", "€"];

/// Renders tokens as readable text, attaching punctuation to its neighbour.
/// Falls back to single-space joining whenever the readable rendering
/// would not re-tokenize to the same sequence.
pub fn render_tokens(tokens: &[Token]) -> String {
    let mut out = String::new();
    let mut glue_next = false;
    let mut open_ascii_quote = false;
    for (i, tok) in tokens.iter().enumerate() {
        let s = tok.surface.as_str();
        let opening = OPENING.contains(&s) || ((s == "\"" || s == "'") && !open_ascii_quote);
        let closing = tok.is_punct() && !opening;
        if s == "\"" || s == "'" {
            open_ascii_quote = !open_ascii_quote;
        }
        if i > 0 && !glue_next && !closing {
            out.push(' ');
        }
        out.push_str(s);
        glue_next = opening;
    }
    let pretty = out;
    let retok = tokenize(&pretty);
    if retok.tokens.len() == tokens.len() && retok.tokens.iter().zip(tokens).all(|(a, b)| a.surface == b.surface) {
        pretty
    } else {
        tokens.iter().map(|t| t.surface.as_str()).collect::<Vec<_>>().join(" ")
    }
}
