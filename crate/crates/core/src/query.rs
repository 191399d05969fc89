//! Boolean query language over tags and keywords.
//!
//! ```text
//! expr    := or
//! or      := and ("OR" and)*
//! and     := unary ("AND" unary)*
//! unary   := "NOT" unary | primary
//! primary := "(" expr ")" | KIND ":" VALUE | bareword
//! ```
//!
//! Operators are case-sensitive. Barewords become lowercased keyword terms.

use std::fmt;

use thiserror::Error;

use crate::domain::{tokenize, Story, Tag};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: {message}")]
pub struct SyntaxError {
    pub offset: usize,
    pub message: String,
}

impl SyntaxError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        SyntaxError { offset, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QueryAst {
    And(Box<QueryAst>, Box<QueryAst>),
    Or(Box<QueryAst>, Box<QueryAst>),
    Not(Box<QueryAst>),
    Tag(Tag),
    Keyword(String),
}

impl QueryAst {
    pub fn and(left: QueryAst, right: QueryAst) -> Self {
        QueryAst::And(Box::new(left), Box::new(right))
    }

    pub fn or(left: QueryAst, right: QueryAst) -> Self {
        QueryAst::Or(Box::new(left), Box::new(right))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(child: QueryAst) -> Self {
        QueryAst::Not(Box::new(child))
    }

    pub fn keyword(word: &str) -> Self {
        QueryAst::Keyword(word.to_lowercase())
    }
}

impl fmt::Display for QueryAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&canonicalize(self))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Lexeme<'a> {
    Open,
    Close,
    And,
    Or,
    Not,
    Word(&'a str),
}

fn lex(input: &str) -> Vec<(usize, Lexeme<'_>)> {
    let mut out = Vec::new();
    let mut iter = input.char_indices().peekable();
    while let Some(&(start, c)) = iter.peek() {
        if c.is_whitespace() {
            iter.next();
        } else if c == '(' {
            out.push((start, Lexeme::Open));
            iter.next();
        } else if c == ')' {
            out.push((start, Lexeme::Close));
            iter.next();
        } else {
            let mut end = start;
            while let Some(&(i, c)) = iter.peek() {
                if c.is_whitespace() || c == '(' || c == ')' {
                    break;
                }
                end = i + c.len_utf8();
                iter.next();
            }
            let word = &input[start..end];
            let lexeme = match word {
                "AND" => Lexeme::And,
                "OR" => Lexeme::Or,
                "NOT" => Lexeme::Not,
                _ => Lexeme::Word(word),
            };
            out.push((start, lexeme));
        }
    }
    out
}

struct Parser<'a> {
    lexemes: Vec<(usize, Lexeme<'a>)>,
    pos: usize,
    input_len: usize,
}

/// Internal marker for errors caused by running out of input, so an open
/// parenthesis can claim them.
struct ParseFail {
    error: SyntaxError,
    at_eof: bool,
}

type PResult<T> = Result<T, ParseFail>;

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Lexeme<'a>> {
        self.lexemes.get(self.pos).map(|(_, l)| l)
    }

    fn offset(&self) -> usize {
        self.lexemes.get(self.pos).map_or(self.input_len, |(o, _)| *o)
    }

    fn eof(&self, what: &str) -> ParseFail {
        ParseFail {
            error: SyntaxError::new(self.input_len, format!("unexpected end of input, expected {what}")),
            at_eof: true,
        }
    }

    fn fail(&self, message: impl Into<String>) -> ParseFail {
        ParseFail { error: SyntaxError::new(self.offset(), message), at_eof: false }
    }

    fn parse_or(&mut self) -> PResult<QueryAst> {
        let mut left = self.parse_and()?;
        while self.peek() == Some(&Lexeme::Or) {
            self.pos += 1;
            let right = self.parse_and()?;
            left = QueryAst::or(left, right);
        }
        Ok(left)
    }

    fn parse_and(&mut self) -> PResult<QueryAst> {
        let mut left = self.parse_unary()?;
        while self.peek() == Some(&Lexeme::And) {
            self.pos += 1;
            let right = self.parse_unary()?;
            left = QueryAst::and(left, right);
        }
        Ok(left)
    }

    fn parse_unary(&mut self) -> PResult<QueryAst> {
        if self.peek() == Some(&Lexeme::Not) {
            self.pos += 1;
            return Ok(QueryAst::not(self.parse_unary()?));
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> PResult<QueryAst> {
        let Some((offset, lexeme)) = self.lexemes.get(self.pos).cloned() else {
            return Err(self.eof("a term"));
        };
        match lexeme {
            Lexeme::Open => {
                self.pos += 1;
                let unbalanced = || ParseFail { error: SyntaxError::new(offset, "unbalanced '('"), at_eof: false };
                let inner = match self.parse_or() {
                    Ok(inner) => inner,
                    Err(e) if e.at_eof => return Err(unbalanced()),
                    Err(e) => return Err(e),
                };
                match self.peek() {
                    Some(Lexeme::Close) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    None => Err(unbalanced()),
                    Some(_) => Err(self.fail("expected ')'")),
                }
            }
            Lexeme::Close => Err(self.fail("unbalanced ')'")),
            Lexeme::And | Lexeme::Or => Err(self.fail("operator without left operand")),
            Lexeme::Not => unreachable!("handled by parse_unary"),
            Lexeme::Word(word) => {
                self.pos += 1;
                parse_term(word)
                    .map_err(|message| ParseFail { error: SyntaxError::new(offset, message), at_eof: false })
            }
        }
    }
}

fn parse_term(word: &str) -> Result<QueryAst, String> {
    if word.contains(':') {
        return word.parse::<Tag>().map(QueryAst::Tag).map_err(|e| e.to_string());
    }
    let toks = tokenize(word).words();
    match toks.tokens.as_slice() {
        [tok] => Ok(QueryAst::Keyword(tok.lower.clone())),
        _ => Err(format!("keyword {word:?} has no letters or digits")),
    }
}

pub fn parse_query(input: &str) -> Result<QueryAst, SyntaxError> {
    let mut parser = Parser { lexemes: lex(input), pos: 0, input_len: input.len() };
    if parser.lexemes.is_empty() {
        return Err(SyntaxError::new(0, "empty query"));
    }
    let ast = parser.parse_or().map_err(|e| e.error)?;
    if parser.pos < parser.lexemes.len() {
        let msg = match parser.peek() {
            Some(Lexeme::Close) => "unbalanced ')'",
            _ => "expected operator",
        };
        return Err(SyntaxError::new(parser.offset(), msg));
    }
    Ok(ast)
}

/// Evaluates `ast` against one story. Keyword terms match whole tokens of
/// the headline or body, case-insensitively.
pub fn matches(ast: &QueryAst, story: &Story) -> bool {
    fn has_keyword(story: &Story, word: &str) -> bool {
        tokenize(&story.headline).lowers().any(|t| t == word) || tokenize(&story.body).lowers().any(|t| t == word)
    }
    match ast {
        QueryAst::And(a, b) => matches(a, story) && matches(b, story),
        QueryAst::Or(a, b) => matches(a, story) || matches(b, story),
        QueryAst::Not(a) => !matches(a, story),
        QueryAst::Tag(tag) => story.has_tag(tag),
        QueryAst::Keyword(word) => has_keyword(story, word),
    }
}

/// Fully parenthesized rendering with commutative operands sorted, used as
/// the cache key for a query.
pub fn canonicalize(ast: &QueryAst) -> String {
    match ast {
        QueryAst::Tag(tag) => format!("({tag})"),
        QueryAst::Keyword(word) => format!("({word})"),
        QueryAst::Not(child) => format!("(NOT {})", canonicalize(child)),
        QueryAst::And(a, b) => binary("AND", canonicalize(a), canonicalize(b)),
        QueryAst::Or(a, b) => binary("OR", canonicalize(a), canonicalize(b)),
    }
}

fn binary(op: &str, a: String, b: String) -> String {
    let (first, second) = if a <= b { (a, b) } else { (b, a) };
    format!("({first} {op} {second})")
}
