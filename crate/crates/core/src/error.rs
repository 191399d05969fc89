use thiserror::Error;

use crate::corpus::CorpusError;
use crate::domain::DomainError;
use crate::embed::EmbedError;
use crate::index::IndexError;
use crate::query::SyntaxError;
use crate::summarize::SummarizeError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Summarize(#[from] SummarizeError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("overview composition failed: {0}")]
    Compose(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
