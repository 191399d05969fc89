//! Story embeddings and the similarity `tau = 0.5 * (cos + 1)`.
//!
//! Two embedders sit behind [`Embedder`]: a seeded hashed bag-of-words
//! projection (the default) and a mean over rows of a token matrix loaded
//! from disk.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{tokenize, Story};

pub const DEFAULT_DIMENSION: usize = 128;
pub const DEFAULT_SEED: u64 = 0x5eed_2020;
pub const DEFAULT_HEADLINE_WEIGHT: f64 = 3.0;

const ZERO_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbedError {
    #[error("story {0:?} has no tokens to embed")]
    EmptyDocument(String),
    #[error("cannot load embedding matrix: {0}")]
    MatrixLoad(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("centroid of an empty set")]
    EmptyInput,
    #[error("vector is numerically zero")]
    ZeroVector,
    #[error("invalid embedder config: {0}")]
    InvalidConfig(String),
}

/// A unit-length embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    /// Normalizes `values` to unit length.
    pub fn from_raw(mut values: Vec<f64>) -> Result<Self, EmbedError> {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm <= ZERO_TOLERANCE {
            return Err(EmbedError::ZeroVector);
        }
        values.iter_mut().for_each(|v| *v /= norm);
        Ok(EmbeddingVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn negated(&self) -> Self {
        EmbeddingVector(self.0.iter().map(|v| -v).collect())
    }

    pub fn cosine(&self, other: &Self) -> Result<f64, EmbedError> {
        if self.dim() != other.dim() {
            return Err(EmbedError::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }
}

/// `0.5 * (cos(a, b) + 1)`, clamped to `[0, 1]`.
pub fn tau(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, EmbedError> {
    Ok((0.5 * (a.cosine(b)? + 1.0)).clamp(0.0, 1.0))
}

/// Arithmetic mean of the members, renormalized.
pub fn centroid<'a, I>(members: I) -> Result<EmbeddingVector, EmbedError>
where
    I: IntoIterator<Item = &'a EmbeddingVector>,
{
    weighted_centroid(members.into_iter().map(|v| (v, 1.0)))
}

pub fn weighted_centroid<'a, I>(members: I) -> Result<EmbeddingVector, EmbedError>
where
    I: IntoIterator<Item = (&'a EmbeddingVector, f64)>,
{
    let mut sum: Option<Vec<f64>> = None;
    let mut total = 0.0;
    for (v, w) in members {
        let acc = sum.get_or_insert_with(|| vec![0.0; v.dim()]);
        if acc.len() != v.dim() {
            return Err(EmbedError::DimensionMismatch(acc.len(), v.dim()));
        }
        acc.iter_mut().zip(v.values()).for_each(|(a, x)| *a += w * x);
        total += w;
    }
    let mut sum = sum.ok_or(EmbedError::EmptyInput)?;
    sum.iter_mut().for_each(|a| *a /= total);
    EmbeddingVector::from_raw(sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EmbedMode {
    #[default]
    DeterministicProjection,
    LoadedMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedderConfig {
    pub dimension: usize,
    pub mode: EmbedMode,
    pub matrix_path: Option<PathBuf>,
    pub seed: u64,
    pub headline_weight: f64,
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        EmbedderConfig {
            dimension: DEFAULT_DIMENSION,
            mode: EmbedMode::DeterministicProjection,
            matrix_path: None,
            seed: DEFAULT_SEED,
            headline_weight: DEFAULT_HEADLINE_WEIGHT,
        }
    }
}

impl EmbedderConfig {
    pub fn validate(&self) -> Result<(), EmbedError> {
        if self.dimension < 2 {
            return Err(EmbedError::InvalidConfig("dimension must be at least 2".into()));
        }
        match (self.mode, &self.matrix_path) {
            (EmbedMode::LoadedMatrix, None) => {
                Err(EmbedError::InvalidConfig("loaded-matrix mode requires matrix_path".into()))
            }
            (EmbedMode::DeterministicProjection, Some(_)) => {
                Err(EmbedError::InvalidConfig("matrix_path is only valid in loaded-matrix mode".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Embedder {
    config: EmbedderConfig,
    matrix: Option<HashMap<String, Vec<f64>>>,
}

impl Embedder {
    pub fn new(config: EmbedderConfig) -> Result<Self, EmbedError> {
        config.validate()?;
        let matrix = match (&config.mode, &config.matrix_path) {
            (EmbedMode::LoadedMatrix, Some(path)) => Some(load_matrix(path, config.dimension)?),
            _ => None,
        };
        Ok(Embedder { config, matrix })
    }

    /// Loaded-matrix embedder over an in-memory table.
    pub fn with_matrix(dimension: usize, rows: HashMap<String, Vec<f64>>) -> Result<Self, EmbedError> {
        if let Some(bad) = rows.values().find(|r| r.len() != dimension) {
            return Err(EmbedError::DimensionMismatch(dimension, bad.len()));
        }
        let config = EmbedderConfig {
            dimension,
            mode: EmbedMode::LoadedMatrix,
            matrix_path: Some(PathBuf::from("<memory>")),
            ..EmbedderConfig::default()
        };
        Ok(Embedder { config, matrix: Some(rows) })
    }

    pub fn config(&self) -> &EmbedderConfig {
        &self.config
    }

    pub fn dimension(&self) -> usize {
        self.config.dimension
    }

    pub fn embed(&self, story: &Story) -> Result<EmbeddingVector, EmbedError> {
        let headline = tokenize(&story.headline);
        let body = tokenize(&story.body);
        let words = headline
            .tokens
            .iter()
            .map(|t| (t, true))
            .chain(body.tokens.iter().map(|t| (t, false)))
            .filter(|(t, _)| !t.is_punct());

        let empty = || EmbedError::EmptyDocument(story.id.clone());
        match &self.matrix {
            None => {
                let mut counts: HashMap<&str, f64> = HashMap::new();
                for (tok, in_headline) in words {
                    let w = if in_headline { self.config.headline_weight } else { 1.0 };
                    *counts.entry(tok.lower.as_str()).or_default() += w;
                }
                if counts.is_empty() {
                    return Err(empty());
                }
                // Sorted so the floating-point sum is order-stable.
                let mut counts: Vec<(&str, f64)> = counts.into_iter().collect();
                counts.sort_by(|a, b| a.0.cmp(b.0));
                let mut acc = vec![0.0; self.config.dimension];
                for (word, count) in counts {
                    let scale = (1.0 + count).ln();
                    for (a, d) in acc.iter_mut().zip(self.direction(word)) {
                        *a += scale * d;
                    }
                }
                EmbeddingVector::from_raw(acc).map_err(|_| empty())
            }
            Some(matrix) => {
                let mut acc = vec![0.0; self.config.dimension];
                let mut n = 0usize;
                for (tok, _) in words {
                    if let Some(row) = matrix.get(&tok.lower) {
                        acc.iter_mut().zip(row).for_each(|(a, x)| *a += x);
                        n += 1;
                    }
                }
                if n == 0 {
                    return Err(empty());
                }
                acc.iter_mut().for_each(|a| *a /= n as f64);
                EmbeddingVector::from_raw(acc).map_err(|_| empty())
            }
        }
    }

    /// Fixed pseudo-random ±1 direction for a token.
    fn direction(&self, token: &str) -> impl Iterator<Item = f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(token.as_bytes()) ^ self.config.seed.rotate_left(17));
        (0..self.config.dimension).map(move |_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

/// Reads a token matrix: a `"n V"` header then `V` lines `token f1 .. fn`.
pub fn load_matrix(path: &Path, dimension: usize) -> Result<HashMap<String, Vec<f64>>, EmbedError> {
    let text = std::fs::read_to_string(path).map_err(|e| EmbedError::MatrixLoad(format!("{}: {e}", path.display())))?;
    parse_matrix(&text, dimension)
}

pub fn parse_matrix(text: &str, dimension: usize) -> Result<HashMap<String, Vec<f64>>, EmbedError> {
    let bad = |msg: String| EmbedError::MatrixLoad(msg);
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| bad("missing header".into()))?;
    let mut parts = header.split_whitespace();
    let parse_count = |s: Option<&str>| -> Result<usize, EmbedError> {
        s.and_then(|s| s.parse().ok()).ok_or_else(|| bad(format!("bad header {header:?}")))
    };
    let n = parse_count(parts.next())?;
    let vocab = parse_count(parts.next())?;
    if parts.next().is_some() {
        return Err(bad(format!("bad header {header:?}")));
    }
    if n != dimension {
        return Err(EmbedError::DimensionMismatch(dimension, n));
    }
    let mut rows = HashMap::with_capacity(vocab);
    for (i, line) in lines.enumerate() {
        let mut fields = line.split_whitespace();
        let token = fields.next().expect("non-empty line").to_lowercase();
        let values: Vec<f64> = fields
            .map(|f| f.parse::<f64>().map_err(|_| bad(format!("row {}: bad number {f:?}", i + 1))))
            .collect::<Result<_, _>>()?;
        if values.len() != n {
            return Err(bad(format!("row {} has {} values, expected {n}", i + 1, values.len())));
        }
        rows.insert(token, values);
    }
    if rows.len() != vocab {
        return Err(bad(format!("header declares {vocab} rows, found {}", rows.len())));
    }
    Ok(rows)
}
