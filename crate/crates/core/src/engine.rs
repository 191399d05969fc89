//! The running system: ingestion into the index and online clusters, the
//! cached overview pipeline, and feedback capture.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, Mutex, MutexGuard};

use serde::{Deserialize, Serialize};

use crate::cache::{parse_popular_keys, CacheKey, CacheStats, OverviewCache};
use crate::cluster::{compose_theme_clusters, OnlineClusters};
use crate::config::Config;
use crate::domain::{OnlineClusterId, Story, Timestamp};
use crate::embed::Embedder;
use crate::index::{IndexError, NewsIndex, SearchRequest};
use crate::query::{canonicalize, parse_query};
use crate::summarize::RankerModel;
use crate::themes::{assemble_overview, Overview, ThemeConfig};
use crate::{Error, Result};

/// Parses a horizon: `1h`, `8h`, `1d`, `2d` or a positive number of seconds.
pub fn parse_horizon(token: &str) -> std::result::Result<i64, String> {
    match token.trim() {
        "1h" => Ok(3600),
        "8h" => Ok(8 * 3600),
        "1d" => Ok(24 * 3600),
        "2d" => Ok(48 * 3600),
        raw => match raw.parse::<i64>() {
            Ok(s) if s > 0 => Ok(s),
            _ => Err(format!("invalid horizon {raw:?} (expected 1h, 8h, 1d, 2d or positive seconds)")),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverviewRequest {
    pub query: String,
    pub horizon_seconds: i64,
    pub max_themes: Option<usize>,
    pub stories_per_theme: Option<usize>,
}

impl OverviewRequest {
    pub fn new(query: impl Into<String>, horizon_seconds: i64) -> Self {
        OverviewRequest { query: query.into(), horizon_seconds, max_themes: None, stories_per_theme: None }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vote {
    Up,
    Down,
    #[default]
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackRecord {
    pub query: String,
    pub theme_summary: String,
    #[serde(default)]
    pub vote: Vote,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    #[serde(default)]
    pub received_at: Timestamp,
}

impl FeedbackRecord {
    pub fn validate(&self) -> std::result::Result<(), String> {
        let has_comment = self.comment.as_deref().is_some_and(|c| !c.trim().is_empty());
        if self.vote == Vote::None && !has_comment {
            return Err("feedback needs a vote or a non-empty comment".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct FeedbackStats {
    pub submissions: u64,
    pub up: u64,
    pub down: u64,
    pub comments: u64,
    /// `up / (up + down)`, 0 without votes.
    pub positive_fraction: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestReport {
    pub accepted: usize,
    /// `(line or batch position, message)`, 1-based.
    pub errors: Vec<(usize, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineStats {
    pub stories: usize,
    pub online_clusters: usize,
    pub cache: CacheStats,
    pub feedback: FeedbackStats,
}

struct Writer {
    online: OnlineClusters,
    journal: Option<BufWriter<File>>,
}

#[derive(Default)]
struct FeedbackState {
    stats: FeedbackStats,
    journal: Option<BufWriter<File>>,
}

pub struct Engine {
    config: Config,
    embedder: Embedder,
    ranker: RankerModel,
    index: NewsIndex,
    writer: Mutex<Writer>,
    cache: OverviewCache<String>,
    feedback: Mutex<FeedbackState>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|p| p.into_inner())
}

fn append_file(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(OpenOptions::new().create(true).append(true).open(path)?))
}

impl Engine {
    /// An in-memory engine. Journals named in the config are not touched;
    /// see [`Engine::open`].
    pub fn new(config: Config) -> Result<Self> {
        config.validate()?;
        let embedder = Embedder::new(config.embed.clone())?;
        let ranker = match &config.service.ranker_path {
            Some(path) => RankerModel::load(path)?,
            None => RankerModel::default(),
        };
        let popular = match &config.service.popular_keys_path {
            Some(path) => parse_popular_keys(&std::fs::read_to_string(path)?)?,
            None => Vec::new(),
        };
        let cache = OverviewCache::with_popular(config.cache, popular);
        Ok(Engine {
            config,
            embedder,
            ranker,
            index: NewsIndex::new(),
            writer: Mutex::new(Writer { online: OnlineClusters::new(), journal: None }),
            cache,
            feedback: Mutex::new(FeedbackState::default()),
        })
    }

    /// Builds the engine, replays the story journal if it exists and then
    /// appends new stories and feedback to the configured journals.
    pub fn open(config: Config) -> Result<(Self, IngestReport)> {
        let engine = Engine::new(config)?;
        let mut report = IngestReport::default();
        if let Some(path) = engine.config.service.journal_path.clone() {
            if path.exists() {
                report = engine.ingest_reader(BufReader::new(File::open(&path)?))?;
            }
            lock(&engine.writer).journal = Some(append_file(&path)?);
        }
        if let Some(path) = engine.config.service.feedback_path.clone() {
            lock(&engine.feedback).journal = Some(append_file(&path)?);
        }
        Ok((engine, report))
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn embedder(&self) -> &Embedder {
        &self.embedder
    }

    pub fn index(&self) -> &NewsIndex {
        &self.index
    }

    pub fn ranker(&self) -> &RankerModel {
        &self.ranker
    }

    pub fn set_ranker(&mut self, ranker: RankerModel) {
        self.ranker = ranker;
    }

    pub fn cache(&self) -> &OverviewCache<String> {
        &self.cache
    }

    pub fn online_cluster_count(&self) -> usize {
        lock(&self.writer).online.len()
    }

    /// Embeds the story, assigns it to an online cluster, indexes it and
    /// appends it to the journal. Ingestion is serialized.
    pub fn ingest(&self, mut story: Story) -> Result<OnlineClusterId> {
        story.validate()?;
        let mut writer = lock(&self.writer);
        if self.index.get(&story.id).is_some() {
            return Err(IndexError::DuplicateId(story.id).into());
        }
        let embedding = self.embedder.embed(&story)?;
        let cluster = &self.config.cluster;
        let id =
            writer.online.assign(&embedding, story.ingested_at, cluster.theta_online, cluster.online_window_seconds)?;
        story.online_cluster = Some(id.clone());
        let line = story.to_json_line();
        self.index.add_story(story)?;
        if let Some(journal) = writer.journal.as_mut() {
            writeln!(journal, "{line}")?;
        }
        Ok(id)
    }

    /// Ingests one story per line, collecting per-line failures.
    pub fn ingest_reader(&self, reader: impl BufRead) -> Result<IngestReport> {
        let mut report = IngestReport::default();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match Story::from_json_line(&line).and_then(|s| self.ingest(s)) {
                Ok(_) => report.accepted += 1,
                Err(e) => report.errors.push((n + 1, e.to_string())),
            }
        }
        Ok(report)
    }

    pub fn ingest_batch(&self, stories: Vec<Story>) -> IngestReport {
        let mut report = IngestReport::default();
        for (n, story) in stories.into_iter().enumerate() {
            match self.ingest(story) {
                Ok(_) => report.accepted += 1,
                Err(e) => report.errors.push((n + 1, e.to_string())),
            }
        }
        report
    }

    fn key_for(&self, request: &OverviewRequest) -> Result<CacheKey> {
        let ast = parse_query(&request.query)?;
        if request.horizon_seconds <= 0 {
            return Err(Error::Config(format!("horizon must be positive, got {}", request.horizon_seconds)));
        }
        let themes = &self.config.themes;
        let max_themes = request.max_themes.unwrap_or(themes.max_themes);
        let stories = request.stories_per_theme.unwrap_or(themes.p_subclusters);
        if max_themes == 0 || stories == 0 {
            return Err(Error::Config("max_themes and stories_per_theme must be positive".into()));
        }
        Ok(CacheKey::new(canonicalize(&ast), request.horizon_seconds).with_shape(max_themes, stories))
    }

    /// The uncached pipeline over one index snapshot: retrieve, cluster,
    /// summarize and rank.
    pub fn compose(&self, key: &CacheKey, now: Timestamp) -> Result<Overview> {
        let ast = parse_query(&key.query_canonical)?;
        let snapshot = self.index.snapshot();
        let request = SearchRequest {
            query: ast,
            horizon_seconds: key.horizon_seconds,
            k_facets: self.config.index.k_facets,
            n_stories: self.config.index.n_stories,
        };
        let tiered = snapshot.retrieve_tiered(&request, now);
        let clusters = compose_theme_clusters(&tiered, &self.embedder, self.config.cluster.theta_hac)?;
        let themes =
            ThemeConfig { max_themes: key.max_themes, p_subclusters: key.stories_per_theme, ..self.config.themes };
        Ok(assemble_overview(clusters, &self.ranker, &themes, &key.query_canonical, key.horizon_seconds, now)?)
    }

    /// Runs a request, through the cache when `use_cache` is set.
    /// Returns the overview and whether it was a cache hit.
    pub fn overview(
        &self,
        request: &OverviewRequest,
        now: Timestamp,
        use_cache: bool,
    ) -> Result<(Arc<Overview>, bool)> {
        let key = self.key_for(request)?;
        if !use_cache {
            return Ok((Arc::new(self.compose(&key, now)?), false));
        }
        self.cache
            .get_or_compose(&key, now, || self.compose(&key, now).map_err(|e| e.to_string()))
            .map_err(Error::Compose)
    }

    pub fn refresh_tick(&self, now: Timestamp) -> usize {
        self.cache.refresh_tick(now, |key| self.compose(key, now).map_err(|e| e.to_string()))
    }

    pub fn record_feedback(&self, record: &FeedbackRecord) -> Result<()> {
        record.validate().map_err(Error::Config)?;
        let mut state = lock(&self.feedback);
        if let Some(journal) = state.journal.as_mut() {
            writeln!(journal, "{}", serde_json::to_string(record)?)?;
        }
        let stats = &mut state.stats;
        stats.submissions += 1;
        match record.vote {
            Vote::Up => stats.up += 1,
            Vote::Down => stats.down += 1,
            Vote::None => {}
        }
        if record.comment.as_deref().is_some_and(|c| !c.trim().is_empty()) {
            stats.comments += 1;
        }
        let votes = stats.up + stats.down;
        stats.positive_fraction = if votes == 0 { 0.0 } else { stats.up as f64 / votes as f64 };
        Ok(())
    }

    pub fn stats(&self) -> EngineStats {
        EngineStats {
            stories: self.index.len(),
            online_clusters: self.online_cluster_count(),
            cache: self.cache.stats(),
            feedback: lock(&self.feedback).stats,
        }
    }

    pub fn flush(&self) -> Result<()> {
        if let Some(j) = lock(&self.writer).journal.as_mut() {
            j.flush()?;
        }
        if let Some(j) = lock(&self.feedback).journal.as_mut() {
            j.flush()?;
        }
        Ok(())
    }
}

impl Drop for Engine {
    fn drop(&mut self) {
        if let Err(e) = self.flush() {
            log::error!("flushing journals failed: {e}");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Tag, TagKind};

    fn story(id: &str, at: Timestamp, headline: &str, tags: &[(TagKind, &str)]) -> Story {
        Story {
            id: id.into(),
            headline: headline.into(),
            body: String::new(),
            source: "WIRE".into(),
            ingested_at: at,
            tags: tags.iter().map(|(k, v)| Tag::new(*k, *v).unwrap()).collect(),
            online_cluster: None,
        }
    }

    #[test]
    fn horizons() {
        assert_eq!(parse_horizon("8h"), Ok(28_800));
        assert_eq!(parse_horizon("2d"), Ok(172_800));
        assert_eq!(parse_horizon("90"), Ok(90));
        assert!(parse_horizon("3w").is_err());
        assert!(parse_horizon("0").is_err());
    }

    #[test]
    fn feedback_validation_and_fraction() {
        let engine = Engine::new(Config::default()).unwrap();
        let mut rec = FeedbackRecord {
            query: "brexit".into(),
            theme_summary: "Britain to Leave the EU".into(),
            vote: Vote::None,
            comment: None,
            received_at: 1,
        };
        assert!(engine.record_feedback(&rec).is_err());
        for vote in [Vote::Up, Vote::Up, Vote::Up, Vote::Down] {
            rec.vote = vote;
            engine.record_feedback(&rec).unwrap();
        }
        assert_eq!(engine.stats().feedback.positive_fraction, 0.75);
    }

    #[test]
    fn ingest_rejects_duplicates_and_counts() {
        let engine = Engine::new(Config::default()).unwrap();
        let report = engine.ingest_batch(vec![
            story("a", 100, "Stocks fell sharply", &[]),
            story("b", 101, "Stocks fell sharply again", &[]),
            story("a", 102, "Duplicate id", &[]),
        ]);
        assert_eq!(report.accepted, 2);
        assert_eq!(report.errors.len(), 1);
        assert_eq!(engine.index().len(), 2);
        assert!(engine.ingest_batch(Vec::new()).accepted == 0);
    }

    #[test]
    fn overview_through_cache() {
        let engine = Engine::new(Config::default()).unwrap();
        engine.ingest(story("a", 100, "Stocks fell sharply", &[(TagKind::Topic, "MARKETS")])).unwrap();
        let req = OverviewRequest::new("TOPIC:MARKETS", 3600);
        let (first, hit) = engine.overview(&req, 200, true).unwrap();
        assert!(!hit);
        assert_eq!(first.themes.len(), 1);
        let (second, hit) = engine.overview(&req, 201, true).unwrap();
        assert!(hit);
        assert_eq!(first.to_json(), second.to_json());
        let (none, _) = engine.overview(&OverviewRequest::new("nothing", 3600), 200, true).unwrap();
        assert!(none.themes.is_empty());
        assert!(matches!(engine.overview(&OverviewRequest::new("(", 60), 0, true), Err(Error::Syntax(_))));
    }

    #[test]
    fn journal_replay_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = Config::default();
        config.service.journal_path = Some(dir.path().join("stories.jsonl"));
        {
            let (engine, report) = Engine::open(config.clone()).unwrap();
            assert_eq!(report.accepted, 0);
            engine.ingest(story("a", 100, "Stocks fell sharply", &[])).unwrap();
            engine.ingest(story("b", 200, "Vaccine trial results", &[])).unwrap();
        }
        let (engine, report) = Engine::open(config).unwrap();
        assert_eq!(report.accepted, 2);
        assert_eq!(engine.index().get("b").unwrap().headline, "Vaccine trial results");
        assert_eq!(engine.online_cluster_count(), 2);
    }
}
