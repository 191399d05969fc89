//! Embedded inverted index with tag and keyword postings, a time index,
//! facet counts over online clusters and tiered retrieval.
//!
//! Stories are numbered by insertion order. Every posting list is
//! append-only and therefore sorted, so a snapshot is just the shared data
//! plus a watermark: ordinals at or above it are invisible to that view.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, PoisonError, RwLock, RwLockReadGuard};

use thiserror::Error;

use crate::domain::{tokenize, OnlineClusterId, Story, Tag, Timestamp};
use crate::query::QueryAst;

pub const DEFAULT_K_FACETS: usize = 50;
pub const DEFAULT_N_STORIES: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndexError {
    #[error("duplicate story id {0:?}")]
    DuplicateId(String),
    #[error("story {0:?} has no online cluster assigned")]
    MissingCluster(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchRequest {
    pub query: QueryAst,
    pub horizon_seconds: i64,
    pub k_facets: usize,
    pub n_stories: usize,
}

impl SearchRequest {
    pub fn new(query: QueryAst, horizon_seconds: i64) -> Self {
        SearchRequest { query, horizon_seconds, k_facets: DEFAULT_K_FACETS, n_stories: DEFAULT_N_STORIES }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FacetResult {
    pub entries: Vec<(OnlineClusterId, usize)>,
}

type Ord32 = u32;

#[derive(Debug, Default)]
struct IndexData {
    stories: Vec<Arc<Story>>,
    by_id: HashMap<String, Ord32>,
    keyword_postings: HashMap<String, Vec<Ord32>>,
    tag_postings: HashMap<Tag, Vec<Ord32>>,
    time_index: BTreeSet<(Timestamp, Ord32)>,
    cluster_members: HashMap<OnlineClusterId, Vec<Ord32>>,
}

/// Live index handle. Cloning shares the same underlying index.
#[derive(Debug, Clone, Default)]
pub struct NewsIndex {
    data: Arc<RwLock<IndexData>>,
}

impl NewsIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_story(&self, story: Story) -> Result<(), IndexError> {
        let Some(cluster) = story.online_cluster.clone() else {
            return Err(IndexError::MissingCluster(story.id));
        };
        let mut data = self.data.write().unwrap_or_else(PoisonError::into_inner);
        if data.by_id.contains_key(&story.id) {
            return Err(IndexError::DuplicateId(story.id));
        }
        let ord = data.stories.len() as Ord32;

        let mut words: Vec<String> = tokenize(&story.headline)
            .tokens
            .into_iter()
            .chain(tokenize(&story.body).tokens)
            .filter(|t| !t.is_punct())
            .map(|t| t.lower)
            .collect();
        words.sort_unstable();
        words.dedup();
        for word in words {
            data.keyword_postings.entry(word).or_default().push(ord);
        }
        for tag in &story.tags {
            data.tag_postings.entry(tag.clone()).or_default().push(ord);
        }
        data.time_index.insert((story.ingested_at, ord));
        data.cluster_members.entry(cluster).or_default().push(ord);
        data.by_id.insert(story.id.clone(), ord);
        data.stories.push(Arc::new(story));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.read().stories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, id: &str) -> Option<Arc<Story>> {
        self.snapshot().get(id)
    }

    pub fn snapshot(&self) -> IndexSnapshot {
        let watermark = self.read().stories.len() as Ord32;
        IndexSnapshot { data: Arc::clone(&self.data), watermark }
    }

    pub fn facet_top_clusters(&self, request: &SearchRequest, now: Timestamp) -> FacetResult {
        self.snapshot().facet_top_clusters(request, now)
    }

    pub fn retrieve_tiered(&self, request: &SearchRequest, now: Timestamp) -> Vec<(OnlineClusterId, Vec<Arc<Story>>)> {
        self.snapshot().retrieve_tiered(request, now)
    }

    fn read(&self) -> RwLockReadGuard<'_, IndexData> {
        self.data.read().unwrap_or_else(PoisonError::into_inner)
    }
}

/// Immutable point-in-time view over a [`NewsIndex`].
#[derive(Debug, Clone)]
pub struct IndexSnapshot {
    data: Arc<RwLock<IndexData>>,
    watermark: Ord32,
}

impl IndexSnapshot {
    fn read(&self) -> RwLockReadGuard<'_, IndexData> {
        self.data.read().unwrap_or_else(PoisonError::into_inner)
    }

    pub fn len(&self) -> usize {
        self.watermark as usize
    }

    pub fn is_empty(&self) -> bool {
        self.watermark == 0
    }

    pub fn get(&self, id: &str) -> Option<Arc<Story>> {
        let data = self.read();
        let ord = *data.by_id.get(id)?;
        (ord < self.watermark).then(|| Arc::clone(&data.stories[ord as usize]))
    }

    /// Every story visible in this snapshot, in insertion order.
    pub fn stories(&self) -> Vec<Arc<Story>> {
        self.read().stories[..self.watermark as usize].to_vec()
    }

    /// Ordinals of stories matching the query inside the time horizon.
    fn matching(&self, data: &IndexData, request: &SearchRequest, now: Timestamp) -> Vec<Ord32> {
        let from = now.saturating_sub(request.horizon_seconds);
        let mut window: Vec<Ord32> =
            data.time_index.range((from, 0)..).map(|&(_, ord)| ord).filter(|&ord| ord < self.watermark).collect();
        window.sort_unstable();
        self.eval(data, &request.query, &window)
    }

    fn eval(&self, data: &IndexData, ast: &QueryAst, universe: &[Ord32]) -> Vec<Ord32> {
        match ast {
            QueryAst::Tag(tag) => intersect(universe, data.tag_postings.get(tag).map_or(&[], Vec::as_slice)),
            QueryAst::Keyword(word) => intersect(universe, data.keyword_postings.get(word).map_or(&[], Vec::as_slice)),
            QueryAst::And(a, b) => {
                let left = self.eval(data, a, universe);
                self.eval(data, b, &left)
            }
            QueryAst::Or(a, b) => union(&self.eval(data, a, universe), &self.eval(data, b, universe)),
            QueryAst::Not(a) => difference(universe, &self.eval(data, a, universe)),
        }
    }

    fn grouped(
        &self,
        data: &IndexData,
        request: &SearchRequest,
        now: Timestamp,
    ) -> HashMap<OnlineClusterId, Vec<Ord32>> {
        let mut groups: HashMap<OnlineClusterId, Vec<Ord32>> = HashMap::new();
        for ord in self.matching(data, request, now) {
            if let Some(cluster) = &data.stories[ord as usize].online_cluster {
                groups.entry(cluster.clone()).or_default().push(ord);
            }
        }
        groups
    }

    pub fn facet_top_clusters(&self, request: &SearchRequest, now: Timestamp) -> FacetResult {
        let data = self.read();
        let mut entries: Vec<(OnlineClusterId, usize)> =
            self.grouped(&data, request, now).into_iter().map(|(cluster, members)| (cluster, members.len())).collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        entries.truncate(request.k_facets);
        FacetResult { entries }
    }

    /// For each of the `k_facets` largest matching online clusters, its
    /// `n_stories` most recent matching stories (newest first, ties by id).
    pub fn retrieve_tiered(&self, request: &SearchRequest, now: Timestamp) -> Vec<(OnlineClusterId, Vec<Arc<Story>>)> {
        let data = self.read();
        let mut groups = self.grouped(&data, request, now);
        let mut order: Vec<(OnlineClusterId, usize)> = groups.iter().map(|(c, m)| (c.clone(), m.len())).collect();
        order.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        order.truncate(request.k_facets);
        order
            .into_iter()
            .map(|(cluster, _)| {
                let mut stories: Vec<Arc<Story>> = groups
                    .remove(&cluster)
                    .unwrap_or_default()
                    .into_iter()
                    .map(|ord| Arc::clone(&data.stories[ord as usize]))
                    .collect();
                stories.sort_by(|a, b| b.ingested_at.cmp(&a.ingested_at).then_with(|| a.id.cmp(&b.id)));
                stories.truncate(request.n_stories);
                (cluster, stories)
            })
            .collect()
    }
}

fn intersect(a: &[Ord32], b: &[Ord32]) -> Vec<Ord32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn union(a: &[Ord32], b: &[Ord32]) -> Vec<Ord32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            out.push(b[j]);
            j += 1;
        } else {
            out.push(a[i]);
            i += 1;
            j += 1;
        }
    }
    out
}

fn difference(a: &[Ord32], b: &[Ord32]) -> Vec<Ord32> {
    let mut j = 0;
    a.iter()
        .copied()
        .filter(|&x| {
            while j < b.len() && b[j] < x {
                j += 1;
            }
            !(j < b.len() && b[j] == x)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_query;

    fn story(id: &str, cluster: &str, t: Timestamp, headline: &str) -> Story {
        Story {
            id: id.into(),
            headline: headline.into(),
            body: String::new(),
            source: "BN".into(),
            ingested_at: t,
            tags: ["TOPIC:ECOM".parse().unwrap()].into_iter().collect(),
            online_cluster: Some(OnlineClusterId(cluster.into())),
        }
    }

    fn request(q: &str, k: usize, n: usize) -> SearchRequest {
        SearchRequest { query: parse_query(q).unwrap(), horizon_seconds: 1_000, k_facets: k, n_stories: n }
    }

    #[test]
    fn add_and_get() {
        let index = NewsIndex::new();
        let s = story("a", "A", 10, "Brexit vote");
        index.add_story(s.clone()).unwrap();
        assert_eq!(*index.get("a").unwrap(), s);
        assert_eq!(index.read().keyword_postings["brexit"], vec![0]);
        assert_eq!(index.add_story(s), Err(IndexError::DuplicateId("a".into())));
        let mut orphan = story("b", "A", 10, "x");
        orphan.online_cluster = None;
        assert_eq!(index.add_story(orphan), Err(IndexError::MissingCluster("b".into())));
    }

    #[test]
    fn facet_examples() {
        let index = NewsIndex::new();
        let mut n = 0;
        for (cluster, count) in [("A", 5), ("B", 3), ("C", 2)] {
            for _ in 0..count {
                index.add_story(story(&format!("s{n}"), cluster, 100, "news")).unwrap();
                n += 1;
            }
        }
        let facets = index.facet_top_clusters(&request("TOPIC:ECOM", 2, 5), 100);
        assert_eq!(facets.entries, vec![(OnlineClusterId("A".into()), 5), (OnlineClusterId("B".into()), 3)]);
        let none = index.facet_top_clusters(&request("news AND NOT news", 2, 5), 100);
        assert!(none.entries.is_empty());
    }

    #[test]
    fn facet_tie_break_by_cluster_id() {
        let index = NewsIndex::new();
        for i in 0..3 {
            index.add_story(story(&format!("b{i}"), "B", 100, "x")).unwrap();
            index.add_story(story(&format!("a{i}"), "A", 100, "x")).unwrap();
        }
        let facets = index.facet_top_clusters(&request("x", 1, 5), 100);
        assert_eq!(facets.entries, vec![(OnlineClusterId("A".into()), 3)]);
    }

    #[test]
    fn retrieve_newest_per_cluster() {
        let index = NewsIndex::new();
        index.add_story(story("x1", "X", 50, "x")).unwrap();
        index.add_story(story("x2", "X", 60, "x")).unwrap();
        for i in 0..10 {
            index.add_story(story(&format!("y{i}"), "Y", 100 + i, "x")).unwrap();
        }
        let got = index.retrieve_tiered(&request("x", 5, 3), 200);
        assert_eq!(got.len(), 2);
        let ids: Vec<&str> = got[0].1.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["y9", "y8", "y7"]);
        assert_eq!(got[1].1.len(), 2);
        assert!(index.retrieve_tiered(&request("nothing", 5, 3), 200).is_empty());
    }

    #[test]
    fn horizon_filters_old_stories() {
        let index = NewsIndex::new();
        index.add_story(story("old", "A", 100, "x")).unwrap();
        index.add_story(story("new", "A", 1_000, "x")).unwrap();
        let mut req = request("x", 5, 5);
        req.horizon_seconds = 500;
        assert_eq!(index.facet_top_clusters(&req, 1_000).entries[0].1, 1);
        req.horizon_seconds = 900;
        assert_eq!(index.facet_top_clusters(&req, 1_000).entries[0].1, 2);
    }

    #[test]
    fn snapshot_isolation() {
        let index = NewsIndex::new();
        index.add_story(story("a", "A", 100, "x")).unwrap();
        let snap = index.snapshot();
        let before = snap.facet_top_clusters(&request("x", 5, 5), 100);
        assert_eq!(before, index.facet_top_clusters(&request("x", 5, 5), 100));
        index.add_story(story("b", "A", 100, "x")).unwrap();
        assert!(snap.get("b").is_none());
        assert_eq!(snap.facet_top_clusters(&request("x", 5, 5), 100), before);
        let other = snap.clone();
        assert_eq!(other.retrieve_tiered(&request("x", 5, 5), 100), snap.retrieve_tiered(&request("x", 5, 5), 100));
        assert_eq!(index.facet_top_clusters(&request("x", 5, 5), 100).entries[0].1, 2);
    }

    #[test]
    fn set_ops() {
        assert_eq!(intersect(&[1, 3, 5], &[3, 4, 5]), vec![3, 5]);
        assert_eq!(union(&[1, 3], &[2, 3, 9]), vec![1, 2, 3, 9]);
        assert_eq!(difference(&[1, 2, 3, 4], &[2, 4, 7]), vec![1, 3]);
    }
}
