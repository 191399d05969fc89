//! Ingestion-time online clustering and query-time agglomerative clustering.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::domain::{OnlineClusterId, Story, Timestamp};
use crate::embed::{centroid, tau, weighted_centroid, EmbedError, Embedder, EmbeddingVector};

pub const DEFAULT_THETA_ONLINE: f64 = 0.80;
pub const DEFAULT_THETA_HAC: f64 = 0.75;
pub const DEFAULT_ONLINE_WINDOW_SECONDS: i64 = 7 * 24 * 3600;

#[derive(Debug, Clone, PartialEq)]
pub struct OnlineClusterState {
    pub id: OnlineClusterId,
    pub centroid: EmbeddingVector,
    pub size: usize,
    pub last_updated: Timestamp,
}

/// The set of online clusters, owned by the single ingestion writer.
#[derive(Debug, Clone, Default)]
pub struct OnlineClusters {
    clusters: Vec<OnlineClusterState>,
    next_seq: u64,
}

impl OnlineClusters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &OnlineClusterState> {
        self.clusters.iter()
    }

    pub fn get(&self, id: &OnlineClusterId) -> Option<&OnlineClusterState> {
        self.clusters.iter().find(|c| &c.id == id)
    }

    /// Adds the story to the most similar cluster active within
    /// `window_seconds` when its tau reaches `theta`, otherwise opens a new
    /// cluster. Ties go to the older cluster.
    pub fn assign(
        &mut self,
        embedding: &EmbeddingVector,
        now: Timestamp,
        theta: f64,
        window_seconds: i64,
    ) -> Result<OnlineClusterId, EmbedError> {
        let mut best: Option<(usize, f64)> = None;
        for (i, cluster) in self.clusters.iter().enumerate() {
            if now - cluster.last_updated > window_seconds {
                continue;
            }
            let sim = tau(&cluster.centroid, embedding)?;
            if best.is_none_or(|(_, s)| sim > s) {
                best = Some((i, sim));
            }
        }
        match best {
            Some((i, sim)) if sim >= theta => {
                let cluster = &mut self.clusters[i];
                let n = cluster.size as f64;
                cluster.centroid =
                    weighted_centroid([(&cluster.centroid, n), (embedding, 1.0)]).unwrap_or_else(|_| embedding.clone());
                cluster.size += 1;
                cluster.last_updated = cluster.last_updated.max(now);
                Ok(cluster.id.clone())
            }
            _ => {
                let id = OnlineClusterId::from_seq(self.next_seq);
                self.next_seq += 1;
                self.clusters.push(OnlineClusterState {
                    id: id.clone(),
                    centroid: embedding.clone(),
                    size: 1,
                    last_updated: now,
                });
                Ok(id)
            }
        }
    }
}

pub fn assign_online(
    state: &mut OnlineClusters,
    story_embedding: &EmbeddingVector,
    now: Timestamp,
    theta_online: f64,
    window_seconds: i64,
) -> Result<OnlineClusterId, EmbedError> {
    state.assign(story_embedding, now, theta_online, window_seconds)
}

/// One agglomeration step. Groups are named by their smallest member index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub similarity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Merge while the best linkage is at least this tau.
    Threshold(f64),
    /// Merge until this many groups remain.
    Groups(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agglomeration {
    pub merges: Vec<Merge>,
    /// Groups of item indices, each sorted, ordered by smallest member.
    pub partition: Vec<Vec<usize>>,
}

/// Average-linkage agglomeration over `tau`, where the linkage between two
/// groups is the weight-averaged pairwise tau. The most similar pair is
/// merged first; ties prefer the pair with the smallest group names.
pub fn agglomerate(items: &[(EmbeddingVector, f64)], stop: StopRule) -> Result<Agglomeration, EmbedError> {
    let n = items.len();
    let mut sim = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        sim[i][i] = 1.0;
        for j in (i + 1)..n {
            let s = tau(&items[i].0, &items[j].0)?;
            sim[i][j] = s;
            sim[j][i] = s;
        }
    }
    let mut weight: Vec<f64> = items.iter().map(|(_, w)| *w).collect();
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut active = vec![true; n];
    let mut alive = n;

    // Best partner per active slot: highest similarity, ties to the lowest slot.
    let row_best = |i: usize, sim: &[Vec<f64>], active: &[bool]| -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if j != i && active[j] && best.is_none_or(|(_, s)| sim[i][j] > s) {
                best = Some((j, sim[i][j]));
            }
        }
        best
    };
    let mut best: Vec<Option<(usize, f64)>> = (0..n).map(|i| row_best(i, &sim, &active)).collect();
    let target = match stop {
        StopRule::Groups(k) => k.max(1),
        StopRule::Threshold(_) => 1,
    };

    let mut merges = Vec::new();
    while alive > target {
        let mut pick: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            let Some((j, s)) = best[i] else { continue };
            let (a, b) = (i.min(j), i.max(j));
            let better = match pick {
                None => true,
                Some((pa, pb, ps)) => s > ps || (s == ps && (a, b) < (pa, pb)),
            };
            if better {
                pick = Some((a, b, s));
            }
        }
        let Some((a, b, s)) = pick else { break };
        if let StopRule::Threshold(theta) = stop {
            if s < theta {
                break;
            }
        }

        let (wa, wb) = (weight[a], weight[b]);
        for c in 0..n {
            if active[c] && c != a && c != b {
                let merged = (wa * sim[a][c] + wb * sim[b][c]) / (wa + wb);
                sim[a][c] = merged;
                sim[c][a] = merged;
            }
        }
        weight[a] = wa + wb;
        let moved = std::mem::take(&mut members[b]);
        members[a].extend(moved);
        active[b] = false;
        alive -= 1;
        merges.push(Merge { left: a, right: b, similarity: s });

        best[b] = None;
        best[a] = row_best(a, &sim, &active);
        for c in 0..n {
            if !active[c] || c == a {
                continue;
            }
            match best[c] {
                Some((j, _)) if j == a || j == b => best[c] = row_best(c, &sim, &active),
                Some((j, bs)) => {
                    if sim[c][a] > bs || (sim[c][a] == bs && a < j) {
                        best[c] = Some((a, sim[c][a]));
                    }
                }
                None => best[c] = row_best(c, &sim, &active),
            }
        }
    }

    let partition = (0..n)
        .filter(|&i| active[i])
        .map(|i| {
            let mut m = members[i].clone();
            m.sort_unstable();
            m
        })
        .collect();
    Ok(Agglomeration { merges, partition })
}

pub fn hac(items: &[(EmbeddingVector, f64)], theta_hac: f64) -> Result<Vec<Vec<usize>>, EmbedError> {
    Ok(agglomerate(items, StopRule::Threshold(theta_hac))?.partition)
}

/// Agglomerates until exactly `min(k_target, items.len())` groups remain.
pub fn hac_k(items: &[(EmbeddingVector, f64)], k_target: usize) -> Result<Vec<Vec<usize>>, EmbedError> {
    Ok(agglomerate(items, StopRule::Groups(k_target))?.partition)
}

/// A final story cluster; one per theme.
#[derive(Debug, Clone)]
pub struct ThemeCluster {
    pub members: Vec<Arc<Story>>,
    /// Embeddings aligned with `members`.
    pub embeddings: Vec<EmbeddingVector>,
    pub centroid: EmbeddingVector,
    pub source_histogram: BTreeMap<String, usize>,
}

impl ThemeCluster {
    pub fn new(members: Vec<Arc<Story>>, embeddings: Vec<EmbeddingVector>) -> Result<Self, EmbedError> {
        let centroid = centroid(&embeddings)?;
        let mut source_histogram = BTreeMap::new();
        for story in &members {
            *source_histogram.entry(story.source.clone()).or_insert(0) += 1;
        }
        Ok(ThemeCluster { members, embeddings, centroid, source_histogram })
    }

    pub fn embed(members: Vec<Arc<Story>>, embedder: &Embedder) -> Result<Self, EmbedError> {
        let embeddings = members.iter().map(|s| embedder.embed(s)).collect::<Result<_, _>>()?;
        Self::new(members, embeddings)
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn latest_ingested_at(&self) -> Timestamp {
        self.members.iter().map(|s| s.ingested_at).max().unwrap_or(0)
    }

    pub fn min_story_id(&self) -> &str {
        self.members.iter().map(|s| s.id.as_str()).min().unwrap_or("")
    }
}

/// Clusters the retrieved online clusters into theme clusters.
pub fn compose_theme_clusters(
    tiered: &[(OnlineClusterId, Vec<Arc<Story>>)],
    embedder: &Embedder,
    theta_hac: f64,
) -> Result<Vec<ThemeCluster>, EmbedError> {
    let mut groups: Vec<(Vec<Arc<Story>>, Vec<EmbeddingVector>)> = Vec::new();
    let mut items = Vec::new();
    for (_, stories) in tiered.iter().filter(|(_, s)| !s.is_empty()) {
        let embeddings: Vec<EmbeddingVector> = stories.iter().map(|s| embedder.embed(s)).collect::<Result<_, _>>()?;
        items.push((centroid(&embeddings)?, stories.len() as f64));
        groups.push((stories.clone(), embeddings));
    }
    hac(&items, theta_hac)?
        .into_iter()
        .map(|part| {
            let mut members = Vec::new();
            let mut embeddings = Vec::new();
            for g in part {
                members.extend(groups[g].0.iter().cloned());
                embeddings.extend(groups[g].1.iter().cloned());
            }
            ThemeCluster::new(members, embeddings)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(dim: usize, i: usize) -> EmbeddingVector {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        EmbeddingVector::from_raw(v).unwrap()
    }

    fn unit(items: &[EmbeddingVector]) -> Vec<(EmbeddingVector, f64)> {
        items.iter().map(|v| (v.clone(), 1.0)).collect()
    }

    #[test]
    fn online_examples() {
        let mut state = OnlineClusters::new();
        let a = assign_online(&mut state, &basis(4, 0), 100, 0.8, 1_000).unwrap();
        assert_eq!(state.len(), 1);
        let b = assign_online(&mut state, &basis(4, 0), 110, 0.8, 1_000).unwrap();
        assert_eq!(a, b);
        assert_eq!(state.get(&a).unwrap().size, 2);
        assert_eq!(state.get(&a).unwrap().last_updated, 110);
        let c = assign_online(&mut state, &basis(4, 1), 120, 0.8, 1_000).unwrap();
        assert_ne!(a, c);
        assert_eq!(state.len(), 2);
    }

    #[test]
    fn online_window_excludes_stale_clusters() {
        let mut state = OnlineClusters::new();
        let a = state.assign(&basis(3, 0), 0, 0.8, 100).unwrap();
        let b = state.assign(&basis(3, 0), 500, 0.8, 100).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn online_ties_go_to_older_cluster() {
        let mut state = OnlineClusters::new();
        let a = state.assign(&basis(3, 0), 0, 0.9, 100).unwrap();
        let b = state.assign(&basis(3, 1), 0, 0.9, 100).unwrap();
        assert_ne!(a, b);
        let mid = EmbeddingVector::from_raw(vec![1.0, 1.0, 0.0]).unwrap();
        // tau = 0.5(1 + 0.707) ≈ 0.854 to both
        assert_eq!(state.assign(&mid, 1, 0.85, 100).unwrap(), a);
    }

    #[test]
    fn hac_examples() {
        let v = basis(3, 0);
        assert_eq!(hac(&unit(std::slice::from_ref(&v)), 0.9).unwrap(), vec![vec![0]]);
        assert_eq!(hac(&unit(&[v.clone(), v.clone()]), 0.9).unwrap(), vec![vec![0, 1]]);
        let items = unit(&[basis(3, 0), basis(3, 0), basis(3, 1)]);
        assert_eq!(hac(&items, 0.8).unwrap(), vec![vec![0, 1], vec![2]]);
        assert!(hac(&[], 0.5).unwrap().is_empty());
    }

    #[test]
    fn hac_k_examples() {
        let items = unit(&[basis(5, 0), basis(5, 1), basis(5, 2), basis(5, 3), basis(5, 4)]);
        assert_eq!(hac_k(&items, 5).unwrap().len(), 5);
        assert_eq!(hac_k(&items, 9).unwrap().len(), 5);
        assert_eq!(hac_k(&items, 1).unwrap(), vec![vec![0, 1, 2, 3, 4]]);
        let items = unit(&[basis(2, 0), basis(2, 0), basis(2, 1), basis(2, 1)]);
        assert_eq!(hac_k(&items, 2).unwrap(), vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn weighted_linkage() {
        // groups {0,1} (weights 3 and 1) then item 2: linkage is weight-averaged
        let x = EmbeddingVector::from_raw(vec![1.0, 0.0]).unwrap();
        let y = EmbeddingVector::from_raw(vec![0.6, 0.8]).unwrap();
        let items = vec![(x.clone(), 3.0), (x.clone(), 1.0), (y.clone(), 1.0)];
        let agg = agglomerate(&items, StopRule::Groups(1)).unwrap();
        assert_eq!(agg.merges[0].left, 0);
        assert_eq!(agg.merges[0].right, 1);
        let expected = tau(&x, &y).unwrap();
        assert!((agg.merges[1].similarity - expected).abs() < 1e-12);
    }

    fn story(id: &str, source: &str) -> Arc<Story> {
        Arc::new(Story {
            id: id.into(),
            headline: format!("headline {id}"),
            body: String::new(),
            source: source.into(),
            ingested_at: 1,
            tags: Default::default(),
            online_cluster: None,
        })
    }

    #[test]
    fn compose_examples() {
        let e = Embedder::new(Default::default()).unwrap();
        let same = |id: &str, src: &str| {
            Arc::new(Story { headline: "tariff steel export".into(), ..(*story(id, src)).clone() })
        };
        let one = vec![(OnlineClusterId::from_seq(0), vec![same("a", "X"), same("b", "Y")])];
        let clusters = compose_theme_clusters(&one, &e, 0.75).unwrap();
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].size(), 2);
        assert_eq!(clusters[0].source_histogram.values().sum::<usize>(), 2);

        let two = vec![
            (OnlineClusterId::from_seq(0), vec![same("a", "X")]),
            (OnlineClusterId::from_seq(1), vec![same("b", "X")]),
        ];
        assert_eq!(compose_theme_clusters(&two, &e, 0.75).unwrap().len(), 1);
    }

    #[test]
    fn compose_keeps_orthogonal_groups_apart() {
        let rows = [("alpha", vec![1.0, 0.0]), ("beta", vec![0.0, 1.0])]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let e = Embedder::with_matrix(2, rows).unwrap();
        let mk = |id: &str, h: &str| Arc::new(Story { headline: h.into(), ..(*story(id, "X")).clone() });
        let tiered = vec![
            (OnlineClusterId::from_seq(0), vec![mk("a", "alpha"), mk("b", "alpha")]),
            (OnlineClusterId::from_seq(1), vec![mk("c", "beta")]),
        ];
        let clusters = compose_theme_clusters(&tiered, &e, 0.75).unwrap();
        assert_eq!(clusters.len(), 2);
        assert_eq!(clusters[0].size(), 2);
    }
}
