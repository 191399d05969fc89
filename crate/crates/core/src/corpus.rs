//! Synthetic planted-topic story streams with known topic labels.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{tokenize, Story, Tag, Timestamp};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorpusError {
    #[error("invalid corpus spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSpec {
    pub name: String,
    /// Tags in `KIND:VALUE` form, attached to every story of the topic.
    pub tags: Vec<String>,
    /// Extra words for body filler sentences.
    pub vocabulary: Vec<String>,
    /// Complete headlines; bodies reuse them as sentences.
    pub headlines: Vec<String>,
}

impl TopicSpec {
    /// Every lowercased word the topic can emit.
    pub fn words(&self) -> BTreeSet<String> {
        self.headlines
            .iter()
            .chain(&self.vocabulary)
            .flat_map(|t| tokenize(t).tokens)
            .filter(|t| !t.is_punct())
            .map(|t| t.lower)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub topics: Vec<TopicSpec>,
    pub stories_per_topic: usize,
    /// Probability that a story re-publishes an earlier story of its topic.
    pub duplicate_rate: f64,
    pub sources: Vec<String>,
    pub time_start: Timestamp,
    pub time_end: Timestamp,
    pub seed: u64,
    #[serde(default)]
    pub disjoint_vocab: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    /// Sorted by ingestion time, then id.
    pub stories: Vec<Story>,
    /// Topic index of each story, aligned with `stories`.
    pub labels: Vec<usize>,
}

impl Corpus {
    pub fn to_journal(&self) -> String {
        self.stories.iter().map(|s| s.to_json_line() + "\n").collect()
    }

    pub fn label_of(&self, id: &str) -> Option<usize> {
        self.stories.iter().position(|s| s.id == id).map(|i| self.labels[i])
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<Vec<BTreeSet<Tag>>, CorpusError> {
        let bad = |m: String| Err(CorpusError::InvalidSpec(m));
        if self.topics.is_empty() {
            return bad("no topics".into());
        }
        if !(0.0..=1.0).contains(&self.duplicate_rate) {
            return bad(format!("duplicate_rate {} is not a probability", self.duplicate_rate));
        }
        if self.duplicate_rate > 0.0 && self.sources.len() < 2 {
            return bad("duplicates need at least two sources".into());
        }
        if self.sources.is_empty() || self.sources.iter().any(|s| s.trim().is_empty()) {
            return bad("sources must be non-empty".into());
        }
        if self.time_start <= 0 || self.time_end < self.time_start {
            return bad("time range must be positive and ordered".into());
        }
        let mut tag_sets = Vec::new();
        for topic in &self.topics {
            if topic.headlines.is_empty() || topic.headlines.iter().any(|h| h.trim().is_empty()) {
                return bad(format!("topic {} needs non-empty headlines", topic.name));
            }
            let tags = topic
                .tags
                .iter()
                .map(|t| t.parse::<Tag>().map_err(|e| CorpusError::InvalidSpec(e.to_string())))
                .collect::<Result<BTreeSet<Tag>, _>>()?;
            tag_sets.push(tags);
        }
        if self.disjoint_vocab {
            let mut seen: BTreeMap<String, &str> = BTreeMap::new();
            for topic in &self.topics {
                for w in topic.words() {
                    if let Some(other) = seen.insert(w.clone(), &topic.name) {
                        return bad(format!("word {w:?} shared by topics {other} and {}", topic.name));
                    }
                }
            }
        }
        Ok(tag_sets)
    }
}

fn sentence(words: &[&String]) -> String {
    let mut text = words.iter().map(|w| w.as_str()).collect::<Vec<_>>().join(" ");
    if let Some(first) = text.get(..1) {
        text = first.to_uppercase() + &text[1..];
    }
    text
}

/// Deterministic under `spec.seed`. Each story takes one headline of its
/// topic; the body is two more headlines of the topic and a filler sentence
/// of topic vocabulary. Duplicates copy an earlier story verbatim under a
/// different source.
pub fn generate(spec: &CorpusSpec) -> Result<Corpus, CorpusError> {
    let tag_sets = spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut drafts: Vec<(Story, usize)> = Vec::new();
    for (t, topic) in spec.topics.iter().enumerate() {
        let mut originals: Vec<usize> = Vec::new();
        let slug = topic.name.to_lowercase();
        for i in 0..spec.stories_per_topic {
            let ingested_at = rng.gen_range(spec.time_start..=spec.time_end);
            let id = format!("{slug}-{i:03}");
            let duplicate = !originals.is_empty() && rng.gen_bool(spec.duplicate_rate);
            let story = if duplicate {
                let original: &Story = &drafts[*originals.choose(&mut rng).expect("non-empty")].0;
                let source = spec
                    .sources
                    .iter()
                    .filter(|s| **s != original.source)
                    .collect::<Vec<_>>()
                    .choose(&mut rng)
                    .map(|s| s.to_string())
                    .expect("two or more sources");
                Story { id, source, ingested_at, online_cluster: None, ..original.clone() }
            } else {
                let headline = topic.headlines.choose(&mut rng).expect("non-empty").clone();
                let mut body: Vec<String> =
                    topic.headlines.choose_multiple(&mut rng, 2).map(|h| h.clone() + ".").collect();
                if !topic.vocabulary.is_empty() {
                    let n = rng.gen_range(3..=5).min(topic.vocabulary.len());
                    let filler: Vec<&String> = topic.vocabulary.choose_multiple(&mut rng, n).collect();
                    body.push(sentence(&filler) + ".");
                }
                Story {
                    id,
                    headline,
                    body: body.join(" "),
                    source: spec.sources.choose(&mut rng).expect("non-empty").clone(),
                    ingested_at,
                    tags: tag_sets[t].clone(),
                    online_cluster: None,
                }
            };
            if !duplicate {
                originals.push(drafts.len());
            }
            drafts.push((story, t));
        }
    }
    drafts.sort_by(|(a, _), (b, _)| a.ingested_at.cmp(&b.ingested_at).then_with(|| a.id.cmp(&b.id)));
    let (stories, labels) = drafts.into_iter().unzip();
    Ok(Corpus { stories, labels })
}

fn topic(name: &str, tags: &[&str], headlines: &[&str], vocabulary: &[&str]) -> TopicSpec {
    TopicSpec {
        name: name.into(),
        tags: tags.iter().map(|s| s.to_string()).collect(),
        vocabulary: vocabulary.iter().map(|s| s.to_string()).collect(),
        headlines: headlines.iter().map(|s| s.to_string()).collect(),
    }
}

/// Five topics with disjoint vocabularies, two of them e-commerce stories
/// about different companies. 200 stories over two days.
pub fn five_topic_spec(seed: u64) -> CorpusSpec {
    CorpusSpec {
        topics: vec![
            topic(
                "trade",
                &["TOPIC:TRADE", "REGION:CN"],
                &[
                    "Beijing Raises Steel Tariffs",
                    "Washington Extends Soybean Tariffs",
                    "Negotiators Suspend Steel Tariffs",
                    "Beijing Retaliates Against Soybean Tariffs",
                ],
                &["tariffs", "quota", "customs", "levies", "soybean", "steel", "exporters", "duties"],
            ),
            topic(
                "vaccine",
                &["TOPIC:HEALTH"],
                &[
                    "Regulators Approve Vaccine Booster",
                    "Pfizer Reports Vaccine Efficacy",
                    "Researchers Test Vaccine Dose",
                    "Pfizer Expands Vaccine Trial",
                ],
                &["vaccine", "antibody", "trial", "efficacy", "dose", "booster", "clinics", "immunity"],
            ),
            topic(
                "amazon",
                &["TOPIC:ECOM", "COMPANY:AMZN"],
                &[
                    "Amazon Hires Warehouse Staff",
                    "Amazon Boosts Prime Delivery",
                    "Bezos Unveils Amazon Drone Couriers",
                    "Amazon Shutters Warehouse Lockers",
                ],
                &["amazon", "prime", "warehouse", "delivery", "drone", "couriers", "lockers", "bezos"],
            ),
            topic(
                "shopify",
                &["TOPIC:ECOM", "COMPANY:SHOP"],
                &[
                    "Shopify Courts Independent Merchants",
                    "Merchants Adopt Shopify Checkout",
                    "Shopify Launches Storefront Payments",
                    "Ottawa Merchants Praise Shopify Storefronts",
                ],
                &["shopify", "merchants", "storefront", "checkout", "payments", "independent", "ottawa", "plugins"],
            ),
            topic(
                "brexit",
                &["TOPIC:POLITICS", "REGION:UK"],
                &[
                    "Britain to Leave the EU",
                    "Johnson Hails Britain Brexit Deal",
                    "Parliament Backs Britain Withdrawal Agreement",
                    "Sturgeon Demands Referendum as Britain Leaves",
                ],
                &[
                    "brexit",
                    "parliament",
                    "withdrawal",
                    "agreement",
                    "referendum",
                    "scottish",
                    "johnson",
                    "westminster",
                ],
            ),
        ],
        stories_per_topic: 40,
        duplicate_rate: 0.3,
        sources: ["BLOOMBERG", "REUTERS", "AP", "FT", "WSJ"].iter().map(|s| s.to_string()).collect(),
        time_start: 1_600_000_000,
        time_end: 1_600_000_000 + 2 * 24 * 3600,
        seed,
        disjoint_vocab: true,
    }
}

/// All bodies of non-duplicate stories, for uniqueness checks.
pub fn distinct_bodies(corpus: &Corpus) -> HashSet<&str> {
    corpus.stories.iter().map(|s| s.body.as_str()).collect()
}
