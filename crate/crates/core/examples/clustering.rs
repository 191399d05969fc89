//! Online clustering at ingestion, then query-time agglomeration into
//! themes, scored against the planted topics.

use newsthemes::cluster::{compose_theme_clusters, DEFAULT_THETA_HAC};
use newsthemes::config::Config;
use newsthemes::corpus::{five_topic_spec, generate};
use newsthemes::engine::Engine;
use newsthemes::eval::adjusted_rand_index;
use newsthemes::index::SearchRequest;
use newsthemes::query::parse_query;

fn main() -> newsthemes::Result<()> {
    let corpus = generate(&five_topic_spec(7))?;
    let engine = Engine::new(Config::default())?;
    engine.ingest_batch(corpus.stories.clone());
    println!("online clusters after ingestion: {}", engine.online_cluster_count());

    let now = corpus.stories.iter().map(|s| s.ingested_at).max().unwrap_or(0);
    let query = parse_query("TOPIC:TRADE OR TOPIC:HEALTH OR TOPIC:ECOM OR TOPIC:POLITICS")?;
    let request = SearchRequest { n_stories: 200, ..SearchRequest::new(query, 3 * 86_400) };
    let tiered = engine.index().snapshot().retrieve_tiered(&request, now);
    let clusters = compose_theme_clusters(&tiered, engine.embedder(), DEFAULT_THETA_HAC)?;

    let (mut planted, mut found) = (Vec::new(), Vec::new());
    for (c, cluster) in clusters.iter().enumerate() {
        println!("theme cluster {c}: {} stories, e.g. {:?}", cluster.size(), cluster.members[0].headline);
        for s in &cluster.members {
            planted.push(corpus.label_of(&s.id).expect("generated id"));
            found.push(c);
        }
    }
    println!("adjusted Rand index vs planted topics: {:.3}", adjusted_rand_index(&planted, &found));
    Ok(())
}
