//! Index a generated corpus, then show the largest online clusters for a
//! query and the newest stories of each.

use newsthemes::config::Config;
use newsthemes::corpus::{five_topic_spec, generate};
use newsthemes::engine::Engine;
use newsthemes::index::SearchRequest;
use newsthemes::query::parse_query;

fn main() -> newsthemes::Result<()> {
    let corpus = generate(&five_topic_spec(7))?;
    let engine = Engine::new(Config::default())?;
    let report = engine.ingest_batch(corpus.stories.clone());
    println!("indexed {} stories into {} online clusters", report.accepted, engine.online_cluster_count());

    let now = corpus.stories.iter().map(|s| s.ingested_at).max().unwrap_or(0);
    let request = SearchRequest {
        k_facets: 3,
        n_stories: 2,
        ..SearchRequest::new(parse_query("TOPIC:ECOM OR brexit")?, 2 * 86_400)
    };

    let snapshot = engine.index().snapshot();
    for (cluster, count) in snapshot.facet_top_clusters(&request, now).entries {
        println!("facet {cluster}: {count} matching stories");
    }
    for (cluster, stories) in snapshot.retrieve_tiered(&request, now) {
        for s in stories {
            println!("  {cluster} {} @{} {}", s.id, s.ingested_at, s.headline);
        }
    }
    Ok(())
}
