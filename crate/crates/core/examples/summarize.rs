//! Build the candidate pool for a small cluster and show how the default
//! ranker scores each candidate.

use std::sync::Arc;

use newsthemes::cluster::ThemeCluster;
use newsthemes::domain::Story;
use newsthemes::embed::Embedder;
use newsthemes::summarize::{build_pool, select_summary, Methods, RankerModel, Scorer, DEFAULT_MAX_BODY_SENTENCES};

fn main() -> newsthemes::Result<()> {
    let stories = [
        (
            "fb-1",
            "Facebook warns revenue growth is slowing this quarter",
            "The social media giant said ad sales, which drive most revenue, would cool.",
        ),
        ("fb-2", "Facebook Warns Revenue Growth Slowing", "Shares fell 7% in late trading, analysts said."),
    ];
    let members: Vec<Arc<Story>> = stories
        .iter()
        .map(|(id, headline, body)| {
            Arc::new(Story {
                id: id.to_string(),
                headline: headline.to_string(),
                body: body.to_string(),
                source: "AP".into(),
                ingested_at: 1,
                tags: Default::default(),
                online_cluster: None,
            })
        })
        .collect();
    let cluster = ThemeCluster::embed(members, &Embedder::new(Default::default())?)?;
    let ranker = RankerModel::default();

    for methods in [Methods::Tuple, Methods::Compression, Methods::Both] {
        let pool = build_pool(&cluster, methods, DEFAULT_MAX_BODY_SENTENCES)?;
        println!("{} pool ({} candidates):", methods.as_str(), pool.len());
        for c in &pool {
            println!("  {:>6.3}  {:?} ({:?}, sentence {})", ranker.score(c), c.text, c.method, c.source_sentence_index);
        }
        println!("  chosen: {:?}", select_summary(&ranker, &pool)?.text);
    }
    Ok(())
}
