//! Embed a few stories and print their pairwise tau similarity.

use newsthemes::domain::Story;
use newsthemes::embed::{tau, Embedder};

fn story(id: &str, headline: &str, body: &str) -> Story {
    Story {
        id: id.into(),
        headline: headline.into(),
        body: body.into(),
        source: "AP".into(),
        ingested_at: 1,
        tags: Default::default(),
        online_cluster: None,
    }
}

fn main() -> Result<(), newsthemes::embed::EmbedError> {
    let embedder = Embedder::new(Default::default())?;
    let stories = [
        story("a", "Britain to Leave the EU", "Parliament backs the withdrawal agreement."),
        story("b", "Britain Leaves the EU at Midnight", "The withdrawal agreement takes effect."),
        story("c", "Facebook Warns Revenue Growth Slowing", "Shares fell after the earnings call."),
    ];
    let vectors: Vec<_> = stories.iter().map(|s| embedder.embed(s)).collect::<Result<_, _>>()?;
    println!("dimension {}", embedder.dimension());
    for i in 0..stories.len() {
        for j in (i + 1)..stories.len() {
            println!("tau({}, {}) = {:.3}", stories[i].id, stories[j].id, tau(&vectors[i], &vectors[j])?);
        }
    }
    println!("tau(a, -a) = {:.3}", tau(&vectors[0], &vectors[0].negated())?);
    Ok(())
}
