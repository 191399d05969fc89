//! The whole pipeline: ingest a journal, then compose overviews for a few
//! queries and print them as JSON.

use newsthemes::config::Config;
use newsthemes::corpus::{five_topic_spec, generate};
use newsthemes::engine::{parse_horizon, Engine, OverviewRequest};

fn main() -> newsthemes::Result<()> {
    let corpus = generate(&five_topic_spec(7))?;
    let engine = Engine::new(Config::default())?;
    let report = engine.ingest_reader(corpus.to_journal().as_bytes())?;
    println!("ingested {} stories", report.accepted);

    let now = corpus.stories.iter().map(|s| s.ingested_at).max().unwrap_or(0);
    for (q, h) in [("TOPIC:ECOM", "2d"), ("britain OR vaccine", "1d")] {
        let request = OverviewRequest::new(q, parse_horizon(h).map_err(newsthemes::Error::Config)?);
        let (overview, _) = engine.overview(&request, now, false)?;
        for (rank, theme) in overview.themes.iter().enumerate() {
            println!(
                "{q} [{h}] #{}: {:<50} size {:>3} score {:.1}",
                rank + 1,
                theme.summary,
                theme.cluster.size(),
                theme.score
            );
        }
        println!("{}", overview.to_json());
    }
    Ok(())
}
