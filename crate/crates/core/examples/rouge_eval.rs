//! ROUGE scores for a few pairs, then the single-document harness over
//! three methods with the ROUGE-L oracle ranker.

use newsthemes::domain::Story;
use newsthemes::embed::Embedder;
use newsthemes::eval::{format_sds_table, rouge_l_text, rouge_n_text, run_sds, SdsCase, SdsRanker};
use newsthemes::summarize::{Methods, DEFAULT_MAX_BODY_SENTENCES};

fn main() -> newsthemes::Result<()> {
    let pairs = [("the cat sat", "the cat sat on the mat"), ("cat the sat", "the cat sat")];
    for (c, r) in pairs {
        let (r1, rl) = (rouge_n_text(c, r, 1), rouge_l_text(c, r));
        println!("{c:?} vs {r:?}: ROUGE-1 F1 {:.3}, ROUGE-L F1 {:.3}", r1.f1, rl.f1);
    }

    let case = |id: &str, headline: &str, body: &str, reference: &str| SdsCase {
        story: Story {
            id: id.into(),
            headline: headline.into(),
            body: body.into(),
            source: "AP".into(),
            ingested_at: 1,
            tags: Default::default(),
            online_cluster: None,
        },
        reference_summary: reference.into(),
    };
    let cases = vec![
        case(
            "1",
            "Facebook warns revenue growth is slowing this quarter",
            "",
            "Facebook warns revenue growth is slowing",
        ),
        case(
            "2",
            "Sturgeon, who leads the SNP, demands a Scottish independence vote",
            "",
            "Sturgeon demands independence vote",
        ),
        case(
            "3",
            "Pompeo in UK for Trade Talks",
            "He met the prime minister on Wednesday.",
            "Pompeo in UK for Trade Talks",
        ),
    ];
    let embedder = Embedder::new(Default::default())?;
    let reports = [Methods::Tuple, Methods::Compression, Methods::Both]
        .into_iter()
        .map(|m| run_sds(&cases, m, SdsRanker::RougeLOracle, &embedder, DEFAULT_MAX_BODY_SENTENCES))
        .collect::<Result<Vec<_>, _>>()?;
    print!("{}", format_sds_table(&reports));
    Ok(())
}
