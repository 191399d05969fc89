//! Generate the planted five-topic corpus and print a few stories and the
//! journal size.

use newsthemes::corpus::{five_topic_spec, generate};

fn main() -> Result<(), newsthemes::corpus::CorpusError> {
    let spec = five_topic_spec(7);
    let corpus = generate(&spec)?;
    for (story, label) in corpus.stories.iter().zip(&corpus.labels).take(5) {
        println!("{:<12} {:<10} {:<8} {}", story.id, spec.topics[*label].name, story.source, story.headline);
    }
    let journal = corpus.to_journal();
    println!("{} stories, {} journal bytes", corpus.stories.len(), journal.len());
    Ok(())
}
