//! Train the pairwise ranker on graded candidates and compare it with the
//! hand-set default weights.

use newsthemes::summarize::{label_stats, pairwise_accuracy, read_labels, train_ranker, FeatureVector, RankerModel};

const LABELS: &str = r#"
{"features":{"length_chars":37,"token_count":5,"has_finite_verb":1,"starts_capitalized":1,"svo_complete":1,"salience":0.8,"from_headline":1},"grade":"Great","annotator":"a1"}
{"features":{"length_chars":41,"token_count":7,"has_finite_verb":1,"starts_capitalized":1,"svo_complete":1,"salience":0.6,"method_is_tuple":1},"grade":"Great","annotator":"a2"}
{"features":{"length_chars":22,"token_count":4,"starts_capitalized":0,"salience":0.4},"grade":"Terrible","annotator":"a1"}
{"features":{"length_chars":48,"token_count":9,"has_finite_verb":1,"starts_capitalized":1,"salience":0.3},"grade":"Acceptable","annotator":"a1"}
{"features":{"length_chars":12,"token_count":2,"starts_capitalized":1,"salience":0.9},"grade":"Terrible","annotator":"a2"}
{"features":{"length_chars":30,"token_count":5,"has_finite_verb":1,"salience":0.2},"grade":"Acceptable","annotator":"a2"}
"#;

fn main() -> newsthemes::Result<()> {
    let labels = read_labels(LABELS.trim().as_bytes())?;
    let stats = label_stats(&labels);
    println!(
        "{} labels: great {:.2}, acceptable {:.2}, terrible {:.2}",
        stats.labels, stats.great, stats.acceptable, stats.terrible
    );

    let model = train_ranker(&labels, 50, 1.0)?;
    println!("default weights accuracy: {:.3}", pairwise_accuracy(&RankerModel::default(), &labels));
    println!("trained weights accuracy: {:.3}", pairwise_accuracy(&model, &labels));
    for (name, w) in FeatureVector::NAMES.iter().zip(&model.weights) {
        println!("  {name:<20} {w:+.3}");
    }
    Ok(())
}
