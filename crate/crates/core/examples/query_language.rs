//! Parse Boolean queries, print their canonical cache-key form and test
//! them against a story.

use newsthemes::domain::Story;
use newsthemes::query::{canonicalize, matches, parse_query};

fn main() {
    let story = Story {
        id: "uk-1".into(),
        headline: "Boris Johnson Hails 'Beginning' on Brexit Day".into(),
        body: "Britain left the EU at midnight.".into(),
        source: "REUTERS".into(),
        ingested_at: 1_580_515_200,
        tags: ["REGION:UK".parse().unwrap(), "TOPIC:POLITICS".parse().unwrap()].into(),
        online_cluster: None,
    };

    for q in [
        "TOPIC:ECOM AND NOT COMPANY:AMZN",
        "brexit AND REGION:UK",
        "a OR b AND c",
        "NOT brexit",
        "johnson OR (eu AND NOT vote)",
    ] {
        let ast = parse_query(q).expect("valid query");
        println!("{q:<34} -> {:<44} matches: {}", canonicalize(&ast), matches(&ast, &story));
    }

    for bad in ["(", "brexit AND", "SECTOR:TECH", ""] {
        let err = parse_query(bad).unwrap_err();
        println!("{bad:?}: error at offset {}: {}", err.offset, err.message);
    }
}
