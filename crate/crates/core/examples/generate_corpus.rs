//! Generate a small tie-heavy collection and show how many documents share
//! their content with another document.
//!
//!     cargo run --example generate_corpus [output-dir]

use std::collections::HashMap;

use tierank::harness::{generate_tie_corpus, TieCorpusParams};

fn main() -> tierank::Result<()> {
    let corpus = generate_tie_corpus(&TieCorpusParams {
        num_docs: 200,
        tie_fraction: 0.4,
        num_topics: 5,
        chronological: true,
        ..TieCorpusParams::default()
    })?;

    let mut groups: HashMap<Vec<&str>, usize> = HashMap::new();
    for doc in &corpus.documents {
        let mut words: Vec<&str> = doc.text.split(' ').collect();
        words.sort_unstable();
        *groups.entry(words).or_default() += 1;
    }
    let shared: usize = groups.values().filter(|&&n| n > 1).sum();
    println!(
        "{} documents, {shared} share their token multiset",
        corpus.documents.len()
    );
    for topic in &corpus.topics {
        let judged = corpus
            .qrels
            .topic(&topic.topic_id)
            .expect("every topic is judged");
        println!(
            "topic {} {:?}: {} judged, {} relevant",
            topic.topic_id,
            topic.query_text,
            judged.judged_count(),
            judged.relevant_count()
        );
    }
    if let Some(dir) = std::env::args_os().nth(1) {
        for path in corpus.write_to(dir)? {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
