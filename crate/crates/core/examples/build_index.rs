//! Build an index three ways, save it, and reload it.
//!
//!     cargo run --example build_index

use tierank::corpus::Document;
use tierank::index::{build_index, BuildOptions, Index};

fn main() -> tierank::Result<()> {
    let docs = vec![
        Document::new("a", "The quick brown fox"),
        Document::new("b", "jumps over the lazy dog"),
        Document::new("c", "The dog sleeps"),
    ];

    // File order, a seeded shuffle, and real worker threads.
    for (label, options) in [
        ("sequential", BuildOptions::sequential()),
        ("seed 7", BuildOptions::seeded(7)),
        ("4 threads", BuildOptions::threaded(4)),
    ] {
        let index = build_index(docs.clone(), options)?;
        println!("{label:>10}: internal ids -> {:?}", index.external_ids());
    }

    let index = build_index(docs, BuildOptions::sequential())?;
    let stats = index.stats();
    println!(
        "{} docs, {} terms, avg length {:.2}, df(the) = {}",
        stats.doc_count,
        stats.vocabulary_size(),
        stats.avg_doc_len,
        stats.df("the")
    );

    let path = std::env::temp_dir().join("tierank-example.idx");
    index.save(&path)?;
    let back = Index::load(&path)?;
    assert_eq!(back, index);
    println!("saved and reloaded {}", path.display());
    Ok(())
}
