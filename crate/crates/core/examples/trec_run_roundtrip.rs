//! Tied scores are written as strictly decreasing values, so any tool that
//! re-sorts a run file by score sees the engine's order.
//!
//!     cargo run --example trec_run_roundtrip

use tierank::index::InternalDocId;
use tierank::search::{RankedList, ScoredDoc};
use tierank::trec_io::{format_run, parse_run};

fn main() -> tierank::Result<()> {
    let entries = [("D3", 2.5), ("D1", 2.5), ("D2", 2.5), ("D9", 1.0)]
        .iter()
        .enumerate()
        .map(|(i, &(id, score))| ScoredDoc {
            doc: InternalDocId(i as u32),
            external_id: id.to_string(),
            score,
        })
        .collect();
    let list = RankedList {
        topic_id: "301".into(),
        entries,
    };
    let text = format_run(&[list], "demo")?;
    print!("{text}");

    let mut parsed = parse_run(&text, "memory")?;
    parsed.sort_by(|a, b| b.written_score.total_cmp(&a.written_score));
    let order: Vec<&str> = parsed.iter().map(|e| e.external_id.as_str()).collect();
    println!("after re-sorting by score: {order:?}");
    Ok(())
}
