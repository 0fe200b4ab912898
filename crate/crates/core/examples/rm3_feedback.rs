//! A tie at the feedback cutoff changes which expansion terms RM3 picks.
//!
//!     cargo run --example rm3_feedback

use tierank::corpus::Document;
use tierank::index::{build_index, BuildOptions};
use tierank::search::{search_rm3_traced, Rm3Params, ScoringParams, TieBreakPolicy, WeightedQuery};

fn main() -> tierank::Result<()> {
    let mut docs: Vec<Document> = (0..9)
        .map(|i| Document::new(format!("top{i}"), "query query shared"))
        .collect();
    docs.extend((0..10).map(|i| Document::new(format!("bg{i}"), "unrelated background text")));
    let tied = [
        Document::new("tied-x", "query xylophone xylophone"),
        Document::new("tied-y", "query yodel yodel"),
    ];
    let rm3 = Rm3Params::default();
    let query = WeightedQuery::from_text("query");

    for (label, tail) in [("x first", [0, 1]), ("y first", [1, 0])] {
        let mut order = docs.clone();
        order.extend(tail.iter().map(|&i| tied[i].clone()));
        let index = build_index(order, BuildOptions::sequential())?;
        for policy in [TieBreakPolicy::InternalId, TieBreakPolicy::ExternalId] {
            let trace =
                search_rm3_traced(&index, &query, &ScoringParams::bm25(), &rm3, policy, 100)?;
            let expanded = trace.expanded.expect("first stage retrieved documents");
            let terms: Vec<String> = expanded
                .terms()
                .map(|(t, w)| format!("{t}:{w:.3}"))
                .collect();
            println!("{label:<8} {policy:<12} {}", terms.join(" "));
        }
    }
    Ok(())
}
