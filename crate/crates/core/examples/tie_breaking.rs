//! The same collection indexed in two orders: internal-id tie-breaking
//! follows the build, external-id tie-breaking does not.
//!
//!     cargo run --example tie_breaking

use tierank::corpus::Document;
use tierank::index::{build_index, BuildOptions};
use tierank::search::{search, ScoringParams, TieBreakPolicy, WeightedQuery};

fn main() -> tierank::Result<()> {
    // Five documents with identical content score identically for any query.
    let docs: Vec<Document> = ["e", "b", "d", "a", "c"]
        .iter()
        .map(|id| Document::new(format!("doc-{id}"), "score ties everywhere"))
        .collect();
    let query = WeightedQuery::from_text("ties");
    let params = ScoringParams::bm25();

    for seed in [1, 2] {
        let index = build_index(docs.clone(), BuildOptions::seeded(seed))?;
        for policy in [TieBreakPolicy::InternalId, TieBreakPolicy::ExternalId] {
            let ranking = search(&index, &query, &params, policy, 10)?;
            let ids: Vec<&str> = ranking.external_ids().collect();
            println!("seed {seed} {policy:<12} {ids:?}");
        }
    }
    Ok(())
}
