//! Evaluate the bundled golden run against its qrels, then compute single
//! metrics directly.
//!
//!     cargo run --example evaluate

use std::path::Path;

use tierank::eval::{average_precision, evaluate_run, ndcg_at, precision_at, Metric};
use tierank::trec_io::parse_qrels;

fn main() -> tierank::Result<()> {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden");
    let scores = evaluate_run(golden.join("run.txt"), golden.join("qrels.txt"))?;
    print!("{}", scores.to_tsv(&Metric::ALL));

    let qrels = parse_qrels("7 0 good 2\n7 0 fine 1\n7 0 bad 0\n", "inline")?;
    let topic = qrels.topic("7").expect("judged");
    let run = ["fine", "bad", "good"];
    println!(
        "ap={:.4} p30={:.4} ndcg20={:.4}",
        average_precision(&run, topic, 1000)?,
        precision_at(&run, topic, 30)?,
        ndcg_at(&run, topic, 20)?
    );
    Ok(())
}
