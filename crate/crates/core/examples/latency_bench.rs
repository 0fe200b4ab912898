//! Compare per-topic latency of internal-id and external-id tie-breaking.
//!
//!     cargo run --release --example latency_bench

use std::path::Path;

use tierank::harness::{run_latency_benchmark, timer_resolution, ExperimentConfig};

fn main() -> tierank::Result<()> {
    println!("clock resolution: {:?}", timer_resolution());
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic/experiment.toml");
    let config = ExperimentConfig::from_file(path)?;
    let report = run_latency_benchmark(&config)?;
    print!("{}", report.to_table());
    Ok(())
}
