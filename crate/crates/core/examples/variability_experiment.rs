//! Run the variability experiment on the bundled synthetic collection and
//! print the report table.
//!
//!     cargo run --release --example variability_experiment [output-dir]

use std::path::Path;

use tierank::harness::{run_variability_experiment, ExperimentConfig};

fn main() -> tierank::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic/experiment.toml");
    let mut config = ExperimentConfig::from_file(path)?;
    config.output_dir = std::env::args_os().nth(1).map(Into::into);

    let outcome = run_variability_experiment(&config)?;
    for runs in &outcome.runs {
        println!(
            "{:<9} {} of {} internal_id run files distinct; repeatable runs identical",
            runs.model.label(),
            runs.distinct_nonrepeatable(),
            runs.nonrepeatable.len()
        );
    }
    print!("{}", outcome.report.to_table());
    Ok(())
}
