//! The checked-in synthetic collection must be exactly what the generator
//! produces for its documented parameters.

use std::path::Path;

use tierank::harness::{generate_tie_corpus, ExperimentConfig, TieCorpusParams};

fn bundled(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data/synthetic")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn regeneration_is_byte_identical() {
    let corpus = generate_tie_corpus(&TieCorpusParams {
        num_docs: 1000,
        tie_fraction: 0.3,
        seed: 20240717,
        chronological: true,
        ..TieCorpusParams::default()
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    corpus.write_to(dir.path()).unwrap();
    for name in ["corpus.jsonl", "topics.tsv", "qrels.txt"] {
        let fresh = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(
            fresh == bundled(name),
            "{name} differs from the generator output"
        );
    }
}

#[test]
fn shipped_config_is_valid() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic/experiment.toml");
    let config = ExperimentConfig::from_file(path).unwrap();
    config.validate().unwrap();
    assert_eq!(config.effective_seeds().len(), 5);
    assert!(config.corpus.ends_with("data/synthetic/corpus.jsonl"));
}
