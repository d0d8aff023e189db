//! Window-set and channel ablation: windows {3}, {3,5}, {3,5,7} and a
//! single-channel {3}, each cross-validated, with F1 deltas against the first.
//!
//! cargo run --release --example ablation

use mcdepcnn::corpus::{load_corpus, load_instances, split_folds};
use mcdepcnn::encode::{encode_all, EmbeddingTable, FeatureSchema};
use mcdepcnn::model::ModelConfig;
use mcdepcnn::train_eval::{default_ablation, run_ablation, TrainConfig};

fn main() -> Result<(), mcdepcnn::Error> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy");
    let sentences = load_corpus(format!("{}/corpus.tsv", dir))?;
    let instances = load_instances(format!("{}/instances.tsv", dir), &sentences)?;
    let plan = split_folds(&instances, 3, 5)?;
    let set = encode_all(
        &instances,
        &EmbeddingTable::random(&sentences, 200, 7),
        &FeatureSchema::from_sentences(&sentences),
        160,
    );
    let model = ModelConfig {
        filters_per_window: 32,
        ..ModelConfig::new(set.dim())
    };
    let config = TrainConfig {
        epochs: 30,
        ..TrainConfig::default()
    };
    let table = run_ablation(&set, &plan, &default_ablation(), &model, &config)?;
    print!("{}", table.to_text());
    Ok(())
}
