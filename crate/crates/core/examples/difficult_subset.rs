//! Scores only the instances flagged as difficult, each predicted by a fold
//! model that never saw its document.
//!
//! cargo run --release --example difficult_subset

use mcdepcnn::corpus::{load_corpus, load_instances, split_folds};
use mcdepcnn::encode::{encode_all, EmbeddingTable, FeatureSchema};
use mcdepcnn::model::ModelConfig;
use mcdepcnn::train_eval::{run_difficult_subset, TrainConfig};

fn main() -> Result<(), mcdepcnn::Error> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy");
    let sentences = load_corpus(format!("{}/corpus.tsv", dir))?;
    let instances = load_instances(format!("{}/instances.tsv", dir), &sentences)?;
    let plan = split_folds(&instances, 4, 2)?;
    let set = encode_all(
        &instances,
        &EmbeddingTable::random(&sentences, 200, 7),
        &FeatureSchema::from_sentences(&sentences),
        160,
    );
    let model = ModelConfig {
        filters_per_window: 64,
        ..ModelConfig::new(set.dim())
    };
    let config = TrainConfig {
        epochs: 40,
        ..TrainConfig::default()
    };
    let d = run_difficult_subset(&set, &plan, &model, &config)?;
    println!(
        "difficult instances: {} positive, {} negative",
        d.positives, d.negatives
    );
    for p in &d.predictions {
        println!(
            "  {:<6} gold {:<5} predicted {:<5} p_ppi {:.3}",
            p.instance_id, p.gold, p.predicted, p.p_ppi
        );
    }
    print!("{}", d.report.to_text());
    Ok(())
}
