//! Saves a trained model with its optimizer state, reloads it against the
//! schema hash, and checks that predictions are unchanged.
//!
//! cargo run --release --example checkpoint_roundtrip

use std::collections::BTreeMap;

use mcdepcnn::checkpoint::{Checkpoint, Manifest};
use mcdepcnn::corpus::{load_corpus, load_instances};
use mcdepcnn::encode::{encode_all, EmbeddingTable, FeatureSchema};
use mcdepcnn::model::{probabilities, ModelConfig};
use mcdepcnn::train_eval::{train, TrainConfig};

fn main() -> Result<(), mcdepcnn::Error> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy");
    let sentences = load_corpus(format!("{}/corpus.tsv", dir))?;
    let instances = load_instances(format!("{}/instances.tsv", dir), &sentences)?;
    let set = encode_all(
        &instances,
        &EmbeddingTable::random(&sentences, 200, 7),
        &FeatureSchema::from_sentences(&sentences),
        160,
    );
    let model = ModelConfig {
        filters_per_window: 16,
        ..ModelConfig::new(set.dim())
    };
    let config = TrainConfig {
        epochs: 10,
        ..TrainConfig::default()
    };
    let outcome = train(&set.instances, &model, &config, None)?;

    let ckpt = Checkpoint {
        manifest: Manifest {
            config: model.clone(),
            schema_hash: set.schema_hash.clone(),
        },
        seeds: BTreeMap::from([("shuffle".to_string(), config.shuffle_seed)]),
        params: outcome.params.clone(),
        adam: Some(outcome.adam),
    };
    let path = std::env::temp_dir().join("mcdepcnn-example-checkpoint.txt");
    ckpt.save(&path)?;
    println!(
        "wrote {} ({} parameters)",
        path.display(),
        ckpt.params.parameter_count()
    );

    let back = Checkpoint::load_for_schema(&path, &set.schema_hash)?;
    let same = set.instances.iter().all(|inst| {
        probabilities(inst, &outcome.params, &model).ok()
            == probabilities(inst, &back.params, &back.manifest.config).ok()
    });
    println!("predictions identical after reload: {}", same);

    match Checkpoint::load_for_schema(&path, "not-the-schema") {
        Err(e) => println!("wrong schema refused: {}", e),
        Ok(_) => println!("wrong schema accepted"),
    }
    std::fs::remove_file(&path).ok();
    Ok(())
}
