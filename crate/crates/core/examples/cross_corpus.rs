//! Trains on one corpus and evaluates on another. The toy corpus is cut in
//! two by document; both halves share the schema built from the first.
//!
//! cargo run --release --example cross_corpus

use mcdepcnn::corpus::{load_corpus, load_instances};
use mcdepcnn::encode::{encode_all, EmbeddingTable, FeatureSchema};
use mcdepcnn::model::ModelConfig;
use mcdepcnn::train_eval::{run_cross_corpus, TrainConfig};

fn main() -> Result<(), mcdepcnn::Error> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy");
    let sentences = load_corpus(format!("{}/corpus.tsv", dir))?;
    let instances = load_instances(format!("{}/instances.tsv", dir), &sentences)?;
    let (source, target): (Vec<_>, Vec<_>) =
        instances.into_iter().partition(|i| i.doc_id() < "D07");
    let source_sentences: Vec<_> = sentences
        .iter()
        .filter(|s| s.doc_id.as_str() < "D07")
        .cloned()
        .collect();

    let schema = FeatureSchema::from_sentences(&source_sentences);
    let emb = EmbeddingTable::random(&sentences, 200, 7);
    let train_set = encode_all(&source, &emb, &schema, 160);
    let test_set = encode_all(&target, &emb, &schema, 160);

    let model = ModelConfig {
        filters_per_window: 64,
        ..ModelConfig::new(train_set.dim())
    };
    let config = TrainConfig {
        epochs: 60,
        ..TrainConfig::default()
    };
    let r = run_cross_corpus(&train_set, &test_set, &model, &config)?;
    println!(
        "train {} instances, test {} instances",
        train_set.instances.len(),
        test_set.instances.len()
    );
    print!("{}", r.report.to_text());

    // Sets encoded against different schemas are refused.
    let other = encode_all(
        &target,
        &emb,
        &FeatureSchema::from_sentences(&sentences[20..]),
        160,
    );
    if let Err(e) = run_cross_corpus(&train_set, &other, &model, &config) {
        println!("refused: {}", e);
    }
    Ok(())
}
