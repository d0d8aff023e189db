//! Trains the default network on the bundled toy corpus and reports
//! training-set accuracy.
//!
//! cargo run --release --example train_toy

use std::time::Instant;

use mcdepcnn::corpus::{load_corpus, load_instances};
use mcdepcnn::encode::{encode_all, EmbeddingTable, FeatureSchema, DEFAULT_MAX_LEN};
use mcdepcnn::model::ModelConfig;
use mcdepcnn::train_eval::{evaluate, report_for, train, TrainConfig};

fn main() -> Result<(), mcdepcnn::Error> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy");
    let sentences = load_corpus(format!("{}/corpus.tsv", dir))?;
    let instances = load_instances(format!("{}/instances.tsv", dir), &sentences)?;
    let schema = FeatureSchema::from_sentences(&sentences);
    let emb = EmbeddingTable::random(&sentences, 200, 7);
    let set = encode_all(&instances, &emb, &schema, DEFAULT_MAX_LEN);

    let model = ModelConfig::new(set.dim());
    let config = TrainConfig {
        epochs: 200,
        ..TrainConfig::default()
    };
    let start = Instant::now();
    let outcome = train(&set.instances, &model, &config, None)?;
    println!(
        "trained {} epochs in {:.1?}",
        config.epochs,
        start.elapsed()
    );
    for (e, l) in outcome.loss_curve.iter().enumerate().step_by(20) {
        println!("epoch {:>3}  loss {:.4}", e + 1, l);
    }
    println!("final loss {:.4}", outcome.loss_curve.last().unwrap());

    let predictions = evaluate(&set.instances, &outcome.params, &model)?;
    let report = report_for(&predictions);
    let accuracy = (report.tp + report.tn) as f64 / report.total() as f64;
    println!("training accuracy {:.3}", accuracy);
    print!("{}", report.to_text());
    Ok(())
}
