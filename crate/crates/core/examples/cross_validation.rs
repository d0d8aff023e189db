//! Document-level 10-fold cross-validation on the toy corpus with a reduced
//! network, reporting per-fold, pooled (micro) and macro scores.
//!
//! cargo run --release --example cross_validation

use mcdepcnn::corpus::{load_corpus, load_instances, split_folds};
use mcdepcnn::encode::{encode_all, EmbeddingTable, FeatureSchema};
use mcdepcnn::model::ModelConfig;
use mcdepcnn::train_eval::{run_cv, TrainConfig};

fn main() -> Result<(), mcdepcnn::Error> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy");
    let sentences = load_corpus(format!("{}/corpus.tsv", dir))?;
    let instances = load_instances(format!("{}/instances.tsv", dir), &sentences)?;
    let plan = split_folds(&instances, 10, 1)?;
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
    let cv = run_cv(&set, &plan, &model, &config)?;
    for (i, (fold, result)) in plan.folds.iter().zip(&cv.folds).enumerate() {
        let r = &result.report;
        println!(
            "fold {}  test docs {:?}  tp {} fp {} fn {} tn {}  f1 {:.3}",
            i, fold.test, r.tp, r.fp, r.fn_, r.tn, r.f1
        );
    }
    let p = &cv.pooled;
    println!(
        "pooled  P {:.3}  R {:.3}  F {:.3}",
        p.precision, p.recall, p.f1
    );
    let m = &cv.macro_avg;
    println!(
        "macro   P {:.3}  R {:.3}  F {:.3}",
        m.precision, m.recall, m.f1
    );
    Ok(())
}
