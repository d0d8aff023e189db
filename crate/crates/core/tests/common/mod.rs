#![allow(dead_code)]

use mcdepcnn::corpus::{load_corpus, load_instances, AnnotatedSentence, PpiInstance};
use mcdepcnn::encode::{encode_all, EmbeddingTable, EncodedSet, FeatureSchema, DEFAULT_MAX_LEN};

pub const TOY_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy");

pub fn toy_path(name: &str) -> String {
    format!("{}/{}", TOY_DIR, name)
}

pub fn toy_corpus() -> (Vec<AnnotatedSentence>, Vec<PpiInstance>) {
    let sentences = load_corpus(toy_path("corpus.tsv")).expect("toy corpus loads");
    let instances =
        load_instances(toy_path("instances.tsv"), &sentences).expect("toy instances load");
    (sentences, instances)
}

pub fn toy_encoded() -> EncodedSet {
    let (sentences, instances) = toy_corpus();
    let schema = FeatureSchema::from_sentences(&sentences);
    let emb = EmbeddingTable::random(&sentences, 200, 7);
    encode_all(&instances, &emb, &schema, DEFAULT_MAX_LEN)
}

pub mod oracles;
