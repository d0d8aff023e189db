//! Multichannel dependency-based convolutional relation extraction.
//!
//! Sentences arrive pre-tagged and pre-parsed (see [`corpus`]). Every token is
//! turned into a concatenated feature vector (word, POS group, chunk, entity
//! role, incoming dependency label, relative distances to the two candidate
//! proteins), and a second channel holds the same featureization for each
//! token's dependency head. A convolution over both channels, 1-max pooling,
//! dropout and a two-way softmax decide whether the marked protein pair
//! interacts.
//!
//! Runnable examples, all on the bundled toy corpus in `data/toy`:
//!
//! - `encode_sentence`: both channels of one encoded sentence
//! - `word2vec_embeddings`: loading word vectors and lookup fallbacks
//! - `gradient_check`: finite-difference check of every tensor
//! - `train_toy`: training the default network to fit the toy set
//! - `cross_validation`: document-level k-fold with pooled and macro scores
//! - `cross_corpus`: train on one corpus, evaluate on another
//! - `difficult_subset`: scoring only the flagged hard instances
//! - `ablation`: window sets and single-channel variants
//! - `checkpoint_roundtrip`: saving, reloading and schema checks
//!
//! ```no_run
//! use mcdepcnn::corpus::{load_corpus, load_instances};
//! use mcdepcnn::encode::{EmbeddingTable, FeatureSchema, encode_all};
//! use mcdepcnn::model::ModelConfig;
//! use mcdepcnn::train_eval::{train, TrainConfig};
//!
//! # fn main() -> Result<(), mcdepcnn::Error> {
//! let sentences = load_corpus("data/toy/corpus.tsv")?;
//! let instances = load_instances("data/toy/instances.tsv", &sentences)?;
//! let schema = FeatureSchema::from_sentences(&sentences);
//! let emb = EmbeddingTable::random(&sentences, 200, 7);
//! let set = encode_all(&instances, &emb, &schema, 160);
//! let config = ModelConfig::new(set.dim());
//! let outcome = train(&set.instances, &config, &TrainConfig::default(), None)?;
//! # Ok(())
//! # }
//! ```

pub mod checkpoint;
pub mod cli;
pub mod corpus;
pub mod encode;
mod error;
pub mod model;
pub mod tensor;
pub mod train_eval;

pub use error::{Error, Result};
