//! Command-line driver. Every run reads a TOML configuration (or the
//! defaults), applies flag overrides, materializes all seeds, and writes the
//! merged configuration plus a report into the output directory.
//!
//! Exit statuses: 0 success, 2 usage or input error, 3 consistency error
//! (schema or shape mismatch), 4 numeric failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::checkpoint::{Checkpoint, Manifest};
use crate::corpus::{
    doc_ids, load_corpus, load_instances, make_instances, split_docs, AnnotatedSentence, FoldPlan,
};
use crate::encode::{encode_all, EmbeddingTable, EncodedSet, FeatureSchema, DEFAULT_MAX_LEN};
use crate::model::gradcheck::{gradient_check, reference_setup, DEFAULT_STEP, TOLERANCE};
use crate::model::{derive_seed, Dropout, ModelConfig};
use crate::tensor::AdamConfig;
use crate::train_eval::{
    default_ablation, evaluate, report_for, run_ablation, run_cross_corpus, run_cv,
    score_difficult, train_with, write_predictions, EvalReport, TrainConfig,
};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONSISTENCY: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

/// Maps a library error onto the process exit status.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::SchemaMismatch { .. } | Error::Shape(_) => EXIT_CONSISTENCY,
        Error::NonFinite(_) => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "mcdepcnn",
    version,
    about = "Protein-protein interaction extraction with a multichannel dependency CNN"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Precision {
    F32,
    F64,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed; every seed not set explicitly is derived from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "f64")]
    precision: Precision,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encode a corpus into the compact instance format.
    Encode {
        #[command(flatten)]
        common: Common,
    },
    /// Train on a whole corpus and write a checkpoint.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Document-level k-fold cross-validation.
    Cv {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<usize>,
        /// Fold plan file (`fold<TAB>doc<TAB>train|test`); overrides k.
        #[arg(long)]
        folds: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Train on one corpus, evaluate on another.
    Cross {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Cross-validate each window/channel variant.
    Ablate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Score a corpus with a saved checkpoint.
    Predict {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Compare analytic and finite-difference gradients on the reference model.
    Gradcheck {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    pub corpus: Option<PathBuf>,
    pub instances: Option<PathBuf>,
    /// Pre-encoded instances; replaces corpus, instances, schema and embeddings.
    pub encoded: Option<PathBuf>,
    pub test_corpus: Option<PathBuf>,
    pub test_instances: Option<PathBuf>,
    pub test_encoded: Option<PathBuf>,
    /// word2vec text file; random vectors when absent.
    pub embeddings: Option<PathBuf>,
    pub schema: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub folds: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub windows: Vec<usize>,
    pub filters_per_window: usize,
    pub max_len: usize,
    pub keep_prob: f64,
    pub channels: usize,
    pub word_dim: usize,
    pub fine_tune_embeddings: bool,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            windows: vec![3],
            filters_per_window: 400,
            max_len: DEFAULT_MAX_LEN,
            keep_prob: 0.5,
            channels: 2,
            word_dim: 200,
            fine_tune_embeddings: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub checkpoint_interval: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.adam.learning_rate,
            checkpoint_interval: t.checkpoint_interval,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CvSection {
    pub k: usize,
}

impl Default for CvSection {
    fn default() -> Self {
        CvSection { k: 10 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSection {
    pub base: Option<u64>,
    pub model: Option<u64>,
    pub shuffle: Option<u64>,
    pub dropout: Option<u64>,
    pub folds: Option<u64>,
    pub embeddings: Option<u64>,
}

/// Fully resolved seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seeds {
    pub base: u64,
    pub model: u64,
    pub shuffle: u64,
    pub dropout: u64,
    pub folds: u64,
    pub embeddings: u64,
}

impl SeedSection {
    /// Fills every unset seed from `base` (default 1). Derived values are
    /// kept below 2^63 so they survive a TOML round trip.
    pub fn materialize(&self) -> Seeds {
        let base = self.base.unwrap_or(1);
        let pick = |v: Option<u64>, i: u64| v.unwrap_or(derive_seed(base, &[i]) >> 1);
        Seeds {
            base,
            model: pick(self.model, 1),
            shuffle: pick(self.shuffle, 2),
            dropout: pick(self.dropout, 3),
            folds: pick(self.folds, 4),
            embeddings: pick(self.embeddings, 5),
        }
    }
}

impl From<Seeds> for SeedSection {
    fn from(s: Seeds) -> Self {
        SeedSection {
            base: Some(s.base),
            model: Some(s.model),
            shuffle: Some(s.shuffle),
            dropout: Some(s.dropout),
            folds: Some(s.folds),
            embeddings: Some(s.embeddings),
        }
    }
}

/// The merged configuration of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub paths: PathsSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub cv: CvSection,
    #[serde(default)]
    pub seeds: SeedSection,
}

/// The parts of a run that determine its results; echoed into reports.
#[derive(Serialize)]
struct Settings<'a> {
    model: &'a ModelSection,
    train: &'a TrainSection,
    cv: &'a CvSection,
    seeds: &'a SeedSection,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Config(format!("configuration: {}", e)))
    }

    /// Reads a configuration and resolves its relative paths against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::parse(&text)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let p = &mut cfg.paths;
        for slot in [
            &mut p.corpus,
            &mut p.instances,
            &mut p.encoded,
            &mut p.test_corpus,
            &mut p.test_instances,
            &mut p.test_encoded,
            &mut p.embeddings,
            &mut p.schema,
            &mut p.checkpoint,
            &mut p.folds,
            &mut p.out,
        ] {
            if let Some(rel) = slot.as_ref().filter(|r| r.is_relative()) {
                *slot = Some(dir.join(rel));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    fn settings_toml(&self) -> String {
        toml::to_string(&Settings {
            model: &self.model,
            train: &self.train,
            cv: &self.cv,
            seeds: &self.seeds,
        })
        .expect("configuration serializes")
    }

    pub fn seeds(&self) -> Seeds {
        self.seeds.materialize()
    }

    pub fn model_config(&self, input_dim: usize) -> ModelConfig {
        let m = &self.model;
        ModelConfig {
            windows: m.windows.clone(),
            filters_per_window: m.filters_per_window,
            max_len: m.max_len,
            keep_prob: m.keep_prob,
            channels: m.channels,
            input_dim,
            fine_tune_embeddings: m.fine_tune_embeddings,
            seed: self.seeds().model,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let seeds = self.seeds();
        TrainConfig {
            epochs: self.train.epochs,
            batch_size: self.train.batch_size,
            adam: AdamConfig {
                learning_rate: self.train.learning_rate,
                ..AdamConfig::default()
            },
            shuffle_seed: seeds.shuffle,
            dropout_seed: seeds.dropout,
            checkpoint_interval: self.train.checkpoint_interval,
        }
    }

    fn out_dir(&self) -> PathBuf {
        self.paths
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from("mcdepcnn-out"))
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn required<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| Error::Config(format!("no {} path given (set paths.{})", what, what)))
}

struct Source {
    sentences: Vec<AnnotatedSentence>,
    instances_path: Option<PathBuf>,
}

fn read_source(
    corpus: &Option<PathBuf>,
    instances: &Option<PathBuf>,
    what: &str,
) -> Result<Source> {
    Ok(Source {
        sentences: load_corpus(required(corpus, what)?)?,
        instances_path: instances.clone(),
    })
}

fn embeddings_for(cfg: &RunConfig, sentences: &[AnnotatedSentence]) -> Result<EmbeddingTable> {
    let seed = cfg.seeds().embeddings;
    match &cfg.paths.embeddings {
        Some(p) => EmbeddingTable::load_word2vec(p, cfg.model.word_dim, seed),
        None => Ok(EmbeddingTable::random(sentences, cfg.model.word_dim, seed)),
    }
}

fn encode_source(
    src: &Source,
    emb: &EmbeddingTable,
    schema: &FeatureSchema,
    max_len: usize,
) -> Result<EncodedSet> {
    let instances = match &src.instances_path {
        Some(p) => load_instances(p, &src.sentences)?,
        None => make_instances(&src.sentences),
    };
    Ok(encode_all(&instances, emb, schema, max_len))
}

fn schema_for(cfg: &RunConfig, sentences: &[AnnotatedSentence]) -> Result<FeatureSchema> {
    match &cfg.paths.schema {
        Some(p) => FeatureSchema::load(p),
        None => Ok(FeatureSchema::from_sentences(sentences)),
    }
}

/// The main corpus, encoded, and the schema when it was built here.
fn main_set(cfg: &RunConfig) -> Result<(EncodedSet, Option<FeatureSchema>)> {
    if let Some(p) = &cfg.paths.encoded {
        return Ok((EncodedSet::parse(&read_file(p)?)?, None));
    }
    let src = read_source(&cfg.paths.corpus, &cfg.paths.instances, "corpus")?;
    let schema = schema_for(cfg, &src.sentences)?;
    let emb = embeddings_for(cfg, &src.sentences)?;
    let set = encode_source(&src, &emb, &schema, cfg.model.max_len)?;
    Ok((set, Some(schema)))
}

fn check_width(set: &EncodedSet, cfg: &RunConfig) -> Result<()> {
    if set.word_dim != 0 && set.word_dim != cfg.model.word_dim {
        return Err(Error::Shape(format!(
            "encoded word vectors have {} dimensions, configuration says {}",
            set.word_dim, cfg.model.word_dim
        )));
    }
    if set.instances.is_empty() {
        return Err(Error::Config("the corpus yields no instances".into()));
    }
    Ok(())
}

struct Run {
    cfg: RunConfig,
    /// The configuration file as given, echoed unchanged.
    input: Option<String>,
    out: PathBuf,
}

impl Run {
    fn new(common: &Common) -> Result<Run> {
        if common.precision == Precision::F32 {
            return Err(Error::Config(
                "single precision is not supported; use --precision f64".into(),
            ));
        }
        let (mut cfg, input) = match &common.config {
            Some(p) => (RunConfig::load(p)?, Some(read_file(p)?)),
            None => (RunConfig::default(), None),
        };
        if let Some(s) = common.seed {
            cfg.seeds.base = Some(s);
        }
        let seeds = &cfg.seeds;
        let given = [
            seeds.base,
            seeds.model,
            seeds.shuffle,
            seeds.dropout,
            seeds.folds,
            seeds.embeddings,
        ];
        if given.iter().flatten().any(|&s| s > i64::MAX as u64) {
            return Err(Error::Config("seeds must be below 2^63".into()));
        }
        if let Some(o) = &common.out {
            cfg.paths.out = Some(o.clone());
        }
        cfg.seeds = cfg.seeds().into();
        let out = cfg.out_dir();
        fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
        Ok(Run { cfg, input, out })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write(&self, name: &str, contents: &str) -> Result<()> {
        write_file(&self.path(name), contents)
    }

    /// Writes the configuration echoes, then `report.txt`.
    fn finish(&self, command: &str, results: &str) -> Result<()> {
        if let Some(text) = &self.input {
            self.write("config.input.toml", text)?;
        }
        self.write("config.toml", &self.cfg.to_toml())?;
        let report = format!(
            "mcdepcnn report v1\ncommand {}\n[settings]\n{}[results]\n{}",
            command,
            self.cfg.settings_toml(),
            results
        );
        self.write("report.txt", &report)
    }
}

fn fold_plan(
    run: &Run,
    set: &EncodedSet,
    k: Option<usize>,
    folds: Option<&Path>,
) -> Result<FoldPlan> {
    let docs = doc_ids(set.instances.iter().map(|i| i.doc_id.as_str()));
    let plan = match folds.or(run.cfg.paths.folds.as_deref()) {
        Some(p) => FoldPlan::load(p)?,
        None => split_docs(&docs, k.unwrap_or(run.cfg.cv.k), run.cfg.seeds().folds)?,
    };
    plan.validate(&docs)?;
    Ok(plan)
}

fn cmd_encode(run: &Run) -> Result<String> {
    let (set, schema) = main_set(&run.cfg)?;
    run.write("encoded.txt", &set.to_text()?)?;
    if let Some(schema) = schema {
        run.write("schema.txt", &schema.to_text())?;
    }
    let mut out = String::new();
    writeln!(out, "instances {}", set.instances.len()).unwrap();
    writeln!(out, "schema_hash {}", set.schema_hash).unwrap();
    writeln!(out, "dim {}", set.dim()).unwrap();
    run.finish("encode", &out)?;
    Ok(out)
}

fn cmd_train(run: &Run) -> Result<String> {
    let (set, schema) = main_set(&run.cfg)?;
    check_width(&set, &run.cfg)?;
    if let Some(schema) = &schema {
        run.write("schema.txt", &schema.to_text())?;
    }
    let model = run.cfg.model_config(set.dim());
    let tc = run.cfg.train_config();
    let seeds = run.cfg.seeds();
    let seed_map = [
        ("model".to_string(), seeds.model),
        ("shuffle".to_string(), seeds.shuffle),
        ("dropout".to_string(), seeds.dropout),
        ("embeddings".to_string(), seeds.embeddings),
    ]
    .into_iter()
    .collect();
    let manifest = Manifest {
        config: model.clone(),
        schema_hash: set.schema_hash.clone(),
    };
    let outcome = train_with(&set.instances, &model, &tc, None, None, |e| {
        let ckpt = Checkpoint {
            manifest: manifest.clone(),
            seeds: std::collections::BTreeMap::clone(&seed_map),
            params: e.params.clone(),
            adam: Some(e.adam.clone()),
        };
        let name = if e.epoch + 1 == tc.epochs {
            "checkpoint.txt".to_string()
        } else {
            format!("checkpoint-epoch{}.txt", e.epoch + 1)
        };
        ckpt.save(run.path(&name))
    })?;
    if tc.epochs == 0 {
        Checkpoint {
            manifest,
            seeds: seed_map,
            params: outcome.params.clone(),
            adam: Some(outcome.adam.clone()),
        }
        .save(run.path("checkpoint.txt"))?;
    }

    let mut loss = String::from("epoch\tmean_loss\n");
    for (i, l) in outcome.loss_curve.iter().enumerate() {
        writeln!(loss, "{}\t{:.9e}", i + 1, l).unwrap();
    }
    run.write("loss.tsv", &loss)?;
    let predictions = evaluate(&set.instances, &outcome.params, &model)?;
    run.write("predictions.tsv", &write_predictions(&predictions))?;
    let mut out = format!(
        "instances {}\nschema_hash {}\n",
        set.instances.len(),
        set.schema_hash
    );
    if let Some(l) = outcome.loss_curve.last() {
        writeln!(out, "final_loss {:.6}", l).unwrap();
    }
    out.push_str("[training set]\n");
    out.push_str(&report_for(&predictions).to_text());
    run.finish("train", &out)?;
    Ok(out)
}

fn difficult_section(predictions: Vec<&crate::train_eval::Prediction>) -> String {
    match score_difficult(predictions) {
        Ok(d) => format!(
            "[difficult]\npositives {}\nnegatives {}\n{}",
            d.positives,
            d.negatives,
            d.report.to_text()
        ),
        Err(_) => String::new(),
    }
}

fn cmd_cv(run: &Run, k: Option<usize>, folds: Option<&Path>) -> Result<String> {
    let (set, _) = main_set(&run.cfg)?;
    check_width(&set, &run.cfg)?;
    let plan = fold_plan(run, &set, k, folds)?;
    run.write("folds.tsv", &plan.to_tsv())?;
    let model = run.cfg.model_config(set.dim());
    let cv = run_cv(&set, &plan, &model, &run.cfg.train_config())?;
    let preds: Vec<_> = cv.predictions().cloned().collect();
    run.write("predictions.tsv", &write_predictions(&preds))?;
    for (i, f) in cv.folds.iter().enumerate() {
        run.write(&format!("fold{}.report.txt", i), &f.report.to_text())?;
    }
    let mut out = format!("instances {}\nfolds {}\n", set.instances.len(), plan.k());
    out.push_str(&cv.to_text());
    out.push_str(&difficult_section(cv.predictions().collect()));
    run.finish("cv", &out)?;
    Ok(out)
}

fn cmd_cross(run: &Run) -> Result<String> {
    let cfg = &run.cfg;
    let (train_set, test_set) = match (&cfg.paths.encoded, &cfg.paths.test_encoded) {
        (Some(a), Some(b)) => (
            EncodedSet::parse(&read_file(a)?)?,
            EncodedSet::parse(&read_file(b)?)?,
        ),
        (None, None) => {
            let train_src = read_source(&cfg.paths.corpus, &cfg.paths.instances, "corpus")?;
            let test_src = read_source(
                &cfg.paths.test_corpus,
                &cfg.paths.test_instances,
                "test_corpus",
            )?;
            let schema = schema_for(cfg, &train_src.sentences)?;
            let all: Vec<AnnotatedSentence> = train_src
                .sentences
                .iter()
                .chain(&test_src.sentences)
                .cloned()
                .collect();
            let emb = embeddings_for(cfg, &all)?;
            (
                encode_source(&train_src, &emb, &schema, cfg.model.max_len)?,
                encode_source(&test_src, &emb, &schema, cfg.model.max_len)?,
            )
        }
        _ => {
            return Err(Error::Config(
                "set both paths.encoded and paths.test_encoded, or neither".into(),
            ))
        }
    };
    if train_set.schema_hash != test_set.schema_hash {
        return Err(Error::SchemaMismatch {
            expected: train_set.schema_hash,
            found: test_set.schema_hash,
        });
    }
    check_width(&train_set, cfg)?;
    check_width(&test_set, cfg)?;
    let model = cfg.model_config(train_set.dim());
    let r = run_cross_corpus(&train_set, &test_set, &model, &cfg.train_config())?;
    run.write("predictions.tsv", &write_predictions(&r.predictions))?;
    let mut out = format!(
        "train_instances {}\ntest_instances {}\n",
        train_set.instances.len(),
        test_set.instances.len()
    );
    out.push_str(&r.report.to_text());
    out.push_str(&difficult_section(r.predictions.iter().collect()));
    run.finish("cross", &out)?;
    Ok(out)
}

fn cmd_ablate(run: &Run, k: Option<usize>) -> Result<String> {
    let (set, _) = main_set(&run.cfg)?;
    check_width(&set, &run.cfg)?;
    let plan = fold_plan(run, &set, k, None)?;
    let model = run.cfg.model_config(set.dim());
    let table = run_ablation(
        &set,
        &plan,
        &default_ablation(),
        &model,
        &run.cfg.train_config(),
    )?;
    let out = table.to_text();
    run.write("ablation.tsv", &out)?;
    run.finish("ablate", &out)?;
    Ok(out)
}

fn cmd_predict(run: &Run, checkpoint: Option<&Path>) -> Result<String> {
    let path = checkpoint
        .or(run.cfg.paths.checkpoint.as_deref())
        .ok_or_else(|| Error::Config("no checkpoint given".into()))?;
    if !path.is_file() {
        return Err(Error::Config(format!(
            "checkpoint {} not found",
            path.display()
        )));
    }
    let (set, _) = main_set(&run.cfg)?;
    let ckpt = Checkpoint::load_for_schema(path, &set.schema_hash)?;
    let model = &ckpt.manifest.config;
    if model.input_dim != set.dim() {
        return Err(Error::Shape(format!(
            "checkpoint expects width {}, corpus encodes {}",
            model.input_dim,
            set.dim()
        )));
    }
    if let Some(e) = &ckpt.params.embeddings {
        let rows = set.instances.iter().find_map(|i| match &i.features {
            crate::encode::Features::Sparse { table, .. } => Some(table.rows()),
            crate::encode::Features::Dense(_) => None,
        });
        if rows.is_some_and(|r| r != e.rows()) {
            return Err(Error::Shape(
                "fine-tuned embeddings do not match this corpus's vocabulary".into(),
            ));
        }
    }
    let predictions = evaluate(&set.instances, &ckpt.params, model)?;
    run.write("predictions.tsv", &write_predictions(&predictions))?;
    let mut out = format!("instances {}\n", predictions.len());
    out.push_str(&report_for(&predictions).to_text());
    run.finish("predict", &out)?;
    Ok(out)
}

/// The gradient table and whether every tensor passed.
fn cmd_gradcheck(run: &Run) -> Result<(String, bool)> {
    let (config, params, batch) = reference_setup(run.cfg.seeds().model)?;
    let refs: Vec<_> = batch.iter().collect();
    let checks = gradient_check(
        &refs,
        &params,
        &config,
        Dropout::Seeded(run.cfg.seeds().dropout),
        DEFAULT_STEP,
    )?;
    let mut out = format!(
        "{:<12} {:>7} {:>12} {:>12}  status\n",
        "tensor", "entries", "max_abs", "max_rel"
    );
    for c in &checks {
        writeln!(
            out,
            "{:<12} {:>7} {:>12.3e} {:>12.3e}  {}",
            c.name,
            c.entries,
            c.max_abs_error,
            c.max_rel_error,
            if c.passed() { "ok" } else { "FAIL" }
        )
        .unwrap();
    }
    let passed = checks.iter().all(|c| c.passed());
    writeln!(out, "tolerance {:e}", TOLERANCE).unwrap();
    run.finish("gradcheck", &out)?;
    Ok((out, passed))
}

fn dispatch(cli: Cli) -> Result<i32> {
    let text = match &cli.command {
        Command::Encode { common } => cmd_encode(&Run::new(common)?)?,
        Command::Train { common, epochs } => {
            let mut run = Run::new(common)?;
            if let Some(e) = epochs {
                run.cfg.train.epochs = *e;
            }
            cmd_train(&run)?
        }
        Command::Cv {
            common,
            k,
            folds,
            epochs,
        } => {
            let mut run = Run::new(common)?;
            if let Some(e) = epochs {
                run.cfg.train.epochs = *e;
            }
            if let Some(k) = k {
                run.cfg.cv.k = *k;
            }
            cmd_cv(&run, *k, folds.as_deref())?
        }
        Command::Cross { common, epochs } => {
            let mut run = Run::new(common)?;
            if let Some(e) = epochs {
                run.cfg.train.epochs = *e;
            }
            cmd_cross(&run)?
        }
        Command::Ablate { common, k, epochs } => {
            let mut run = Run::new(common)?;
            if let Some(e) = epochs {
                run.cfg.train.epochs = *e;
            }
            if let Some(k) = k {
                run.cfg.cv.k = *k;
            }
            cmd_ablate(&run, *k)?
        }
        Command::Predict { common, checkpoint } => {
            cmd_predict(&Run::new(common)?, checkpoint.as_deref())?
        }
        Command::Gradcheck { common } => {
            let (text, passed) = cmd_gradcheck(&Run::new(common)?)?;
            print!("{}", text);
            return Ok(if passed { EXIT_OK } else { EXIT_NUMERIC });
        }
    };
    print!("{}", text);
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name), runs the command, and
/// returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            exit_code(&e)
        }
    }
}

/// Pooled report of a finished run, for callers that want the numbers.
pub fn parse_report_counts(text: &str) -> Option<EvalReport> {
    let section = text.split("[pooled]\n").nth(1).unwrap_or(text);
    let get = |k: &str| -> Option<usize> {
        section
            .lines()
            .find_map(|l| l.strip_prefix(k).and_then(|v| v.trim().parse().ok()))
    };
    Some(EvalReport::from_counts(
        get("tp ")?,
        get("fp ")?,
        get("fn ")?,
        get("tn ")?,
    ))
}
