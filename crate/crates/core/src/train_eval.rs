//! Mini-batch training, metrics, and the evaluation protocols: k-fold
//! cross-validation, cross-corpus transfer, the difficult subset, and
//! window/channel ablation.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::{doc_ids, FoldPlan, Label};
use crate::encode::{EncodedInstance, EncodedSet, Features};
use crate::model::{
    derive_seed, init_model, init_model_with_embeddings, label_from_probs, loss_and_grads,
    probabilities, Dropout, ModelConfig, ModelParams,
};
use crate::tensor::{AdamConfig, AdamState};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// Seeds the per-epoch shuffle.
    pub shuffle_seed: u64,
    /// Seeds the dropout masks; each batch gets its own derived stream.
    pub dropout_seed: u64,
    /// Epochs between checkpoint callbacks; 0 disables them.
    pub checkpoint_interval: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 250,
            batch_size: 128,
            adam: AdamConfig::default(),
            shuffle_seed: 2,
            dropout_seed: 3,
            checkpoint_interval: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if !self.adam.learning_rate.is_finite() || self.adam.learning_rate <= 0.0 {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub adam: AdamState,
    /// Mean batch loss per epoch.
    pub loss_curve: Vec<f64>,
}

/// State handed to the checkpoint callback after an epoch.
pub struct EpochEnd<'a> {
    pub epoch: usize,
    pub params: &'a ModelParams,
    pub adam: &'a AdamState,
    pub mean_loss: f64,
}

/// Fresh parameters for `config`. When fine-tuning, the embedding table is
/// taken from the first corpus-encoded instance.
pub fn initial_params(instances: &[EncodedInstance], config: &ModelConfig) -> Result<ModelParams> {
    if !config.fine_tune_embeddings {
        return init_model(config, config.seed);
    }
    let table = instances
        .iter()
        .find_map(|i| match &i.features {
            Features::Sparse { table, .. } => Some(table.clone()),
            Features::Dense(_) => None,
        })
        .ok_or_else(|| {
            Error::Config("embedding fine-tuning needs corpus-encoded instances".into())
        })?;
    init_model_with_embeddings(config, config.seed, &table)
}

pub fn train(
    instances: &[EncodedInstance],
    model: &ModelConfig,
    config: &TrainConfig,
    init: Option<ModelParams>,
) -> Result<TrainOutcome> {
    train_with(instances, model, config, init, None, |_| Ok(()))
}

/// Full training loop. `resume` continues from saved optimizer state;
/// `on_checkpoint` runs every `checkpoint_interval` epochs and after the last.
pub fn train_with<F>(
    instances: &[EncodedInstance],
    model: &ModelConfig,
    config: &TrainConfig,
    init: Option<ModelParams>,
    resume: Option<AdamState>,
    mut on_checkpoint: F,
) -> Result<TrainOutcome>
where
    F: FnMut(EpochEnd<'_>) -> Result<()>,
{
    if instances.is_empty() {
        return Err(Error::Config("training set is empty".into()));
    }
    model.validate()?;
    config.validate()?;
    let mut params = match init {
        Some(p) => p,
        None => initial_params(instances, model)?,
    };
    params.check_shapes(model)?;
    let mut adam = match resume {
        Some(a) => a,
        None => AdamState::new(config.adam, params.tensors()),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.shuffle_seed);
    let mut order: Vec<usize> = (0..instances.len()).collect();
    let mut loss_curve = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut batches = 0;
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch: Vec<&EncodedInstance> = chunk.iter().map(|&i| &instances[i]).collect();
            let dropout =
                Dropout::Seeded(derive_seed(config.dropout_seed, &[epoch as u64, b as u64]));
            let (loss, grads) = match loss_and_grads(&batch, &params, model, dropout) {
                Err(Error::NonFinite(what)) => {
                    return Err(Error::NonFinite(format!(
                        "{} at epoch {} batch {}",
                        what, epoch, b
                    )))
                }
                other => other?,
            };
            if !loss.is_finite() {
                return Err(Error::NonFinite(format!(
                    "loss at epoch {} batch {}",
                    epoch, b
                )));
            }
            adam.step(&mut params.tensors_mut(), &grads.tensors())?;
            if let Err(Error::NonFinite(what)) = params.check_finite() {
                return Err(Error::NonFinite(format!(
                    "{} after epoch {} batch {}",
                    what, epoch, b
                )));
            }
            total += loss;
            batches += 1;
        }
        let mean_loss = total / batches as f64;
        loss_curve.push(mean_loss);
        let last = epoch + 1 == config.epochs;
        let due = config.checkpoint_interval > 0 && (epoch + 1) % config.checkpoint_interval == 0;
        if due || last {
            on_checkpoint(EpochEnd {
                epoch,
                params: &params,
                adam: &adam,
                mean_loss,
            })?;
        }
    }
    Ok(TrainOutcome {
        params,
        adam,
        loss_curve,
    })
}

/// Confusion counts with PPI as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EvalReport {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl EvalReport {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        EvalReport {
            tp,
            fp,
            fn_,
            tn,
            precision,
            recall,
            f1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Micro average: metrics from summed counts.
    pub fn pooled<'a>(reports: impl IntoIterator<Item = &'a EvalReport>) -> Self {
        let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
        for r in reports {
            tp += r.tp;
            fp += r.fp;
            fn_ += r.fn_;
            tn += r.tn;
        }
        EvalReport::from_counts(tp, fp, fn_, tn)
    }

    pub fn to_text(&self) -> String {
        format!(
            "tp {}\nfp {}\nfn {}\ntn {}\nprecision {:.6}\nrecall {:.6}\nf1 {:.6}\n",
            self.tp, self.fp, self.fn_, self.tn, self.precision, self.recall, self.f1
        )
    }
}

pub fn compute_metrics(predictions: &[Label], golds: &[Label]) -> Result<EvalReport> {
    if predictions.len() != golds.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} gold labels",
            predictions.len(),
            golds.len()
        )));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (p, g) in predictions.iter().zip(golds) {
        match (p, g) {
            (Label::Ppi, Label::Ppi) => tp += 1,
            (Label::Ppi, Label::Other) => fp += 1,
            (Label::Other, Label::Ppi) => fn_ += 1,
            (Label::Other, Label::Other) => tn += 1,
        }
    }
    Ok(EvalReport::from_counts(tp, fp, fn_, tn))
}

/// Unweighted mean of per-fold precision, recall and F1.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MacroAverage {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl MacroAverage {
    pub fn of(reports: &[EvalReport]) -> Self {
        if reports.is_empty() {
            return MacroAverage::default();
        }
        let n = reports.len() as f64;
        MacroAverage {
            precision: reports.iter().map(|r| r.precision).sum::<f64>() / n,
            recall: reports.iter().map(|r| r.recall).sum::<f64>() / n,
            f1: reports.iter().map(|r| r.f1).sum::<f64>() / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub instance_id: String,
    pub doc_id: String,
    pub gold: Label,
    pub predicted: Label,
    pub p_ppi: f64,
    pub difficult: bool,
}

pub fn evaluate(
    instances: &[EncodedInstance],
    params: &ModelParams,
    config: &ModelConfig,
) -> Result<Vec<Prediction>> {
    instances
        .par_iter()
        .map(|inst| {
            let probs = probabilities(inst, params, config)?;
            Ok(Prediction {
                instance_id: inst.instance_id.clone(),
                doc_id: inst.doc_id.clone(),
                gold: inst.label,
                predicted: label_from_probs(&probs),
                p_ppi: probs[Label::Ppi.index()],
                difficult: inst.difficult,
            })
        })
        .collect()
}

pub fn report_for(predictions: &[Prediction]) -> EvalReport {
    let preds: Vec<Label> = predictions.iter().map(|p| p.predicted).collect();
    let golds: Vec<Label> = predictions.iter().map(|p| p.gold).collect();
    compute_metrics(&preds, &golds).expect("lengths agree")
}

/// `instance_id<TAB>gold<TAB>predicted<TAB>p_ppi` per line.
pub fn write_predictions(predictions: &[Prediction]) -> String {
    let mut out = String::new();
    for p in predictions {
        writeln!(
            out,
            "{}\t{}\t{}\t{:.6e}",
            p.instance_id, p.gold, p.predicted, p.p_ppi
        )
        .unwrap();
    }
    out
}

/// Reads a prediction dump back as `(instance_id, gold, predicted, p_ppi)`.
pub fn parse_predictions(text: &str) -> Result<Vec<(String, Label, Label, f64)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 4 {
            return Err(Error::parse(
                n + 1,
                "expected instance_id, gold, predicted, p_ppi",
            ));
        }
        let gold = f[1]
            .parse()
            .map_err(|_| Error::parse(n + 1, "bad gold label"))?;
        let pred = f[2]
            .parse()
            .map_err(|_| Error::parse(n + 1, "bad predicted label"))?;
        let p = f[3]
            .parse()
            .map_err(|_| Error::parse(n + 1, "bad probability"))?;
        out.push((f[0].to_string(), gold, pred, p));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub report: EvalReport,
    pub predictions: Vec<Prediction>,
    pub loss_curve: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub folds: Vec<FoldResult>,
    /// Micro average over all folds.
    pub pooled: EvalReport,
    pub macro_avg: MacroAverage,
}

impl CvReport {
    pub fn predictions(&self) -> impl Iterator<Item = &Prediction> {
        self.folds.iter().flat_map(|f| f.predictions.iter())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, f) in self.folds.iter().enumerate() {
            writeln!(out, "[fold {}]", i).unwrap();
            out.push_str(&f.report.to_text());
        }
        out.push_str("[pooled]\n");
        out.push_str(&self.pooled.to_text());
        let m = self.macro_avg;
        write!(
            out,
            "[macro]\nprecision {:.6}\nrecall {:.6}\nf1 {:.6}\n",
            m.precision, m.recall, m.f1
        )
        .unwrap();
        out
    }
}

/// Trains one model per fold on the fold's training documents and scores
/// its test documents. Folds run in parallel.
pub fn run_cv(
    set: &EncodedSet,
    plan: &FoldPlan,
    model: &ModelConfig,
    config: &TrainConfig,
) -> Result<CvReport> {
    plan.validate(&doc_ids(set.instances.iter().map(|i| i.doc_id.as_str())))?;
    let splits = plan
        .folds
        .iter()
        .enumerate()
        .map(|(i, fold)| {
            let pick = |docs: &BTreeSet<String>| -> Vec<EncodedInstance> {
                set.instances
                    .iter()
                    .filter(|inst| docs.contains(&inst.doc_id))
                    .cloned()
                    .collect()
            };
            let (train_set, test_set) = (pick(&fold.train), pick(&fold.test));
            if test_set.is_empty() {
                return Err(Error::Config(format!("fold {} has no test instances", i)));
            }
            if train_set.is_empty() {
                return Err(Error::Config(format!(
                    "fold {} has no training instances",
                    i
                )));
            }
            Ok((train_set, test_set))
        })
        .collect::<Result<Vec<_>>>()?;

    let folds = splits
        .par_iter()
        .map(|(train_set, test_set)| {
            let outcome = train(train_set, model, config, None)?;
            let predictions = evaluate(test_set, &outcome.params, model)?;
            Ok(FoldResult {
                report: report_for(&predictions),
                predictions,
                loss_curve: outcome.loss_curve,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let reports: Vec<EvalReport> = folds.iter().map(|f| f.report).collect();
    Ok(CvReport {
        pooled: EvalReport::pooled(&reports),
        macro_avg: MacroAverage::of(&reports),
        folds,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossReport {
    pub report: EvalReport,
    pub predictions: Vec<Prediction>,
    pub loss_curve: Vec<f64>,
}

/// Trains on all of `train_set` and evaluates on all of `test_set`.
pub fn run_cross_corpus(
    train_set: &EncodedSet,
    test_set: &EncodedSet,
    model: &ModelConfig,
    config: &TrainConfig,
) -> Result<CrossReport> {
    if train_set.schema_hash != test_set.schema_hash {
        return Err(Error::Config(format!(
            "corpora were encoded with different schemas ({} vs {})",
            train_set.schema_hash, test_set.schema_hash
        )));
    }
    if test_set.instances.is_empty() {
        return Err(Error::Config("test corpus is empty".into()));
    }
    let outcome = train(&train_set.instances, model, config, None)?;
    let predictions = evaluate(&test_set.instances, &outcome.params, model)?;
    Ok(CrossReport {
        report: report_for(&predictions),
        predictions,
        loss_curve: outcome.loss_curve,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DifficultReport {
    pub report: EvalReport,
    pub positives: usize,
    pub negatives: usize,
    pub predictions: Vec<Prediction>,
}

/// Restricts out-of-fold predictions to the flagged instances.
pub fn score_difficult<'a>(
    predictions: impl IntoIterator<Item = &'a Prediction>,
) -> Result<DifficultReport> {
    let flagged: Vec<Prediction> = predictions
        .into_iter()
        .filter(|p| p.difficult)
        .cloned()
        .collect();
    if flagged.is_empty() {
        return Err(Error::Config(
            "no instance carries the difficult flag".into(),
        ));
    }
    let positives = flagged.iter().filter(|p| p.gold == Label::Ppi).count();
    Ok(DifficultReport {
        report: report_for(&flagged),
        positives,
        negatives: flagged.len() - positives,
        predictions: flagged,
    })
}

/// Cross-validates over the whole corpus so each flagged instance is scored
/// by a model that never saw its document, then scores the flagged subset.
pub fn run_difficult_subset(
    set: &EncodedSet,
    plan: &FoldPlan,
    model: &ModelConfig,
    config: &TrainConfig,
) -> Result<DifficultReport> {
    if !set.instances.iter().any(|i| i.difficult) {
        return Err(Error::Config(
            "no instance carries the difficult flag".into(),
        ));
    }
    let cv = run_cv(set, plan, model, config)?;
    score_difficult(cv.predictions())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub name: String,
    pub windows: Vec<usize>,
    pub channels: usize,
}

impl AblationRow {
    pub fn new(name: impl Into<String>, windows: &[usize], channels: usize) -> Self {
        AblationRow {
            name: name.into(),
            windows: windows.to_vec(),
            channels,
        }
    }
}

/// Windows {3}, {3,5}, {3,5,7} with both channels, then {3} with one.
pub fn default_ablation() -> Vec<AblationRow> {
    vec![
        AblationRow::new("window 3", &[3], 2),
        AblationRow::new("windows 3,5", &[3, 5], 2),
        AblationRow::new("windows 3,5,7", &[3, 5, 7], 2),
        AblationRow::new("single channel, window 3", &[3], 1),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationTable {
    pub rows: Vec<(AblationRow, CvReport)>,
}

impl AblationTable {
    /// Pooled F1 of each later row minus that of the first.
    pub fn deltas(&self) -> Vec<f64> {
        let base = self.rows.first().map_or(0.0, |(_, r)| r.pooled.f1);
        self.rows
            .iter()
            .skip(1)
            .map(|(_, r)| r.pooled.f1 - base)
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("row\tprecision\trecall\tf1\tdelta_f1\n");
        let base = self.rows.first().map_or(0.0, |(_, r)| r.pooled.f1);
        for (i, (row, cv)) in self.rows.iter().enumerate() {
            let p = &cv.pooled;
            let delta = if i == 0 {
                "-".to_string()
            } else {
                format!("{:+.6}", p.f1 - base)
            };
            writeln!(
                out,
                "{}\t{:.6}\t{:.6}\t{:.6}\t{}",
                row.name, p.precision, p.recall, p.f1, delta
            )
            .unwrap();
        }
        out
    }
}

/// One cross-validation run per row, each with its own window set and
/// channel count and otherwise identical settings.
pub fn run_ablation(
    set: &EncodedSet,
    plan: &FoldPlan,
    rows: &[AblationRow],
    model: &ModelConfig,
    config: &TrainConfig,
) -> Result<AblationTable> {
    if rows.is_empty() {
        return Err(Error::Config("ablation needs at least one row".into()));
    }
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let cfg = ModelConfig {
            windows: row.windows.clone(),
            channels: row.channels,
            ..model.clone()
        };
        cfg.validate()?;
        out.push((row.clone(), run_cv(set, plan, &cfg, config)?));
    }
    Ok(AblationTable { rows: out })
}
