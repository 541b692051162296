//! One-vs-rest linear SVM trained by stochastic subgradient descent on the
//! hinge loss, with stratified k-fold cross-validation and grid search.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{self, Category, Corpus};
use crate::error::{Error, Result};
use crate::features::{EmbeddingTable, FeatureKind, FeatureVector, Featurizer};
use crate::par;

const N_CLASSES: usize = Category::COUNT;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Regularization strength.
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Initial step size. Step `t` is `eta0 / (1 + eta0 * lambda * t)`,
    /// which tends to the plain `1 / (lambda * t)` schedule as `eta0` grows.
    pub eta0: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda: 1e-4,
            epochs: 10,
            seed: 0,
            eta0: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::Config("lambda must be a positive finite number".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if !(self.eta0 > 0.0) {
            return Err(Error::Config("eta0 must be positive".into()));
        }
        Ok(())
    }

    pub fn step(&self, t: usize) -> f64 {
        if self.eta0.is_infinite() {
            1.0 / (self.lambda * t as f64)
        } else {
            self.eta0 / (1.0 + self.eta0 * self.lambda * t as f64)
        }
    }
}

/// λ ∈ {1e-5, 1e-4, 1e-3} × epochs ∈ {10, 30}.
pub fn default_grid(seed: u64) -> Vec<TrainConfig> {
    let mut grid = Vec::new();
    for lambda in [1e-5, 1e-4, 1e-3] {
        for epochs in [10, 30] {
            grid.push(TrainConfig {
                lambda,
                epochs,
                seed,
                ..TrainConfig::default()
            });
        }
    }
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ModelFile", try_from = "ModelFile")]
pub struct LinearModel {
    pub kind: FeatureKind,
    pub dim: usize,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    dim: usize,
    classes: usize,
    feature_kind: FeatureKind,
    bias: Vec<f64>,
    weights: Vec<Vec<(usize, f64)>>,
}

impl From<LinearModel> for ModelFile {
    fn from(m: LinearModel) -> Self {
        ModelFile {
            version: 1,
            dim: m.dim,
            classes: m.weights.len(),
            feature_kind: m.kind,
            bias: m.bias,
            weights: m
                .weights
                .iter()
                .map(|row| FeatureVector::from_dense(row).entries().to_vec())
                .collect(),
        }
    }
}

impl TryFrom<ModelFile> for LinearModel {
    type Error = String;

    fn try_from(f: ModelFile) -> std::result::Result<Self, String> {
        if f.version != 1 {
            return Err(format!("unsupported model version {}", f.version));
        }
        if f.classes != N_CLASSES || f.weights.len() != N_CLASSES || f.bias.len() != N_CLASSES {
            return Err(format!("model must have {N_CLASSES} classes"));
        }
        let mut weights = vec![vec![0.0; f.dim]; N_CLASSES];
        for (row, sparse) in weights.iter_mut().zip(&f.weights) {
            for &(i, w) in sparse {
                *row.get_mut(i).ok_or_else(|| format!("weight index {i} >= dim {}", f.dim))? = w;
            }
        }
        Ok(LinearModel {
            kind: f.feature_kind,
            dim: f.dim,
            weights,
            bias: f.bias,
        })
    }
}

impl LinearModel {
    pub fn zeros(kind: FeatureKind, dim: usize) -> Self {
        LinearModel {
            kind,
            dim,
            weights: vec![vec![0.0; dim]; N_CLASSES],
            bias: vec![0.0; N_CLASSES],
        }
    }

    pub fn scores(&self, x: &FeatureVector) -> [f64; N_CLASSES] {
        let mut s = [0.0; N_CLASSES];
        for (c, out) in s.iter_mut().enumerate() {
            *out = x.dot(&self.weights[c]) + self.bias[c];
        }
        s
    }

    /// Average over classes of `λ/2‖w_c‖² + mean hinge`.
    pub fn objective(&self, xs: &[FeatureVector], ys: &[Category], lambda: f64) -> f64 {
        let n = xs.len() as f64;
        let mut total = 0.0;
        for c in 0..N_CLASSES {
            let reg: f64 = self.weights[c].iter().map(|w| w * w).sum::<f64>() * lambda / 2.0;
            let hinge: f64 = xs
                .iter()
                .zip(ys)
                .map(|(x, y)| {
                    let s = if y.code() == c { 1.0 } else { -1.0 };
                    (1.0 - s * (x.dot(&self.weights[c]) + self.bias[c])).max(0.0)
                })
                .sum::<f64>()
                / n;
            total += reg + hinge;
        }
        total / N_CLASSES as f64
    }
}

pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Highest-scoring category; ties go to the lowest code.
pub fn predict(model: &LinearModel, x: &FeatureVector) -> (Category, [f64; N_CLASSES]) {
    let scores = model.scores(x);
    let c = Category::ALL[argmax(&scores)];
    (c, scores)
}

/// Weight row stored as `scale * raw` so the per-step shrinkage is O(1).
struct ScaledRow {
    raw: Vec<f64>,
    scale: f64,
    bias: f64,
}

impl ScaledRow {
    fn dot(&self, x: &FeatureVector) -> f64 {
        self.scale * x.dot(&self.raw)
    }

    fn shrink(&mut self, factor: f64) {
        self.scale *= factor;
        if self.scale < 1e-9 {
            for w in &mut self.raw {
                *w *= self.scale;
            }
            self.scale = 1.0;
        }
    }

    fn add(&mut self, x: &FeatureVector, amount: f64) {
        let a = amount / self.scale;
        for &(i, v) in x.entries() {
            self.raw[i] += a * v;
        }
    }

    fn into_dense(self) -> (Vec<f64>, f64) {
        let s = self.scale;
        (self.raw.into_iter().map(|w| w * s).collect(), self.bias)
    }
}

/// Trains one binary hinge-loss classifier per category. Every epoch visits
/// the samples in a fresh seeded permutation shared by all five classifiers.
pub fn train_ovr_svm(
    xs: &[FeatureVector],
    ys: &[Category],
    kind: FeatureKind,
    dim: usize,
    cfg: &TrainConfig,
) -> Result<LinearModel> {
    cfg.validate()?;
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::Empty("training needs at least two samples"));
    }
    if ys.iter().all(|&y| y == ys[0]) {
        return Err(Error::SingleClass);
    }
    if let Some(bad) = xs.iter().filter_map(FeatureVector::max_index).find(|&i| i >= dim) {
        return Err(Error::Config(format!("feature index {bad} >= dimension {dim}")));
    }

    let mut rows: Vec<ScaledRow> = (0..N_CLASSES)
        .map(|_| ScaledRow {
            raw: vec![0.0; dim],
            scale: 1.0,
            bias: 0.0,
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut t = 0usize;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = cfg.step(t);
            let x = &xs[i];
            for (c, row) in rows.iter_mut().enumerate() {
                let s = if ys[i].code() == c { 1.0 } else { -1.0 };
                let margin = s * (row.dot(x) + row.bias);
                row.shrink(1.0 - eta * cfg.lambda);
                if margin < 1.0 {
                    row.add(x, eta * s);
                    row.bias += eta * s;
                }
            }
        }
    }

    let mut model = LinearModel::zeros(kind, dim);
    for (c, row) in rows.into_iter().enumerate() {
        let (w, b) = row.into_dense();
        model.weights[c] = w;
        model.bias[c] = b;
    }
    Ok(model)
}

/// Fold index per sample. Each class is shuffled and dealt round-robin, so
/// per-class counts differ by at most one across folds.
pub fn stratified_kfold(y: &[Category], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::Config("need at least 2 folds".into()));
    }
    if k > y.len() {
        return Err(Error::Config(format!("{k} folds for {} samples", y.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; y.len()];
    let mut offset = 0;
    for c in Category::ALL {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
        idx.shuffle(&mut rng);
        for (j, &i) in idx.iter().enumerate() {
            folds[i] = (offset + j) % k;
        }
        offset = (offset + idx.len()) % k;
    }
    Ok(folds)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub weighted_f1: f64,
    pub per_class: Vec<ClassMetrics>,
    /// `confusion[gold][pred]`.
    pub confusion: [[usize; N_CLASSES]; N_CLASSES],
}

pub fn evaluate(pred: &[Category], gold: &[Category]) -> Result<Evaluation> {
    if pred.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: gold.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::Empty("evaluation needs at least one prediction"));
    }
    let n = gold.len();
    let mut confusion = [[0usize; N_CLASSES]; N_CLASSES];
    for (p, g) in pred.iter().zip(gold) {
        confusion[g.code()][p.code()] += 1;
    }
    let correct: usize = (0..N_CLASSES).map(|c| confusion[c][c]).sum();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };

    let mut per_class = Vec::with_capacity(N_CLASSES);
    let mut weighted_f1 = 0.0;
    for c in 0..N_CLASSES {
        let tp = confusion[c][c];
        let support: usize = confusion[c].iter().sum();
        let predicted: usize = (0..N_CLASSES).map(|g| confusion[g][c]).sum();
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        weighted_f1 += support as f64 / n as f64 * f1;
        per_class.push(ClassMetrics {
            precision,
            recall,
            f1,
            support,
        });
    }
    Ok(Evaluation {
        accuracy: correct as f64 / n as f64,
        weighted_f1,
        per_class,
        confusion,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct CvOptions<'a> {
    pub kind: FeatureKind,
    pub folds: usize,
    pub fold_seed: u64,
    pub min_df: usize,
    pub embeddings: Option<&'a EmbeddingTable>,
}

impl<'a> CvOptions<'a> {
    pub fn new(kind: FeatureKind) -> Self {
        CvOptions {
            kind,
            folds: 5,
            fold_seed: 0,
            min_df: 2,
            embeddings: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub feature_kind: FeatureKind,
    pub config: TrainConfig,
    pub folds: usize,
    pub fold_accuracy: Vec<f64>,
    pub fold_weighted_f1: Vec<f64>,
    /// Feature dimension fitted on each fold's training part.
    pub fold_dims: Vec<usize>,
    pub mean_accuracy: f64,
    pub mean_weighted_f1: f64,
    /// Row-normalized confusion, averaged over the folds where the row has
    /// support.
    pub confusion: [[f64; N_CLASSES]; N_CLASSES],
}

struct FoldOutcome {
    eval: Evaluation,
    dim: usize,
}

fn run_fold<S: AsRef<str> + Sync>(
    docs: &[S],
    labels: &[Category],
    folds: &[usize],
    fold: usize,
    opts: &CvOptions<'_>,
    cfg: &TrainConfig,
) -> Result<FoldOutcome> {
    let (train, test): (Vec<usize>, Vec<usize>) = (0..docs.len()).partition(|&i| folds[i] != fold);
    let train_docs: Vec<&str> = train.iter().map(|&i| docs[i].as_ref()).collect();
    let featurizer = Featurizer::fit(opts.kind, &train_docs, opts.min_df, opts.embeddings)?;
    let xs = featurizer.transform_all(&train_docs);
    let ys: Vec<Category> = train.iter().map(|&i| labels[i]).collect();
    let model = train_ovr_svm(&xs, &ys, opts.kind, featurizer.dim(), cfg)?;
    let pred: Vec<Category> = test
        .iter()
        .map(|&i| predict(&model, &featurizer.transform(docs[i].as_ref())).0)
        .collect();
    let gold: Vec<Category> = test.iter().map(|&i| labels[i]).collect();
    Ok(FoldOutcome {
        eval: evaluate(&pred, &gold)?,
        dim: featurizer.dim(),
    })
}

/// k-fold CV where the featurizer is refit on each training part.
pub fn cross_validate<S: AsRef<str> + Sync>(
    docs: &[S],
    labels: &[Category],
    opts: &CvOptions<'_>,
    cfg: &TrainConfig,
) -> Result<CvReport> {
    if docs.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: docs.len(),
            right: labels.len(),
        });
    }
    let folds = stratified_kfold(labels, opts.folds, opts.fold_seed)?;
    let fold_ids: Vec<usize> = (0..opts.folds).collect();
    let outcomes = par::map(&fold_ids, |&f| run_fold(docs, labels, &folds, f, opts, cfg))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let k = outcomes.len() as f64;
    let mut confusion = [[0.0; N_CLASSES]; N_CLASSES];
    for (g, row) in confusion.iter_mut().enumerate() {
        let mut used = 0usize;
        for o in &outcomes {
            let support: usize = o.eval.confusion[g].iter().sum();
            if support == 0 {
                continue;
            }
            used += 1;
            for (p, cell) in row.iter_mut().enumerate() {
                *cell += o.eval.confusion[g][p] as f64 / support as f64;
            }
        }
        if used > 0 {
            for cell in row.iter_mut() {
                *cell /= used as f64;
            }
        }
    }
    let fold_accuracy: Vec<f64> = outcomes.iter().map(|o| o.eval.accuracy).collect();
    let fold_weighted_f1: Vec<f64> = outcomes.iter().map(|o| o.eval.weighted_f1).collect();
    Ok(CvReport {
        feature_kind: opts.kind,
        config: *cfg,
        folds: opts.folds,
        mean_accuracy: fold_accuracy.iter().sum::<f64>() / k,
        mean_weighted_f1: fold_weighted_f1.iter().sum::<f64>() / k,
        fold_accuracy,
        fold_weighted_f1,
        fold_dims: outcomes.iter().map(|o| o.dim).collect(),
        confusion,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best_index: usize,
    pub best: TrainConfig,
    pub report: CvReport,
    pub candidates: Vec<CvReport>,
}

/// Picks the config with the highest mean weighted F1; ties keep grid order.
pub fn grid_search<S: AsRef<str> + Sync>(
    docs: &[S],
    labels: &[Category],
    grid: &[TrainConfig],
    opts: &CvOptions<'_>,
) -> Result<GridResult> {
    if grid.is_empty() {
        return Err(Error::Empty("grid search needs at least one configuration"));
    }
    let candidates = grid
        .iter()
        .map(|cfg| cross_validate(docs, labels, opts, cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut best_index = 0;
    for (i, r) in candidates.iter().enumerate() {
        if r.mean_weighted_f1 > candidates[best_index].mean_weighted_f1 {
            best_index = i;
        }
    }
    Ok(GridResult {
        best_index,
        best: grid[best_index],
        report: candidates[best_index].clone(),
        candidates,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportedPredictions {
    pub predictions: BTreeMap<String, Category>,
    /// Ids absent from the corpus.
    pub unknown_ids: Vec<String>,
}

/// Reads `id,label` predictions from an external model.
pub fn parse_external_predictions<R: Read>(reader: R, corpus: Option<&Corpus>) -> Result<ImportedPredictions> {
    let predictions = corpus::parse_labels(reader)?;
    let unknown_ids = match corpus {
        Some(c) => {
            let ids: std::collections::HashSet<&str> = c.tweets().iter().map(|t| t.id.as_str()).collect();
            predictions
                .keys()
                .filter(|k| !ids.contains(k.as_str()))
                .cloned()
                .collect()
        }
        None => Vec::new(),
    };
    Ok(ImportedPredictions {
        predictions,
        unknown_ids,
    })
}

pub fn import_external_predictions(path: impl AsRef<Path>, corpus: Option<&Corpus>) -> Result<ImportedPredictions> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_external_predictions(file, corpus)
}
