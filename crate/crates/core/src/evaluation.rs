//! Comparison statistics and the repeated-experiment protocol.
//!
//! An experiment trains every algorithm on every dataset several times,
//! re-drawing the training resample and the learner seed each repetition
//! while the train/validation/test partition stays fixed. Test savings and
//! F1 are summarized by mean and sample standard deviation; algorithms are
//! then ranked per dataset on mean savings.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::baselines::{self, bmr_predict_dataset, LogisticConfig, Uncalibrated};
use crate::combiners::GaConfig;
use crate::cost_model::{savings, CostedDataset};
use crate::csdt::{self, CsdtConfig};
use crate::data::DatasetBundle;
use crate::ensemble::{self, CombinerConfig, EcsdtConfig};
use crate::error::{Error, Result};
use crate::inducers::{InducerConfig, InducerKind};
use crate::rng;
use crate::sampling::{resample, SamplingMethod, SamplingSpec};

/// F1 of the positive class; 0 when precision and recall are both 0.
pub fn f1_score(labels: &[u8], predictions: &[u8]) -> Result<f64> {
    if labels.len() != predictions.len() {
        return Err(Error::Alignment { expected: labels.len(), found: predictions.len() });
    }
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    for (&y, &p) in labels.iter().zip(predictions) {
        match (y, p) {
            (1, 1) => tp += 1,
            (0, 1) => fp += 1,
            (1, 0) => fneg += 1,
            _ => {}
        }
    }
    // 2PR/(P+R) reduces to 2TP/(2TP+FP+FN)
    let denom = 2 * tp + fp + fneg;
    Ok(if tp == 0 { 0.0 } else { 2.0 * tp as f64 / denom as f64 })
}

/// Mean and sample standard deviation; the deviation is 0 for one value.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, libm::sqrt(var))
}

/// Ranks of `column` by descending score, ties sharing their average rank.
pub fn rank_descending(column: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..column.len()).collect();
    order.sort_by(|&a, &b| column[b].total_cmp(&column[a]));
    let mut ranks = alloc::vec![0.0; column.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && column[order[j]] == column[order[i]] {
            j += 1;
        }
        // positions i..j hold ranks i+1..=j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &o in &order[i..j] {
            ranks[o] = avg;
        }
        i = j;
    }
    ranks
}

fn complete(table: &[Vec<Option<f64>>]) -> Result<(usize, Vec<Vec<f64>>)> {
    let d = table.first().map_or(0, Vec::len);
    if table.is_empty() || d == 0 {
        return Err(Error::IncompleteTable("the score table is empty".into()));
    }
    let mut out = Vec::with_capacity(table.len());
    for (a, row) in table.iter().enumerate() {
        if row.len() != d {
            return Err(Error::IncompleteTable(format!("algorithm {a} has {} of {d} datasets", row.len())));
        }
        let mut r = Vec::with_capacity(d);
        for (j, cell) in row.iter().enumerate() {
            match cell {
                Some(v) if !v.is_nan() => r.push(*v),
                _ => return Err(Error::IncompleteTable(format!("missing score for algorithm {a}, dataset {j}"))),
            }
        }
        out.push(r);
    }
    Ok((d, out))
}

/// Mean Friedman rank per algorithm. `table[a][d]` is the savings of
/// algorithm `a` on dataset `d`; rank 1 is the highest savings.
pub fn friedman_rank(table: &[Vec<Option<f64>>]) -> Result<Vec<f64>> {
    let (d, table) = complete(table)?;
    let mut sums = alloc::vec![0.0; table.len()];
    for j in 0..d {
        let column: Vec<f64> = table.iter().map(|r| r[j]).collect();
        for (s, r) in sums.iter_mut().zip(rank_descending(&column)) {
            *s += r;
        }
    }
    Ok(sums.into_iter().map(|s| s / d as f64).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerBest {
    /// Mean percentage of the per-dataset best savings, per algorithm.
    pub values: Vec<f64>,
    /// Datasets left out because their best savings was not positive.
    pub excluded: Vec<usize>,
}

/// Average of `100 * savings / best savings` over datasets whose best is
/// positive.
pub fn per_best(table: &[Vec<Option<f64>>]) -> Result<PerBest> {
    let (d, table) = complete(table)?;
    let mut sums = alloc::vec![0.0; table.len()];
    let mut excluded = Vec::new();
    for j in 0..d {
        let best = table.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max);
        if best <= 0.0 {
            excluded.push(j);
            continue;
        }
        for (s, r) in sums.iter_mut().zip(&table) {
            *s += if r[j] == best { 100.0 } else { 100.0 * r[j] / best };
        }
    }
    let used = d - excluded.len();
    if used == 0 {
        return Err(Error::Degenerate("no dataset has a positive best savings".into()));
    }
    Ok(PerBest { values: sums.into_iter().map(|s| s / used as f64).collect(), excluded })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Cost-insensitive learners on the plain training set.
    Ci,
    /// Cost-insensitive learners on a cost-proportionate training set.
    Cps,
    /// Probabilistic learners followed by Bayes minimum risk.
    Bmr,
    /// The single cost-sensitive tree.
    Cst,
    /// Ensembles of cost-sensitive trees.
    Ecsdt,
}

impl Family {
    pub fn code(self) -> &'static str {
        match self {
            Self::Ci => "ci",
            Self::Cps => "cps",
            Self::Bmr => "bmr",
            Self::Cst => "cst",
            Self::Ecsdt => "ecsdt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombinerKind {
    MajorityVote,
    WeightedVote,
    AccuracyWeightedVote,
    Stacking,
}

impl CombinerKind {
    pub fn code(self) -> &'static str {
        match self {
            Self::MajorityVote => "mv",
            Self::WeightedVote => "wv",
            Self::AccuracyWeightedVote => "wv-acc",
            Self::Stacking => "s",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mv" => Some(Self::MajorityVote),
            "wv" => Some(Self::WeightedVote),
            "wv-acc" => Some(Self::AccuracyWeightedVote),
            "s" | "stacking" => Some(Self::Stacking),
            _ => None,
        }
    }

    pub fn config(self, ga: &GaConfig) -> CombinerConfig {
        match self {
            Self::MajorityVote => CombinerConfig::MajorityVote,
            Self::WeightedVote => CombinerConfig::WeightedVote,
            Self::AccuracyWeightedVote => CombinerConfig::AccuracyWeightedVote,
            Self::Stacking => CombinerConfig::Stacking(*ga),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Learner {
    DecisionTree,
    Logistic,
    RandomForest,
    Csdt,
    Ecsdt { inducer: InducerKind, combiner: CombinerKind },
}

impl Learner {
    fn prefix(&self) -> &'static str {
        match self {
            Self::DecisionTree => "DT",
            Self::Logistic => "LR",
            Self::RandomForest => "RF",
            Self::Csdt => "CSDT",
            Self::Ecsdt { inducer, .. } => match inducer {
                InducerKind::Bagging => "CSB",
                InducerKind::Pasting => "CSP",
                InducerKind::RandomForest => "CSRF",
                InducerKind::RandomPatches => "CSRP",
            },
        }
    }

    fn cost_insensitive(&self) -> bool {
        matches!(self, Self::DecisionTree | Self::Logistic | Self::RandomForest)
    }
}

/// One benchmarked algorithm, named like `RF-u`, `CSDT-t`, `CSRP-wv-t` or
/// `LR-t-BMR`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Algorithm {
    pub learner: Learner,
    /// `None` trains on the plain training set (`t`).
    pub training_set: Option<SamplingMethod>,
    pub bmr: bool,
}

impl Algorithm {
    pub fn name(&self) -> String {
        let mut s = String::from(self.learner.prefix());
        if let Learner::Ecsdt { combiner, .. } = self.learner {
            s.push('-');
            s.push_str(combiner.code());
        }
        s.push('-');
        s.push(self.training_set.map_or('t', SamplingMethod::code));
        if self.bmr {
            s.push_str("-BMR");
        }
        s
    }

    pub fn family(&self) -> Family {
        if self.bmr {
            Family::Bmr
        } else if self.learner.cost_insensitive() {
            if self.training_set.is_some() {
                Family::Cps
            } else {
                Family::Ci
            }
        } else if self.learner == Learner::Csdt {
            Family::Cst
        } else {
            Family::Ecsdt
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown algorithm `{name}`"));
        let (body, bmr) = match name.strip_suffix("-BMR") {
            Some(b) => (b, true),
            None => (name, false),
        };
        let (head, set) = body.rsplit_once('-').ok_or_else(bad)?;
        let training_set = match set {
            "t" => None,
            other => Some(SamplingMethod::from_code(other).ok_or_else(bad)?),
        };
        let learner = match head {
            "DT" => Learner::DecisionTree,
            "LR" => Learner::Logistic,
            "RF" => Learner::RandomForest,
            "CSDT" => Learner::Csdt,
            _ => {
                let (prefix, combiner) = head.split_once('-').ok_or_else(bad)?;
                let inducer = match prefix {
                    "CSB" => InducerKind::Bagging,
                    "CSP" => InducerKind::Pasting,
                    "CSRF" => InducerKind::RandomForest,
                    "CSRP" => InducerKind::RandomPatches,
                    _ => return Err(bad()),
                };
                Learner::Ecsdt { inducer, combiner: CombinerKind::parse(combiner).ok_or_else(bad)? }
            }
        };
        Ok(Self { learner, training_set, bmr })
    }
}

/// Hyperparameters shared by every algorithm of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerSettings {
    pub tree: CsdtConfig,
    /// Ensemble size for the forest baseline and every ensemble.
    pub n_trees: usize,
    pub ga: GaConfig,
    pub logistic: LogisticConfig,
}

impl Default for LearnerSettings {
    fn default() -> Self {
        Self { tree: CsdtConfig::default(), n_trees: 100, ga: GaConfig::default(), logistic: LogisticConfig::default() }
    }
}

#[derive(Debug, Clone)]
pub struct NamedBundle {
    pub name: String,
    pub bundle: DatasetBundle,
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub algorithms: Vec<Algorithm>,
    pub datasets: Vec<NamedBundle>,
    pub repetitions: usize,
    pub seed: u64,
    pub settings: LearnerSettings,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.algorithms.is_empty() || self.datasets.is_empty() {
            return Err(Error::Config("an experiment needs at least one algorithm and one dataset".into()));
        }
        self.settings.tree.validate()?;
        self.settings.ga.validate()
    }
}

/// Test-set scores of one repetition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepetitionScore {
    pub savings: f64,
    pub f1: f64,
}

/// Seed of repetition `rep` on dataset `dataset`. Shared by all algorithms,
/// so algorithms trained on the same resample see the same rows.
pub fn repetition_seed(seed: u64, dataset: usize, rep: usize) -> u64 {
    rng::substream(rng::substream(seed, dataset as u64), rep as u64)
}

fn predictions(algorithm: &Algorithm, train: &CostedDataset, test: &CostedDataset, settings: &LearnerSettings, seed: u64) -> Result<Vec<u8>> {
    let ensemble_config = |inducer: InducerKind, combiner: CombinerKind| EcsdtConfig {
        inducer: InducerConfig { kind: inducer, n_trees: settings.n_trees, n_examples: None, n_features: None, seed },
        tree: settings.tree,
        combiner: combiner.config(&GaConfig { seed: rng::substream(seed, 7), ..settings.ga }),
    };
    let rows = || -> Vec<Vec<f64>> { test.examples().iter().map(|e| e.features.clone()).collect() };
    if algorithm.bmr {
        let p = match algorithm.learner {
            Learner::DecisionTree => {
                let m = baselines::gini_tree(train, &settings.tree)?;
                test.examples().iter().map(|e| m.predict_proba(&e.features)).collect::<Result<Vec<_>>>()?
            }
            Learner::Csdt => {
                let m = csdt::grow(train, &settings.tree)?;
                test.examples().iter().map(|e| m.predict_proba(&e.features)).collect::<Result<Vec<_>>>()?
            }
            Learner::Logistic => baselines::train_logistic(train, &settings.logistic)?.predict_proba_dataset(test)?,
            Learner::RandomForest => {
                baselines::plain_forest(train, settings.n_trees, &settings.tree, seed)?.predict_proba_rows(&rows())?
            }
            Learner::Ecsdt { inducer, combiner } => {
                ensemble::train(train, &ensemble_config(inducer, combiner))?.predict_proba_rows(&rows())?
            }
        };
        return bmr_predict_dataset(&p, test, &Uncalibrated);
    }
    match algorithm.learner {
        Learner::DecisionTree => baselines::gini_tree(train, &settings.tree)?.predict_dataset(test),
        Learner::Csdt => csdt::grow(train, &settings.tree)?.predict_dataset(test),
        Learner::Logistic => {
            let m = baselines::train_logistic(train, &settings.logistic)?;
            Ok(m.predict_proba_dataset(test)?.into_iter().map(|p| u8::from(p >= 0.5)).collect())
        }
        Learner::RandomForest => baselines::plain_forest(train, settings.n_trees, &settings.tree, seed)?.predict_dataset(test),
        Learner::Ecsdt { inducer, combiner } => ensemble::train(train, &ensemble_config(inducer, combiner))?.predict_dataset(test),
    }
}

/// Trains `algorithm` once and scores it on the bundle's test set.
/// `seed` drives both the training resample and the learner.
pub fn run_repetition(algorithm: &Algorithm, bundle: &DatasetBundle, settings: &LearnerSettings, seed: u64) -> Result<RepetitionScore> {
    let train = match algorithm.training_set {
        None => bundle.train.clone(),
        Some(method) => resample(&bundle.train, &SamplingSpec { method, seed: rng::substream(seed, 0) })?,
    };
    let preds = predictions(algorithm, &train, &bundle.test, settings, rng::substream(seed, 1))?;
    Ok(RepetitionScore { savings: savings(&bundle.test, &preds)?, f1: f1_score(&bundle.test.labels(), &preds)? })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    fn of(values: &[f64]) -> Self {
        let (mean, std) = mean_std(values);
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub dataset: String,
    /// Absent when any repetition failed.
    pub savings: Option<Summary>,
    pub f1: Option<Summary>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmReport {
    pub algorithm: String,
    pub family: Family,
    pub cells: Vec<CellReport>,
    pub friedman_rank: Option<f64>,
    pub per_best: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub seed: u64,
    pub repetitions: usize,
    pub datasets: Vec<String>,
    pub algorithms: Vec<AlgorithmReport>,
    pub warnings: Vec<String>,
}

/// Builds the report from per-repetition outcomes indexed
/// `[algorithm][dataset][repetition]`.
pub fn assemble_report(spec: &ExperimentSpec, outcomes: &[Vec<Vec<Result<RepetitionScore>>>]) -> EvaluationReport {
    let datasets: Vec<String> = spec.datasets.iter().map(|d| d.name.clone()).collect();
    let mut warnings = Vec::new();
    let mut rows = Vec::with_capacity(spec.algorithms.len());
    for (algo, per_dataset) in spec.algorithms.iter().zip(outcomes) {
        let cells = per_dataset
            .iter()
            .zip(&datasets)
            .map(|(reps, name)| match reps.iter().find_map(|r| r.as_ref().err()) {
                Some(e) => CellReport { dataset: name.clone(), savings: None, f1: None, error: Some(e.to_string()) },
                None => {
                    let s: Vec<f64> = reps.iter().flatten().map(|r| r.savings).collect();
                    let f: Vec<f64> = reps.iter().flatten().map(|r| r.f1).collect();
                    CellReport { dataset: name.clone(), savings: Some(Summary::of(&s)), f1: Some(Summary::of(&f)), error: None }
                }
            })
            .collect();
        rows.push(AlgorithmReport { algorithm: algo.name(), family: algo.family(), cells, friedman_rank: None, per_best: None });
    }
    for row in &rows {
        for c in row.cells.iter().filter(|c| c.error.is_some()) {
            warnings.push(format!("{} on {} failed: {}", row.algorithm, c.dataset, c.error.as_deref().unwrap_or("")));
        }
    }
    let table: Vec<Vec<Option<f64>>> = rows
        .iter()
        .map(|r| r.cells.iter().map(|c| c.savings.map(|s| s.mean)).collect())
        .collect();
    match friedman_rank(&table) {
        Ok(ranks) => rows.iter_mut().zip(ranks).for_each(|(r, v)| r.friedman_rank = Some(v)),
        Err(e) => warnings.push(format!("Friedman ranks not computed: {e}")),
    }
    match per_best(&table) {
        Ok(pb) => {
            for j in pb.excluded {
                warnings.push(format!("dataset {} left out of perBest: best savings is not positive", datasets[j]));
            }
            rows.iter_mut().zip(pb.values).for_each(|(r, v)| r.per_best = Some(v));
        }
        Err(e) => warnings.push(format!("perBest not computed: {e}")),
    }
    EvaluationReport { seed: spec.seed, repetitions: spec.repetitions, datasets, algorithms: rows, warnings }
}

/// Runs every (algorithm, dataset, repetition) cell sequentially.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<EvaluationReport> {
    spec.validate()?;
    let outcomes: Vec<Vec<Vec<Result<RepetitionScore>>>> = spec
        .algorithms
        .iter()
        .map(|algo| {
            spec.datasets
                .iter()
                .enumerate()
                .map(|(d, ds)| {
                    (0..spec.repetitions)
                        .map(|r| run_repetition(algo, &ds.bundle, &spec.settings, repetition_seed(spec.seed, d, r)))
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(assemble_report(spec, &outcomes))
}
