//! The ensemble learner: draw `T` subsamples, grow a cost-sensitive tree on
//! each, score every tree on its out-of-bag rows and attach a combiner.
//!
//! Training is split into [`train_base`] (independent per tree) and
//! [`combine`] so callers can grow the trees in parallel; [`train`] runs
//! both sequentially. Results do not depend on the order trees are grown.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::combiners::{
    accuracy_weights, fit_stacking, majority_vote, savings_weights, stacking_predict, weighted_vote,
    GaConfig, StackingWeights, WeightVector,
};
use crate::cost_model::{savings, CostedDataset};
use crate::csdt::{grow_on, CsdtConfig, CsdtModel, GrowOptions};
use crate::error::{Error, Result};
use crate::inducers::{draw_sample, BaseSample, InducerConfig};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CombinerConfig {
    /// `mv`
    MajorityVote,
    /// `wv`: weights from out-of-bag savings.
    WeightedVote,
    /// `wv-acc`: weights from out-of-bag accuracy.
    AccuracyWeightedVote,
    /// `s`: cost-sensitive stacking fitted by a genetic algorithm.
    Stacking(GaConfig),
}

impl CombinerConfig {
    pub fn code(&self) -> &'static str {
        match self {
            Self::MajorityVote => "mv",
            Self::WeightedVote => "wv",
            Self::AccuracyWeightedVote => "wv-acc",
            Self::Stacking(_) => "s",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcsdtConfig {
    pub inducer: InducerConfig,
    pub tree: CsdtConfig,
    pub combiner: CombinerConfig,
}

impl EcsdtConfig {
    pub fn validate(&self, n: usize, k: usize) -> Result<()> {
        if self.inducer.n_trees < 3 {
            return Err(Error::Config(format!(
                "an ensemble needs at least 3 base classifiers, got {}",
                self.inducer.n_trees
            )));
        }
        self.inducer.validate(n, k)?;
        self.tree.validate()?;
        if let CombinerConfig::Stacking(ga) = &self.combiner {
            ga.validate()?;
        }
        Ok(())
    }
}

/// Fitted combiner parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Combiner {
    MajorityVote,
    WeightedVote { weights: WeightVector },
    Stacking { weights: StackingWeights },
}

/// One grown tree with its out-of-bag scores.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseOutcome {
    pub model: CsdtModel,
    pub feature_subset: Option<Vec<usize>>,
    /// `None` when the out-of-bag set has zero costless-class cost.
    pub oob_savings: Option<f64>,
    pub oob_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub k: usize,
    pub config: EcsdtConfig,
    pub base_models: Vec<CsdtModel>,
    pub feature_subsets: Vec<Option<Vec<usize>>>,
    pub oob_savings: Vec<Option<f64>>,
    pub oob_errors: Vec<f64>,
    pub combiner: Combiner,
}

fn sample_for(train: &CostedDataset, inducer: &InducerConfig, j: usize) -> Result<BaseSample> {
    let (n, k) = (train.len(), train.k());
    let sample = draw_sample(n, k, inducer, j)?;
    if !sample.oob_indices.is_empty() {
        return Ok(sample);
    }
    let retry = InducerConfig { seed: rng::substream(inducer.seed, 1 << 32), ..*inducer };
    let sample = draw_sample(n, k, &retry, j)?;
    if sample.oob_indices.is_empty() {
        return Err(Error::Sampling(format!("tree {j}: out-of-bag set is empty after one redraw")));
    }
    Ok(sample)
}

/// Grows tree `j` on its subsample and scores it out of bag.
pub fn train_base(train: &CostedDataset, inducer: &InducerConfig, tree: &CsdtConfig, j: usize) -> Result<BaseOutcome> {
    let sample = sample_for(train, inducer, j)?;
    let mut node_rng = rng::from_seed(sample.node_seed);
    let options = GrowOptions {
        features: sample.feature_indices.as_deref(),
        per_node: sample.per_node_features.map(|m| (m, &mut node_rng)),
    };
    let model = grow_on(train, &sample.example_indices, tree, options)?;
    let oob = train.subset(&sample.oob_indices)?;
    let preds = model.predict_dataset(&oob)?;
    let oob_savings = match savings(&oob, &preds) {
        Ok(s) => Some(s),
        Err(Error::UndefinedSavings) => None,
        Err(e) => return Err(e),
    };
    let wrong = oob.examples().iter().zip(&preds).filter(|(e, p)| e.label != **p).count();
    Ok(BaseOutcome {
        model,
        feature_subset: sample.feature_indices,
        oob_savings,
        oob_error: wrong as f64 / oob.len() as f64,
    })
}

/// Fits the combiner on the training set and assembles the model. `bases`
/// must be in tree order.
pub fn combine(train: &CostedDataset, config: &EcsdtConfig, bases: Vec<BaseOutcome>) -> Result<EnsembleModel> {
    if bases.len() != config.inducer.n_trees {
        return Err(Error::Alignment { expected: config.inducer.n_trees, found: bases.len() });
    }
    let oob_savings: Vec<Option<f64>> = bases.iter().map(|b| b.oob_savings).collect();
    let oob_errors: Vec<f64> = bases.iter().map(|b| b.oob_error).collect();
    let base_models: Vec<CsdtModel> = bases.iter().map(|b| b.model.clone()).collect();
    let feature_subsets = bases.into_iter().map(|b| b.feature_subset).collect();
    let combiner = match &config.combiner {
        CombinerConfig::MajorityVote => Combiner::MajorityVote,
        CombinerConfig::WeightedVote => {
            let raw: Vec<f64> = oob_savings.iter().map(|s| s.unwrap_or(0.0)).collect();
            Combiner::WeightedVote { weights: savings_weights(&raw)? }
        }
        CombinerConfig::AccuracyWeightedVote => Combiner::WeightedVote { weights: accuracy_weights(&oob_errors)? },
        CombinerConfig::Stacking(ga) => {
            let votes = votes_on(&base_models, train)?;
            Combiner::Stacking { weights: fit_stacking(train, &votes, ga)?.weights }
        }
    };
    Ok(EnsembleModel {
        k: train.k(),
        config: *config,
        base_models,
        feature_subsets,
        oob_savings,
        oob_errors,
        combiner,
    })
}

fn votes_on(models: &[CsdtModel], data: &CostedDataset) -> Result<Vec<Vec<u8>>> {
    models.iter().map(|m| m.predict_dataset(data)).collect()
}

/// Trains the full ensemble sequentially.
pub fn train(train_set: &CostedDataset, config: &EcsdtConfig) -> Result<EnsembleModel> {
    config.validate(train_set.len(), train_set.k())?;
    let bases = (0..config.inducer.n_trees)
        .map(|j| train_base(train_set, &config.inducer, &config.tree, j))
        .collect::<Result<Vec<_>>>()?;
    combine(train_set, config, bases)
}

impl EnsembleModel {
    pub fn n_trees(&self) -> usize {
        self.base_models.len()
    }

    /// `T x N` vote matrix on `rows`.
    pub fn base_votes(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<u8>>> {
        if let Some(bad) = rows.iter().find(|r| r.len() != self.k) {
            return Err(Error::Dimension { expected: self.k, found: bad.len() });
        }
        self.base_models
            .iter()
            .map(|m| rows.iter().map(|r| m.predict(r)).collect())
            .collect()
    }

    pub fn combine_votes(&self, votes: &[Vec<u8>]) -> Result<Vec<u8>> {
        match &self.combiner {
            Combiner::MajorityVote => majority_vote(votes),
            Combiner::WeightedVote { weights } => weighted_vote(votes, weights.alphas()),
            Combiner::Stacking { weights } => stacking_predict(votes, weights),
        }
    }

    pub fn predict_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<u8>> {
        self.combine_votes(&self.base_votes(rows)?)
    }

    pub fn predict_dataset(&self, data: &CostedDataset) -> Result<Vec<u8>> {
        let rows: Vec<Vec<f64>> = data.examples().iter().map(|e| e.features.clone()).collect();
        self.predict_rows(&rows)
    }

    /// Mean of the trees' leaf positive rates.
    pub fn predict_proba_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        let t = self.base_models.len() as f64;
        rows.iter()
            .map(|r| {
                let mut s = 0.0;
                for m in &self.base_models {
                    s += m.predict_proba(r)?;
                }
                Ok(s / t)
            })
            .collect()
    }

    /// The same model for data whose column `j` moved to `permutation[j]`.
    pub fn permute_features(&self, permutation: &[usize]) -> Result<EnsembleModel> {
        if permutation.len() != self.k {
            return Err(Error::Alignment { expected: self.k, found: permutation.len() });
        }
        let base_models = self
            .base_models
            .iter()
            .map(|m| m.remap_features(permutation, self.k))
            .collect::<Result<Vec<_>>>()?;
        let feature_subsets = self
            .feature_subsets
            .iter()
            .map(|s| {
                s.as_ref().map(|f| {
                    let mut v: Vec<usize> = f.iter().map(|&j| permutation[j]).collect();
                    v.sort_unstable();
                    v
                })
            })
            .collect();
        Ok(EnsembleModel { base_models, feature_subsets, ..self.clone() })
    }
}
