//! Random inducers: the per-tree training subsets of bagging, pasting,
//! random forests and random patches.
//!
//! Tree `j` draws from substream `j` of the configured seed, so the first
//! `T` samples do not depend on how many trees are requested in total.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InducerKind {
    Bagging,
    Pasting,
    RandomForest,
    RandomPatches,
}

impl InducerKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bagging" => Some(Self::Bagging),
            "pasting" => Some(Self::Pasting),
            "random_forest" | "random-forest" => Some(Self::RandomForest),
            "random_patches" | "random-patches" => Some(Self::RandomPatches),
            _ => None,
        }
    }
}

/// An absolute count or a fraction of the available total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeSpec {
    Count(usize),
    Fraction(f64),
}

impl SizeSpec {
    pub fn resolve(&self, total: usize) -> usize {
        match *self {
            Self::Count(c) => c,
            Self::Fraction(f) => libm::floor(f * total as f64 + 1e-9) as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InducerConfig {
    pub kind: InducerKind,
    /// Number of base classifiers `T`.
    pub n_trees: usize,
    /// Examples per tree `N_e`; `N` for bagging and random forests and
    /// `N/2` for pasting and patches when unset.
    pub n_examples: Option<SizeSpec>,
    /// Features per node (random forests, default `floor(sqrt(k))`) or per
    /// tree (patches, default `k/2`).
    pub n_features: Option<SizeSpec>,
    pub seed: u64,
}

impl Default for InducerConfig {
    fn default() -> Self {
        Self { kind: InducerKind::Bagging, n_trees: 100, n_examples: None, n_features: None, seed: 0 }
    }
}

impl InducerConfig {
    pub fn examples_per_tree(&self, n: usize) -> usize {
        match (self.n_examples, self.kind) {
            (Some(s), _) => s.resolve(n),
            (None, InducerKind::Bagging | InducerKind::RandomForest) => n,
            (None, InducerKind::Pasting | InducerKind::RandomPatches) => n / 2,
        }
        .max(1)
    }

    pub fn features_per_draw(&self, k: usize) -> usize {
        match (self.n_features, self.kind) {
            (Some(s), _) => s.resolve(k),
            (None, InducerKind::RandomPatches) => k / 2,
            (None, _) => libm::floor(libm::sqrt(k as f64)) as usize,
        }
        .max(1)
    }

    /// Checks the sizes against a dataset of `n` rows and `k` features.
    pub fn validate(&self, n: usize, k: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("inducer.T must be positive".into()));
        }
        if n == 0 || k == 0 {
            return Err(Error::Config("inducer needs at least one row and one feature".into()));
        }
        if let Some(SizeSpec::Fraction(f)) = self.n_examples {
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::Config(format!("inducer.n_examples fraction must be positive, got {f}")));
            }
        }
        if let Some(SizeSpec::Fraction(f)) = self.n_features {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::Config(format!("inducer.n_features fraction must lie in (0, 1], got {f}")));
            }
        }
        if self.kind == InducerKind::Pasting && self.examples_per_tree(n) > n {
            return Err(Error::Config(format!(
                "pasting draws without replacement: n_examples {} exceeds {n} rows",
                self.examples_per_tree(n)
            )));
        }
        if matches!(self.kind, InducerKind::RandomForest | InducerKind::RandomPatches)
            && self.features_per_draw(k) > k
        {
            return Err(Error::Config(format!(
                "n_features {} exceeds {k} features",
                self.features_per_draw(k)
            )));
        }
        Ok(())
    }
}

/// The training subset of one base classifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseSample {
    /// Drawn rows, with repeats when sampling with replacement.
    pub example_indices: Vec<usize>,
    /// Distinct features exposed to the tree (patches only).
    pub feature_indices: Option<Vec<usize>>,
    /// Features sampled at every node (random forests only).
    pub per_node_features: Option<usize>,
    /// Seed of the per-node feature stream.
    pub node_seed: u64,
    /// Rows not drawn.
    pub oob_indices: Vec<usize>,
}

/// Draws the sample of tree `j`.
pub fn draw_sample(n: usize, k: usize, config: &InducerConfig, j: usize) -> Result<BaseSample> {
    config.validate(n, k)?;
    let tree_seed = rng::substream(config.seed, j as u64);
    let mut rng = rng::stream(tree_seed, 0);
    let ne = config.examples_per_tree(n);
    let example_indices: Vec<usize> = match config.kind {
        InducerKind::Pasting => {
            let mut v = index::sample(&mut rng, n, ne).into_vec();
            v.sort_unstable();
            v
        }
        _ => (0..ne).map(|_| rng.random_range(0..n)).collect(),
    };
    let feature_indices = (config.kind == InducerKind::RandomPatches).then(|| {
        let nf = config.features_per_draw(k);
        let mut f: Vec<usize> = (0..nf).map(|_| rng.random_range(0..k)).collect();
        f.sort_unstable();
        f.dedup();
        f
    });
    let per_node_features = (config.kind == InducerKind::RandomForest).then(|| config.features_per_draw(k));
    let mut drawn = vec![false; n];
    for &i in &example_indices {
        drawn[i] = true;
    }
    let oob_indices = (0..n).filter(|&i| !drawn[i]).collect();
    Ok(BaseSample {
        example_indices,
        feature_indices,
        per_node_features,
        node_seed: rng::substream(tree_seed, 1),
        oob_indices,
    })
}

/// Draws all `T` samples.
pub fn draw_samples(n: usize, k: usize, config: &InducerConfig) -> Result<Vec<BaseSample>> {
    (0..config.n_trees).map(|j| draw_sample(n, k, config, j)).collect()
}

/// Uniform subset of `n_features` out of `0..k`, without replacement,
/// ascending.
pub fn node_feature_subset(k: usize, n_features: usize, rng: &mut Rng) -> Result<Vec<usize>> {
    if n_features == 0 || n_features > k {
        return Err(Error::Config(format!("cannot draw {n_features} of {k} features")));
    }
    if n_features == k {
        return Ok((0..k).collect());
    }
    let mut v = index::sample(rng, k, n_features).into_vec();
    v.sort_unstable();
    Ok(v)
}
