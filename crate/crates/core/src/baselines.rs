//! Cost-insensitive reference learners and the Bayes minimum risk decision
//! rule.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::combiners::sigmoid;
use crate::cost_model::{CostMatrixRow, CostedDataset};
use crate::csdt::{self, CsdtConfig, CsdtModel, Impurity};
use crate::ensemble::{self, CombinerConfig, EcsdtConfig, EnsembleModel};
use crate::error::{Error, Result};
use crate::inducers::{InducerConfig, InducerKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub iterations: usize,
    /// L2 strength on the slopes (the intercept is not penalized).
    pub l2: f64,
    /// z-score features before fitting.
    pub standardize: bool,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self { learning_rate: 0.5, iterations: 500, l2: 1e-4, standardize: true }
    }
}

/// Logistic regression on (optionally standardized) features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

fn standardizer(data: &CostedDataset, enabled: bool) -> (Vec<f64>, Vec<f64>) {
    let k = data.k();
    if !enabled {
        return (vec![0.0; k], vec![1.0; k]);
    }
    let n = data.len() as f64;
    let mut means = vec![0.0; k];
    for e in data.examples() {
        for (m, x) in means.iter_mut().zip(&e.features) {
            *m += x / n;
        }
    }
    let mut scales = vec![0.0; k];
    for e in data.examples() {
        for j in 0..k {
            scales[j] += { let d = e.features[j] - means[j]; d * d } / n;
        }
    }
    for s in &mut scales {
        *s = libm::sqrt(*s);
        if *s < 1e-12 {
            *s = 1.0;
        }
    }
    (means, scales)
}

/// Mean cross-entropy plus `l2/2 * |w|^2`, and its gradient. `params[0]` is
/// the intercept.
pub fn logistic_loss_and_gradient(params: &[f64], x: &[Vec<f64>], y: &[u8], l2: f64) -> (f64, Vec<f64>) {
    let n = x.len() as f64;
    let mut grad = vec![0.0; params.len()];
    let mut loss = 0.0;
    for (row, &label) in x.iter().zip(y) {
        let z = params[0] + row.iter().zip(&params[1..]).map(|(a, b)| a * b).sum::<f64>();
        // log(1 + e^z) - y z, evaluated without overflow
        let softplus = if z > 0.0 { z + libm::log1p(libm::exp(-z)) } else { libm::log1p(libm::exp(z)) };
        loss += (softplus - f64::from(label) * z) / n;
        let r = (sigmoid(z) - f64::from(label)) / n;
        grad[0] += r;
        for (g, v) in grad[1..].iter_mut().zip(row) {
            *g += r * v;
        }
    }
    for (g, w) in grad[1..].iter_mut().zip(&params[1..]) {
        loss += 0.5 * l2 * w * w;
        *g += l2 * w;
    }
    (loss, grad)
}

/// Full-batch proximal gradient descent: a gradient step on the
/// cross-entropy followed by the exact L2 shrinkage, which stays stable for
/// any penalty strength.
pub fn train_logistic(train: &CostedDataset, config: &LogisticConfig) -> Result<LogisticModel> {
    if !(config.learning_rate > 0.0 && config.l2 >= 0.0) {
        return Err(Error::Config("logistic: learning_rate must be positive and l2 non-negative".into()));
    }
    let (means, scales) = standardizer(train, config.standardize);
    let x: Vec<Vec<f64>> = train
        .examples()
        .iter()
        .map(|e| e.features.iter().enumerate().map(|(j, v)| (v - means[j]) / scales[j]).collect())
        .collect();
    let y = train.labels();
    let mut params = vec![0.0; train.k() + 1];
    for it in 0..config.iterations {
        let (loss, grad) = logistic_loss_and_gradient(&params, &x, &y, 0.0);
        if !loss.is_finite() {
            return Err(Error::Divergence(format!(
                "non-finite loss at iteration {it}; try a smaller learning rate"
            )));
        }
        let shrink = 1.0 / (1.0 + config.learning_rate * config.l2);
        params[0] -= config.learning_rate * grad[0];
        for (p, g) in params[1..].iter_mut().zip(&grad[1..]) {
            *p = (*p - config.learning_rate * g) * shrink;
        }
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::Divergence("non-finite weights; try a smaller learning rate".into()));
    }
    Ok(LogisticModel { intercept: params[0], weights: params[1..].to_vec(), means, scales })
}

impl LogisticModel {
    pub fn predict_proba(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.weights.len() {
            return Err(Error::Dimension { expected: self.weights.len(), found: features.len() });
        }
        let z = self.intercept
            + features
                .iter()
                .enumerate()
                .map(|(j, v)| self.weights[j] * (v - self.means[j]) / self.scales[j])
                .sum::<f64>();
        Ok(sigmoid(z))
    }

    pub fn predict_proba_dataset(&self, data: &CostedDataset) -> Result<Vec<f64>> {
        data.examples().iter().map(|e| self.predict_proba(&e.features)).collect()
    }
}

/// Maps raw scores to probabilities before the decision rule.
pub trait Calibrator {
    fn calibrate(&self, score: f64) -> f64;
}

/// Uses raw scores as probabilities.
#[derive(Debug, Clone, Copy, Default)]
pub struct Uncalibrated;

impl Calibrator for Uncalibrated {
    fn calibrate(&self, score: f64) -> f64 {
        score
    }
}

/// Bayes minimum risk: predict positive when its expected cost does not
/// exceed the expected cost of predicting negative.
pub fn bmr_predict(p_hat: f64, costs: &CostMatrixRow) -> u8 {
    let positive = p_hat * costs.c_tp + (1.0 - p_hat) * costs.c_fp;
    let negative = p_hat * costs.c_fn + (1.0 - p_hat) * costs.c_tn;
    u8::from(positive <= negative)
}

/// Probability above which [`bmr_predict`] chooses the positive class:
/// `(c_fp - c_tn) / ((c_fp - c_tn) + (c_fn - c_tp))`.
pub fn bmr_threshold(costs: &CostMatrixRow) -> f64 {
    let a = costs.c_fp - costs.c_tn;
    a / (a + costs.c_fn - costs.c_tp)
}

/// Applies [`bmr_predict`] row by row.
pub fn bmr_predict_dataset(p_hat: &[f64], data: &CostedDataset, calibrator: &dyn Calibrator) -> Result<Vec<u8>> {
    if p_hat.len() != data.len() {
        return Err(Error::Alignment { expected: data.len(), found: p_hat.len() });
    }
    Ok(p_hat
        .iter()
        .zip(data.examples())
        .map(|(&p, e)| bmr_predict(calibrator.calibrate(p).clamp(0.0, 1.0), &e.costs))
        .collect())
}

/// Tree settings for the cost-insensitive baselines.
pub fn gini_config(base: &CsdtConfig) -> CsdtConfig {
    CsdtConfig { impurity: Impurity::Gini, ..*base }
}

/// Cost-insensitive decision tree: Gini splits on unit costs, so leaves
/// predict the majority label.
pub fn gini_tree(train: &CostedDataset, config: &CsdtConfig) -> Result<CsdtModel> {
    csdt::grow(&train.with_uniform_costs(CostMatrixRow::unit()), &gini_config(config))
}

/// Cost-insensitive random forest: bootstrap samples, per-node feature
/// sampling, Gini trees on unit costs and majority voting. Any `T >= 1`.
pub fn plain_forest(train: &CostedDataset, n_trees: usize, tree: &CsdtConfig, seed: u64) -> Result<EnsembleModel> {
    let unit = train.with_uniform_costs(CostMatrixRow::unit());
    let config = EcsdtConfig {
        inducer: InducerConfig { kind: InducerKind::RandomForest, n_trees, n_examples: None, n_features: None, seed },
        tree: gini_config(tree),
        combiner: CombinerConfig::MajorityVote,
    };
    config.inducer.validate(unit.len(), unit.k())?;
    let bases = (0..n_trees)
        .map(|j| ensemble::train_base(&unit, &config.inducer, &config.tree, j))
        .collect::<Result<Vec<_>>>()?;
    ensemble::combine(&unit, &config, bases)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost_model::{AugmentedExample, Reasonableness};
    use crate::rng;
    use rand::Rng as _;

    fn separable(n: usize, seed: u64) -> CostedDataset {
        let mut r = rng::from_seed(seed);
        let ex = (0..n)
            .map(|_| {
                let a: f64 = r.random_range(-3.0..3.0);
                let b: f64 = r.random_range(-3.0..3.0);
                let y = u8::from(a + 0.5 * b > 0.2);
                AugmentedExample::new(vec![a, b], y, CostMatrixRow::unit())
            })
            .collect();
        CostedDataset::new(ex, Reasonableness::Strict).unwrap()
    }

    #[test]
    fn logistic_fits_separable_data() {
        let d = separable(400, 1);
        let m = train_logistic(&d, &LogisticConfig { iterations: 2000, ..Default::default() }).unwrap();
        let correct = d
            .examples()
            .iter()
            .filter(|e| u8::from(m.predict_proba(&e.features).unwrap() >= 0.5) == e.label)
            .count();
        assert!(correct as f64 / d.len() as f64 >= 0.99, "accuracy {}", correct as f64 / 400.0);
    }

    #[test]
    fn heavy_penalty_recovers_the_prior() {
        let d = separable(300, 2);
        let m = train_logistic(&d, &LogisticConfig { l2: 1e6, iterations: 3000, ..Default::default() }).unwrap();
        assert!(m.weights.iter().all(|w| w.abs() < 1e-4));
        let prior = d.class_counts().1 as f64 / d.len() as f64;
        assert!((m.predict_proba(&[0.0, 0.0]).unwrap() - prior).abs() < 1e-3);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut r = rng::from_seed(3);
        let x: Vec<Vec<f64>> = (0..30).map(|_| (0..3).map(|_| r.random_range(-2.0..2.0)).collect()).collect();
        let y: Vec<u8> = (0..30).map(|_| r.random_range(0..2u8)).collect();
        for _ in 0..10 {
            let p: Vec<f64> = (0..4).map(|_| r.random_range(-1.5..1.5)).collect();
            let (_, g) = logistic_loss_and_gradient(&p, &x, &y, 0.3);
            for i in 0..4 {
                let h = 1e-5;
                let mut up = p.clone();
                let mut dn = p.clone();
                up[i] += h;
                dn[i] -= h;
                let fd = (logistic_loss_and_gradient(&up, &x, &y, 0.3).0 - logistic_loss_and_gradient(&dn, &x, &y, 0.3).0) / (2.0 * h);
                assert!((fd - g[i]).abs() <= 1e-5, "param {i}: fd {fd} vs {}", g[i]);
            }
        }
    }

    #[test]
    fn bmr_examples() {
        let fraud = CostMatrixRow::new(3.0, 3.0, 100.0, 0.0);
        assert_eq!(bmr_predict(0.1, &fraud), 1);
        assert_eq!(bmr_predict(0.0, &fraud), 0);
        assert_eq!(bmr_predict(1.0, &fraud), 1);
        assert!((bmr_threshold(&fraud) - 3.0 / 100.0).abs() < 1e-15);
    }

    #[test]
    fn bmr_rule_matches_threshold_and_is_monotone() {
        let mut r = rng::from_seed(4);
        for _ in 0..2000 {
            let tp = r.random_range(0.0..5.0);
            let tn = r.random_range(0.0..5.0);
            let k = CostMatrixRow::new(tp, tn + r.random_range(0.01..50.0), tp + r.random_range(0.01..50.0), tn);
            let p: f64 = r.random();
            let q: f64 = r.random_range(p..=1.0);
            let star = bmr_threshold(&k);
            if (p - star).abs() > 1e-9 {
                assert_eq!(bmr_predict(p, &k), u8::from(p >= star));
            }
            if bmr_predict(p, &k) == 1 {
                assert_eq!(bmr_predict(q, &k), 1);
            }
        }
    }

    #[test]
    fn forest_with_one_tree_is_that_tree() {
        let d = separable(120, 5);
        let f = plain_forest(&d, 1, &CsdtConfig::default(), 9).unwrap();
        assert_eq!(f.n_trees(), 1);
        let tree_preds = f.base_models[0].predict_dataset(&d).unwrap();
        assert_eq!(f.predict_dataset(&d).unwrap(), tree_preds);
    }
}
