//! Combining base-classifier votes: majority voting, weighted voting
//! (savings- or accuracy-based weights) and cost-sensitive stacking.
//!
//! Votes are a `T x N` matrix: one row of hard `{0, 1}` predictions per
//! base classifier.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cost_model::CostedDataset;
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

/// Columns per row; fails on an empty or ragged matrix.
fn matrix_width(votes: &[Vec<u8>]) -> Result<usize> {
    let n = votes.first().ok_or_else(|| Error::Config("no base classifier votes".into()))?.len();
    if let Some(bad) = votes.iter().find(|r| r.len() != n) {
        return Err(Error::Alignment { expected: n, found: bad.len() });
    }
    Ok(n)
}

/// Per-column majority; ties go to 0.
pub fn majority_vote(votes: &[Vec<u8>]) -> Result<Vec<u8>> {
    let n = matrix_width(votes)?;
    Ok((0..n)
        .map(|i| {
            let ones = votes.iter().filter(|r| r[i] == 1).count();
            u8::from(2 * ones > votes.len())
        })
        .collect())
}

/// Non-negative classifier weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    alphas: Vec<f64>,
}

impl WeightVector {
    pub fn uniform(t: usize) -> Self {
        Self { alphas: vec![1.0 / t as f64; t] }
    }

    /// Normalizes non-negative scores; falls back to uniform when they sum
    /// to zero.
    pub fn from_scores(scores: &[f64]) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::Weight("no classifiers to weight".into()));
        }
        if let Some(bad) = scores.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(Error::Weight(format!("weights must be finite and non-negative, got {bad}")));
        }
        let total: f64 = scores.iter().sum();
        if total <= 0.0 {
            return Ok(Self::uniform(scores.len()));
        }
        Ok(Self { alphas: scores.iter().map(|s| s / total).collect() })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }
}

/// Weights proportional to out-of-bag savings. Negative (or undefined,
/// passed as NaN) savings count as zero; if nothing is left the weights
/// are uniform.
pub fn savings_weights(oob_savings: &[f64]) -> Result<WeightVector> {
    let clamped: Vec<f64> = oob_savings
        .iter()
        .map(|&s| if s.is_finite() && s > 0.0 { s } else { 0.0 })
        .collect();
    WeightVector::from_scores(&clamped)
}

/// Weights proportional to `1 - error` on the out-of-bag sets.
pub fn accuracy_weights(oob_errors: &[f64]) -> Result<WeightVector> {
    if let Some(bad) = oob_errors.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(Error::Weight(format!("error rates must lie in [0, 1], got {bad}")));
    }
    let scores: Vec<f64> = oob_errors.iter().map(|e| 1.0 - e).collect();
    WeightVector::from_scores(&scores)
}

/// `argmax_c sum_j alpha_j 1{vote_j = c}`; ties go to 0. `weights` need
/// not be normalized.
pub fn weighted_vote(votes: &[Vec<u8>], weights: &[f64]) -> Result<Vec<u8>> {
    let n = matrix_width(votes)?;
    if weights.len() != votes.len() {
        return Err(Error::Alignment { expected: votes.len(), found: weights.len() });
    }
    Ok((0..n)
        .map(|i| {
            let (mut s0, mut s1) = (0.0, 0.0);
            for (row, &w) in votes.iter().zip(weights) {
                if row[i] == 1 {
                    s1 += w;
                } else {
                    s0 += w;
                }
            }
            u8::from(s1 > s0)
        })
        .collect())
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-z))
}

/// Second-level logistic combiner `g(beta_0 + sum_j beta_j vote_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackingWeights {
    pub betas: Vec<f64>,
    pub intercept: f64,
    pub threshold: f64,
}

impl StackingWeights {
    pub fn zeros(t: usize) -> Self {
        Self { betas: vec![0.0; t], intercept: 0.0, threshold: 0.5 }
    }

    fn logit(&self, votes: &[Vec<u8>], i: usize) -> f64 {
        self.intercept
            + votes
                .iter()
                .zip(&self.betas)
                .filter(|(r, _)| r[i] == 1)
                .map(|(_, b)| b)
                .sum::<f64>()
    }
}

fn check_stacking(votes: &[Vec<u8>], weights: &StackingWeights) -> Result<usize> {
    let n = matrix_width(votes)?;
    if weights.betas.len() != votes.len() {
        return Err(Error::Alignment { expected: votes.len(), found: weights.betas.len() });
    }
    Ok(n)
}

/// Combined score `f_s` per example.
pub fn stacking_scores(votes: &[Vec<u8>], weights: &StackingWeights) -> Result<Vec<f64>> {
    let n = check_stacking(votes, weights)?;
    Ok((0..n).map(|i| sigmoid(weights.logit(votes, i))).collect())
}

/// Expected-cost objective of the stacking combiner:
/// `sum_i y_i (f_i (C_TP - C_FN) + C_FN) + (1 - y_i)(f_i (C_FP - C_TN) + C_TN)`.
pub fn stacking_cost(dataset: &CostedDataset, votes: &[Vec<u8>], weights: &StackingWeights) -> Result<f64> {
    let scores = stacking_scores(votes, weights)?;
    if scores.len() != dataset.len() {
        return Err(Error::Alignment { expected: dataset.len(), found: scores.len() });
    }
    Ok(dataset
        .examples()
        .iter()
        .zip(&scores)
        .map(|(e, &f)| {
            let k = &e.costs;
            let y = f64::from(e.label);
            y * (f * (k.c_tp - k.c_fn) + k.c_fn) + (1.0 - y) * (f * (k.c_fp - k.c_tn) + k.c_tn)
        })
        .sum())
}

/// `1` where `f_s >= threshold`.
pub fn stacking_predict(votes: &[Vec<u8>], weights: &StackingWeights) -> Result<Vec<u8>> {
    Ok(stacking_scores(votes, weights)?
        .into_iter()
        .map(|f| u8::from(f >= weights.threshold))
        .collect())
}

/// Real-coded genetic algorithm settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub mutation_sigma: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub elitism: usize,
    pub tournament: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 64,
            generations: 200,
            crossover_rate: 0.8,
            mutation_rate: 0.1,
            mutation_sigma: 0.5,
            beta_min: -20.0,
            beta_max: 20.0,
            elitism: 2,
            tournament: 3,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::Config(format!("combiner.ga: {m}")));
        if self.population < 4 {
            return err("population must be at least 4");
        }
        if !(self.beta_min.is_finite() && self.beta_max.is_finite() && self.beta_min < self.beta_max) {
            return err("beta bounds must be finite with beta_min < beta_max");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) || !(0.0..=1.0).contains(&self.mutation_rate) {
            return err("rates must lie in [0, 1]");
        }
        if !(self.mutation_sigma.is_finite() && self.mutation_sigma > 0.0) {
            return err("mutation_sigma must be positive");
        }
        if self.elitism >= self.population {
            return err("elitism must be smaller than the population");
        }
        if self.tournament == 0 {
            return err("tournament size must be positive");
        }
        Ok(())
    }
}

/// Result of [`fit_stacking`]: the best weights seen and the best
/// objective after the initial population and after every generation.
#[derive(Debug, Clone, PartialEq)]
pub struct StackingFit {
    pub weights: StackingWeights,
    pub best_cost: f64,
    pub trace: Vec<f64>,
}

/// The stacking objective with examples grouped by vote pattern:
/// `J = constant + sum_g slope_g * sigmoid(beta_0 + sum_{j in active_g} beta_j)`.
struct GroupedObjective {
    constant: f64,
    groups: Vec<(Vec<usize>, f64)>,
}

impl GroupedObjective {
    fn new(dataset: &CostedDataset, votes: &[Vec<u8>]) -> Result<Self> {
        let n = matrix_width(votes)?;
        if n != dataset.len() {
            return Err(Error::Alignment { expected: dataset.len(), found: n });
        }
        let mut constant = 0.0;
        let mut by_pattern: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (i, e) in dataset.examples().iter().enumerate() {
            let k = &e.costs;
            let (slope, offset) = if e.label == 1 { (k.c_tp - k.c_fn, k.c_fn) } else { (k.c_fp - k.c_tn, k.c_tn) };
            constant += offset;
            let active: Vec<usize> = (0..votes.len()).filter(|&j| votes[j][i] == 1).collect();
            *by_pattern.entry(active).or_insert(0.0) += slope;
        }
        Ok(Self { constant, groups: by_pattern.into_iter().collect() })
    }

    /// `genome[0]` is the intercept.
    fn eval(&self, genome: &[f64]) -> f64 {
        self.constant
            + self
                .groups
                .iter()
                .map(|(active, slope)| {
                    let z = genome[0] + active.iter().map(|&j| genome[j + 1]).sum::<f64>();
                    slope * sigmoid(z)
                })
                .sum::<f64>()
    }
}

/// Minimizes [`stacking_cost`] over `(beta_0, beta)` with a real-coded GA:
/// tournament selection, uniform crossover, per-gene Gaussian mutation,
/// elitism and box bounds. The initial population holds the zero vector,
/// the uniform vector (`beta_j = 1/T`, `beta_0 = -0.5`) and random
/// individuals. Returns the best individual ever evaluated.
pub fn fit_stacking(dataset: &CostedDataset, votes: &[Vec<u8>], ga: &GaConfig) -> Result<StackingFit> {
    ga.validate()?;
    let objective = GroupedObjective::new(dataset, votes)?;
    let t = votes.len();
    let dim = t + 1;
    let (lo, hi) = (ga.beta_min, ga.beta_max);
    let clip = |v: f64| v.clamp(lo, hi);
    let mut rng = rng::stream(ga.seed, 0);
    let noise = Normal::new(0.0, ga.mutation_sigma).map_err(|e| Error::Config(format!("{e}")))?;

    let mut population: Vec<Vec<f64>> = Vec::with_capacity(ga.population);
    population.push(vec![clip(0.0); dim]);
    let mut uniform = vec![clip(1.0 / t as f64); dim];
    uniform[0] = clip(-0.5);
    population.push(uniform);
    while population.len() < ga.population {
        population.push((0..dim).map(|_| rng.random_range(lo..=hi)).collect());
    }
    let mut fitness: Vec<f64> = population.iter().map(|g| objective.eval(g)).collect();

    let mut best = best_of(&fitness);
    let mut best_genome = population[best].clone();
    let mut best_cost = fitness[best];
    let mut trace = Vec::with_capacity(ga.generations + 1);
    trace.push(best_cost);

    for _ in 0..ga.generations {
        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]));
        let mut next: Vec<Vec<f64>> = order[..ga.elitism].iter().map(|&i| population[i].clone()).collect();
        let mut next_fit: Vec<f64> = order[..ga.elitism].iter().map(|&i| fitness[i]).collect();
        while next.len() < ga.population {
            let a = tournament(&fitness, ga.tournament, &mut rng);
            let b = tournament(&fitness, ga.tournament, &mut rng);
            let crossover = rng.random::<f64>() < ga.crossover_rate;
            let mut child: Vec<f64> = (0..dim)
                .map(|g| {
                    if crossover && rng.random::<bool>() {
                        population[b][g]
                    } else {
                        population[a][g]
                    }
                })
                .collect();
            for gene in &mut child {
                if rng.random::<f64>() < ga.mutation_rate {
                    *gene = clip(*gene + noise.sample(&mut rng));
                }
            }
            next_fit.push(objective.eval(&child));
            next.push(child);
        }
        population = next;
        fitness = next_fit;
        best = best_of(&fitness);
        if fitness[best] < best_cost {
            best_cost = fitness[best];
            best_genome = population[best].clone();
        }
        trace.push(best_cost);
    }

    let weights = StackingWeights { intercept: best_genome[0], betas: best_genome[1..].to_vec(), threshold: 0.5 };
    Ok(StackingFit { weights, best_cost, trace })
}

fn best_of(fitness: &[f64]) -> usize {
    let mut best = 0;
    for (i, f) in fitness.iter().enumerate() {
        if *f < fitness[best] {
            best = i;
        }
    }
    best
}

fn tournament(fitness: &[f64], size: usize, rng: &mut Rng) -> usize {
    let mut winner = rng.random_range(0..fitness.len());
    for _ in 1..size {
        let c = rng.random_range(0..fitness.len());
        if fitness[c] < fitness[winner] {
            winner = c;
        }
    }
    winner
}
