//! Synthetic fraud-style data: two overlapping Gaussian classes with
//! lognormal transaction amounts and fraud costs built from them.
//!
//! Feature 0 is the log amount; the remaining `k - 1` features are
//! standard normal, with the positive class shifted by `separation` on the
//! first `informative` of them. Amounts are redrawn until they exceed the
//! administrative cost, so every row satisfies strict reasonableness.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cost_builders::{build_fraud_costs, FraudCostParams};
use crate::cost_model::{AugmentedExample, CostedDataset, Reasonableness};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    /// Total feature count including the log amount.
    pub k: usize,
    pub positive_rate: f64,
    pub informative: usize,
    pub separation: f64,
    /// Location and scale of `ln(amount)` for negatives.
    pub log_amount_mean: f64,
    pub log_amount_sd: f64,
    /// Added to the log-amount mean of positives.
    pub positive_amount_shift: f64,
    pub admin_cost: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n: 4000,
            k: 10,
            positive_rate: 0.05,
            informative: 9,
            separation: 0.8,
            log_amount_mean: 4.0,
            log_amount_sd: 1.2,
            positive_amount_shift: 0.5,
            admin_cost: 10.0,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 {
            return Err(Error::Config("synthetic data needs n >= 1 and k >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.positive_rate) {
            return Err(Error::Config(format!("positive_rate {} is outside [0, 1]", self.positive_rate)));
        }
        if !(self.admin_cost >= 0.0 && self.log_amount_sd >= 0.0) {
            return Err(Error::Config("admin_cost and log_amount_sd must be non-negative".into()));
        }
        Ok(())
    }
}

/// Draws the dataset described by `spec`.
pub fn fraud_dataset(spec: &SyntheticSpec) -> Result<CostedDataset> {
    spec.validate()?;
    let mut r = rng::stream(spec.seed, 0);
    let mut labels = Vec::with_capacity(spec.n);
    let mut features = Vec::with_capacity(spec.n);
    let mut amounts = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let y = u8::from(r.random::<f64>() < spec.positive_rate);
        let mu = spec.log_amount_mean + if y == 1 { spec.positive_amount_shift } else { 0.0 };
        let amount = loop {
            let z: f64 = StandardNormal.sample(&mut r);
            let a = libm::exp(mu + spec.log_amount_sd * z);
            if a > spec.admin_cost {
                break a;
            }
        };
        let mut x = Vec::with_capacity(spec.k);
        x.push(libm::log(amount));
        for j in 1..spec.k {
            let z: f64 = StandardNormal.sample(&mut r);
            let shift = if y == 1 && j <= spec.informative { spec.separation } else { 0.0 };
            x.push(z + shift);
        }
        labels.push(y);
        features.push(x);
        amounts.push(amount);
    }
    let costs = build_fraud_costs(&amounts, &FraudCostParams { admin_cost: spec.admin_cost }, Reasonableness::Strict)?;
    let examples = features
        .into_iter()
        .zip(labels)
        .zip(costs.rows)
        .map(|((x, y), c)| AugmentedExample::new(x, y, c))
        .collect();
    CostedDataset::new(examples, Reasonableness::Strict)
}
