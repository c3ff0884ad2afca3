//! Majority-vote correctness probability and Monte-Carlo checks of the
//! ensemble cost and savings bounds.
//!
//! Simulated base classifiers are correct on each example independently
//! with probability `rho`, unless [`ErrorModel::Identical`] is chosen, in
//! which case all of them share one draw per example.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::cost_model::CostMatrixRow;
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

/// Probability that a strict majority of `t` independent classifiers, each
/// correct with probability `rho`, is correct:
/// `sum_{j > t/2} C(t, j) rho^j (1 - rho)^(t - j)`.
///
/// Terms are built in the log domain from the ratio of consecutive binomial
/// terms and normalized by their total, so large `t` neither overflows nor
/// loses the tail. The bound `P_c >= rho` for `rho >= 0.5` needs odd `t`;
/// with even `t` a tied vote counts as wrong.
pub fn ensemble_correct_prob(t: usize, rho: f64) -> Result<f64> {
    if t < 3 {
        return Err(Error::Config(format!("the binomial bound needs T >= 3, got {t}")));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Config(format!("rho must lie in [0, 1], got {rho}")));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    if rho == 1.0 {
        return Ok(1.0);
    }
    if rho == 0.5 && t % 2 == 1 {
        return Ok(0.5);
    }
    let odds = libm::log(rho) - libm::log1p(-rho);
    let mode = (libm::floor((t as f64 + 1.0) * rho) as usize).min(t);
    let mut log_w = alloc::vec![0.0f64; t + 1];
    for j in mode..t {
        log_w[j + 1] = log_w[j] + libm::log((t - j) as f64 / (j + 1) as f64) + odds;
    }
    for j in (1..=mode).rev() {
        log_w[j - 1] = log_w[j] - libm::log((t - j + 1) as f64 / j as f64) - odds;
    }
    let (mut upper, mut lower) = (0.0, 0.0);
    for (j, lw) in log_w.iter().enumerate() {
        let w = libm::exp(*lw);
        if 2 * j > t {
            upper += w;
        } else {
            lower += w;
        }
    }
    Ok(upper / (upper + lower))
}

/// Fraction of `samples` simulated votes in which a strict majority of `t`
/// classifiers was correct, with its standard error.
pub fn monte_carlo_correct_prob(t: usize, rho: f64, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = rng::stream(seed, 0);
    let hits = (0..samples)
        .filter(|_| {
            let correct = (0..t).filter(|_| rng.random::<f64>() < rho).count();
            2 * correct > t
        })
        .count();
    let p = hits as f64 / samples as f64;
    (p, libm::sqrt(p * (1.0 - p) / samples as f64))
}

/// Random cost matrices satisfying strict reasonableness: correct-decision
/// costs uniform on `[0, max_correct]`, error costs exceeding them by a
/// margin uniform on `[min_margin, max_margin]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostGenerator {
    pub max_correct: f64,
    pub min_margin: f64,
    pub max_margin: f64,
}

impl Default for CostGenerator {
    fn default() -> Self {
        Self { max_correct: 5.0, min_margin: 0.1, max_margin: 100.0 }
    }
}

impl CostGenerator {
    pub fn draw(&self, rng: &mut Rng) -> CostMatrixRow {
        let c_tp = rng.random_range(0.0..=self.max_correct);
        let c_tn = rng.random_range(0.0..=self.max_correct);
        let c_fp = c_tn + rng.random_range(self.min_margin..=self.max_margin);
        let c_fn = c_tp + rng.random_range(self.min_margin..=self.max_margin);
        CostMatrixRow::new(c_tp, c_fp, c_fn, c_tn)
    }

    fn validate(&self) -> Result<()> {
        if !(self.max_correct >= 0.0 && self.min_margin > 0.0 && self.max_margin >= self.min_margin)
            || !self.max_margin.is_finite()
        {
            return Err(Error::Config("cost generator needs 0 < min_margin <= max_margin".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorModel {
    /// Every classifier errs independently.
    #[default]
    Independent,
    /// All classifiers make the same error on each example.
    Identical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    pub n_trees: usize,
    pub rho: f64,
    pub n_examples: usize,
    pub n_trials: usize,
    pub seed: u64,
    pub costs: CostGenerator,
    /// Share of positives in the mixed-class simulation.
    pub positive_rate: f64,
    pub error_model: ErrorModel,
}

impl Default for TheoryParams {
    fn default() -> Self {
        Self {
            n_trees: 11,
            rho: 0.7,
            n_examples: 500,
            n_trials: 1000,
            seed: 0,
            costs: CostGenerator::default(),
            positive_rate: 0.5,
            error_model: ErrorModel::Independent,
        }
    }
}

impl TheoryParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees < 3 || self.n_trees.is_multiple_of(2) {
            return Err(Error::Config(format!("T must be odd and at least 3, got {}", self.n_trees)));
        }
        if !(0.5..=1.0).contains(&self.rho) {
            return Err(Error::Config(format!("rho must lie in [0.5, 1], got {}", self.rho)));
        }
        if self.n_examples == 0 || self.n_trials == 0 {
            return Err(Error::Config("n_examples and n_trials must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.positive_rate) {
            return Err(Error::Config("positive_rate must lie in [0, 1]".into()));
        }
        self.costs.validate()
    }
}

/// Summary of per-trial differences `average base value - ensemble value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifferenceSummary {
    pub mean: f64,
    pub std_error: f64,
    /// Trials in which the ensemble was at least as good as the average
    /// base classifier.
    pub fraction_held: f64,
    pub trials: usize,
}

impl DifferenceSummary {
    pub fn from_differences(diffs: &[f64]) -> Self {
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let var = if diffs.len() > 1 {
            diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_error: libm::sqrt(var / n),
            fraction_held: diffs.iter().filter(|d| **d >= 0.0).count() as f64 / n,
            trials: diffs.len(),
        }
    }

    /// How many standard errors the mean lies above zero.
    pub fn z_score(&self) -> f64 {
        if self.std_error > 0.0 {
            self.mean / self.std_error
        } else if self.mean > 0.0 {
            f64::INFINITY
        } else if self.mean < 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    /// Cost differences on the negative-only sets.
    pub negatives: DifferenceSummary,
    /// Cost differences on the positive-only sets.
    pub positives: DifferenceSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    /// `Savings(H) - mean_j Savings(M_j)` per trial.
    pub savings: DifferenceSummary,
}

/// Ensemble cost and mean base cost of one example.
fn simulate_example(costs: &CostMatrixRow, label: u8, params: &TheoryParams, rng: &mut Rng) -> (f64, f64) {
    let t = params.n_trees;
    let correct = match params.error_model {
        ErrorModel::Independent => (0..t).filter(|_| rng.random::<f64>() < params.rho).count(),
        ErrorModel::Identical => {
            if rng.random::<f64>() < params.rho {
                t
            } else {
                0
            }
        }
    };
    let right = costs.cost(label, label);
    let wrong = costs.cost(label, 1 - label);
    let ensemble = if 2 * correct > t { right } else { wrong };
    // exact at both ends, so a unanimous ensemble matches its members bit for bit
    let share = correct as f64 / t as f64;
    let rest = (t - correct) as f64 / t as f64;
    (ensemble, share * right + rest * wrong)
}

/// Mean base-classifier cost minus majority-vote cost on one single-class
/// set `S_a` of trial `trial`.
pub fn lemma1_trial(params: &TheoryParams, class: u8, trial: usize) -> f64 {
    let mut rng = rng::stream(rng::substream(params.seed, u64::from(class)), trial as u64);
    let (mut ens, mut avg) = (0.0, 0.0);
    for _ in 0..params.n_examples {
        let c = params.costs.draw(&mut rng);
        let (e, a) = simulate_example(&c, class, params, &mut rng);
        ens += e;
        avg += a;
    }
    avg - ens
}

/// Per class `a`, the difference between the mean base-classifier cost and
/// the majority-vote cost on single-class sets `S_a`.
pub fn simulate_lemma1(params: &TheoryParams) -> Result<LemmaReport> {
    params.validate()?;
    let summary = |class: u8| {
        let diffs: Vec<f64> = (0..params.n_trials).map(|t| lemma1_trial(params, class, t)).collect();
        DifferenceSummary::from_differences(&diffs)
    };
    Ok(LemmaReport { negatives: summary(0), positives: summary(1) })
}

/// `Savings(H) - mean_j Savings(M_j)` on one mixed-class set. Both savings
/// share the costless-class cost, so the difference is
/// `(mean_j Cost(M_j) - Cost(H)) / Cost_l`.
pub fn theorem1_trial(params: &TheoryParams, trial: usize) -> Result<f64> {
    let mut rng = rng::stream(rng::substream(params.seed, 2), trial as u64);
    let (mut ens, mut avg, mut f0, mut f1) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..params.n_examples {
        let c = params.costs.draw(&mut rng);
        let label = u8::from(rng.random::<f64>() < params.positive_rate);
        f0 += c.cost(label, 0);
        f1 += c.cost(label, 1);
        let (e, a) = simulate_example(&c, label, params, &mut rng);
        ens += e;
        avg += a;
    }
    let base = f0.min(f1);
    if base <= 0.0 {
        return Err(Error::UndefinedSavings);
    }
    Ok((avg - ens) / base)
}

/// Savings differences over all trials on mixed-class sets.
pub fn simulate_theorem1(params: &TheoryParams) -> Result<TheoremReport> {
    params.validate()?;
    let diffs = (0..params.n_trials)
        .map(|t| theorem1_trial(params, t))
        .collect::<Result<Vec<f64>>>()?;
    Ok(TheoremReport { savings: DifferenceSummary::from_differences(&diffs) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_examples() {
        assert!((ensemble_correct_prob(3, 0.6).unwrap() - 0.648).abs() < 1e-12);
        for t in [3, 5, 11, 101, 1001] {
            assert_eq!(ensemble_correct_prob(t, 0.5).unwrap(), 0.5);
        }
        assert!(ensemble_correct_prob(10_001, 0.7).unwrap() >= 1.0 - 1e-12);
        assert!(ensemble_correct_prob(10_001, 0.3).unwrap() <= 1e-12);
        assert!(ensemble_correct_prob(2, 0.6).is_err());
        assert!(ensemble_correct_prob(3, 1.2).is_err());
        // even T: a 2-2 tie is not a correct majority
        assert!((ensemble_correct_prob(4, 0.5).unwrap() - 5.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn binomial_matches_direct_sum() {
        for t in [3usize, 4, 7, 12, 25] {
            for rho in [0.1, 0.35, 0.5, 0.62, 0.9] {
                let mut direct = 0.0;
                for j in (t / 2 + 1)..=t {
                    let mut c = 1.0;
                    for i in 0..j {
                        c = c * (t - i) as f64 / (i + 1) as f64;
                    }
                    direct += c * libm::pow(rho, j as f64) * libm::pow(1.0 - rho, (t - j) as f64);
                }
                assert!((ensemble_correct_prob(t, rho).unwrap() - direct).abs() < 1e-12, "t={t} rho={rho}");
            }
        }
    }

    #[test]
    fn lemma_with_perfect_classifiers_is_tight() {
        let p = TheoryParams { rho: 1.0, n_examples: 50, n_trials: 20, ..Default::default() };
        let r = simulate_lemma1(&p).unwrap();
        assert_eq!((r.negatives.mean, r.positives.mean), (0.0, 0.0));
        assert_eq!(simulate_theorem1(&p).unwrap().savings.mean, 0.0);
    }

    #[test]
    fn identical_errors_give_no_benefit() {
        let p = TheoryParams { error_model: ErrorModel::Identical, n_examples: 80, n_trials: 50, ..Default::default() };
        let r = simulate_theorem1(&p).unwrap();
        assert_eq!(r.savings.mean, 0.0);
        assert_eq!(r.savings.fraction_held, 1.0);
    }

    #[test]
    fn lemma_at_one_half_is_an_equality_in_expectation() {
        let p = TheoryParams { rho: 0.5, n_examples: 200, n_trials: 400, ..Default::default() };
        let r = simulate_lemma1(&p).unwrap();
        assert!(r.negatives.z_score().abs() < 3.0);
        assert!(r.positives.z_score().abs() < 3.0);
    }

    #[test]
    fn lemma_holds_for_better_than_chance_classifiers() {
        let p = TheoryParams { n_trials: 200, ..Default::default() };
        let r = simulate_lemma1(&p).unwrap();
        assert!(r.negatives.z_score() > 3.0 && r.positives.z_score() > 3.0);
    }

    #[test]
    fn invalid_params() {
        assert!(simulate_lemma1(&TheoryParams { n_trees: 4, ..Default::default() }).is_err());
        assert!(simulate_lemma1(&TheoryParams { rho: 0.4, ..Default::default() }).is_err());
    }
}
