//! The `verify-theory` report.
//!
//! JSON object with:
//! - `params`: the simulation settings;
//! - `majority_correct`: the closed-form probability that a majority of
//!   `T` independent classifiers with accuracy `rho` is right, and a
//!   Monte-Carlo estimate with its standard error;
//! - `lemma`: per class, the mean base-classifier cost minus the
//!   majority-vote cost on single-class sets (positive when the ensemble is
//!   cheaper);
//! - `theorem`: ensemble savings minus mean base savings on mixed sets;
//! - `correlated`: the same savings difference when all base classifiers
//!   make identical errors, where no improvement is expected;
//! - `holds`: whether every independent-case mean is positive with
//!   `z > 3`.

use costforest_core::theory::{
    ensemble_correct_prob, monte_carlo_correct_prob, ErrorModel, LemmaReport, TheoremReport, TheoryParams,
};
use costforest_core::Result;
use serde::Serialize;

use crate::parallel;

/// Samples used for the Monte-Carlo majority probability.
pub const MAJORITY_SAMPLES: usize = 100_000;
/// z-score a mean difference must exceed to count as holding.
pub const Z_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, Serialize)]
pub struct MajorityCorrect {
    pub exact: f64,
    pub monte_carlo: f64,
    pub monte_carlo_se: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoryReport {
    pub params: TheoryParams,
    pub majority_correct: MajorityCorrect,
    pub lemma: LemmaReport,
    pub theorem: TheoremReport,
    pub correlated: TheoremReport,
    pub holds: bool,
}

pub fn run(params: &TheoryParams) -> Result<TheoryReport> {
    params.validate()?;
    let independent = TheoryParams { error_model: ErrorModel::Independent, ..*params };
    let exact = ensemble_correct_prob(params.n_trees, params.rho)?;
    let (mc, se) = monte_carlo_correct_prob(params.n_trees, params.rho, MAJORITY_SAMPLES, params.seed);
    let lemma = parallel::simulate_lemma1(&independent)?;
    let theorem = parallel::simulate_theorem1(&independent)?;
    let correlated = parallel::simulate_theorem1(&TheoryParams { error_model: ErrorModel::Identical, ..*params })?;
    let holds = [lemma.negatives, lemma.positives, theorem.savings]
        .iter()
        .all(|s| s.mean > 0.0 && s.z_score() > Z_THRESHOLD);
    Ok(TheoryReport {
        params: independent,
        majority_correct: MajorityCorrect { exact, monte_carlo: mc, monte_carlo_se: se, samples: MAJORITY_SAMPLES },
        lemma,
        theorem,
        correlated,
        holds,
    })
}
