//! Thread-pool versions of the sequential runners in the core crate.
//!
//! Every unit of work draws from its own seeded substream and results are
//! collected in index order, so output does not depend on the number of
//! threads.

use costforest_core::ensemble::{combine, train_base, EcsdtConfig, EnsembleModel};
use costforest_core::evaluation::{assemble_report, repetition_seed, run_repetition, EvaluationReport, ExperimentSpec};
use costforest_core::theory::{lemma1_trial, theorem1_trial, DifferenceSummary, LemmaReport, TheoremReport, TheoryParams};
use costforest_core::{CostedDataset, Result};
use rayon::prelude::*;

/// Pool with `jobs` threads, or rayon's default when `jobs` is 0.
pub fn pool(jobs: usize) -> std::result::Result<rayon::ThreadPool, rayon::ThreadPoolBuildError> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs).build()
}

/// Grows the base trees in parallel and fits the combiner.
pub fn train_ensemble(train: &CostedDataset, config: &EcsdtConfig) -> Result<EnsembleModel> {
    config.validate(train.len(), train.k())?;
    let bases = (0..config.inducer.n_trees)
        .into_par_iter()
        .map(|j| train_base(train, &config.inducer, &config.tree, j))
        .collect::<Result<Vec<_>>>()?;
    combine(train, config, bases)
}

/// Runs all (algorithm, dataset, repetition) cells in parallel.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<EvaluationReport> {
    spec.validate()?;
    let (a, d, r) = (spec.algorithms.len(), spec.datasets.len(), spec.repetitions);
    let flat: Vec<_> = (0..a * d * r)
        .into_par_iter()
        .map(|i| {
            let (ai, di, ri) = (i / (d * r), (i / r) % d, i % r);
            run_repetition(
                &spec.algorithms[ai],
                &spec.datasets[di].bundle,
                &spec.settings,
                repetition_seed(spec.seed, di, ri),
            )
        })
        .collect();
    let mut it = flat.into_iter();
    let outcomes: Vec<Vec<Vec<_>>> =
        (0..a).map(|_| (0..d).map(|_| it.by_ref().take(r).collect()).collect()).collect();
    Ok(assemble_report(spec, &outcomes))
}

pub fn simulate_lemma1(params: &TheoryParams) -> Result<LemmaReport> {
    params.validate()?;
    let summary = |class: u8| {
        let diffs: Vec<f64> = (0..params.n_trials).into_par_iter().map(|t| lemma1_trial(params, class, t)).collect();
        DifferenceSummary::from_differences(&diffs)
    };
    Ok(LemmaReport { negatives: summary(0), positives: summary(1) })
}

pub fn simulate_theorem1(params: &TheoryParams) -> Result<TheoremReport> {
    params.validate()?;
    let diffs = (0..params.n_trials)
        .into_par_iter()
        .map(|t| theorem1_trial(params, t))
        .collect::<Result<Vec<f64>>>()?;
    Ok(TheoremReport { savings: DifferenceSummary::from_differences(&diffs) })
}
