//! Benchmark spec files and report writers.
//!
//! ```text
//! version = 1
//! benchmark.algorithms = DT-t, CSDT-t, CSRP-wv-t
//! benchmark.datasets = fraud, small
//! benchmark.repetitions = 50          # default 50
//! benchmark.seed = 7                  # default: --seed
//! benchmark.n_trees = 100             # forests and ensembles
//!
//! split.train = 0.5                   # 50/25/25 by default
//! split.valid = 0.25
//! split.test = 0.25
//!
//! dataset.fraud.path = data/fraud.csv  # relative to this file
//! dataset.fraud.label_col = label      # same schema keys as data.*
//! dataset.fraud.domain = fraud         # optional: build costs first
//! dataset.fraud.builder.fraud.admin_cost = 2.5
//!
//! dataset.small.synthetic.n = 2000     # synthetic fraud-like data
//! dataset.small.synthetic.k = 6
//! ```
//!
//! Synthetic keys: `n`, `k`, `positive_rate`, `informative`, `separation`,
//! `log_amount_mean`, `log_amount_sd`, `positive_amount_shift`,
//! `admin_cost`, `seed`. A dataset is synthetic when it has any
//! `synthetic.*` key and read from CSV otherwise. `tree.*`,
//! `combiner.ga.*` and `logistic.*` apply to every algorithm.
//!
//! Dataset `d` (0-based position in `benchmark.datasets`) is split with
//! seed `substream(split.seed, d)` and, when synthetic, drawn with seed
//! `substream(benchmark.seed, 1000 + d)` unless `synthetic.seed` is set.

use std::path::Path;

use costforest_core::data::{split, SplitSpec};
use costforest_core::evaluation::{Algorithm, EvaluationReport, ExperimentSpec, LearnerSettings, NamedBundle};
use costforest_core::rng;
use costforest_core::synthetic::{fraud_dataset, SyntheticSpec};
use costforest_core::CostedDataset;

use crate::builders::{append_costs, Domain, DomainParams};
use crate::config::ConfigFile;
use crate::csv_io::{dataset_from_table, format_number, Table};
use crate::error::{CliError, CliResult};
use crate::settings;

pub const DEFAULT_REPETITIONS: usize = 50;

fn synthetic(cfg: &ConfigFile, prefix: &str, default_seed: u64) -> CliResult<CostedDataset> {
    let d = SyntheticSpec::default();
    let k = |s: &str| format!("{prefix}{s}");
    let spec = SyntheticSpec {
        n: cfg.parse_or(&k("n"), d.n)?,
        k: cfg.parse_or(&k("k"), d.k)?,
        positive_rate: cfg.parse_or(&k("positive_rate"), d.positive_rate)?,
        informative: cfg.parse_or(&k("informative"), d.informative)?,
        separation: cfg.parse_or(&k("separation"), d.separation)?,
        log_amount_mean: cfg.parse_or(&k("log_amount_mean"), d.log_amount_mean)?,
        log_amount_sd: cfg.parse_or(&k("log_amount_sd"), d.log_amount_sd)?,
        positive_amount_shift: cfg.parse_or(&k("positive_amount_shift"), d.positive_amount_shift)?,
        admin_cost: cfg.parse_or(&k("admin_cost"), d.admin_cost)?,
        seed: cfg.parse_or(&k("seed"), default_seed)?,
    };
    let data = fraud_dataset(&spec).map_err(|e| CliError::from(e).context(format!("dataset `{prefix}`")))?;
    let names = std::iter::once("log_amount".to_string()).chain((1..spec.k).map(|j| format!("x{j}"))).collect();
    Ok(data.with_feature_names(names)?)
}

fn from_csv(cfg: &ConfigFile, prefix: &str, base_dir: &Path) -> CliResult<CostedDataset> {
    let path_key = format!("{prefix}path");
    let rel: String = cfg.required(&path_key)?;
    let mut table = Table::read(&base_dir.join(rel))?;
    let schema = settings::schema(cfg, prefix)?;
    let domain_key = format!("{prefix}domain");
    if let Some(raw) = cfg.get(&domain_key) {
        let domain = Domain::parse(raw)
            .ok_or_else(|| cfg.error(&domain_key, format!("expected fraud, churn, credit or marketing, got `{raw}`")))?;
        let params = DomainParams::from_config(cfg, &format!("{prefix}builder."), domain)?;
        let built = params.build(&table, schema.mode)?;
        append_costs(&mut table, &built, &schema.cost_cols)?;
    }
    dataset_from_table(&table, &schema)
}

/// Reads a benchmark spec. Relative dataset paths resolve against
/// `base_dir`.
pub fn experiment_spec(cfg: &ConfigFile, base_dir: &Path, global_seed: u64) -> CliResult<ExperimentSpec> {
    let algo_names = cfg
        .list("benchmark.algorithms")
        .ok_or_else(|| cfg.error("benchmark.algorithms", "missing required key"))?;
    let algorithms = algo_names
        .iter()
        .map(|n| Algorithm::parse(n).map_err(|e| cfg.error("benchmark.algorithms", e)))
        .collect::<CliResult<Vec<_>>>()?;
    let names = cfg
        .list("benchmark.datasets")
        .ok_or_else(|| cfg.error("benchmark.datasets", "missing required key"))?;
    let seed = cfg.parse_or("benchmark.seed", global_seed)?;
    let repetitions = cfg.parse_or("benchmark.repetitions", DEFAULT_REPETITIONS)?;
    let d = LearnerSettings::default();
    let settings = LearnerSettings {
        tree: settings::tree(cfg)?,
        n_trees: cfg.parse_or("benchmark.n_trees", d.n_trees)?,
        ga: settings::ga(cfg, seed)?,
        logistic: settings::logistic(cfg)?,
    };
    let sd = SplitSpec::default();
    let split_seed = cfg.parse_or("split.seed", seed)?;
    let split_base = SplitSpec {
        train_frac: cfg.parse_or("split.train", sd.train_frac)?,
        valid_frac: cfg.parse_or("split.valid", sd.valid_frac)?,
        test_frac: cfg.parse_or("split.test", sd.test_frac)?,
        seed: split_seed,
    };
    let mut datasets = Vec::with_capacity(names.len());
    for (i, name) in names.iter().enumerate() {
        let prefix = format!("dataset.{name}.");
        let data = if cfg.keys_with_prefix(&format!("{prefix}synthetic.")).is_empty() {
            if !cfg.has(&format!("{prefix}path")) {
                return Err(CliError::Usage(format!(
                    "{}: dataset `{name}` needs `{prefix}path` or `{prefix}synthetic.*` keys",
                    cfg.position("benchmark.datasets")
                )));
            }
            from_csv(cfg, &prefix, base_dir)?
        } else {
            synthetic(cfg, &format!("{prefix}synthetic."), rng::substream(seed, 1000 + i as u64))?
        };
        let spec = SplitSpec { seed: rng::substream(split_seed, i as u64), ..split_base };
        let bundle = split(&data, &spec).map_err(|e| CliError::from(e).context(format!("dataset `{name}`")))?;
        datasets.push(NamedBundle { name: name.clone(), bundle });
    }
    cfg.finish()?;
    let spec = ExperimentSpec { algorithms, datasets, repetitions, seed, settings };
    spec.validate()?;
    Ok(spec)
}

pub fn report_json(report: &EvaluationReport) -> CliResult<String> {
    serde_json::to_string_pretty(report)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Internal(format!("cannot encode report: {e}")))
}

/// One row per algorithm: family, name, mean and std of savings and F1 for
/// every dataset, Friedman rank and perBest. Failed cells are left empty.
pub fn report_table(report: &EvaluationReport) -> (Vec<String>, Vec<Vec<String>>) {
    let mut headers = vec!["family".to_string(), "algorithm".to_string()];
    for d in &report.datasets {
        for m in ["savings_mean", "savings_std", "f1_mean", "f1_std"] {
            headers.push(format!("{d}:{m}"));
        }
    }
    headers.push("f_rank".into());
    headers.push("per_best".into());
    let opt = |v: Option<f64>| v.map(format_number).unwrap_or_default();
    let rows = report
        .algorithms
        .iter()
        .map(|a| {
            let mut row = vec![a.family.code().to_string(), a.algorithm.clone()];
            for c in &a.cells {
                row.push(opt(c.savings.map(|s| s.mean)));
                row.push(opt(c.savings.map(|s| s.std)));
                row.push(opt(c.f1.map(|s| s.mean)));
                row.push(opt(c.f1.map(|s| s.std)));
            }
            row.push(opt(a.friedman_rank));
            row.push(opt(a.per_best));
            row
        })
        .collect();
    (headers, rows)
}
