//! Translation of config keys into the learner configurations.
//!
//! | key | values | default |
//! |-----|--------|---------|
//! | `model.type` | `ensemble`, `csdt` | `ensemble` |
//! | `inducer.kind` | `bagging`, `pasting`, `random_forest`, `random_patches` | `bagging` |
//! | `inducer.T` | integer >= 3 | 100 |
//! | `inducer.n_examples` | count, or fraction when written with a `.` | per inducer |
//! | `inducer.n_features` | count, or fraction when written with a `.` | per inducer |
//! | `inducer.seed` | u64 | `--seed` |
//! | `tree.max_depth` | integer >= 1 | 10 |
//! | `tree.min_samples_split` | integer | 2 |
//! | `tree.min_gain` | number | 0 |
//! | `tree.candidates` | `exact`, `quantiles:Q` | `quantiles:100` |
//! | `tree.pruning` | `true`, `false` | `true` |
//! | `tree.impurity` | `cost`, `gini` | `cost` |
//! | `combiner.kind` | `mv`, `wv`, `wv-acc`, `stacking` | `mv` |
//! | `combiner.ga.*` | `population`, `generations`, `crossover_rate`, `mutation_rate`, `mutation_sigma`, `beta_min`, `beta_max`, `elitism`, `tournament`, `seed` | see `GaConfig` |
//! | `logistic.*` | `learning_rate`, `iterations`, `l2`, `standardize` | see `LogisticConfig` |
//! | `data.label_col` | column name | `label` |
//! | `data.cost_cols` | four names, `tp,fp,fn,tn` order | `c_tp,c_fp,c_fn,c_tn` |
//! | `data.drop_cols` | comma-separated names | none |
//! | `data.reasonableness` | `strict`, `non_strict`, `relaxed` | `strict` |

use costforest_core::baselines::LogisticConfig;
use costforest_core::combiners::GaConfig;
use costforest_core::csdt::{Candidates, CsdtConfig, Impurity};
use costforest_core::ensemble::{CombinerConfig, EcsdtConfig};
use costforest_core::evaluation::CombinerKind;
use costforest_core::inducers::{InducerConfig, InducerKind, SizeSpec};
use costforest_core::rng;

use crate::config::ConfigFile;
use crate::csv_io::{parse_reasonableness, Schema};
use crate::error::CliResult;

/// Stream index of the GA seed under the global seed.
pub const GA_STREAM: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelType {
    Ensemble,
    Csdt,
}

fn size_spec(cfg: &ConfigFile, key: &str) -> CliResult<Option<SizeSpec>> {
    let Some(raw) = cfg.get(key) else { return Ok(None) };
    if raw.contains('.') || raw.contains('e') {
        let f: f64 = raw.parse().map_err(|e| cfg.error(key, format!("cannot parse `{raw}`: {e}")))?;
        Ok(Some(SizeSpec::Fraction(f)))
    } else {
        let c: usize = raw.parse().map_err(|e| cfg.error(key, format!("cannot parse `{raw}`: {e}")))?;
        Ok(Some(SizeSpec::Count(c)))
    }
}

pub fn schema(cfg: &ConfigFile, prefix: &str) -> CliResult<Schema> {
    let k = |s: &str| format!("{prefix}{s}");
    let mut out = Schema::default();
    if let Some(l) = cfg.get(&k("label_col")) {
        out.label_col = l.to_string();
    }
    if let Some(c) = cfg.list(&k("cost_cols")) {
        out = out.with_cost_cols(&c).map_err(|e| e.context(cfg.position(&k("cost_cols"))))?;
    }
    if let Some(d) = cfg.list(&k("drop_cols")) {
        out.drop_cols = d;
    }
    if let Some(r) = cfg.get(&k("reasonableness")) {
        out.mode = parse_reasonableness(r)
            .ok_or_else(|| cfg.error(&k("reasonableness"), format!("expected strict, non_strict or relaxed, got `{r}`")))?;
    }
    Ok(out)
}

pub fn tree(cfg: &ConfigFile) -> CliResult<CsdtConfig> {
    let d = CsdtConfig::default();
    let candidates = match cfg.get("tree.candidates") {
        None => d.candidates,
        Some("exact") => Candidates::ExactMidpoints,
        Some(v) => match v.strip_prefix("quantiles:").map(str::parse::<usize>) {
            Some(Ok(q)) => Candidates::Quantiles(q),
            _ => return Err(cfg.error("tree.candidates", format!("expected `exact` or `quantiles:Q`, got `{v}`"))),
        },
    };
    let impurity = match cfg.get("tree.impurity") {
        None => d.impurity,
        Some("cost") => Impurity::Cost,
        Some("gini") => Impurity::Gini,
        Some(v) => return Err(cfg.error("tree.impurity", format!("expected `cost` or `gini`, got `{v}`"))),
    };
    let out = CsdtConfig {
        max_depth: cfg.parse_or("tree.max_depth", d.max_depth)?,
        min_samples_split: cfg.parse_or("tree.min_samples_split", d.min_samples_split)?,
        min_gain: cfg.parse_or("tree.min_gain", d.min_gain)?,
        candidates,
        pruning: cfg.parse_or("tree.pruning", d.pruning)?,
        impurity,
    };
    out.validate()?;
    Ok(out)
}

pub fn ga(cfg: &ConfigFile, seed: u64) -> CliResult<GaConfig> {
    let d = GaConfig::default();
    let out = GaConfig {
        population: cfg.parse_or("combiner.ga.population", d.population)?,
        generations: cfg.parse_or("combiner.ga.generations", d.generations)?,
        crossover_rate: cfg.parse_or("combiner.ga.crossover_rate", d.crossover_rate)?,
        mutation_rate: cfg.parse_or("combiner.ga.mutation_rate", d.mutation_rate)?,
        mutation_sigma: cfg.parse_or("combiner.ga.mutation_sigma", d.mutation_sigma)?,
        beta_min: cfg.parse_or("combiner.ga.beta_min", d.beta_min)?,
        beta_max: cfg.parse_or("combiner.ga.beta_max", d.beta_max)?,
        elitism: cfg.parse_or("combiner.ga.elitism", d.elitism)?,
        tournament: cfg.parse_or("combiner.ga.tournament", d.tournament)?,
        seed: cfg.parse_or("combiner.ga.seed", rng::substream(seed, GA_STREAM))?,
    };
    out.validate()?;
    Ok(out)
}

pub fn logistic(cfg: &ConfigFile) -> CliResult<LogisticConfig> {
    let d = LogisticConfig::default();
    Ok(LogisticConfig {
        learning_rate: cfg.parse_or("logistic.learning_rate", d.learning_rate)?,
        iterations: cfg.parse_or("logistic.iterations", d.iterations)?,
        l2: cfg.parse_or("logistic.l2", d.l2)?,
        standardize: cfg.parse_or("logistic.standardize", d.standardize)?,
    })
}

pub fn inducer(cfg: &ConfigFile, seed: u64) -> CliResult<InducerConfig> {
    let d = InducerConfig::default();
    let kind = match cfg.get("inducer.kind") {
        None => d.kind,
        Some(v) => InducerKind::parse(v).ok_or_else(|| {
            cfg.error("inducer.kind", format!("expected bagging, pasting, random_forest or random_patches, got `{v}`"))
        })?,
    };
    Ok(InducerConfig {
        kind,
        n_trees: cfg.parse_or("inducer.T", d.n_trees)?,
        n_examples: size_spec(cfg, "inducer.n_examples")?,
        n_features: size_spec(cfg, "inducer.n_features")?,
        seed: cfg.parse_or("inducer.seed", seed)?,
    })
}

/// Reads the combiner. GA keys are only consumed for stacking, so they are
/// reported as unknown under the voting combiners.
pub fn combiner(cfg: &ConfigFile, seed: u64) -> CliResult<CombinerConfig> {
    let raw = cfg.get("combiner.kind").unwrap_or("mv");
    let kind = CombinerKind::parse(raw)
        .ok_or_else(|| cfg.error("combiner.kind", format!("expected mv, wv, wv-acc or stacking, got `{raw}`")))?;
    Ok(match kind {
        CombinerKind::Stacking => CombinerConfig::Stacking(ga(cfg, seed)?),
        other => other.config(&GaConfig::default()),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSettings {
    pub model: ModelType,
    pub tree: CsdtConfig,
    /// Present for ensembles.
    pub ensemble: Option<EcsdtConfig>,
    pub schema: Schema,
}

/// Reads a `train` config and rejects unknown keys.
pub fn train_settings(cfg: &ConfigFile, seed: u64) -> CliResult<TrainSettings> {
    let model = match cfg.get("model.type").unwrap_or("ensemble") {
        "ensemble" => ModelType::Ensemble,
        "csdt" => ModelType::Csdt,
        v => return Err(cfg.error("model.type", format!("expected `ensemble` or `csdt`, got `{v}`"))),
    };
    let tree = tree(cfg)?;
    let ensemble = match model {
        ModelType::Ensemble => Some(EcsdtConfig { inducer: inducer(cfg, seed)?, tree, combiner: combiner(cfg, seed)? }),
        ModelType::Csdt => None,
    };
    let schema = schema(cfg, "data.")?;
    cfg.finish()?;
    Ok(TrainSettings { model, tree, ensemble, schema })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(body: &str) -> ConfigFile {
        ConfigFile::parse(&format!("version = 1\n{body}"), "t.cfg").unwrap()
    }

    #[test]
    fn defaults() {
        let s = train_settings(&cfg(""), 9).unwrap();
        assert_eq!(s.model, ModelType::Ensemble);
        assert_eq!(s.tree, CsdtConfig::default());
        let e = s.ensemble.unwrap();
        assert_eq!(e.inducer, InducerConfig { seed: 9, ..InducerConfig::default() });
        assert_eq!(e.combiner, CombinerConfig::MajorityVote);
        assert_eq!(s.schema, Schema::default());
    }

    #[test]
    fn full_config() {
        let c = cfg("model.type = ensemble\ninducer.kind = random_patches\ninducer.T = 7\ninducer.n_examples = 0.5\n\
                     inducer.n_features = 2\ntree.candidates = exact\ntree.pruning = false\ntree.impurity = cost\n\
                     combiner.kind = stacking\ncombiner.ga.population = 10\ncombiner.ga.seed = 3\n\
                     data.cost_cols = a,b,c,d\ndata.reasonableness = relaxed\n");
        let s = train_settings(&c, 1).unwrap();
        let e = s.ensemble.unwrap();
        assert_eq!(e.inducer.kind, InducerKind::RandomPatches);
        assert_eq!(e.inducer.n_examples, Some(SizeSpec::Fraction(0.5)));
        assert_eq!(e.inducer.n_features, Some(SizeSpec::Count(2)));
        assert_eq!(e.tree.candidates, Candidates::ExactMidpoints);
        assert!(!e.tree.pruning);
        match e.combiner {
            CombinerConfig::Stacking(g) => assert_eq!((g.population, g.seed), (10, 3)),
            other => panic!("{other:?}"),
        }
        assert_eq!(s.schema.cost_cols[3], "d");
    }

    #[test]
    fn rejects_bad_values_with_position() {
        for (body, key) in [
            ("tree.candidates = some", "tree.candidates"),
            ("inducer.kind = boosting", "inducer.kind"),
            ("combiner.kind = avg", "combiner.kind"),
            ("tree.max_depth = -1", "tree.max_depth"),
            ("combiner.ga.population = 10", "combiner.ga.population"),
        ] {
            let e = train_settings(&cfg(body), 0).unwrap_err();
            assert_eq!(e.exit_code(), 1);
            let m = e.to_string();
            assert!(m.contains(key) && m.contains("t.cfg:2"), "{m}");
        }
    }
}
