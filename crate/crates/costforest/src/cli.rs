//! Command-line interface.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use costforest_core::cost_model::{costless_class_cost, normalized_cost, savings, total_cost};
use costforest_core::csdt;
use costforest_core::evaluation::f1_score;
use costforest_core::sampling::{resample_indices, SamplingMethod, SamplingSpec};
use costforest_core::theory::{CostGenerator, TheoryParams};
use serde::Serialize;

use crate::bench;
use crate::builders::{append_costs, Domain, DomainParams};
use crate::config::ConfigFile;
use crate::csv_io::{dataset_from_table, dataset_with_features, feature_rows, parse_reasonableness, write_rows, Schema, Table};
use crate::error::{CliError, CliResult};
use crate::model_file::{Model, ModelFile};
use crate::parallel;
use crate::settings::{self, ModelType};
use crate::theory_report;

#[derive(Debug, Parser)]
#[command(name = "costforest", version, about = "Ensembles of example-dependent cost-sensitive decision trees")]
pub struct Cli {
    /// Seed for every random choice; subcommands derive their streams from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses the available parallelism. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Append the four cost columns for an application domain.
    BuildCosts(BuildCostsArgs),
    /// Write an under-, rejection- or over-sampled copy of a dataset.
    Resample(ResampleArgs),
    /// Train a single tree or an ensemble from a config file.
    Train(TrainArgs),
    /// Predict classes for the rows of a CSV file.
    Predict(PredictArgs),
    /// Score a model on a labelled, costed CSV file.
    Evaluate(EvaluateArgs),
    /// Run a benchmark spec and write the comparison report.
    Benchmark(BenchmarkArgs),
    /// Monte-Carlo check that majority voting improves savings.
    VerifyTheory(VerifyTheoryArgs),
}

/// Column flags shared by the subcommands that read costed data. Each
/// overrides the matching `data.*` config key.
#[derive(Debug, Args, Default)]
pub struct SchemaArgs {
    /// Label column (values 0 or 1).
    #[arg(long)]
    pub label_col: Option<String>,
    /// Cost columns in tp,fp,fn,tn order.
    #[arg(long, value_delimiter = ',')]
    pub cost_cols: Option<Vec<String>>,
    /// Columns to ignore.
    #[arg(long, value_delimiter = ',')]
    pub drop_cols: Option<Vec<String>>,
    /// Cost ordering check: strict, non_strict or relaxed.
    #[arg(long)]
    pub reasonableness: Option<String>,
}

impl SchemaArgs {
    pub fn apply(&self, mut schema: Schema) -> CliResult<Schema> {
        if let Some(l) = &self.label_col {
            schema.label_col = l.clone();
        }
        if let Some(c) = &self.cost_cols {
            schema = schema.with_cost_cols(c)?;
        }
        if let Some(d) = &self.drop_cols {
            schema.drop_cols = d.clone();
        }
        if let Some(r) = &self.reasonableness {
            schema.mode = parse_reasonableness(r)
                .ok_or_else(|| CliError::Usage(format!("--reasonableness: expected strict, non_strict or relaxed, got `{r}`")))?;
        }
        Ok(schema)
    }
}

#[derive(Debug, Args)]
pub struct BuildCostsArgs {
    #[arg(long, value_enum)]
    pub domain: Domain,
    /// Domain parameters (`version = 1` plus `DOMAIN.*` keys).
    #[arg(long)]
    pub params: PathBuf,
    /// Input CSV with the domain columns.
    #[arg(long)]
    pub data: PathBuf,
    /// Output CSV: the input plus four cost columns.
    #[arg(long)]
    pub out: PathBuf,
    /// Names of the appended columns in tp,fp,fn,tn order.
    #[arg(long, value_delimiter = ',')]
    pub cost_cols: Option<Vec<String>>,
    /// strict, non_strict or relaxed; rows outside strict are reported.
    #[arg(long)]
    pub reasonableness: Option<String>,
}

#[derive(Debug, Args)]
pub struct ResampleArgs {
    /// u (under-sampling), r (cost-proportionate rejection) or o (over-sampling).
    #[arg(long)]
    pub method: String,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub schema: SchemaArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub model_out: PathBuf,
    /// Prune a single tree on this set instead of the training set.
    #[arg(long)]
    pub prune_set: Option<PathBuf>,
    #[command(flatten)]
    pub schema: SchemaArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// CSV holding at least the model's feature columns.
    #[arg(long)]
    pub data: PathBuf,
    /// Output CSV with one `prediction` per input row.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// JSON metrics file; printed to standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub schema: SchemaArgs,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Report path; `.csv` writes the table, anything else JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyTheoryArgs {
    /// Number of base classifiers (odd, at least 3).
    #[arg(long = "T", default_value_t = 11)]
    pub t: usize,
    /// Base classifier accuracy in [0.5, 1].
    #[arg(long, default_value_t = 0.7)]
    pub rho: f64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Examples per simulated set.
    #[arg(long, default_value_t = 500)]
    pub examples: usize,
    /// Share of positives in the mixed sets.
    #[arg(long, default_value_t = 0.5)]
    pub positive_rate: f64,
    #[arg(long)]
    pub out: PathBuf,
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> CliResult<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Internal(format!("cannot encode JSON: {e}")))
}

fn build_costs(a: &BuildCostsArgs) -> CliResult<()> {
    let cfg = ConfigFile::load(&a.params)?;
    let params = DomainParams::from_config(&cfg, "", a.domain)?;
    let mut schema = settings::schema(&cfg, "data.")?;
    cfg.finish()?;
    if let Some(c) = &a.cost_cols {
        schema = schema.with_cost_cols(c)?;
    }
    if let Some(r) = &a.reasonableness {
        schema = SchemaArgs { reasonableness: Some(r.clone()), ..Default::default() }.apply(schema)?;
    }
    let mut table = Table::read(&a.data)?;
    let built = params.build(&table, schema.mode)?;
    if !built.flagged.is_empty() {
        eprintln!("warning: {} row(s) violate strict reasonableness", built.flagged.len());
    }
    append_costs(&mut table, &built, &schema.cost_cols)?;
    table.write(&a.out)
}

fn resample(a: &ResampleArgs, seed: u64) -> CliResult<()> {
    let method = SamplingMethod::from_code(&a.method)
        .ok_or_else(|| CliError::Usage(format!("--method: expected u, r or o, got `{}`", a.method)))?;
    let schema = a.schema.apply(Schema::default())?;
    let table = Table::read(&a.data)?;
    let data = dataset_from_table(&table, &schema)?;
    let idx = resample_indices(&data, &SamplingSpec { method, seed })?;
    let out = Table { rows: idx.iter().map(|&i| table.rows[i].clone()).collect(), ..table };
    out.write(&a.out)
}

fn train(a: &TrainArgs, seed: u64) -> CliResult<()> {
    let cfg = ConfigFile::load(&a.config)?;
    let s = settings::train_settings(&cfg, seed)?;
    let schema = a.schema.apply(s.schema.clone())?;
    let data = crate::csv_io::load_csv(&a.train, &schema)?;
    let names = data.feature_names().map(<[String]>::to_vec).unwrap_or_default();
    let model = match (s.model, &s.ensemble) {
        (ModelType::Csdt, _) => match &a.prune_set {
            None => Model::Csdt(csdt::grow(&data, &s.tree)?),
            Some(p) => {
                let table = Table::read(p)?;
                let prune = dataset_with_features(&table, &schema, &names)?;
                let grown = csdt::grow(&data, &csdt::CsdtConfig { pruning: false, ..s.tree })?;
                Model::Csdt(grown.prune(&prune)?)
            }
        },
        (ModelType::Ensemble, Some(cfg)) => {
            if a.prune_set.is_some() {
                return Err(CliError::Usage("--prune-set applies to model.type = csdt only".into()));
            }
            Model::Ensemble(Box::new(parallel::train_ensemble(&data, cfg)?))
        }
        (ModelType::Ensemble, None) => return Err(CliError::Internal("ensemble settings missing".into())),
    };
    ModelFile::new(names, model).save(&a.model_out)
}

fn predict(a: &PredictArgs) -> CliResult<()> {
    let model = ModelFile::load(&a.model)?;
    let table = Table::read(&a.data)?;
    let rows = feature_rows(&table, &model.feature_names)?;
    let preds = model.model.predict_rows(&rows)?;
    let text: Vec<String> = preds.iter().map(u8::to_string).collect();
    write_rows(&a.out, &["prediction".to_string()], text.iter().map(|p| [p.as_str()]))
}

#[derive(Debug, Serialize)]
struct Metrics {
    n: usize,
    total_cost: f64,
    costless_class: u8,
    costless_cost: f64,
    savings: Option<f64>,
    normalized_cost: Option<f64>,
    f1: f64,
}

fn evaluate(a: &EvaluateArgs) -> CliResult<()> {
    let model = ModelFile::load(&a.model)?;
    let schema = a.schema.apply(Schema::default())?;
    let table = Table::read(&a.data)?;
    let data = dataset_with_features(&table, &schema, &model.feature_names)?;
    let rows: Vec<Vec<f64>> = data.examples().iter().map(|e| e.features.clone()).collect();
    let preds = model.model.predict_rows(&rows)?;
    let (costless_cost, costless_class) = costless_class_cost(&data);
    let metrics = Metrics {
        n: data.len(),
        total_cost: total_cost(&data, &preds)?,
        costless_class,
        costless_cost,
        savings: savings(&data, &preds).ok(),
        normalized_cost: normalized_cost(&data, &preds).ok(),
        f1: f1_score(&data.labels(), &preds)?,
    };
    let json = to_json(&metrics)?;
    match &a.out {
        Some(p) => write_text(p, &json),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn benchmark(a: &BenchmarkArgs, seed: u64) -> CliResult<()> {
    let cfg = ConfigFile::load(&a.spec)?;
    let base = a.spec.parent().unwrap_or(Path::new("."));
    let spec = bench::experiment_spec(&cfg, base, seed)?;
    let report = parallel::run_experiment(&spec)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if a.out.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let (headers, rows) = bench::report_table(&report);
        write_rows(&a.out, &headers, rows.iter().map(|r| r.iter().map(String::as_str)))
    } else {
        write_text(&a.out, &bench::report_json(&report)?)
    }
}

fn verify_theory(a: &VerifyTheoryArgs, seed: u64) -> CliResult<()> {
    let params = TheoryParams {
        n_trees: a.t,
        rho: a.rho,
        n_examples: a.examples,
        n_trials: a.trials,
        seed,
        costs: CostGenerator::default(),
        positive_rate: a.positive_rate,
        ..Default::default()
    };
    let report = theory_report::run(&params)?;
    write_text(&a.out, &to_json(&report)?)
}

/// Runs a parsed command inside a pool of `cli.jobs` threads.
pub fn run(cli: &Cli) -> CliResult<()> {
    let pool = parallel::pool(cli.jobs).map_err(|e| CliError::Internal(format!("cannot start thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::BuildCosts(a) => build_costs(a),
        Command::Resample(a) => resample(a, cli.seed),
        Command::Train(a) => train(a, cli.seed),
        Command::Predict(a) => predict(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Benchmark(a) => benchmark(a, cli.seed),
        Command::VerifyTheory(a) => verify_theory(a, cli.seed),
    })
}

/// Parses `args` and runs the command, returning the process exit code.
/// Usage errors from argument parsing exit with 1, help and version with 0.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
