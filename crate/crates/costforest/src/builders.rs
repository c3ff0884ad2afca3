//! Cost columns for the four application domains.
//!
//! Parameters come from a config file. Keys are read under a prefix, which
//! is empty for `build-costs` and `dataset.NAME.builder.` in benchmark
//! specs:
//!
//! | domain    | parameters                                                         | columns (defaults)                               |
//! |-----------|--------------------------------------------------------------------|--------------------------------------------------|
//! | fraud     | `fraud.admin_cost`                                                 | `fraud.amount_col` (`amount`)                    |
//! | marketing | `marketing.admin_cost`                                             | `marketing.income_col` (`income`)                |
//! | churn     | `churn.admin_cost`                                                 | `churn.accept_col`, `churn.offer_col`, `churn.clv_col` (`accept_prob`, `offer_cost`, `clv`) |
//! | credit    | `credit.loss_given_default`, `credit.pi_0`, `credit.pi_1`, `credit.mean_profit`, `credit.mean_credit_line` | `credit.credit_line_col`, `credit.lost_profit_col` (`credit_line`, `lost_profit`) |

use costforest_core::cost_builders::{
    build_churn_costs, build_credit_costs, build_fraud_costs, build_marketing_costs, ChurnCostParams, CostBuild,
    CreditCostParams, FraudCostParams, MarketingCostParams,
};
use costforest_core::Reasonableness;

use crate::config::ConfigFile;
use crate::csv_io::{format_number, Table};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Domain {
    Fraud,
    Churn,
    Credit,
    Marketing,
}

impl Domain {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fraud" => Some(Self::Fraud),
            "churn" => Some(Self::Churn),
            "credit" => Some(Self::Credit),
            "marketing" => Some(Self::Marketing),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainParams {
    Fraud { params: FraudCostParams, amount_col: String },
    Marketing { params: MarketingCostParams, income_col: String },
    Churn { params: ChurnCostParams, accept_col: String, offer_col: String, clv_col: String },
    Credit { params: CreditCostParams, credit_line_col: String, lost_profit_col: String },
}

fn col(cfg: &ConfigFile, key: &str, default: &str) -> String {
    cfg.get(key).unwrap_or(default).to_string()
}

impl DomainParams {
    pub fn from_config(cfg: &ConfigFile, prefix: &str, domain: Domain) -> CliResult<Self> {
        let k = |s: &str| format!("{prefix}{s}");
        Ok(match domain {
            Domain::Fraud => Self::Fraud {
                params: FraudCostParams { admin_cost: cfg.required(&k("fraud.admin_cost"))? },
                amount_col: col(cfg, &k("fraud.amount_col"), "amount"),
            },
            Domain::Marketing => Self::Marketing {
                params: MarketingCostParams { admin_cost: cfg.required(&k("marketing.admin_cost"))? },
                income_col: col(cfg, &k("marketing.income_col"), "income"),
            },
            Domain::Churn => Self::Churn {
                params: ChurnCostParams { admin_cost: cfg.required(&k("churn.admin_cost"))? },
                accept_col: col(cfg, &k("churn.accept_col"), "accept_prob"),
                offer_col: col(cfg, &k("churn.offer_col"), "offer_cost"),
                clv_col: col(cfg, &k("churn.clv_col"), "clv"),
            },
            Domain::Credit => Self::Credit {
                params: CreditCostParams {
                    loss_given_default: cfg.required(&k("credit.loss_given_default"))?,
                    pi_0: cfg.required(&k("credit.pi_0"))?,
                    pi_1: cfg.required(&k("credit.pi_1"))?,
                    mean_profit: cfg.required(&k("credit.mean_profit"))?,
                    mean_credit_line: cfg.required(&k("credit.mean_credit_line"))?,
                },
                credit_line_col: col(cfg, &k("credit.credit_line_col"), "credit_line"),
                lost_profit_col: col(cfg, &k("credit.lost_profit_col"), "lost_profit"),
            },
        })
    }

    pub fn build(&self, table: &Table, mode: Reasonableness) -> CliResult<CostBuild> {
        let built = match self {
            Self::Fraud { params, amount_col } => build_fraud_costs(&table.numeric_column(amount_col)?, params, mode),
            Self::Marketing { params, income_col } => {
                build_marketing_costs(&table.numeric_column(income_col)?, params, mode)
            }
            Self::Churn { params, accept_col, offer_col, clv_col } => build_churn_costs(
                &table.numeric_column(accept_col)?,
                &table.numeric_column(offer_col)?,
                &table.numeric_column(clv_col)?,
                params,
                mode,
            ),
            Self::Credit { params, credit_line_col, lost_profit_col } => build_credit_costs(
                &table.numeric_column(credit_line_col)?,
                &table.numeric_column(lost_profit_col)?,
                params,
                mode,
            ),
        };
        built.map_err(|e| match e {
            costforest_core::Error::InvalidCost { row, reason } => {
                CliError::Data(format!("{}:{}: {reason}", table.origin, row + 2))
            }
            other => other.into(),
        })
    }
}

/// Appends the four cost columns under `names`. Existing columns with those
/// names are an error rather than silently overwritten.
pub fn append_costs(table: &mut Table, build: &CostBuild, names: &[String; 4]) -> CliResult<()> {
    if let Some(n) = names.iter().find(|n| table.headers.contains(n)) {
        return Err(CliError::Data(format!("{}: column `{n}` already exists", table.origin)));
    }
    table.headers.extend(names.iter().cloned());
    for (row, c) in table.rows.iter_mut().zip(&build.rows) {
        row.extend([c.c_tp, c.c_fp, c.c_fn, c.c_tn].map(format_number));
    }
    Ok(())
}
