//! Cost matrices for the four application domains: card fraud, churn,
//! credit scoring and direct marketing.
//!
//! Builders are row-local: output row `i` depends only on input row `i`
//! and the parameters. Rows that fail the requested reasonableness level
//! are rejected in strict mode and reported in [`CostBuild::flagged`]
//! otherwise.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::cost_model::{CostMatrixRow, Reasonableness};
use crate::error::{Error, Result};

/// Builder output.
#[derive(Debug, Clone, PartialEq)]
pub struct CostBuild {
    pub rows: Vec<CostMatrixRow>,
    /// Rows that violate strict reasonableness, or whose false-positive
    /// cost was clamped to zero (credit).
    pub flagged: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FraudCostParams {
    pub admin_cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChurnCostParams {
    pub admin_cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CreditCostParams {
    pub loss_given_default: f64,
    pub pi_0: f64,
    pub pi_1: f64,
    /// Portfolio mean of the lost profit `r`.
    pub mean_profit: f64,
    /// Portfolio mean credit line.
    pub mean_credit_line: f64,
}

impl CreditCostParams {
    /// Cost of lending the declined money to an alternative customer.
    pub fn alternative_fp_cost(&self) -> f64 {
        -self.mean_profit * self.pi_0 + self.mean_credit_line * self.loss_given_default * self.pi_1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketingCostParams {
    pub admin_cost: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

fn non_negative_column(name: &str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite() || *v < 0.0) {
        Some(row) => Err(Error::InvalidCost {
            row,
            reason: format!("{name} must be finite and non-negative, got {}", values[row]),
        }),
        None => Ok(()),
    }
}

fn same_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Alignment { expected, found })
    }
}

/// Collects strict-reasonableness violations; rejects them unless the
/// mode is relaxed. `NonStrict` rows must still satisfy the weak ordering.
fn finish(rows: Vec<CostMatrixRow>, mut flagged: Vec<usize>, mode: Reasonableness) -> Result<CostBuild> {
    for (row, r) in rows.iter().enumerate() {
        if r.check(Reasonableness::Strict).is_err() {
            if let Err(reason) = r.check(mode) {
                return Err(Error::InvalidCost { row, reason });
            }
            flagged.push(row);
        }
    }
    flagged.sort_unstable();
    flagged.dedup();
    Ok(CostBuild { rows, flagged })
}

/// `(C_a, C_a, c_fn, 0)` per row; shared by fraud and marketing.
fn admin_and_loss(admin_cost: f64, losses: &[f64], mode: Reasonableness) -> Result<CostBuild> {
    let rows = losses.iter().map(|&l| CostMatrixRow::new(admin_cost, admin_cost, l, 0.0)).collect();
    finish(rows, Vec::new(), mode)
}

/// Fraud: investigating an alert costs `C_a`, a missed fraud costs the
/// transaction amount.
pub fn build_fraud_costs(amounts: &[f64], params: &FraudCostParams, mode: Reasonableness) -> Result<CostBuild> {
    positive("admin_cost", params.admin_cost)?;
    non_negative_column("amount", amounts)?;
    admin_and_loss(params.admin_cost, amounts, mode)
}

/// Direct marketing: contacting costs `C_a`, a missed client costs the
/// expected income.
pub fn build_marketing_costs(income: &[f64], params: &MarketingCostParams, mode: Reasonableness) -> Result<CostBuild> {
    positive("admin_cost", params.admin_cost)?;
    non_negative_column("income", income)?;
    admin_and_loss(params.admin_cost, income, mode)
}

/// Expected income of a term deposit: amount times interest-rate spread.
pub fn expected_income(deposit: f64, spread: f64) -> f64 {
    deposit * spread
}

/// Churn: `c_tp = γ·C_o + (1−γ)(CLV + C_a)`, `c_fp = C_o + C_a`,
/// `c_fn = CLV`, `c_tn = 0`.
pub fn build_churn_costs(
    accept_prob: &[f64],
    offer_cost: &[f64],
    clv: &[f64],
    params: &ChurnCostParams,
    mode: Reasonableness,
) -> Result<CostBuild> {
    positive("admin_cost", params.admin_cost)?;
    same_len(accept_prob.len(), offer_cost.len())?;
    same_len(accept_prob.len(), clv.len())?;
    if let Some(row) = accept_prob.iter().position(|g| !(0.0..=1.0).contains(g)) {
        return Err(Error::InvalidCost {
            row,
            reason: format!("acceptance probability must lie in [0, 1], got {}", accept_prob[row]),
        });
    }
    non_negative_column("offer_cost", offer_cost)?;
    non_negative_column("clv", clv)?;
    let ca = params.admin_cost;
    let rows = accept_prob
        .iter()
        .zip(offer_cost)
        .zip(clv)
        .map(|((&g, &co), &v)| CostMatrixRow::new(g * co + (1.0 - g) * (v + ca), co + ca, v, 0.0))
        .collect();
    finish(rows, Vec::new(), mode)
}

/// Credit scoring: `c_fn = Cl·L_gd`, `c_fp = r + C^a_FP`, correct
/// decisions are free. A negative `c_fp` is an error in strict mode and is
/// clamped to zero (and flagged) otherwise.
pub fn build_credit_costs(
    credit_line: &[f64],
    lost_profit: &[f64],
    params: &CreditCostParams,
    mode: Reasonableness,
) -> Result<CostBuild> {
    let lgd = params.loss_given_default;
    if !(lgd > 0.0 && lgd <= 1.0) {
        return Err(Error::Config(format!("loss_given_default must lie in (0, 1], got {lgd}")));
    }
    if !(params.pi_0 >= 0.0 && params.pi_1 >= 0.0 && (params.pi_0 + params.pi_1 - 1.0).abs() <= 1e-9) {
        return Err(Error::Config(format!(
            "pi_0 + pi_1 must equal 1, got {} + {}",
            params.pi_0, params.pi_1
        )));
    }
    same_len(credit_line.len(), lost_profit.len())?;
    non_negative_column("credit_line", credit_line)?;
    let alt = params.alternative_fp_cost();
    let mut flagged = Vec::new();
    let mut rows = Vec::with_capacity(credit_line.len());
    for (row, (&cl, &r)) in credit_line.iter().zip(lost_profit).enumerate() {
        let mut c_fp = r + alt;
        if !c_fp.is_finite() {
            return Err(Error::InvalidCost { row, reason: format!("c_fp is not finite ({c_fp})") });
        }
        if c_fp < 0.0 {
            if mode == Reasonableness::Strict {
                return Err(Error::InvalidCost { row, reason: format!("negative c_fp ({c_fp})") });
            }
            c_fp = 0.0;
            flagged.push(row);
        }
        rows.push(CostMatrixRow::new(0.0, c_fp, cl * lgd, 0.0));
    }
    finish(rows, flagged, mode)
}
