//! Per-example cost matrices and the cost, normalized-cost and savings
//! measures built on them.
//!
//! Labels and predictions are `u8` values in `{0, 1}`; `1` is the positive
//! class. Money is `f64`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used when comparing money amounts in metrics.
pub const MONEY_TOLERANCE: f64 = 1e-9;

/// How strictly the reasonableness conditions `c_fp > c_tn` and
/// `c_fn > c_tp` are enforced. Finiteness and non-negativity are always
/// enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reasonableness {
    /// `c_fp > c_tn` and `c_fn > c_tp`.
    #[default]
    Strict,
    /// `c_fp >= c_tn` and `c_fn >= c_tp`.
    NonStrict,
    /// No ordering constraint between the four costs.
    Relaxed,
}

/// The 2x2 cost matrix of a single example.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostMatrixRow {
    pub c_tp: f64,
    pub c_fp: f64,
    pub c_fn: f64,
    pub c_tn: f64,
}

impl CostMatrixRow {
    pub const fn new(c_tp: f64, c_fp: f64, c_fn: f64, c_tn: f64) -> Self {
        Self { c_tp, c_fp, c_fn, c_tn }
    }

    /// Unit misclassification costs: correct predictions are free and every
    /// error costs 1.
    pub const fn unit() -> Self {
        Self::new(0.0, 1.0, 1.0, 0.0)
    }

    /// Cost of predicting `prediction` for an example whose true label is
    /// `label`.
    #[inline]
    pub fn cost(&self, label: u8, prediction: u8) -> f64 {
        match (label != 0, prediction != 0) {
            (true, true) => self.c_tp,
            (true, false) => self.c_fn,
            (false, true) => self.c_fp,
            (false, false) => self.c_tn,
        }
    }

    /// Cost of the wrong prediction for `label`: `c_fn` for positives and
    /// `c_fp` for negatives.
    #[inline]
    pub fn misclassification_cost(&self, label: u8) -> f64 {
        if label != 0 {
            self.c_fn
        } else {
            self.c_fp
        }
    }

    /// Checks finiteness, non-negativity and the requested reasonableness
    /// level. The error names the violated condition.
    pub fn check(&self, mode: Reasonableness) -> core::result::Result<(), String> {
        let all = [
            ("c_tp", self.c_tp),
            ("c_fp", self.c_fp),
            ("c_fn", self.c_fn),
            ("c_tn", self.c_tn),
        ];
        for (name, v) in all {
            if !v.is_finite() {
                return Err(format!("{name} is not finite ({v})"));
            }
            if v < 0.0 {
                return Err(format!("{name} is negative ({v})"));
            }
        }
        let ok = match mode {
            Reasonableness::Strict => self.c_fp > self.c_tn && self.c_fn > self.c_tp,
            Reasonableness::NonStrict => self.c_fp >= self.c_tn && self.c_fn >= self.c_tp,
            Reasonableness::Relaxed => true,
        };
        if ok {
            Ok(())
        } else {
            Err(format!(
                "reasonableness ({mode:?}) requires c_fp > c_tn and c_fn > c_tp, got \
                 c_tp={}, c_fp={}, c_fn={}, c_tn={}",
                self.c_tp, self.c_fp, self.c_fn, self.c_tn
            ))
        }
    }
}

/// A feature vector together with its label and cost matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedExample {
    pub features: Vec<f64>,
    pub label: u8,
    pub costs: CostMatrixRow,
}

impl AugmentedExample {
    pub fn new(features: Vec<f64>, label: u8, costs: CostMatrixRow) -> Self {
        Self { features, label, costs }
    }

    /// Cost of predicting `prediction` for this example.
    #[inline]
    pub fn cost(&self, prediction: u8) -> f64 {
        self.costs.cost(self.label, prediction)
    }
}

/// A validated, non-empty set of augmented examples sharing `k` features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostedDataset {
    examples: Vec<AugmentedExample>,
    k: usize,
    feature_names: Option<Vec<String>>,
}

impl CostedDataset {
    /// Validates and wraps `examples`.
    pub fn new(examples: Vec<AugmentedExample>, mode: Reasonableness) -> Result<Self> {
        let k = examples.first().ok_or(Error::EmptyDataset)?.features.len();
        for (row, ex) in examples.iter().enumerate() {
            if ex.features.len() != k {
                return Err(Error::InvalidExample {
                    row,
                    reason: format!("expected {k} features, found {}", ex.features.len()),
                });
            }
            if ex.label > 1 {
                return Err(Error::InvalidExample {
                    row,
                    reason: format!("label must be 0 or 1, found {}", ex.label),
                });
            }
            if let Some(bad) = ex.features.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidExample {
                    row,
                    reason: format!("non-finite feature value {bad}"),
                });
            }
            ex.costs
                .check(mode)
                .map_err(|reason| Error::InvalidCost { row, reason })?;
        }
        Ok(Self { examples, k, feature_names: None })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.k {
            return Err(Error::Alignment { expected: self.k, found: names.len() });
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn examples(&self) -> &[AugmentedExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    /// Always false; kept for the `len`/`is_empty` pairing.
    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.examples.iter().map(|e| e.label).collect()
    }

    pub fn costs(&self) -> Vec<CostMatrixRow> {
        self.examples.iter().map(|e| e.costs).collect()
    }

    /// `(N_0, N_1)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let n1 = self.examples.iter().filter(|e| e.label == 1).count();
        (self.examples.len() - n1, n1)
    }

    /// The examples at `indices`, in that order and with repetitions.
    /// Validation is skipped because every row already passed it.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let examples = indices.iter().map(|&i| self.examples[i].clone()).collect();
        Ok(Self { examples, k: self.k, feature_names: self.feature_names.clone() })
    }

    /// The class subset `S_a`, or `None` when the class is absent.
    pub fn class_subset(&self, class: u8) -> Option<Self> {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| self.examples[i].label == class).collect();
        self.subset(&idx).ok()
    }

    /// Same examples with every cost matrix replaced by `costs`.
    pub fn with_uniform_costs(&self, costs: CostMatrixRow) -> Self {
        let examples = self
            .examples
            .iter()
            .map(|e| AugmentedExample { costs, ..e.clone() })
            .collect();
        Self { examples, k: self.k, feature_names: self.feature_names.clone() }
    }
}

fn check_aligned(dataset: &CostedDataset, predictions: &[u8]) -> Result<()> {
    if dataset.len() != predictions.len() {
        return Err(Error::Alignment { expected: dataset.len(), found: predictions.len() });
    }
    Ok(())
}

/// Cost of a single prediction.
pub fn example_cost(example: &AugmentedExample, prediction: u8) -> f64 {
    let y = f64::from(example.label);
    let c = f64::from(prediction);
    let k = &example.costs;
    y * (c * k.c_tp + (1.0 - c) * k.c_fn) + (1.0 - y) * (c * k.c_fp + (1.0 - c) * k.c_tn)
}

/// Sum of [`example_cost`] over the dataset.
pub fn total_cost(dataset: &CostedDataset, predictions: &[u8]) -> Result<f64> {
    check_aligned(dataset, predictions)?;
    Ok(slice_cost(dataset.examples(), predictions))
}

pub(crate) fn slice_cost(examples: &[AugmentedExample], predictions: &[u8]) -> f64 {
    examples.iter().zip(predictions).map(|(e, &p)| example_cost(e, p)).sum()
}

/// Total cost divided by the cost of misclassifying every example.
pub fn normalized_cost(dataset: &CostedDataset, predictions: &[u8]) -> Result<f64> {
    let cost = total_cost(dataset, predictions)?;
    let worst: f64 = dataset
        .examples()
        .iter()
        .map(|e| e.costs.misclassification_cost(e.label))
        .sum();
    if worst <= 0.0 {
        return Err(Error::Degenerate("the all-misclassified cost is zero".into()));
    }
    Ok(cost / worst)
}

/// Total cost of the constant classifier predicting `class`.
pub fn constant_cost(examples: &[AugmentedExample], class: u8) -> f64 {
    examples.iter().map(|e| e.cost(class)).sum()
}

/// Cost of the cheaper constant classifier and the class it predicts.
/// Ties go to class 0.
pub fn costless_class_cost(dataset: &CostedDataset) -> (f64, u8) {
    costless_of(dataset.examples())
}

pub(crate) fn costless_of(examples: &[AugmentedExample]) -> (f64, u8) {
    let c0 = constant_cost(examples, 0);
    let c1 = constant_cost(examples, 1);
    if c1 < c0 {
        (c1, 1)
    } else {
        (c0, 0)
    }
}

/// Fractional cost reduction relative to the costless class. Negative
/// when the classifier does worse than the best constant prediction.
pub fn savings(dataset: &CostedDataset, predictions: &[u8]) -> Result<f64> {
    check_aligned(dataset, predictions)?;
    savings_of(dataset.examples(), predictions)
}

pub(crate) fn savings_of(examples: &[AugmentedExample], predictions: &[u8]) -> Result<f64> {
    let (base, _) = costless_of(examples);
    if base <= 0.0 {
        return Err(Error::UndefinedSavings);
    }
    Ok((base - slice_cost(examples, predictions)) / base)
}
