//! Training-set variants: balanced under-sampling, cost-proportionate
//! rejection sampling and cost-proportionate over-sampling.
//!
//! The misclassification weight of an example is `c_fn` for positives and
//! `c_fp` for negatives. Each method has an `*_indices` form returning row
//! indices into the source and a dataset form built on it.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::cost_model::CostedDataset;
use crate::error::{Error, Result};
use crate::rng;

/// Maximum number of redraws when rejection sampling keeps nothing.
pub const MAX_REJECTION_RETRIES: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMethod {
    Undersample,
    Rejection,
    Oversample,
}

impl SamplingMethod {
    /// One-letter training-set code (`u`, `r`, `o`).
    pub fn code(self) -> char {
        match self {
            Self::Undersample => 'u',
            Self::Rejection => 'r',
            Self::Oversample => 'o',
        }
    }

    pub fn from_code(c: &str) -> Option<Self> {
        match c {
            "u" | "undersample" => Some(Self::Undersample),
            "r" | "rejection" => Some(Self::Rejection),
            "o" | "oversample" => Some(Self::Oversample),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingSpec {
    pub method: SamplingMethod,
    pub seed: u64,
}

/// Misclassification weight of every example.
pub fn misclassification_weights(dataset: &CostedDataset) -> Vec<f64> {
    dataset
        .examples()
        .iter()
        .map(|e| e.costs.misclassification_cost(e.label))
        .collect()
}

/// All minority rows plus an equally sized uniform sample of the majority,
/// returned in source order.
pub fn undersample_indices(dataset: &CostedDataset, seed: u64) -> Result<Vec<usize>> {
    let labels = dataset.labels();
    let pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 1).collect();
    let neg: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 0).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Sampling("under-sampling needs both classes".into()));
    }
    let (minority, majority) = if pos.len() <= neg.len() { (pos, neg) } else { (neg, pos) };
    let mut rng = rng::stream(seed, 0);
    let picked = index::sample(&mut rng, majority.len(), minority.len());
    let mut out = minority;
    out.extend(picked.iter().map(|i| majority[i]));
    out.sort_unstable();
    Ok(out)
}

pub fn undersample(dataset: &CostedDataset, seed: u64) -> Result<CostedDataset> {
    dataset.subset(&undersample_indices(dataset, seed)?)
}

/// Keeps row `i` independently with probability `w_i / max_j w_j`. An
/// empty outcome is redrawn from the next substream, up to
/// [`MAX_REJECTION_RETRIES`] times.
pub fn rejection_indices(dataset: &CostedDataset, seed: u64) -> Result<Vec<usize>> {
    let w = misclassification_weights(dataset);
    let max = w.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Err(Error::Sampling("all misclassification weights are zero".into()));
    }
    for attempt in 0..=MAX_REJECTION_RETRIES {
        let mut rng = rng::stream(seed, attempt);
        let kept: Vec<usize> = (0..w.len())
            .filter(|&i| {
                let p = w[i] / max;
                // draw for every row so the stream position is row-aligned
                let u: f64 = rng.random();
                u < p
            })
            .collect();
        if !kept.is_empty() {
            return Ok(kept);
        }
    }
    Err(Error::Sampling(format!(
        "rejection sampling kept no example after {MAX_REJECTION_RETRIES} retries"
    )))
}

pub fn rejection_sample(dataset: &CostedDataset, seed: u64) -> Result<CostedDataset> {
    dataset.subset(&rejection_indices(dataset, seed)?)
}

/// Number of copies of each row: `round_half_up(w_i / w_min)` with at
/// least one copy, where `w_min` is the smallest positive weight.
pub fn oversample_counts(dataset: &CostedDataset) -> Result<Vec<usize>> {
    let w = misclassification_weights(dataset);
    let min = w.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::Sampling("no positive misclassification weight".into()));
    }
    Ok(w.iter()
        .map(|&v| (libm::floor(v / min + 0.5) as usize).max(1))
        .collect())
}

/// Row indices of the over-sampled set; copies are adjacent.
pub fn oversample_indices(dataset: &CostedDataset) -> Result<Vec<usize>> {
    let counts = oversample_counts(dataset)?;
    Ok(counts
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| core::iter::repeat_n(i, c))
        .collect())
}

pub fn oversample(dataset: &CostedDataset) -> Result<CostedDataset> {
    dataset.subset(&oversample_indices(dataset)?)
}

/// Dispatches on `spec.method`; the seed is ignored by over-sampling.
pub fn resample_indices(dataset: &CostedDataset, spec: &SamplingSpec) -> Result<Vec<usize>> {
    match spec.method {
        SamplingMethod::Undersample => undersample_indices(dataset, spec.seed),
        SamplingMethod::Rejection => rejection_indices(dataset, spec.seed),
        SamplingMethod::Oversample => oversample_indices(dataset),
    }
}

pub fn resample(dataset: &CostedDataset, spec: &SamplingSpec) -> Result<CostedDataset> {
    dataset.subset(&resample_indices(dataset, spec)?)
}
