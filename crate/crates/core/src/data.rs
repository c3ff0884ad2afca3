//! Seeded train/validation/test partitioning.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::cost_model::CostedDataset;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub valid_frac: f64,
    pub test_frac: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { train_frac: 0.5, valid_frac: 0.25, test_frac: 0.25, seed: 0 }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let fr = [self.train_frac, self.valid_frac, self.test_frac];
        if fr.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::Config(format!("split fractions must be positive, got {fr:?}")));
        }
        if (fr.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split fractions must sum to 1, got {fr:?}")));
        }
        Ok(())
    }

    /// `(train, valid, test)` sizes for `n` rows: validation and test are
    /// floor-rounded, the remainder goes to training.
    pub fn sizes(&self, n: usize) -> Result<(usize, usize, usize)> {
        self.validate()?;
        // the epsilon keeps exact products such as 0.25 * 100 from rounding down
        let valid = libm::floor(self.valid_frac * n as f64 + 1e-9) as usize;
        let test = libm::floor(self.test_frac * n as f64 + 1e-9) as usize;
        let train = n.saturating_sub(valid + test);
        if n < 4 || valid == 0 || test == 0 || train == 0 {
            return Err(Error::Split(format!(
                "{n} rows cannot be split into non-empty parts ({train}, {valid}, {test})"
            )));
        }
        Ok((train, valid, test))
    }
}

/// Row indices of each part, into the source dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub train: CostedDataset,
    pub valid: CostedDataset,
    pub test: CostedDataset,
    pub indices: SplitIndices,
}

/// Uniform random partition of `0..n`. Each part is returned sorted.
pub fn split_indices(n: usize, spec: &SplitSpec) -> Result<SplitIndices> {
    let (train, valid, _) = spec.sizes(n)?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::stream(spec.seed, 0));
    let mut test = idx.split_off(train + valid);
    let mut valid = idx.split_off(train);
    let mut train = idx;
    train.sort_unstable();
    valid.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, valid, test })
}

pub fn split(dataset: &CostedDataset, spec: &SplitSpec) -> Result<DatasetBundle> {
    let indices = split_indices(dataset.len(), spec)?;
    Ok(DatasetBundle {
        train: dataset.subset(&indices.train)?,
        valid: dataset.subset(&indices.valid)?,
        test: dataset.subset(&indices.test)?,
        indices,
    })
}
