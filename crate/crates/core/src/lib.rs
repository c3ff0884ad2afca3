//! Ensembles of example-dependent cost-sensitive decision trees.
//!
//! Every example carries its own 2x2 cost matrix. The crate provides the
//! cost accounting used to score classifiers ([`cost_model`]), the
//! cost-sensitive tree learner ([`csdt`]), the random inducers and
//! combiners that turn many trees into an ensemble ([`inducers`],
//! [`combiners`], [`ensemble`]), training-set resampling ([`sampling`]),
//! cost-insensitive baselines ([`baselines`]), Monte-Carlo checks of the
//! ensemble savings bound ([`theory`]) and the benchmark statistics
//! ([`evaluation`]).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel execution live in the `costforest` companion crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod baselines;
pub mod combiners;
pub mod cost_builders;
pub mod cost_model;
pub mod csdt;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod evaluation;
pub mod inducers;
pub mod rng;
pub mod sampling;
pub mod synthetic;
pub mod theory;

pub use cost_model::{AugmentedExample, CostMatrixRow, CostedDataset, Reasonableness};
pub use error::{Error, Result};
