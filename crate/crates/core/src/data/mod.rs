//! Per-agent loss streams for online linear regression under the absolute
//! loss `|<x, z> - y|`.

mod libsvm;
mod synthetic;

use rand::seq::SliceRandom;

pub use libsvm::{parse_libsvm, parse_libsvm_str, to_libsvm_string, LibsvmDataset};
pub use synthetic::{generate_synthetic, SyntheticConfig, SyntheticData};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Feature vectors within this distance of unit norm are treated as already
/// normalized and left untouched, which makes normalization idempotent.
const UNIT_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: f64,
}

impl Sample {
    pub fn new(features: Vec<f64>, label: f64) -> Self {
        Self { features, label }
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }

    /// `<x, z> - y`, without a dimension check.
    pub(crate) fn residual_unchecked(&self, x: &[f64]) -> f64 {
        dot(x, &self.features) - self.label
    }

    /// `<x, z> - y`.
    pub fn residual(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.residual_unchecked(x))
    }
}

/// Per-agent sample sequences, indexed `[agent][round - 1]`.
pub type Streams = Vec<Vec<Sample>>;

pub fn absolute_loss(x: &[f64], sample: &Sample) -> Result<f64> {
    Ok(sample.residual(x)?.abs())
}

/// `sign(<x, z> - y) * z`, with `sign(0) = 0`.
pub fn absolute_loss_subgradient(x: &[f64], sample: &Sample) -> Result<Vec<f64>> {
    let r = sample.residual(x)?;
    Ok(scaled_features(sample, sign(r)))
}

pub(crate) fn scaled_features(sample: &Sample, s: f64) -> Vec<f64> {
    sample.features.iter().map(|z| s * z).collect()
}

pub(crate) fn sign(r: f64) -> f64 {
    if r > 0.0 {
        1.0
    } else if r < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Scales `v` to unit l2 norm in place. Returns `false` for the zero vector,
/// which is left as is.
pub(crate) fn normalize(v: &mut [f64]) -> bool {
    let n = norm(v);
    if n == 0.0 {
        return false;
    }
    if (n - 1.0).abs() > UNIT_NORM_TOL {
        v.iter_mut().for_each(|c| *c /= n);
    }
    true
}

/// Shuffles `samples` with `seed` and deals them round-robin: agent `n`
/// receives dealt item `t * N + n` at round `t + 1`, cycling through the
/// shuffled dataset when `N * T` exceeds its size.
pub fn distribute_rounds(
    samples: &[Sample],
    n_agents: usize,
    horizon: usize,
    seed: u64,
) -> Result<Streams> {
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if n_agents == 0 {
        return Err(Error::InvalidInput("need at least one agent".into()));
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut rng_from_seed(seed));
    let mut streams = vec![Vec::with_capacity(horizon); n_agents];
    for t in 0..horizon {
        for (n, stream) in streams.iter_mut().enumerate() {
            stream.push(samples[order[(t * n_agents + n) % order.len()]].clone());
        }
    }
    Ok(streams)
}
