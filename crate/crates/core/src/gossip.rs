//! Gossip matrices, their contraction factor, and gossip-step schedules.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::potentials::PotentialKind;

/// Tolerance for row/column sums and symmetry of a gossip matrix.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Dense, symmetric, doubly stochastic mixing matrix together with its
/// contraction factor `rho`, the spectral radius of `W - 11ᵀ/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GossipMatrix {
    n: usize,
    /// Row-major `n * n` entries.
    w: Vec<f64>,
    rho: f64,
}

impl GossipMatrix {
    /// Metropolis-Hastings weights: `1 / (max(d_m, d_n) + 1)` on edges and the
    /// remaining mass on the diagonal.
    pub fn metropolis_hastings(graph: &Graph) -> Result<Self> {
        if !graph.is_connected() {
            return Err(Error::InvalidInput(
                "Metropolis-Hastings weights need a connected graph".into(),
            ));
        }
        let n = graph.n_agents();
        let degrees = graph.degrees();
        let mut w = vec![0.0; n * n];
        for &(a, b) in graph.edges() {
            let weight = 1.0 / (degrees[a].max(degrees[b]) + 1) as f64;
            w[a * n + b] = weight;
            w[b * n + a] = weight;
        }
        for i in 0..n {
            let off: f64 = graph.neighbors(i).iter().map(|&j| w[i * n + j]).sum();
            w[i * n + i] = 1.0 - off;
        }
        Self::from_row_major(n, w)
    }

    /// The degenerate "no communication" matrix. Its `rho` is 1 for `n >= 2`.
    pub fn identity(n: usize) -> Self {
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            w[i * n + i] = 1.0;
        }
        let rho = if n == 1 { 0.0 } else { 1.0 };
        Self { n, w, rho }
    }

    /// Validates and wraps an arbitrary row-major matrix.
    pub fn from_row_major(n: usize, w: Vec<f64>) -> Result<Self> {
        let rho = contraction_factor(n, &w)?;
        Ok(Self { n, w, rho })
    }

    pub fn n_agents(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.w[row * self.n + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.w[row * self.n..(row + 1) * self.n]
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.w
    }

    /// True when this matrix does no mixing (the identity).
    pub fn is_identity(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == if i == j { 1.0 } else { 0.0 }))
    }

    /// Applies `W^k` to per-agent state vectors, as `k` successive
    /// neighbour-averaging rounds.
    pub fn apply(&self, states: &[Vec<f64>], k: usize) -> Result<Vec<Vec<f64>>> {
        if states.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: states.len(),
            });
        }
        let width = states.first().map_or(0, Vec::len);
        if let Some(bad) = states.iter().find(|s| s.len() != width) {
            return Err(Error::DimensionMismatch {
                expected: width,
                got: bad.len(),
            });
        }
        if width == 0 {
            return Ok(states.to_vec());
        }
        let mut flat: Vec<f64> = states.iter().flatten().copied().collect();
        let mut scratch = vec![0.0; flat.len()];
        self.mix_flat(&mut flat, width, k, &mut scratch);
        Ok(flat.chunks(width).map(<[f64]>::to_vec).collect())
    }

    /// In-place `k` gossip rounds over an `n * width` row-major block.
    /// `scratch` must have the same length as `data`.
    pub(crate) fn mix_flat(&self, data: &mut [f64], width: usize, k: usize, scratch: &mut [f64]) {
        debug_assert_eq!(data.len(), self.n * width);
        debug_assert_eq!(scratch.len(), data.len());
        if width == 0 || self.is_identity() {
            return;
        }
        for _ in 0..k {
            for i in 0..self.n {
                let out = &mut scratch[i * width..(i + 1) * width];
                out.fill(0.0);
                for (j, &wij) in self.row(i).iter().enumerate() {
                    if wij == 0.0 {
                        continue;
                    }
                    let src = &data[j * width..(j + 1) * width];
                    for (o, s) in out.iter_mut().zip(src) {
                        *o += wij * s;
                    }
                }
            }
            data.copy_from_slice(scratch);
        }
    }
}

/// Spectral radius of `W - 11ᵀ/N` for a symmetric doubly stochastic `W`,
/// by full symmetric eigendecomposition.
pub fn contraction_factor(n: usize, w: &[f64]) -> Result<f64> {
    if n == 0 || w.len() != n * n {
        return Err(Error::InvalidInput(format!(
            "expected a {n}x{n} matrix, got {} entries",
            w.len()
        )));
    }
    if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidInput(
            "gossip weights must be finite and non-negative".into(),
        ));
    }
    for i in 0..n {
        let row: f64 = (0..n).map(|j| w[i * n + j]).sum();
        let col: f64 = (0..n).map(|j| w[j * n + i]).sum();
        if (row - 1.0).abs() > STOCHASTIC_TOL || (col - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::InvalidInput(format!(
                "not doubly stochastic at index {i}: row sum {row}, column sum {col}"
            )));
        }
        for j in i + 1..n {
            if (w[i * n + j] - w[j * n + i]).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidInput(format!("not symmetric at ({i}, {j})")));
            }
        }
    }
    let avg = 1.0 / n as f64;
    let centered = DMatrix::from_fn(n, n, |i, j| w[i * n + j] - avg);
    let eig = SymmetricEigen::new(centered);
    let rho = eig
        .eigenvalues
        .iter()
        .fold(0.0_f64, |acc, l| acc.max(l.abs()));
    Ok(rho.min(1.0))
}

/// Number of gossip rounds performed after learning round `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GossipSchedule {
    /// `q(t) = k`
    Constant(usize),
    /// `q(t) = ceil(ln(t + 1))`
    Logarithmic,
    /// `q(t) = ceil(c * t)`
    Linear(f64),
}

impl GossipSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GossipSchedule::Constant(0) => {
                Err(Error::Config("constant schedule needs k >= 1".into()))
            }
            GossipSchedule::Linear(c) if !(c.is_finite() && c > 0.0) => Err(Error::Config(
                format!("linear schedule needs c > 0, got {c}"),
            )),
            _ => Ok(()),
        }
    }

    /// `q(t)` for `t >= 1`; always at least 1.
    pub fn steps(&self, t: usize) -> usize {
        let raw = match *self {
            GossipSchedule::Constant(k) => return k.max(1),
            GossipSchedule::Logarithmic => ((t as f64) + 1.0).ln().ceil(),
            // shave a few ulps so that e.g. 0.1 * 30 rounds to 3, not 4
            GossipSchedule::Linear(c) => (c * t as f64 * (1.0 - 1e-12)).ceil(),
        };
        (raw as usize).max(1)
    }

    /// `q(1), ..., q(horizon)`.
    pub fn steps_up_to(&self, horizon: usize) -> Vec<usize> {
        (1..=horizon).map(|t| self.steps(t)).collect()
    }
}

impl fmt::Display for GossipSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GossipSchedule::Constant(k) => write!(f, "constant({k})"),
            GossipSchedule::Logarithmic => write!(f, "log"),
            GossipSchedule::Linear(c) => write!(f, "linear({c:?})"),
        }
    }
}

impl FromStr for GossipSchedule {
    type Err = Error;

    /// Accepts `constant(k)`, `log` and `linear(c)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let arg = |name: &str| -> Option<&str> {
            s.strip_prefix(name)?
                .strip_prefix('(')?
                .strip_suffix(')')
                .map(str::trim)
        };
        let schedule = if s == "log" || s == "logarithmic" {
            GossipSchedule::Logarithmic
        } else if s == "constant" {
            GossipSchedule::Constant(1)
        } else if let Some(k) = arg("constant") {
            GossipSchedule::Constant(
                k.parse()
                    .map_err(|_| Error::Config(format!("bad constant schedule argument `{k}`")))?,
            )
        } else if let Some(c) = arg("linear") {
            GossipSchedule::Linear(
                c.parse()
                    .map_err(|_| Error::Config(format!("bad linear schedule argument `{c}`")))?,
            )
        } else {
            return Err(Error::Config(format!("unknown gossip schedule `{s}`")));
        };
        schedule.validate()?;
        Ok(schedule)
    }
}

/// Smallest linear-schedule coefficient `c` for which `q(t) = ceil(c t)`
/// keeps the disagreement of the betting-function learner sublinear:
/// `-3 / (2 ln rho)` for the exponential potential and `-2 ln 2 / ln rho`
/// for KT.
pub fn sufficient_linear_coefficient(kind: PotentialKind, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidInput(format!(
            "no finite sufficient coefficient for rho = {rho}; need 0 < rho < 1"
        )));
    }
    let ln_rho = rho.ln();
    Ok(match kind {
        PotentialKind::Exponential => -3.0 / (2.0 * ln_rho),
        PotentialKind::KrichevskyTrofimov => -2.0 * std::f64::consts::LN_2 / ln_rho,
    })
}
