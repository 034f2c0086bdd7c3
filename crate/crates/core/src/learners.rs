//! Per-agent decision rules.
//!
//! DECO-i bets a fraction `beta_t(|G|)` of its tracked wealth along `G`;
//! DECO-ii replaces the wealth with the betting function
//! `h_t(|G|) = beta_t(|G|) F_{t-1}(|G|)` and gossips only `G`. `G` holds the
//! accumulated *negative* subgradients, so bets along `+G` descend the loss.

use std::fmt;

use crate::data::{dot, norm};
use crate::error::{Error, Result};
use crate::potentials::PotentialFamily;

/// Slack on the unit-ball precondition for subgradients.
pub const SUBGRADIENT_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LearnerKind {
    DecoI(PotentialFamily),
    DecoII(PotentialFamily),
    Dogd { eta0: f64 },
    CentralizedOracle(PotentialFamily),
}

impl LearnerKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LearnerKind::Dogd { eta0 } if !(eta0.is_finite() && eta0 > 0.0) => {
                Err(Error::Config(format!("DOGD needs eta0 > 0, got {eta0}")))
            }
            _ => Ok(()),
        }
    }

    pub fn potential(&self) -> Option<PotentialFamily> {
        match *self {
            LearnerKind::DecoI(f) | LearnerKind::DecoII(f) | LearnerKind::CentralizedOracle(f) => {
                Some(f)
            }
            LearnerKind::Dogd { .. } => None,
        }
    }

    pub fn deco_variant(&self) -> Option<DecoVariant> {
        match self {
            LearnerKind::DecoI(_) => Some(DecoVariant::WealthBased),
            LearnerKind::DecoII(_) => Some(DecoVariant::BettingFunction),
            _ => None,
        }
    }

    /// Short name used in configs and reports.
    pub fn name(&self) -> &'static str {
        match self {
            LearnerKind::DecoI(_) => "deco-i",
            LearnerKind::DecoII(_) => "deco-ii",
            LearnerKind::Dogd { .. } => "dogd",
            LearnerKind::CentralizedOracle(_) => "oracle",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LearnerKind::Dogd { eta0 } => write!(f, "dogd(eta0={eta0})"),
            other => write!(
                f,
                "{}-{}",
                other.name(),
                other.potential().map(|p| p.kind()).unwrap()
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoVariant {
    /// DECO-i
    WealthBased,
    /// DECO-ii
    BettingFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    /// Accumulated negative subgradients `G`.
    pub g_acc: Vec<f64>,
    /// Tracked wealth; `None` for the betting-function variant.
    pub wealth: Option<f64>,
}

impl AgentState {
    pub fn new(variant: DecoVariant, dim: usize, epsilon: f64) -> Self {
        Self {
            g_acc: vec![0.0; dim],
            wealth: match variant {
                DecoVariant::WealthBased => Some(epsilon),
                DecoVariant::BettingFunction => None,
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.g_acc.len()
    }
}

/// Decision of round `t` from the post-gossip state of round `t - 1`.
pub fn deco_decide(
    variant: DecoVariant,
    family: &PotentialFamily,
    state: &AgentState,
    t: usize,
) -> Result<Vec<f64>> {
    if t < 1 {
        return Err(Error::Precondition(format!(
            "rounds start at 1, got t = {t}"
        )));
    }
    let g_norm = norm(&state.g_acc);
    if g_norm == 0.0 {
        return Ok(vec![0.0; state.dim()]);
    }
    let amount = match variant {
        DecoVariant::WealthBased => {
            let wealth = state.wealth.ok_or_else(|| {
                Error::Precondition("wealth-based decision needs a wealth".into())
            })?;
            family.betting_fraction(t, g_norm)? * wealth
        }
        DecoVariant::BettingFunction => family.betting_function(t, g_norm)?,
    };
    let scale = amount / g_norm;
    Ok(state.g_acc.iter().map(|g| scale * g).collect())
}

/// Local (pre-gossip) update: `G <- G - g` and, when wealth is tracked,
/// `Wealth <- Wealth - <g, x>`.
pub fn deco_local_update(state: &mut AgentState, x: &[f64], g: &[f64]) -> Result<()> {
    check_subgradient(g, state.dim())?;
    if x.len() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            got: x.len(),
        });
    }
    if let Some(w) = state.wealth.as_mut() {
        *w -= dot(g, x);
    }
    for (acc, gi) in state.g_acc.iter_mut().zip(g) {
        *acc -= gi;
    }
    Ok(())
}

/// `x <- x - (eta0 / sqrt(t)) g`.
pub fn dogd_step(x: &mut [f64], g: &[f64], eta0: f64, t: usize) -> Result<()> {
    if t < 1 {
        return Err(Error::Precondition(format!(
            "rounds start at 1, got t = {t}"
        )));
    }
    if g.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: g.len(),
        });
    }
    let eta = eta0 / (t as f64).sqrt();
    for (xi, gi) in x.iter_mut().zip(g) {
        *xi -= eta * gi;
    }
    Ok(())
}

fn check_subgradient(g: &[f64], dim: usize) -> Result<()> {
    if g.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: g.len(),
        });
    }
    let n = norm(g);
    if n.is_nan() || n > 1.0 + SUBGRADIENT_NORM_TOL {
        return Err(Error::Precondition(format!(
            "subgradient norm {n} exceeds 1; coin outcomes must lie in the unit ball"
        )));
    }
    Ok(())
}

/// A single wealth-based coin bettor fed the network-average subgradient.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralizedOracle {
    family: PotentialFamily,
    state: AgentState,
}

impl CentralizedOracle {
    pub fn new(family: PotentialFamily, dim: usize) -> Self {
        Self {
            state: AgentState::new(DecoVariant::WealthBased, dim, family.epsilon()),
            family,
        }
    }

    pub fn state(&self) -> &AgentState {
        &self.state
    }

    pub fn decide(&self, t: usize) -> Result<Vec<f64>> {
        deco_decide(DecoVariant::WealthBased, &self.family, &self.state, t)
    }

    pub fn observe(&mut self, avg_g: &[f64], x: &[f64]) -> Result<()> {
        deco_local_update(&mut self.state, x, avg_g)
    }
}

/// One oracle round for a subgradient known in advance: returns the decision
/// and the next state.
pub fn oracle_step(
    family: &PotentialFamily,
    state: &AgentState,
    avg_g: &[f64],
    t: usize,
) -> Result<(Vec<f64>, AgentState)> {
    let x = deco_decide(DecoVariant::WealthBased, family, state, t)?;
    let mut next = state.clone();
    deco_local_update(&mut next, &x, avg_g)?;
    Ok((x, next))
}
