//! Round-synchronous simulation engine.
//!
//! Every round each agent decides, observes its own sample, updates locally,
//! and then all agents run `q(t)` gossip rounds on the gossiped quantities
//! (`G`, plus wealth for DECO-i, or the decisions themselves for DOGD).
//! Metrics evaluate every agent's loss at every agent's decision so the
//! disagreement term is exact rather than a Lipschitz surrogate.

use std::path::PathBuf;

use crate::data::{
    distribute_rounds, generate_synthetic, norm, parse_libsvm, scaled_features, sign, Streams,
    SyntheticConfig,
};
use crate::error::{Error, Result};
use crate::gossip::{sufficient_linear_coefficient, GossipMatrix, GossipSchedule};
use crate::graph::Graph;
use crate::learners::{
    deco_decide, deco_local_update, dogd_step, AgentState, CentralizedOracle, DecoVariant,
    LearnerKind,
};
use crate::potentials::{PotentialFamily, PotentialKind};
use crate::rng::SubSeeds;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Topology {
    Cycle,
    Complete,
    ErdosRenyi {
        p: f64,
    },
    /// No communication: the gossip matrix is the identity.
    Isolated,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synthetic {
        dim: usize,
        label_noise_sigma: f64,
        heterogeneity_sigma: f64,
    },
    Libsvm {
        path: PathBuf,
        dim_hint: Option<usize>,
    },
}

impl DataSource {
    pub fn synthetic_default() -> Self {
        DataSource::Synthetic {
            dim: SyntheticConfig::DEFAULT_DIM,
            label_noise_sigma: SyntheticConfig::DEFAULT_LABEL_NOISE,
            heterogeneity_sigma: SyntheticConfig::DEFAULT_HETEROGENEITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ComparatorSpec {
    /// `u*` for synthetic data, loss-only for datasets.
    Auto,
    LossOnly,
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub topology: Topology,
    pub schedule: GossipSchedule,
    pub learner: LearnerKind,
    pub data: DataSource,
    pub horizon: usize,
    pub n_agents: usize,
    pub comparator: ComparatorSpec,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            topology: Topology::Cycle,
            schedule: GossipSchedule::Constant(1),
            learner: LearnerKind::DecoII(PotentialFamily::kt(1.0).expect("positive endowment")),
            data: DataSource::synthetic_default(),
            horizon: 3000,
            n_agents: 20,
            comparator: ComparatorSpec::Auto,
            seed: 0,
        }
    }
}

impl SimConfig {
    /// Small profile for smoke runs.
    pub fn quick() -> Self {
        Self {
            horizon: 300,
            n_agents: 10,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be >= 1".into()));
        }
        if self.n_agents == 0 {
            return Err(Error::Config("need at least one agent".into()));
        }
        self.schedule.validate()?;
        self.learner.validate()?;
        if let DataSource::Synthetic { dim: 0, .. } = self.data {
            return Err(Error::Config("synthetic dim must be >= 1".into()));
        }
        Ok(())
    }
}

/// Everything a run needs besides the learner: topology, mixing matrix and
/// the per-agent data streams.
#[derive(Debug, Clone)]
pub struct Environment {
    pub graph: Option<Graph>,
    pub gossip: GossipMatrix,
    pub streams: Streams,
    pub dim: usize,
    pub comparator: Option<Vec<f64>>,
    pub u_star: Option<Vec<f64>>,
    pub seeds: SubSeeds,
    pub er_attempts: Option<usize>,
    pub zero_feature_rows: usize,
}

impl Environment {
    pub fn n_agents(&self) -> usize {
        self.streams.len()
    }

    /// Builds topology, gossip matrix and data from a config.
    pub fn prepare(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let seeds = SubSeeds::from_master(cfg.seed);
        let n = cfg.n_agents;
        let mut er_attempts = None;
        let graph = match cfg.topology {
            Topology::Cycle => Some(Graph::cycle(n)?),
            Topology::Complete => Some(Graph::complete(n)?),
            Topology::ErdosRenyi { p } => {
                let (g, attempts) = Graph::erdos_renyi_with_attempts(n, p, seeds.graph)?;
                er_attempts = Some(attempts);
                Some(g)
            }
            Topology::Isolated => None,
        };
        let gossip = match &graph {
            Some(g) => GossipMatrix::metropolis_hastings(g)?,
            None => GossipMatrix::identity(n),
        };

        let (streams, dim, u_star, zero_feature_rows) = match &cfg.data {
            DataSource::Synthetic {
                dim,
                label_noise_sigma,
                heterogeneity_sigma,
            } => {
                let data = generate_synthetic(&SyntheticConfig {
                    dim: *dim,
                    n_agents: n,
                    horizon: cfg.horizon,
                    label_noise_sigma: *label_noise_sigma,
                    heterogeneity_sigma: *heterogeneity_sigma,
                    seed: seeds.data,
                })?;
                (data.streams, *dim, Some(data.u_star), 0)
            }
            DataSource::Libsvm { path, dim_hint } => {
                let ds = parse_libsvm(path, *dim_hint)?;
                let streams = distribute_rounds(&ds.samples, n, cfg.horizon, seeds.shuffle)?;
                (streams, ds.dim, None, ds.zero_rows.len())
            }
        };

        let comparator = match &cfg.comparator {
            ComparatorSpec::Auto => u_star.clone(),
            ComparatorSpec::LossOnly => None,
            ComparatorSpec::Vector(u) => {
                if u.len() != dim {
                    return Err(Error::Config(format!(
                        "comparator has dimension {}, data has {dim}",
                        u.len()
                    )));
                }
                Some(u.clone())
            }
        };

        Ok(Self {
            graph,
            gossip,
            streams,
            dim,
            comparator,
            u_star,
            seeds,
            er_attempts,
            zero_feature_rows,
        })
    }

    /// An environment over caller-supplied streams and mixing matrix.
    pub fn from_parts(
        gossip: GossipMatrix,
        streams: Streams,
        comparator: Option<Vec<f64>>,
    ) -> Result<Self> {
        if streams.len() != gossip.n_agents() {
            return Err(Error::DimensionMismatch {
                expected: gossip.n_agents(),
                got: streams.len(),
            });
        }
        let dim = streams
            .iter()
            .flatten()
            .next()
            .map(|s| s.dim())
            .ok_or(Error::EmptyDataset)?;
        if let Some(bad) = streams.iter().flatten().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.dim(),
            });
        }
        if let Some(u) = &comparator {
            if u.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: u.len(),
                });
            }
        }
        Ok(Self {
            graph: None,
            gossip,
            streams,
            dim,
            comparator,
            u_star: None,
            seeds: SubSeeds::from_master(0),
            er_attempts: None,
            zero_feature_rows: 0,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundMetrics {
    pub t: usize,
    /// `(1/N) sum_n l_t(x_n)` with `l_t` the average of all agents' losses.
    pub network_loss: f64,
    /// `(1/N) sum_n l_n(x_n)`.
    pub avg_local_loss: f64,
    pub disagreement_inc: f64,
    pub cum_network_loss: f64,
    pub cum_local_loss: f64,
    pub cum_disagreement: f64,
    /// Post-gossip wealth (wealth-tracking learners only).
    pub per_agent_wealth: Option<Vec<f64>>,
    /// `ln F_t(|G_n|)` after gossip (coin-betting learners only).
    pub per_agent_log_potential_floor: Option<Vec<f64>>,
    pub max_pairwise_dist: f64,
    pub gossip_steps: usize,
}

impl RoundMetrics {
    pub fn min_wealth(&self) -> Option<f64> {
        self.per_agent_wealth
            .as_ref()
            .map(|w| w.iter().copied().fold(f64::INFINITY, f64::min))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetadata {
    pub rho: f64,
    pub seeds: SubSeeds,
    pub edge_count: Option<usize>,
    pub er_attempts: Option<usize>,
    /// Sufficient linear gossip coefficient for the learner's potential, when
    /// `0 < rho < 1`.
    pub sufficient_coefficient: Option<f64>,
    pub dim: usize,
    pub zero_feature_rows: usize,
    pub total_gossip_steps: usize,
    /// Row-major gossip matrix.
    pub gossip_matrix: Vec<f64>,
}

/// Conventions applied by every run, echoed into run metadata.
pub const RUN_POLICIES: &[(&str, &str)] = &[
    (
        "er_connectivity",
        "resample up to 100 times from one RNG stream, else error",
    ),
    (
        "gossip_matrix",
        "Metropolis-Hastings on the topology; identity for isolated",
    ),
    (
        "accumulator_sign",
        "G accumulates negative subgradients; bets point along +G",
    ),
    (
        "dogd_gossip",
        "DOGD gossips its decision vectors after each gradient step",
    ),
    (
        "dataset_dealing",
        "seeded shuffle, round-robin deal, cycling when exhausted",
    ),
    (
        "feature_normalization",
        "every feature vector scaled to unit l2 norm at ingestion",
    ),
    ("subgradient_at_kink", "sign(0) = 0"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub config: SimConfig,
    pub rounds: Vec<RoundMetrics>,
    pub streams: Streams,
    pub comparator: Option<Vec<f64>>,
    pub metadata: RunMetadata,
    /// `(1/N) sum_{t,n} <g_{n,t}, x_{n,t}>`.
    pub total_linear_loss: f64,
    pub final_wealth: Option<Vec<f64>>,
}

impl RunResult {
    pub fn horizon(&self) -> usize {
        self.rounds.len()
    }

    pub fn n_agents(&self) -> usize {
        self.streams.len()
    }

    pub fn final_round(&self) -> &RoundMetrics {
        self.rounds.last().expect("a run has at least one round")
    }

    pub fn cumulative_network_loss(&self) -> f64 {
        self.final_round().cum_network_loss
    }

    pub fn cumulative_local_loss(&self) -> f64 {
        self.final_round().cum_local_loss
    }

    pub fn cumulative_disagreement(&self) -> f64 {
        self.final_round().cum_disagreement
    }

    /// `sum_t l_t(u)` recomputed from the stored samples.
    pub fn comparator_loss(&self, u: &[f64]) -> Result<f64> {
        let dim = self.metadata.dim;
        if u.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: u.len(),
            });
        }
        let n = self.n_agents() as f64;
        Ok((0..self.horizon())
            .map(|t| {
                self.streams
                    .iter()
                    .map(|s| s[t].residual_unchecked(u).abs())
                    .sum::<f64>()
                    / n
            })
            .sum())
    }

    pub fn mean_final_wealth(&self) -> Option<f64> {
        self.final_wealth
            .as_ref()
            .map(|w| w.iter().sum::<f64>() / w.len() as f64)
    }

    /// `(round, agent)` pairs where wealth fell below `F_t(|G|) (1 - rel_tol)`.
    pub fn wealth_floor_violations(&self, rel_tol: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in &self.rounds {
            if let (Some(w), Some(f)) = (&r.per_agent_wealth, &r.per_agent_log_potential_floor) {
                for (agent, (wi, fi)) in w.iter().zip(f).enumerate() {
                    let ok = wi.ln() >= fi + (1.0 - rel_tol).ln();
                    if !ok {
                        out.push((r.t, agent));
                    }
                }
            }
        }
        out
    }
}

/// `sum_t (1/N) sum_n l_t(x_{n,t}) - sum_t l_t(u)`.
pub fn network_regret(result: &RunResult, u: &[f64]) -> Result<f64> {
    Ok(result.cumulative_network_loss() - result.comparator_loss(u)?)
}

/// `(1/N) sum_n sum_t [l_{n,t}(x_{n,t}) - l_{n,t}(u)]`.
pub fn local_regret(result: &RunResult, u: &[f64]) -> Result<f64> {
    Ok(result.cumulative_local_loss() - result.comparator_loss(u)?)
}

/// Evaluates `2 sqrt(N) sum_t L_{h_t} sum_{s<t} rho^{Q(s,t)}` with
/// `Q(s,t) = q(s) + ... + q(t)`. Computed in the log domain; returns 0 when
/// `rho = 0` or `horizon <= 1`.
pub fn disagreement_bound(
    schedule: &GossipSchedule,
    family: &PotentialFamily,
    rho: f64,
    horizon: usize,
    n_agents: usize,
) -> f64 {
    if horizon <= 1 || rho <= 0.0 {
        return 0.0;
    }
    let ln_rho = rho.ln();
    // prefix[k] = q(1) + ... + q(k)
    let mut prefix = vec![0.0_f64; horizon + 1];
    for t in 1..=horizon {
        prefix[t] = prefix[t - 1] + schedule.steps(t) as f64;
    }
    let mut total = 0.0;
    for t in 2..=horizon {
        let ln_l = family.log_lipschitz_bound(t);
        let inner: f64 = (1..t)
            .map(|s| (ln_l + (prefix[t] - prefix[s - 1]) * ln_rho).exp())
            .sum();
        total += inner;
    }
    2.0 * (n_agents as f64).sqrt() * total
}

/// `4 C sqrt(N) sqrt(T)`, the square-root disagreement bound that holds
/// once the per-round condition is met.
pub fn square_root_disagreement_bound(
    family: &PotentialFamily,
    horizon: usize,
    n_agents: usize,
) -> f64 {
    4.0 * family.disagreement_constant() * ((n_agents * horizon) as f64).sqrt()
}

/// Builds the environment from `cfg` and runs it.
pub fn run(cfg: &SimConfig) -> Result<RunResult> {
    let env = Environment::prepare(cfg)?;
    run_in(cfg, env)
}

enum Learners {
    Deco {
        variant: DecoVariant,
        family: PotentialFamily,
        states: Vec<AgentState>,
    },
    Dogd {
        eta0: f64,
        decisions: Vec<Vec<f64>>,
    },
    Oracle {
        oracle: CentralizedOracle,
        family: PotentialFamily,
    },
}

/// Runs `cfg.learner` for `cfg.horizon` rounds in a prepared environment.
pub fn run_in(cfg: &SimConfig, env: Environment) -> Result<RunResult> {
    cfg.validate()?;
    let n = env.n_agents();
    let dim = env.dim;
    let horizon = cfg.horizon;
    for (agent, s) in env.streams.iter().enumerate() {
        if s.len() < horizon {
            return Err(Error::StreamExhausted {
                agent,
                round: s.len() + 1,
            });
        }
    }

    let mut learners = match cfg.learner {
        LearnerKind::DecoI(f) | LearnerKind::DecoII(f) => {
            let variant = cfg.learner.deco_variant().expect("DECO learner");
            Learners::Deco {
                variant,
                family: f,
                states: vec![AgentState::new(variant, dim, f.epsilon()); n],
            }
        }
        LearnerKind::Dogd { eta0 } => Learners::Dogd {
            eta0,
            decisions: vec![vec![0.0; dim]; n],
        },
        LearnerKind::CentralizedOracle(f) => Learners::Oracle {
            oracle: CentralizedOracle::new(f, dim),
            family: f,
        },
    };

    let mut rounds = Vec::with_capacity(horizon);
    let mut cum = (0.0, 0.0, 0.0);
    let mut total_linear = 0.0;
    let mut total_gossip = 0;
    let mut buf = Vec::new();
    let mut scratch = Vec::new();

    for t in 1..=horizon {
        let samples: Vec<_> = env.streams.iter().map(|s| &s[t - 1]).collect();

        let decisions: Vec<Vec<f64>> = match &learners {
            Learners::Deco {
                variant,
                family,
                states,
            } => states
                .iter()
                .map(|s| deco_decide(*variant, family, s, t))
                .collect::<Result<_>>()
                .map_err(|e| e.at_round(t))?,
            Learners::Dogd { decisions, .. } => decisions.clone(),
            Learners::Oracle { oracle, .. } => {
                vec![oracle.decide(t).map_err(|e| e.at_round(t))?; n]
            }
        };
        if decisions.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Invariant {
                invariant: "finite-decision",
                detail: "a decision has a non-finite coordinate".into(),
            }
            .at_round(t));
        }

        // loss[n][m] = l_n(x_m)
        let loss: Vec<Vec<f64>> = samples
            .iter()
            .map(|s| {
                decisions
                    .iter()
                    .map(|x| s.residual_unchecked(x).abs())
                    .collect()
            })
            .collect();
        let nf = n as f64;
        let network_loss = loss.iter().map(|row| row.iter().sum::<f64>()).sum::<f64>() / (nf * nf);
        let avg_local_loss = (0..n).map(|i| loss[i][i]).sum::<f64>() / nf;
        let disagreement_inc = network_loss - avg_local_loss;
        cum.0 += network_loss;
        cum.1 += avg_local_loss;
        cum.2 += disagreement_inc;
        let mut max_pairwise_dist = 0.0_f64;
        for a in 0..n {
            for b in a + 1..n {
                let d2: f64 = decisions[a]
                    .iter()
                    .zip(&decisions[b])
                    .map(|(p, q)| (p - q).powi(2))
                    .sum();
                max_pairwise_dist = max_pairwise_dist.max(d2.sqrt());
            }
        }

        let subgradients: Vec<Vec<f64>> = samples
            .iter()
            .zip(&decisions)
            .map(|(s, x)| scaled_features(s, sign(s.residual_unchecked(x))))
            .collect();
        total_linear += subgradients
            .iter()
            .zip(&decisions)
            .map(|(g, x)| crate::data::dot(g, x))
            .sum::<f64>()
            / nf;

        let q = schedule_steps_for(&learners, &cfg.schedule, t);
        total_gossip += q;
        let (per_agent_wealth, per_agent_log_potential_floor) = match &mut learners {
            Learners::Deco {
                variant,
                family,
                states,
            } => {
                for ((state, x), g) in states.iter_mut().zip(&decisions).zip(&subgradients) {
                    deco_local_update(state, x, g).map_err(|e| e.at_round(t))?;
                }
                let track_wealth = *variant == DecoVariant::WealthBased;
                if track_wealth {
                    check_wealth(states.iter().filter_map(|s| s.wealth), t)?;
                }
                let width = dim + usize::from(track_wealth);
                buf.clear();
                for s in states.iter() {
                    buf.extend_from_slice(&s.g_acc);
                    if let Some(w) = s.wealth {
                        buf.push(w);
                    }
                }
                scratch.resize(buf.len(), 0.0);
                env.gossip.mix_flat(&mut buf, width, q, &mut scratch);
                for (s, chunk) in states.iter_mut().zip(buf.chunks(width)) {
                    s.g_acc.copy_from_slice(&chunk[..dim]);
                    if let Some(w) = s.wealth.as_mut() {
                        *w = chunk[dim];
                    }
                }
                if track_wealth {
                    check_wealth(states.iter().filter_map(|s| s.wealth), t)?;
                }
                let floors = potential_floors(family, t, states.iter().map(|s| &s.g_acc))?;
                let wealth = track_wealth.then(|| states.iter().filter_map(|s| s.wealth).collect());
                (wealth, Some(floors))
            }
            Learners::Dogd {
                eta0,
                decisions: xs,
            } => {
                for (x, g) in xs.iter_mut().zip(&subgradients) {
                    dogd_step(x, g, *eta0, t).map_err(|e| e.at_round(t))?;
                }
                buf.clear();
                xs.iter().for_each(|x| buf.extend_from_slice(x));
                scratch.resize(buf.len(), 0.0);
                env.gossip.mix_flat(&mut buf, dim, q, &mut scratch);
                for (x, chunk) in xs.iter_mut().zip(buf.chunks(dim)) {
                    x.copy_from_slice(chunk);
                }
                (None, None)
            }
            Learners::Oracle { oracle, family } => {
                let mut avg_g = vec![0.0; dim];
                for g in &subgradients {
                    for (a, gi) in avg_g.iter_mut().zip(g) {
                        *a += gi / nf;
                    }
                }
                oracle
                    .observe(&avg_g, &decisions[0])
                    .map_err(|e| e.at_round(t))?;
                let w = oracle.state().wealth.expect("oracle tracks wealth");
                check_wealth(std::iter::once(w), t)?;
                let floors = potential_floors(family, t, std::iter::once(&oracle.state().g_acc))?;
                (Some(vec![w]), Some(floors))
            }
        };

        rounds.push(RoundMetrics {
            t,
            network_loss,
            avg_local_loss,
            disagreement_inc,
            cum_network_loss: cum.0,
            cum_local_loss: cum.1,
            cum_disagreement: cum.2,
            per_agent_wealth,
            per_agent_log_potential_floor,
            max_pairwise_dist,
            gossip_steps: q,
        });
    }

    let final_wealth = match &learners {
        Learners::Deco { states, .. } => {
            states.iter().map(|s| s.wealth).collect::<Option<Vec<_>>>()
        }
        Learners::Oracle { oracle, .. } => oracle.state().wealth.map(|w| vec![w]),
        Learners::Dogd { .. } => None,
    };
    let rho = env.gossip.rho();
    let sufficient_coefficient = cfg
        .learner
        .potential()
        .and_then(|f| sufficient_linear_coefficient(f.kind(), rho).ok());
    let metadata = RunMetadata {
        rho,
        seeds: env.seeds,
        edge_count: env.graph.as_ref().map(Graph::edge_count),
        er_attempts: env.er_attempts,
        sufficient_coefficient,
        dim,
        zero_feature_rows: env.zero_feature_rows,
        total_gossip_steps: total_gossip,
        gossip_matrix: env.gossip.as_row_major().to_vec(),
    };
    let mut streams = env.streams;
    streams.iter_mut().for_each(|s| s.truncate(horizon));
    Ok(RunResult {
        config: cfg.clone(),
        rounds,
        streams,
        comparator: env.comparator,
        metadata,
        total_linear_loss: total_linear,
        final_wealth,
    })
}

fn schedule_steps_for(learners: &Learners, schedule: &GossipSchedule, t: usize) -> usize {
    match learners {
        // the oracle sees the exact average and never communicates
        Learners::Oracle { .. } => 0,
        _ => schedule.steps(t),
    }
}

fn check_wealth(wealth: impl Iterator<Item = f64>, t: usize) -> Result<()> {
    for (agent, w) in wealth.enumerate() {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::Invariant {
                invariant: "wealth-positive",
                detail: format!("agent {agent} has wealth {w}"),
            }
            .at_round(t));
        }
    }
    Ok(())
}

fn potential_floors<'a>(
    family: &PotentialFamily,
    t: usize,
    accs: impl Iterator<Item = &'a Vec<f64>>,
) -> Result<Vec<f64>> {
    accs.map(|g| family.log_value(t, norm(g)))
        .collect::<Result<_>>()
        .map_err(|e| e.at_round(t))
}

/// Convenience: the sufficient linear coefficient for a potential on a
/// given gossip matrix.
pub fn sufficient_schedule(kind: PotentialKind, gossip: &GossipMatrix) -> Result<GossipSchedule> {
    Ok(GossipSchedule::Linear(sufficient_linear_coefficient(
        kind,
        gossip.rho(),
    )?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{absolute_loss, Sample};

    fn cfg(learner: LearnerKind) -> SimConfig {
        SimConfig {
            learner,
            horizon: 120,
            n_agents: 6,
            ..SimConfig::default()
        }
    }

    fn kt() -> PotentialFamily {
        PotentialFamily::kt(1.0).unwrap()
    }

    fn all_learners() -> Vec<LearnerKind> {
        let e = PotentialFamily::exponential(1.0).unwrap();
        vec![
            LearnerKind::DecoI(kt()),
            LearnerKind::DecoII(kt()),
            LearnerKind::DecoI(e),
            LearnerKind::DecoII(e),
            LearnerKind::Dogd { eta0: 1.0 },
            LearnerKind::CentralizedOracle(kt()),
        ]
    }

    #[test]
    fn single_agent_has_no_disagreement() {
        for learner in all_learners() {
            let c = SimConfig {
                n_agents: 1,
                topology: Topology::Isolated,
                ..cfg(learner)
            };
            let r = run(&c).unwrap();
            assert!(
                r.rounds.iter().all(|m| m.disagreement_inc == 0.0),
                "{learner}"
            );
        }
    }

    #[test]
    fn identical_data_on_complete_graph_agrees() {
        let data = crate::data::generate_synthetic(&SyntheticConfig {
            heterogeneity_sigma: 0.0,
            label_noise_sigma: 0.0,
            ..SyntheticConfig::new(1, 80, 3)
        })
        .unwrap();
        let streams = vec![data.streams[0].clone(); 5];
        let w = GossipMatrix::metropolis_hastings(&Graph::complete(5).unwrap()).unwrap();
        for learner in [LearnerKind::DecoI(kt()), LearnerKind::DecoII(kt())] {
            let env = Environment::from_parts(w.clone(), streams.clone(), None).unwrap();
            let r = run_in(
                &SimConfig {
                    horizon: 80,
                    n_agents: 5,
                    ..cfg(learner)
                },
                env,
            )
            .unwrap();
            for m in &r.rounds {
                assert!(m.max_pairwise_dist < 1e-12);
                assert!(m.disagreement_inc.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        for learner in all_learners() {
            let c = SimConfig {
                topology: Topology::ErdosRenyi { p: 0.5 },
                seed: 99,
                ..cfg(learner)
            };
            assert_eq!(run(&c).unwrap(), run(&c).unwrap());
        }
    }

    #[test]
    fn cumulative_columns_are_prefix_sums() {
        let r = run(&cfg(LearnerKind::DecoI(kt()))).unwrap();
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for m in &r.rounds {
            a += m.network_loss;
            b += m.avg_local_loss;
            c += m.disagreement_inc;
            assert!((m.cum_network_loss - a).abs() < 1e-9);
            assert!((m.cum_local_loss - b).abs() < 1e-9);
            assert!((m.cum_disagreement - c).abs() < 1e-9);
        }
    }

    #[test]
    fn disagreement_matches_double_sum() {
        // replay the decisions of a DOGD run and recompute the double sum
        // (1/N^2) sum_{n,m} [l_n(x_m) - l_n(x_n)] independently
        let c = cfg(LearnerKind::Dogd { eta0: 0.5 });
        let env = Environment::prepare(&c).unwrap();
        let r = run_in(&c, env.clone()).unwrap();
        let n = env.n_agents();
        let mut xs = vec![vec![0.0; env.dim]; n];
        for (t, m) in r.rounds.iter().enumerate() {
            let mut total = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let s: &Sample = &env.streams[i][t];
                    total += absolute_loss(&xs[j], s).unwrap() - absolute_loss(&xs[i], s).unwrap();
                }
            }
            let double_sum = total / (n * n) as f64;
            assert!((double_sum - m.disagreement_inc).abs() < 1e-9);
            let gs: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    crate::data::absolute_loss_subgradient(&xs[i], &env.streams[i][t]).unwrap()
                })
                .collect();
            for (x, g) in xs.iter_mut().zip(&gs) {
                dogd_step(x, g, 0.5, t + 1).unwrap();
            }
            xs = env.gossip.apply(&xs, c.schedule.steps(t + 1)).unwrap();
        }
    }

    #[test]
    fn wealth_identity_on_complete_graph() {
        let c = SimConfig {
            topology: Topology::Complete,
            ..cfg(LearnerKind::DecoI(kt()))
        };
        let r = run(&c).unwrap();
        let mean = r.mean_final_wealth().unwrap();
        assert!((mean - (1.0 - r.total_linear_loss)).abs() < 1e-9);
    }

    #[test]
    fn regret_decomposition() {
        let r = run(&cfg(LearnerKind::DecoII(kt()))).unwrap();
        let u = r.comparator.clone().unwrap();
        let net = network_regret(&r, &u).unwrap();
        let loc = local_regret(&r, &u).unwrap();
        assert!((net - loc - r.cumulative_disagreement()).abs() < 1e-9);
        assert!(network_regret(&r, &[0.0]).is_err());
    }

    #[test]
    fn zero_comparator_regret_is_loss_minus_label_mass() {
        let r = run(&cfg(LearnerKind::DecoI(kt()))).unwrap();
        let labels: f64 = (0..r.horizon())
            .map(|t| r.streams.iter().map(|s| s[t].label.abs()).sum::<f64>() / r.n_agents() as f64)
            .sum();
        let zero = vec![0.0; r.metadata.dim];
        let reg = network_regret(&r, &zero).unwrap();
        assert!((reg - (r.cumulative_network_loss() - labels)).abs() < 1e-9);
    }

    #[test]
    fn noise_free_comparator_has_zero_loss() {
        let c = SimConfig {
            data: DataSource::Synthetic {
                dim: 10,
                label_noise_sigma: 0.0,
                heterogeneity_sigma: 1.0,
            },
            ..cfg(LearnerKind::DecoI(kt()))
        };
        let r = run(&c).unwrap();
        let u = r.comparator.clone().unwrap();
        assert!(r.comparator_loss(&u).unwrap() < 1e-12);
        assert!((network_regret(&r, &u).unwrap() - r.cumulative_network_loss()).abs() < 1e-9);
    }

    #[test]
    fn stream_exhaustion_is_reported() {
        let streams = vec![vec![Sample::new(vec![1.0], 1.0); 3]; 2];
        let env = Environment::from_parts(GossipMatrix::identity(2), streams, None).unwrap();
        let err = run_in(
            &SimConfig {
                horizon: 5,
                n_agents: 2,
                ..cfg(LearnerKind::DecoII(kt()))
            },
            env,
        )
        .unwrap_err();
        assert!(matches!(err, Error::StreamExhausted { round: 4, .. }));
    }

    #[test]
    fn oversized_subgradient_aborts_with_round() {
        // features with norm 2 break the unit-ball precondition once bets move
        let streams = vec![vec![Sample::new(vec![2.0, 0.0], 1.0); 4]];
        let env = Environment::from_parts(GossipMatrix::identity(1), streams, None).unwrap();
        let err = run_in(
            &SimConfig {
                horizon: 4,
                n_agents: 1,
                ..cfg(LearnerKind::DecoII(kt()))
            },
            env,
        )
        .unwrap_err();
        assert!(matches!(err, Error::AtRound { round: 1, .. }), "{err}");
        assert_eq!(err.class(), crate::error::ErrorClass::Invariant);
    }

    #[test]
    fn disagreement_bound_degenerate_cases() {
        let s = GossipSchedule::Linear(2.0);
        assert_eq!(disagreement_bound(&s, &kt(), 0.0, 100, 20), 0.0);
        assert_eq!(disagreement_bound(&s, &kt(), 0.5, 1, 20), 0.0);
    }

    #[test]
    fn disagreement_bound_below_square_root_form() {
        let e = PotentialFamily::exponential(1.0).unwrap();
        let rho = 1.0 / 3.0;
        let c = sufficient_linear_coefficient(PotentialKind::Exponential, rho).unwrap();
        let s = GossipSchedule::Linear(c);
        for horizon in [2, 10, 100, 500] {
            let b = disagreement_bound(&s, &e, rho, horizon, 20);
            // direct evaluation with explicit powers
            let q: Vec<f64> = (1..=horizon).map(|t| s.steps(t) as f64).collect();
            let mut direct = 0.0;
            for t in 2..=horizon {
                let tf = t as f64;
                let l = (1.0 / tf.sqrt())
                    * ((tf - 1.0).powi(2) / (2.0 * tf)).exp()
                    * (1.0 - 2.0 / (1.0 + std::f64::consts::E.powi(2)));
                for s_ in 1..t {
                    let big_q: f64 = q[s_ - 1..t].iter().sum();
                    direct += l * rho.powf(big_q);
                }
            }
            direct *= 2.0 * 20f64.sqrt();
            assert!(
                (b - direct).abs() <= 1e-12 * direct.max(1e-300),
                "{b} vs {direct}"
            );
            assert!(b <= square_root_disagreement_bound(&e, horizon, 20));
        }
    }

    #[test]
    fn libsvm_source_runs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.svm");
        std::fs::write(&path, "1 1:1 2:1\n-1 2:3\n0.5 1:2 3:1\n2 3:1\n").unwrap();
        let c = SimConfig {
            data: DataSource::Libsvm {
                path,
                dim_hint: None,
            },
            topology: Topology::Cycle,
            n_agents: 3,
            horizon: 10,
            ..cfg(LearnerKind::DecoI(kt()))
        };
        let r = run(&c).unwrap();
        assert_eq!(r.comparator, None);
        assert_eq!(r.metadata.dim, 3);
        assert_eq!(r.horizon(), 10);
    }

    #[test]
    fn comparator_dimension_is_checked() {
        let c = SimConfig {
            comparator: ComparatorSpec::Vector(vec![1.0; 3]),
            ..cfg(LearnerKind::DecoI(kt()))
        };
        assert!(matches!(Environment::prepare(&c), Err(Error::Config(_))));
    }
}
