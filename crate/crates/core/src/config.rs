//! Flat `key = value` run configuration.
//!
//! Blank lines and `#` comments are skipped. Keys starting with `meta.` are
//! accepted and ignored so a run's metadata file can be fed back as a config.
//! `schedule = linear(auto)` resolves to the sufficient coefficient for the
//! configured potential and topology; the emitted form is always concrete.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::gossip::{sufficient_linear_coefficient, GossipMatrix, GossipSchedule};
use crate::graph::Graph;
use crate::learners::LearnerKind;
use crate::potentials::{PotentialFamily, PotentialKind};
use crate::rng::SubSeeds;
use crate::simulator::{ComparatorSpec, DataSource, SimConfig, Topology};

pub const KEYS: &[&str] = &[
    "learner",
    "potential",
    "epsilon",
    "eta0",
    "topology",
    "er_p",
    "schedule",
    "agents",
    "horizon",
    "data",
    "dim",
    "noise",
    "heterogeneity",
    "dataset",
    "dim_hint",
    "comparator",
    "seed",
];

/// Collects raw key/value pairs over a base profile and resolves them into a
/// [`SimConfig`].
#[derive(Debug, Clone)]
pub struct ConfigBuilder {
    base: SimConfig,
    values: BTreeMap<String, String>,
}

impl ConfigBuilder {
    pub fn new(base: SimConfig) -> Self {
        Self {
            base,
            values: BTreeMap::new(),
        }
    }

    /// Sets `key`, replacing any earlier value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        if key.starts_with("meta.") {
            return Ok(());
        }
        if !KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
        self.values
            .insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got `{pair}`")))?;
        self.set(k, v)
    }

    /// Reads a config file body. Repeating a key within one text is an error.
    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            let k = k.trim();
            if let Some(prev) = seen.insert(k.to_string(), i + 1) {
                return Err(Error::Config(format!(
                    "line {}: `{k}` already set on line {prev}",
                    i + 1
                )));
            }
            self.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::Config(format!("bad value for `{key}` ({v}): {e}")))
            })
            .transpose()
    }

    pub fn build(&self) -> Result<SimConfig> {
        let mut cfg = self.base.clone();
        if let Some(h) = self.get("horizon")? {
            cfg.horizon = h;
        }
        if let Some(n) = self.get("agents")? {
            cfg.n_agents = n;
        }
        if let Some(s) = self.get("seed")? {
            cfg.seed = s;
        }

        let base_family = cfg.learner.potential().unwrap_or(PotentialFamily::kt(1.0)?);
        let kind = self
            .get::<PotentialKind>("potential")?
            .unwrap_or(base_family.kind());
        let epsilon = self.get::<f64>("epsilon")?.unwrap_or(base_family.epsilon());
        let family = PotentialFamily::new(kind, epsilon)?;
        let base_eta0 = match cfg.learner {
            LearnerKind::Dogd { eta0 } => eta0,
            _ => 1.0,
        };
        let eta0 = self.get::<f64>("eta0")?.unwrap_or(base_eta0);
        let learner_name = self
            .values
            .get("learner")
            .map(String::as_str)
            .unwrap_or(cfg.learner.name());
        cfg.learner = match learner_name {
            "deco-i" => LearnerKind::DecoI(family),
            "deco-ii" => LearnerKind::DecoII(family),
            "oracle" => LearnerKind::CentralizedOracle(family),
            "dogd" => LearnerKind::Dogd { eta0 },
            other => return Err(Error::Config(format!("unknown learner `{other}`"))),
        };

        if let Some(top) = self.values.get("topology") {
            cfg.topology = match top.as_str() {
                "cycle" => Topology::Cycle,
                "complete" => Topology::Complete,
                "isolated" => Topology::Isolated,
                "er" | "erdos-renyi" => Topology::ErdosRenyi { p: 0.0 },
                other => return Err(Error::Config(format!("unknown topology `{other}`"))),
            };
        }
        if let Topology::ErdosRenyi { p } = &mut cfg.topology {
            if let Some(v) = self.get("er_p")? {
                *p = v;
            }
            if !(*p > 0.0 && *p <= 1.0) {
                return Err(Error::Config(format!("er_p must lie in (0, 1], got {p}")));
            }
        } else if self.values.contains_key("er_p") {
            return Err(Error::Config("`er_p` requires topology = er".into()));
        }

        let data_kind = match self.values.get("data") {
            Some(d) => d.clone(),
            None if self.values.contains_key("dataset") => "libsvm".into(),
            None => match cfg.data {
                DataSource::Synthetic { .. } => "synthetic".into(),
                DataSource::Libsvm { .. } => "libsvm".into(),
            },
        };
        cfg.data = match data_kind.as_str() {
            "synthetic" => {
                let (d0, n0, h0) = match cfg.data {
                    DataSource::Synthetic {
                        dim,
                        label_noise_sigma,
                        heterogeneity_sigma,
                    } => (dim, label_noise_sigma, heterogeneity_sigma),
                    DataSource::Libsvm { .. } => match DataSource::synthetic_default() {
                        DataSource::Synthetic {
                            dim,
                            label_noise_sigma,
                            heterogeneity_sigma,
                        } => (dim, label_noise_sigma, heterogeneity_sigma),
                        DataSource::Libsvm { .. } => unreachable!(),
                    },
                };
                DataSource::Synthetic {
                    dim: self.get("dim")?.unwrap_or(d0),
                    label_noise_sigma: self.get("noise")?.unwrap_or(n0),
                    heterogeneity_sigma: self.get("heterogeneity")?.unwrap_or(h0),
                }
            }
            "libsvm" => {
                let (p0, h0) = match &cfg.data {
                    DataSource::Libsvm { path, dim_hint } => (Some(path.clone()), *dim_hint),
                    DataSource::Synthetic { .. } => (None, None),
                };
                let path = self
                    .values
                    .get("dataset")
                    .map(PathBuf::from)
                    .or(p0)
                    .ok_or_else(|| Error::Config("data = libsvm needs `dataset`".into()))?;
                DataSource::Libsvm {
                    path,
                    dim_hint: self.get("dim_hint")?.or(h0),
                }
            }
            other => return Err(Error::Config(format!("unknown data source `{other}`"))),
        };

        if let Some(c) = self.values.get("comparator") {
            cfg.comparator = parse_comparator(c)?;
        }

        if let Some(s) = self.values.get("schedule") {
            cfg.schedule = match s.replace(' ', "").as_str() {
                "linear(auto)" => GossipSchedule::Linear(auto_coefficient(&cfg)?),
                other => other.parse()?,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_comparator(s: &str) -> Result<ComparatorSpec> {
    match s {
        "auto" => Ok(ComparatorSpec::Auto),
        "none" | "loss-only" => Ok(ComparatorSpec::LossOnly),
        list => list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad comparator entry `{v}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(ComparatorSpec::Vector),
    }
}

/// Contraction factor of the gossip matrix `cfg` would use.
pub fn topology_rho(cfg: &SimConfig) -> Result<f64> {
    let n = cfg.n_agents;
    let graph = match cfg.topology {
        Topology::Cycle => Graph::cycle(n)?,
        Topology::Complete => Graph::complete(n)?,
        Topology::ErdosRenyi { p } => {
            Graph::erdos_renyi(n, p, SubSeeds::from_master(cfg.seed).graph)?
        }
        Topology::Isolated => return Ok(GossipMatrix::identity(n).rho()),
    };
    Ok(GossipMatrix::metropolis_hastings(&graph)?.rho())
}

fn auto_coefficient(cfg: &SimConfig) -> Result<f64> {
    let family = cfg
        .learner
        .potential()
        .ok_or_else(|| Error::Config("linear(auto) needs a potential-based learner".into()))?;
    sufficient_linear_coefficient(family.kind(), topology_rho(cfg)?)
}

/// Parses a complete config text over the default profile.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    let mut b = ConfigBuilder::new(SimConfig::default());
    b.merge_text(text)?;
    b.build()
}

/// Renders every key so that `parse_config` reproduces `cfg` exactly.
pub fn to_config_string(cfg: &SimConfig) -> String {
    let mut out = String::new();
    let mut put = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    put("learner", cfg.learner.name().into());
    match cfg.learner {
        LearnerKind::Dogd { eta0 } => put("eta0", format!("{eta0:?}")),
        LearnerKind::DecoI(f) | LearnerKind::DecoII(f) | LearnerKind::CentralizedOracle(f) => {
            put("potential", f.kind().to_string());
            put("epsilon", format!("{:?}", f.epsilon()));
        }
    }
    match cfg.topology {
        Topology::Cycle => put("topology", "cycle".into()),
        Topology::Complete => put("topology", "complete".into()),
        Topology::Isolated => put("topology", "isolated".into()),
        Topology::ErdosRenyi { p } => {
            put("topology", "er".into());
            put("er_p", format!("{p:?}"));
        }
    }
    put("schedule", cfg.schedule.to_string());
    put("agents", cfg.n_agents.to_string());
    put("horizon", cfg.horizon.to_string());
    match &cfg.data {
        DataSource::Synthetic {
            dim,
            label_noise_sigma,
            heterogeneity_sigma,
        } => {
            put("data", "synthetic".into());
            put("dim", dim.to_string());
            put("noise", format!("{label_noise_sigma:?}"));
            put("heterogeneity", format!("{heterogeneity_sigma:?}"));
        }
        DataSource::Libsvm { path, dim_hint } => {
            put("data", "libsvm".into());
            put("dataset", path.display().to_string());
            if let Some(h) = dim_hint {
                put("dim_hint", h.to_string());
            }
        }
    }
    put(
        "comparator",
        match &cfg.comparator {
            ComparatorSpec::Auto => "auto".into(),
            ComparatorSpec::LossOnly => "loss-only".into(),
            ComparatorSpec::Vector(u) => u
                .iter()
                .map(|v| format!("{v:?}"))
                .collect::<Vec<_>>()
                .join(","),
        },
    );
    put("seed", cfg.seed.to_string());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_text_is_default() {
        assert_eq!(parse_config("# nothing\n\n").unwrap(), SimConfig::default());
    }

    #[test]
    fn roundtrip_default_and_variants() {
        let mut cfgs = vec![SimConfig::default(), SimConfig::quick()];
        cfgs.push(SimConfig {
            learner: LearnerKind::Dogd { eta0: 0.25 },
            topology: Topology::ErdosRenyi { p: 0.3 },
            schedule: GossipSchedule::Logarithmic,
            comparator: ComparatorSpec::Vector(vec![0.1, -0.2]),
            data: DataSource::Synthetic {
                dim: 2,
                label_noise_sigma: 0.0,
                heterogeneity_sigma: 0.5,
            },
            ..SimConfig::default()
        });
        cfgs.push(SimConfig {
            data: DataSource::Libsvm {
                path: "data/a9a".into(),
                dim_hint: Some(123),
            },
            comparator: ComparatorSpec::LossOnly,
            learner: LearnerKind::DecoI(PotentialFamily::exponential(0.5).unwrap()),
            ..SimConfig::default()
        });
        for c in cfgs {
            assert_eq!(parse_config(&to_config_string(&c)).unwrap(), c);
        }
    }

    #[test]
    fn meta_keys_are_ignored_and_unknown_keys_rejected() {
        let c = parse_config("meta.rho = 0.5\nhorizon = 10\n").unwrap();
        assert_eq!(c.horizon, 10);
        assert!(matches!(parse_config("horizn = 10"), Err(Error::Config(_))));
        assert!(parse_config("horizon = 10\nhorizon = 11").is_err());
        assert!(parse_config("horizon 10").is_err());
        assert!(parse_config("horizon = -1").is_err());
        assert!(parse_config("er_p = 0.5").is_err());
        assert!(parse_config("topology = er\ner_p = 0").is_err());
        assert!(parse_config("data = libsvm").is_err());
        assert!(parse_config("learner = sgd").is_err());
    }

    #[test]
    fn auto_schedule_resolves_to_sufficient_coefficient() {
        let c =
            parse_config("agents = 4\nlearner = deco-i\npotential = exp\nschedule = linear(auto)")
                .unwrap();
        // cycle(4) under Metropolis-Hastings has rho = 1/3
        let expected = -1.5 / (1.0_f64 / 3.0).ln();
        match c.schedule {
            GossipSchedule::Linear(v) => assert!((v - expected).abs() < 1e-12),
            other => panic!("{other}"),
        }
        assert!(parse_config("learner = dogd\nschedule = linear(auto)").is_err());
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut b = ConfigBuilder::new(SimConfig::quick());
        b.merge_text("horizon = 50\nseed = 3").unwrap();
        b.set_pair("horizon=70").unwrap();
        let c = b.build().unwrap();
        assert_eq!((c.horizon, c.n_agents, c.seed), (70, 10, 3));
        assert!(b.set_pair("horizon").is_err());
    }

    proptest! {
        #[test]
        fn roundtrip_numeric_fields(
            eps in 1e-6f64..1e3,
            noise in 0.0f64..2.0,
            het in 0.0f64..2.0,
            c in 0.01f64..5.0,
            seed: u64,
            exp: bool,
        ) {
            let kind = if exp { PotentialKind::Exponential } else { PotentialKind::KrichevskyTrofimov };
            let cfg = SimConfig {
                learner: LearnerKind::DecoII(PotentialFamily::new(kind, eps).unwrap()),
                schedule: GossipSchedule::Linear(c),
                data: DataSource::Synthetic { dim: 3, label_noise_sigma: noise, heterogeneity_sigma: het },
                seed,
                ..SimConfig::default()
            };
            prop_assert_eq!(parse_config(&to_config_string(&cfg)).unwrap(), cfg);
        }
    }
}
