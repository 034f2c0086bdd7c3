//! Desk-scale experiment presets.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use deco_core::simulator::{DataSource, Topology};
use deco_core::{Error, GossipSchedule, LearnerKind, PotentialFamily, Result, SimConfig};

use crate::{compare_csv, median, output, run_to_dir, sweep_dogd, CompareRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// All four DECO variants plus a DOGD learning-rate sweep.
    Sensitivity,
    /// DECO-ii on Erdos-Renyi graphs of increasing density.
    Connectivity,
    /// DECO-ii on a cycle under constant, logarithmic and linear gossip.
    GossipTradeoff,
    /// DECO variants, the oracle and a wide DOGD sweep on a LIBSVM dataset.
    RealData,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::Sensitivity,
        Preset::Connectivity,
        Preset::GossipTradeoff,
        Preset::RealData,
    ];
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Sensitivity => "sensitivity",
            Preset::Connectivity => "connectivity",
            Preset::GossipTradeoff => "gossip-tradeoff",
            Preset::RealData => "real-data",
        })
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.to_string() == s)
            .ok_or_else(|| Error::Config(format!("unknown preset `{s}`")))
    }
}

pub const CONNECTIVITY_P: [f64; 3] = [0.1, 0.3, 1.0];

fn decades(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 10f64.powi(k)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PresetRun {
    /// Runs sharing a group differ only in seed.
    pub group: String,
    pub config: SimConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PresetPlan {
    pub runs: Vec<PresetRun>,
    pub dogd_grid: Vec<f64>,
    pub dogd_base: SimConfig,
}

/// Expands a preset over `base` into concrete configs, one per group and
/// seed `base.seed .. base.seed + seeds`.
pub fn expand(preset: Preset, base: &SimConfig, seeds: u64) -> Result<PresetPlan> {
    if seeds == 0 {
        return Err(Error::Config("need at least one seed".into()));
    }
    let eps = base.learner.potential().map_or(1.0, |f| f.epsilon());
    let kt = PotentialFamily::kt(eps)?;
    let exp = PotentialFamily::exponential(eps)?;
    let mut groups: Vec<(String, SimConfig)> = Vec::new();
    let mut dogd_grid = Vec::new();
    match preset {
        Preset::Sensitivity => {
            for (name, learner) in [
                ("deco-i-exp", LearnerKind::DecoI(exp)),
                ("deco-i-kt", LearnerKind::DecoI(kt)),
                ("deco-ii-exp", LearnerKind::DecoII(exp)),
                ("deco-ii-kt", LearnerKind::DecoII(kt)),
            ] {
                groups.push((
                    name.into(),
                    SimConfig {
                        learner,
                        ..base.clone()
                    },
                ));
            }
            dogd_grid = decades(-3, 3);
        }
        Preset::Connectivity => {
            for p in CONNECTIVITY_P {
                groups.push((
                    format!("p-{p}"),
                    SimConfig {
                        learner: LearnerKind::DecoII(kt),
                        topology: Topology::ErdosRenyi { p },
                        ..base.clone()
                    },
                ));
            }
        }
        Preset::GossipTradeoff => {
            for schedule in [
                GossipSchedule::Constant(1),
                GossipSchedule::Logarithmic,
                GossipSchedule::Linear(0.1),
            ] {
                groups.push((
                    schedule.to_string(),
                    SimConfig {
                        learner: LearnerKind::DecoII(kt),
                        topology: Topology::Cycle,
                        schedule,
                        ..base.clone()
                    },
                ));
            }
        }
        Preset::RealData => {
            if !matches!(base.data, DataSource::Libsvm { .. }) {
                return Err(Error::Config(
                    "real-data needs `dataset = <libsvm file>`".into(),
                ));
            }
            for (name, learner) in [
                ("deco-i-kt", LearnerKind::DecoI(kt)),
                ("deco-ii-kt", LearnerKind::DecoII(kt)),
                ("oracle-kt", LearnerKind::CentralizedOracle(kt)),
            ] {
                groups.push((
                    name.into(),
                    SimConfig {
                        learner,
                        ..base.clone()
                    },
                ));
            }
            dogd_grid = decades(-3, 7);
        }
    }
    let mut runs = Vec::new();
    for (group, cfg) in groups {
        for s in 0..seeds {
            runs.push(PresetRun {
                group: group.clone(),
                config: SimConfig {
                    seed: base.seed.wrapping_add(s),
                    ..cfg.clone()
                },
            });
        }
    }
    Ok(PresetPlan {
        runs,
        dogd_grid,
        dogd_base: base.clone(),
    })
}

/// Executes a plan under `dir`: one directory per run, `summary.csv` with a
/// row per run, `medians.csv` per group, and `dogd-sweep/` when the preset
/// includes a sweep.
pub fn run_plan(plan: &PresetPlan, dir: &Path) -> Result<Vec<(String, f64)>> {
    let mut rows = Vec::with_capacity(plan.runs.len());
    let mut by_group: Vec<(String, Vec<f64>)> = Vec::new();
    for run in &plan.runs {
        let label = format!("{}/seed-{}", run.group, run.config.seed);
        let r = run_to_dir(&run.config, &dir.join(&label))?;
        let row = CompareRow::from_result(&label, &r)?;
        match by_group.iter_mut().find(|(g, _)| *g == run.group) {
            Some((_, v)) => v.push(row.cum_network_loss),
            None => by_group.push((run.group.clone(), vec![row.cum_network_loss])),
        }
        rows.push(row);
    }
    output::write_file(&dir.join("summary.csv"), &compare_csv(&rows))?;
    let medians: Vec<(String, f64)> = by_group.into_iter().map(|(g, v)| (g, median(&v))).collect();
    let mut csv = String::from("group,median_cum_network_loss\n");
    for (g, m) in &medians {
        csv.push_str(&format!("{g},{}\n", output::fmt_f64(*m)));
    }
    output::write_file(&dir.join("medians.csv"), &csv)?;
    if !plan.dogd_grid.is_empty() {
        sweep_dogd(&plan.dogd_base, &plan.dogd_grid, &dir.join("dogd-sweep"))?;
    }
    Ok(medians)
}
