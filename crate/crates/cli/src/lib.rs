//! Output writers, experiment presets and subcommand drivers for `deco`.

pub mod output;
pub mod presets;

use std::path::{Path, PathBuf};

use deco_core::config::ConfigBuilder;
use deco_core::simulator::{local_regret, network_regret};
use deco_core::{run, Error, LearnerKind, Result, RunResult, SimConfig};

pub const OUTPUT_ROOT_VAR: &str = "DECO_OUTPUT_ROOT";
pub const DEFAULT_OUTPUT_ROOT: &str = "runs";

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT))
}

/// Where a config comes from: an optional file, `key=value` overrides, and
/// the base profile.
#[derive(Debug, Clone, Default)]
pub struct ConfigSource {
    pub file: Option<PathBuf>,
    pub overrides: Vec<String>,
    pub quick: bool,
}

impl ConfigSource {
    pub fn builder(&self) -> Result<ConfigBuilder> {
        let base = if self.quick {
            SimConfig::quick()
        } else {
            SimConfig::default()
        };
        let mut b = ConfigBuilder::new(base);
        if let Some(path) = &self.file {
            b.merge_text(&read_to_string(path)?)?;
        }
        for o in &self.overrides {
            b.set_pair(o)?;
        }
        Ok(b)
    }

    pub fn resolve(&self) -> Result<SimConfig> {
        self.builder()?.build()
    }
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs one config and writes `metrics.csv` and `meta` into `dir`.
pub fn run_to_dir(cfg: &SimConfig, dir: &Path) -> Result<RunResult> {
    let result = run(cfg)?;
    output::write_run(dir, &result)?;
    Ok(result)
}

/// `(eta0, final cumulative network loss)` for each grid point, with the
/// base config's seeds held fixed.
pub fn sweep_dogd(base: &SimConfig, grid: &[f64], dir: &Path) -> Result<Vec<(f64, f64)>> {
    if grid.is_empty() {
        return Err(Error::Config("the eta0 grid is empty".into()));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &eta0 in grid {
        let cfg = SimConfig {
            learner: LearnerKind::Dogd { eta0 },
            ..base.clone()
        };
        let r = run_to_dir(&cfg, &dir.join(format!("eta0-{eta0:e}")))?;
        rows.push((eta0, r.cumulative_network_loss()));
    }
    let mut csv = String::from("eta0,cum_network_loss\n");
    for (eta0, loss) in &rows {
        csv.push_str(&format!(
            "{},{}\n",
            output::fmt_f64(*eta0),
            output::fmt_f64(*loss)
        ));
    }
    output::write_file(&dir.join("summary.csv"), &csv)?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub label: String,
    pub learner: String,
    pub schedule: String,
    pub seed: u64,
    pub cum_network_loss: f64,
    pub cum_local_loss: f64,
    pub cum_disagreement: f64,
    pub network_regret: Option<f64>,
    pub local_regret: Option<f64>,
}

impl CompareRow {
    pub fn from_result(label: &str, r: &RunResult) -> Result<Self> {
        let (net, loc) = match &r.comparator {
            Some(u) => (Some(network_regret(r, u)?), Some(local_regret(r, u)?)),
            None => (None, None),
        };
        Ok(Self {
            label: label.to_string(),
            learner: r.config.learner.to_string(),
            schedule: r.config.schedule.to_string(),
            seed: r.config.seed,
            cum_network_loss: r.cumulative_network_loss(),
            cum_local_loss: r.cumulative_local_loss(),
            cum_disagreement: r.cumulative_disagreement(),
            network_regret: net,
            local_regret: loc,
        })
    }
}

pub const COMPARE_HEADER: &str =
    "label,learner,schedule,seed,cum_network_loss,cum_local_loss,cum_disagreement,network_regret,local_regret";

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut out = format!("{COMPARE_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.label,
            r.learner,
            r.schedule,
            r.seed,
            output::fmt_f64(r.cum_network_loss),
            output::fmt_f64(r.cum_local_loss),
            output::fmt_f64(r.cum_disagreement),
            output::fmt_opt(r.network_regret),
            output::fmt_opt(r.local_regret),
        ));
    }
    out
}

/// Runs labelled configs that must share horizon and seed, writing each run
/// under `dir/<label>` and `dir/summary.csv`.
pub fn compare(configs: &[(String, SimConfig)], dir: &Path) -> Result<Vec<CompareRow>> {
    if configs.len() < 2 {
        return Err(Error::Config("compare needs at least two configs".into()));
    }
    let first = &configs[0].1;
    for (label, c) in &configs[1..] {
        if c.horizon != first.horizon {
            return Err(Error::Config(format!(
                "`{label}` has horizon {}, expected {}",
                c.horizon, first.horizon
            )));
        }
        if c.seed != first.seed {
            return Err(Error::Config(format!(
                "`{label}` has seed {}, expected {}",
                c.seed, first.seed
            )));
        }
    }
    let mut rows = Vec::with_capacity(configs.len());
    for (label, cfg) in configs {
        let r = run_to_dir(cfg, &dir.join(label))?;
        rows.push(CompareRow::from_result(label, &r)?);
    }
    output::write_file(&dir.join("summary.csv"), &compare_csv(&rows))?;
    Ok(rows)
}

/// Median of a non-empty slice (mean of the middle pair for even length).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}
