//! CSV and metadata emission.

use std::fmt::Write as _;
use std::path::Path;

use deco_core::config::to_config_string;
use deco_core::simulator::RUN_POLICIES;
use deco_core::{Error, Result, RunResult};

pub const METRICS_HEADER: &str = "t,network_loss,cum_network_loss,avg_local_loss,cum_local_loss,\
disagreement_inc,cum_disagreement,min_wealth,max_pairwise_dist";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn metrics_csv(result: &RunResult) -> String {
    let mut out = String::with_capacity(200 * (result.rounds.len() + 1));
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for m in &result.rounds {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            m.t,
            fmt_f64(m.network_loss),
            fmt_f64(m.cum_network_loss),
            fmt_f64(m.avg_local_loss),
            fmt_f64(m.cum_local_loss),
            fmt_f64(m.disagreement_inc),
            fmt_f64(m.cum_disagreement),
            fmt_opt(m.min_wealth()),
            fmt_f64(m.max_pairwise_dist),
        );
    }
    out
}

/// Config echo followed by `meta.` lines. Parsing it as a config ignores
/// the `meta.` lines and reproduces the run.
pub fn meta_document(result: &RunResult) -> String {
    let md = &result.metadata;
    let mut out = to_config_string(&result.config);
    let mut put = |k: &str, v: String| {
        let _ = writeln!(out, "meta.{k} = {v}");
    };
    put("rho", fmt_f64(md.rho));
    put("no_communication", (md.rho >= 1.0).to_string());
    put("seed.graph", md.seeds.graph.to_string());
    put("seed.data", md.seeds.data.to_string());
    put("seed.shuffle", md.seeds.shuffle.to_string());
    if let Some(e) = md.edge_count {
        put("edges", e.to_string());
    }
    if let Some(a) = md.er_attempts {
        put("er_attempts", a.to_string());
    }
    if let Some(c) = md.sufficient_coefficient {
        put("sufficient_linear_coefficient", fmt_f64(c));
    }
    put("dim", md.dim.to_string());
    put("zero_feature_rows", md.zero_feature_rows.to_string());
    put("total_gossip_steps", md.total_gossip_steps.to_string());
    let n = result.n_agents();
    for (i, row) in md.gossip_matrix.chunks(n.max(1)).enumerate() {
        put(
            &format!("gossip_matrix.{i}"),
            row.iter()
                .map(|v| fmt_f64(*v))
                .collect::<Vec<_>>()
                .join(","),
        );
    }
    for (k, v) in RUN_POLICIES {
        put(&format!("policy.{k}"), (*v).to_string());
    }
    if let Some(w) = result.mean_final_wealth() {
        put("final.mean_wealth", fmt_f64(w));
    }
    put(
        "final.cum_network_loss",
        fmt_f64(result.cumulative_network_loss()),
    );
    put(
        "final.cum_local_loss",
        fmt_f64(result.cumulative_local_loss()),
    );
    put(
        "final.cum_disagreement",
        fmt_f64(result.cumulative_disagreement()),
    );
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| Error::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_run(dir: &Path, result: &RunResult) -> Result<()> {
    write_file(&dir.join("metrics.csv"), &metrics_csv(result))?;
    write_file(&dir.join("meta"), &meta_document(result))
}
