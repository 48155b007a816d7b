//! Config-driven experiments.
//!
//! A run validates its [`ExperimentConfig`], writes `metadata.json` with
//! status `incomplete`, computes the experiment, writes its tables and then
//! rewrites the metadata with status `complete`. Results depend only on the
//! config (including the seed), never on the number of worker threads.

pub mod analysis;
pub mod config;
pub mod emit;
pub mod experiments;

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::avalanche::HorizonPolicy;
use crate::error::{Error, Result};
use crate::format::export_network;
use crate::rng::RandomSource;

pub use analysis::{analyze_network, AttractorRow, NetworkAnalysis, NetworkRow};
pub use config::{
    AvalancheParams, BiasWeighting, Experiment, ExperimentConfig, PolicyFlags, SamplingParams,
    StartState,
};
pub use emit::{Emitter, OutputFormat};
pub use experiments::Context;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    pub format: OutputFormat,
    /// Existing avalanche table to analyse instead of simulating
    /// (`ratio_test` and `avalanche` only).
    pub avalanche_input: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub tool: String,
    pub schema_version: u32,
    pub kind: String,
    pub seed: Option<u64>,
    pub status: String,
    pub horizon_policy: HorizonPolicy,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
    pub config: ExperimentConfig,
}

/// What a run wrote, plus a few human-readable summary lines.
#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub outputs: Vec<PathBuf>,
    pub lines: Vec<String>,
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

pub fn run_config(cfg: &ExperimentConfig, opts: &RunOptions, out_dir: &Path) -> Result<RunReport> {
    cfg.validate()?;
    let seed = cfg.require_seed()?;
    let mut emitter = Emitter::new(out_dir, opts.format)?;
    let mut meta = Metadata {
        tool: format!("rbn {}", env!("CARGO_PKG_VERSION")),
        schema_version: cfg.schema_version,
        kind: cfg.experiment.kind().to_string(),
        seed: cfg.seed,
        status: "incomplete".into(),
        horizon_policy: cfg.policy.horizon,
        outputs: Vec::new(),
        notes: Vec::new(),
        config: cfg.clone(),
    };
    emitter.document("metadata", &meta)?;

    let src = RandomSource::new(seed);
    let ctx = Context {
        src: &src,
        sampling: &cfg.sampling,
        policy: &cfg.policy,
        threads: opts.threads,
    };
    let mut lines = Vec::new();
    match &cfg.experiment {
        Experiment::Ensemble {
            n_networks,
            families,
        } => {
            let (outcome, summary) = experiments::run_ensemble(&ctx, families, *n_networks)?;
            emitter.table("networks", &outcome.networks)?;
            emitter.table("attractors", &outcome.attractors)?;
            emitter.table("summary", &summary)?;
            for s in &summary {
                lines.push(format!(
                    "{}: DA={} SA={} b={} ({} networks, {} failed)",
                    s.family,
                    fmt_opt(s.da_mean),
                    fmt_opt(s.sa_mean),
                    fmt_opt(s.b_mean),
                    s.n_networks,
                    s.n_failed
                ));
            }
        }
        Experiment::CriticalScan {
            n_networks,
            n_nodes,
            k_min,
            k_max,
        } => {
            let (outcome, rows) =
                experiments::run_critical_scan(&ctx, *n_networks, *n_nodes, *k_min, *k_max)?;
            emitter.table("networks", &outcome.networks)?;
            emitter.table("attractors", &outcome.attractors)?;
            emitter.table("critical_scan", &rows)?;
            for r in &rows {
                lines.push(format!(
                    "k={} p={:.6}: attractors mean={} DA median={} SA median={}",
                    r.k,
                    r.p,
                    fmt_opt(r.attractors_mean),
                    fmt_opt(r.da_median),
                    fmt_opt(r.sa_median)
                ));
            }
        }
        Experiment::M5m6Table { n_networks, sizes } => {
            let (outcome, rows) = experiments::run_m5m6_table(&ctx, *n_networks, sizes)?;
            emitter.table("networks", &outcome.networks)?;
            emitter.table("attractors", &outcome.attractors)?;
            emitter.table("m5m6", &rows)?;
            for r in &rows {
                lines.push(format!(
                    "{} N={} {}: theoretical={} experimental={}",
                    r.measure,
                    r.n_nodes,
                    r.family,
                    fmt_opt(r.theoretical),
                    fmt_opt(r.experimental)
                ));
            }
        }
        Experiment::Annealed {
            sets,
            b0,
            tol,
            max_iter,
        } => {
            let rows = experiments::run_annealed(sets, *b0, *tol, *max_iter)?;
            emitter.table("annealed", &rows)?;
            for r in &rows {
                lines.push(format!(
                    "{}: b*={:.9} SA={:.9} converged={} iterations={}",
                    r.set, r.b_star, r.sa_theoretical, r.converged, r.iterations
                ));
                if !r.converged {
                    meta.notes
                        .push(format!("{} did not converge within max_iter", r.set));
                }
            }
        }
        Experiment::Avalanche(params) | Experiment::RatioTest(params) => {
            let outcome = match &opts.avalanche_input {
                Some(path) => {
                    meta.notes
                        .push(format!("avalanche rows read from {}", path.display()));
                    let rows = emit::read_csv(path)?;
                    experiments::ratio_from_rows(
                        rows,
                        params,
                        cfg.sampling.bootstrap_replicates,
                        &src,
                    )?
                }
                None => experiments::run_avalanche(&ctx, params)?,
            };
            if opts.avalanche_input.is_none() {
                emitter.table("avalanche", &outcome.rows)?;
            }
            emitter.table("avalanche_distribution", &outcome.distribution)?;
            emitter.table("avalanche_summary", &outcome.summary)?;
            emitter.table("ks", &outcome.ks)?;
            if !params.lambda_a.is_empty() {
                emitter.table("ratio", &outcome.ratio)?;
                let judged: Vec<bool> = outcome.ratio.iter().filter_map(|r| r.within_2sd).collect();
                let ok = judged.iter().filter(|&&b| b).count();
                lines.push(format!(
                    "ratio: {ok}/{} comparisons within 2 sd",
                    judged.len()
                ));
            }
            for s in &outcome.summary {
                lines.push(format!(
                    "{}: {} knock-outs, mean m={} P(m>={})={}",
                    s.family,
                    s.n_knockouts,
                    fmt_opt(s.mean_m),
                    s.tail_threshold,
                    fmt_opt(s.tail_fraction)
                ));
            }
            for k in &outcome.ks {
                lines.push(format!(
                    "KS {} vs {}: D={:.4} p={:.3e}",
                    k.family_a, k.family_b, k.statistic, k.p_value
                ));
            }
        }
        Experiment::SingleNetReport {
            network,
            family,
            net_index,
            with_cycles,
            exact,
        } => {
            let out = experiments::run_single_report(
                &ctx,
                network.as_deref(),
                family.as_ref(),
                *net_index,
                *with_cycles,
                *exact,
            )?;
            if out.generated {
                let path = emitter.dir().join("network.json");
                export_network(&out.network, &path)?;
            }
            emitter.document("report", &out.report)?;
            emitter.table("attractors", &out.attractors)?;
            let r = &out.report.record;
            if let Some(e) = &r.error {
                return Err(Error::Undefined(format!("analysis failed: {e}")));
            }
            lines.push(format!(
                "N={} attractors={} DA={} SA={} b={} static={}",
                r.n_nodes,
                r.n_attractors.unwrap_or(0),
                fmt_opt(r.da),
                fmt_opt(r.sa),
                fmt_opt(r.b),
                fmt_opt(r.static_sensitivity)
            ));
        }
    }
    meta.status = "complete".into();
    meta.outputs = emitter
        .written()
        .iter()
        .filter(|f| *f != "metadata.json")
        .cloned()
        .collect();
    emitter.document("metadata", &meta)?;
    Ok(RunReport {
        outputs: emitter.written().iter().map(|f| out_dir.join(f)).collect(),
        lines,
    })
}
