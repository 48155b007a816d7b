//! Experiment runners. Each returns its tables in memory; [`super::run_config`]
//! takes care of writing them.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::avalanche::{
    empirical_ratio, group_by_sa_bin, knockout_run, sa_bin, theoretical_ratio_rm,
    AvalancheDistribution,
};
use crate::dynamics::{find_attractor, AttractorDump, Search, EXACT_LIMIT};
use crate::error::{Error, Result};
use crate::format::import_network;
use crate::generation::{critical_bias, FamilySpec, FunctionSet, RootSelector};
use crate::measures::{annealed_fixed_point, attractor_sensitivity, theoretical_sa};
use crate::model::{BooleanNetwork, NetworkState};
use crate::rng::RandomSource;
use crate::stats::{self, ks_two_sample, KsResult};

use super::analysis::{analyze_network, stream_tag, AttractorRow, NetworkRow};
use super::config::{AvalancheParams, PolicyFlags, SamplingParams, StartState};

/// Runs `f(0..n)` on a pool of `threads` workers (0 = all cores) and
/// returns the results in index order.
pub(crate) fn par_map<T, F>(threads: usize, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(f).collect()))
}

/// Shared inputs of the ensemble runners.
#[derive(Clone, Copy)]
pub struct Context<'a> {
    pub src: &'a RandomSource,
    pub sampling: &'a SamplingParams,
    pub policy: &'a PolicyFlags,
    pub threads: usize,
}

fn generate(ctx: &Context, family: &FamilySpec, net_id: u64) -> Result<BooleanNetwork> {
    let mut rng = ctx.src.stream(&stream_tag(&family.tag, "gen"), net_id);
    family.compile()?.sample(&mut rng)
}

#[derive(Clone, Debug, Default)]
pub struct EnsembleOutcome {
    pub networks: Vec<NetworkRow>,
    pub attractors: Vec<AttractorRow>,
}

impl EnsembleOutcome {
    pub fn family_rows<'a>(&'a self, family: &'a str) -> impl Iterator<Item = &'a NetworkRow> + 'a {
        self.networks.iter().filter(move |r| r.family == family)
    }
}

/// Generates and analyses `n_networks` networks of every family.
pub fn run_families(
    ctx: &Context,
    families: &[FamilySpec],
    n_networks: usize,
) -> Result<EnsembleOutcome> {
    for f in families {
        f.compile()?;
    }
    let jobs = families.len() * n_networks;
    let results = par_map(ctx.threads, jobs, |j| {
        let family = &families[j / n_networks];
        let net_id = (j % n_networks) as u64;
        match generate(ctx, family, net_id) {
            Ok(net) => {
                let a = analyze_network(
                    &net,
                    &family.tag,
                    net_id,
                    ctx.src,
                    ctx.sampling,
                    ctx.policy,
                    false,
                );
                (a.row, a.attractors)
            }
            Err(e) => (
                NetworkRow {
                    family: family.tag.clone(),
                    net_id,
                    n_nodes: family.n_nodes,
                    error: Some(e.to_string()),
                    ..Default::default()
                },
                Vec::new(),
            ),
        }
    })?;
    let mut out = EnsembleOutcome::default();
    for (row, attractors) in results {
        out.networks.push(row);
        out.attractors.extend(attractors);
    }
    Ok(out)
}

fn collect(rows: &[&NetworkRow], f: impl Fn(&NetworkRow) -> Option<f64>) -> Vec<f64> {
    rows.iter().filter_map(|r| f(r)).collect()
}

fn mean_of(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| stats::mean(xs))
}

fn std_of(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| stats::std_dev(xs))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub family: String,
    pub n_nodes: usize,
    pub k_in: usize,
    pub n_networks: usize,
    pub n_failed: usize,
    #[serde(rename = "DA_mean")]
    pub da_mean: Option<f64>,
    #[serde(rename = "DA_std")]
    pub da_std: Option<f64>,
    #[serde(rename = "SA_mean")]
    pub sa_mean: Option<f64>,
    #[serde(rename = "SA_std")]
    pub sa_std: Option<f64>,
    pub static_mean: Option<f64>,
    pub bias_weighted_mean: Option<f64>,
    pub b_mean: Option<f64>,
    pub b_std: Option<f64>,
    pub attractors_mean: Option<f64>,
    pub unresolved_fraction_mean: Option<f64>,
}

pub fn summarize_family(family: &FamilySpec, outcome: &EnsembleOutcome) -> FamilySummary {
    let rows: Vec<&NetworkRow> = outcome.family_rows(&family.tag).collect();
    let da = collect(&rows, |r| r.da);
    let sa = collect(&rows, |r| r.sa);
    let b = collect(&rows, |r| r.b);
    FamilySummary {
        family: family.tag.clone(),
        n_nodes: family.n_nodes,
        k_in: family.k_in,
        n_networks: rows.len(),
        n_failed: rows.iter().filter(|r| r.error.is_some()).count(),
        da_mean: mean_of(&da),
        da_std: std_of(&da),
        sa_mean: mean_of(&sa),
        sa_std: std_of(&sa),
        static_mean: mean_of(&collect(&rows, |r| r.static_sensitivity)),
        bias_weighted_mean: mean_of(&collect(&rows, |r| r.bias_weighted_sensitivity)),
        b_mean: mean_of(&b),
        b_std: std_of(&b),
        attractors_mean: mean_of(&collect(&rows, |r| r.n_attractors.map(|n| n as f64))),
        unresolved_fraction_mean: mean_of(&collect(&rows, |r| r.unresolved_fraction)),
    }
}

pub fn run_ensemble(
    ctx: &Context,
    families: &[FamilySpec],
    n_networks: usize,
) -> Result<(EnsembleOutcome, Vec<FamilySummary>)> {
    let outcome = run_families(ctx, families, n_networks)?;
    let summary = families
        .iter()
        .map(|f| summarize_family(f, &outcome))
        .collect();
    Ok((outcome, summary))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalRow {
    pub k: usize,
    pub p: f64,
    pub n_networks: usize,
    pub n_failed: usize,
    pub attractors_mean: Option<f64>,
    pub attractors_median: Option<f64>,
    pub attractors_max: Option<f64>,
    #[serde(rename = "DA_mean")]
    pub da_mean: Option<f64>,
    #[serde(rename = "DA_median")]
    pub da_median: Option<f64>,
    #[serde(rename = "DA_min")]
    pub da_min: Option<f64>,
    #[serde(rename = "DA_max")]
    pub da_max: Option<f64>,
    #[serde(rename = "DA_std")]
    pub da_std: Option<f64>,
    #[serde(rename = "SA_mean")]
    pub sa_mean: Option<f64>,
    #[serde(rename = "SA_median")]
    pub sa_median: Option<f64>,
    #[serde(rename = "SA_min")]
    pub sa_min: Option<f64>,
    #[serde(rename = "SA_max")]
    pub sa_max: Option<f64>,
    #[serde(rename = "SA_std")]
    pub sa_std: Option<f64>,
    pub unresolved_fraction_mean: Option<f64>,
}

fn nonempty(xs: &[f64], f: fn(&[f64]) -> f64) -> Option<f64> {
    (!xs.is_empty()).then(|| f(xs))
}

pub fn critical_families(
    n_nodes: usize,
    k_min: usize,
    k_max: usize,
    root: RootSelector,
) -> Vec<FamilySpec> {
    (k_min..=k_max)
        .map(|k| FamilySpec::critical(&format!("k{k}"), n_nodes, k, root))
        .collect()
}

pub fn run_critical_scan(
    ctx: &Context,
    n_networks: usize,
    n_nodes: usize,
    k_min: usize,
    k_max: usize,
) -> Result<(EnsembleOutcome, Vec<CriticalRow>)> {
    let families = critical_families(n_nodes, k_min, k_max, ctx.policy.root);
    let outcome = run_families(ctx, &families, n_networks)?;
    let mut rows = Vec::new();
    for f in &families {
        let nets: Vec<&NetworkRow> = outcome.family_rows(&f.tag).collect();
        let att = collect(&nets, |r| r.n_attractors.map(|n| n as f64));
        let da = collect(&nets, |r| r.da);
        let sa = collect(&nets, |r| r.sa);
        rows.push(CriticalRow {
            k: f.k_in,
            p: critical_bias(f.k_in, ctx.policy.root)?,
            n_networks: nets.len(),
            n_failed: nets.iter().filter(|r| r.error.is_some()).count(),
            attractors_mean: nonempty(&att, stats::mean),
            attractors_median: nonempty(&att, stats::median),
            attractors_max: nonempty(&att, stats::max),
            da_mean: nonempty(&da, stats::mean),
            da_median: nonempty(&da, stats::median),
            da_min: nonempty(&da, stats::min),
            da_max: nonempty(&da, stats::max),
            da_std: nonempty(&da, stats::std_dev),
            sa_mean: nonempty(&sa, stats::mean),
            sa_median: nonempty(&sa, stats::median),
            sa_min: nonempty(&sa, stats::min),
            sa_max: nonempty(&sa, stats::max),
            sa_std: nonempty(&sa, stats::std_dev),
            unresolved_fraction_mean: mean_of(&collect(&nets, |r| r.unresolved_fraction)),
        });
    }
    Ok((outcome, rows))
}

/// One cell of the M5/M6 comparison. `n_nodes` is `"inf"` for the
/// annealed prediction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct M5m6Row {
    pub measure: String,
    pub n_nodes: String,
    pub family: String,
    /// Bias at which the theoretical value is evaluated.
    pub b: Option<f64>,
    pub theoretical: Option<f64>,
    pub experimental: Option<f64>,
    pub experimental_std: Option<f64>,
    pub n_networks: usize,
}

const M5M6: [&str; 2] = ["M5", "M6"];

pub fn m5m6_families(sizes: &[usize]) -> Vec<FamilySpec> {
    sizes
        .iter()
        .flat_map(|&n| M5M6.map(|set| FamilySpec::named_set(&format!("{set}-N{n}"), n, 2, set)))
        .collect()
}

fn annealed_b(set: &FunctionSet) -> Result<f64> {
    Ok(annealed_fixed_point(set, 0.5, 1e-12, 10_000_000)?.b)
}

pub fn run_m5m6_table(
    ctx: &Context,
    n_networks: usize,
    sizes: &[usize],
) -> Result<(EnsembleOutcome, Vec<M5m6Row>)> {
    let families = m5m6_families(sizes);
    let outcome = run_families(ctx, &families, n_networks)?;
    let mut rows = Vec::new();
    for &n in sizes {
        for name in M5M6 {
            let set = FunctionSet::named(name)?;
            let tag = format!("{name}-N{n}");
            let nets: Vec<&NetworkRow> = outcome.family_rows(&tag).collect();
            let da = collect(&nets, |r| r.da);
            let sa = collect(&nets, |r| r.sa);
            let b = collect(&nets, |r| r.b);
            let b_mean = mean_of(&b);
            let row =
                |measure: &str, b: Option<f64>, theoretical: Option<f64>, xs: &[f64]| M5m6Row {
                    measure: measure.into(),
                    n_nodes: n.to_string(),
                    family: name.into(),
                    b,
                    theoretical,
                    experimental: mean_of(xs),
                    experimental_std: std_of(xs),
                    n_networks: nets.len(),
                };
            rows.push(row("DA", Some(0.5), Some(theoretical_sa(&set, 0.5)?), &da));
            let sa_theory = b_mean.map(|b| theoretical_sa(&set, b)).transpose()?;
            rows.push(row("SA", b_mean, sa_theory, &sa));
            rows.push(row("b", None, Some(annealed_b(&set)?), &b));
        }
    }
    for name in M5M6 {
        let set = FunctionSet::named(name)?;
        let b_star = annealed_b(&set)?;
        let row = |measure: &str, b: Option<f64>, theoretical: f64| M5m6Row {
            measure: measure.into(),
            n_nodes: "inf".into(),
            family: name.into(),
            b,
            theoretical: Some(theoretical),
            experimental: None,
            experimental_std: None,
            n_networks: 0,
        };
        rows.push(row("DA", Some(0.5), theoretical_sa(&set, 0.5)?));
        rows.push(row("SA", Some(b_star), theoretical_sa(&set, b_star)?));
        rows.push(row("b", None, b_star));
    }
    Ok((outcome, rows))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealedRow {
    pub set: String,
    pub b0: f64,
    pub b_star: f64,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    #[serde(rename = "SA_theoretical")]
    pub sa_theoretical: f64,
}

pub fn run_annealed(
    sets: &[String],
    b0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<AnnealedRow>> {
    sets.iter()
        .map(|name| {
            let set = FunctionSet::named(name)?;
            let fp = annealed_fixed_point(&set, b0, tol, max_iter)?;
            Ok(AnnealedRow {
                set: name.clone(),
                b0,
                b_star: fp.b,
                converged: fp.converged,
                iterations: fp.iterations,
                residual: fp.residual,
                sa_theoretical: theoretical_sa(&set, fp.b)?,
            })
        })
        .collect()
}

/// One knock-out (or one failed attractor search) of the avalanche
/// experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AvalancheRow {
    pub net_id: u64,
    pub attractor_id: Option<String>,
    #[serde(rename = "SA_i")]
    pub sa_i: Option<f64>,
    pub gene: Option<usize>,
    pub m: Option<usize>,
    /// Both the original attractor and the knocked-out trajectory resolved.
    pub resolved_flag: bool,
    pub family: String,
    pub period: Option<usize>,
    pub comparison_horizon: Option<usize>,
}

impl AvalancheRow {
    /// `(SA_i, m)` of a resolved knock-out.
    pub fn event(&self) -> Option<(f64, usize)> {
        match (self.resolved_flag, self.sa_i, self.m) {
            (true, Some(sa), Some(m)) => Some((sa, m)),
            _ => None,
        }
    }
}

fn avalanche_network(
    ctx: &Context,
    family: &FamilySpec,
    net_id: u64,
    params: &AvalancheParams,
) -> Vec<AvalancheRow> {
    let failed = |period: Option<usize>, id: Option<String>| AvalancheRow {
        net_id,
        attractor_id: id,
        sa_i: None,
        gene: None,
        m: None,
        resolved_flag: false,
        family: family.tag.clone(),
        period,
        comparison_horizon: None,
    };
    let Ok(net) = generate(ctx, family, net_id) else {
        return vec![failed(None, None)];
    };
    let caps = ctx.sampling.caps();
    let mut rng = ctx.src.stream(&stream_tag(&family.tag, "initial"), net_id);
    let s0 = NetworkState::random(net.n_nodes(), &mut rng);
    let attr = match find_attractor(&net, &s0, caps) {
        Search::Found { attractor, .. } => attractor,
        Search::Unresolved { .. } => return vec![failed(None, None)],
    };
    let id = attr.id().to_string();
    let mut rng = ctx.src.stream(&stream_tag(&family.tag, "sa"), net_id);
    let sa_i = attractor_sensitivity(&net, &attr, ctx.sampling.sa_options(), &mut rng).lambda;

    let mut rng = ctx.src.stream(&stream_tag(&family.tag, "knockout"), net_id);
    let genes = index::sample(&mut rng, net.n_nodes(), params.knockouts_per_network).into_vec();
    let opts = ctx.policy.knockout_options(caps);
    genes
        .into_iter()
        .map(|gene| {
            let start = match ctx.policy.start_state {
                StartState::Canonical => 0,
                StartState::Random => rng.random_range(0..attr.period()),
            };
            match knockout_run(&net, &attr, start, gene, opts) {
                Ok(k) => AvalancheRow {
                    net_id,
                    attractor_id: Some(id.clone()),
                    sa_i: Some(sa_i),
                    gene: Some(gene),
                    m: Some(k.size()),
                    resolved_flag: k.perturbed_resolved,
                    family: family.tag.clone(),
                    period: Some(attr.period()),
                    comparison_horizon: Some(k.comparison_horizon),
                },
                Err(_) => AvalancheRow {
                    gene: Some(gene),
                    ..failed(Some(attr.period()), Some(id.clone()))
                },
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub m: usize,
    pub count: u64,
    pub frequency: f64,
    pub family: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AvalancheSummary {
    pub family: String,
    pub n_networks: usize,
    pub n_knockouts: u64,
    pub unresolved_attractors: usize,
    pub unresolved_knockouts: usize,
    pub mean_m: Option<f64>,
    pub max_m: Option<usize>,
    pub tail_threshold: usize,
    pub tail_fraction: Option<f64>,
    #[serde(rename = "SA_i_mean")]
    pub sa_i_mean: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsRow {
    pub family_a: String,
    pub family_b: String,
    pub n_a: usize,
    pub n_b: usize,
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub m: usize,
    pub lambda_a_bin: f64,
    pub lambda_b_bin: f64,
    pub empirical_ratio: Option<f64>,
    pub bootstrap_std: Option<f64>,
    pub theoretical_ratio: f64,
    pub n_a: u64,
    pub n_b: u64,
    pub within_2sd: Option<bool>,
    pub family: String,
}

#[derive(Clone, Debug, Default)]
pub struct AvalancheOutcome {
    pub rows: Vec<AvalancheRow>,
    pub distribution: Vec<DistributionRow>,
    pub summary: Vec<AvalancheSummary>,
    pub ks: Vec<KsRow>,
    pub ratio: Vec<RatioRow>,
}

pub fn run_avalanche(ctx: &Context, params: &AvalancheParams) -> Result<AvalancheOutcome> {
    for f in &params.families {
        f.compile()?;
    }
    let n = params.n_networks;
    let per_net = par_map(ctx.threads, params.families.len() * n, |j| {
        avalanche_network(ctx, &params.families[j / n], (j % n) as u64, params)
    })?;
    let rows: Vec<AvalancheRow> = per_net.into_iter().flatten().collect();
    let tags: Vec<String> = params.families.iter().map(|f| f.tag.clone()).collect();
    let mut out = summarize_avalanches(&rows, &tags, params, n)?;
    out.ratio = ratio_table(
        &rows,
        &tags,
        params,
        ctx.sampling.bootstrap_replicates,
        ctx.src,
    )?;
    out.rows = rows;
    Ok(out)
}

fn family_sizes(rows: &[AvalancheRow], family: &str) -> Vec<usize> {
    rows.iter()
        .filter(|r| r.family == family)
        .filter_map(|r| r.event().map(|(_, m)| m))
        .collect()
}

fn summarize_avalanches(
    rows: &[AvalancheRow],
    families: &[String],
    params: &AvalancheParams,
    n_networks: usize,
) -> Result<AvalancheOutcome> {
    let mut out = AvalancheOutcome::default();
    for tag in families {
        let fam: Vec<&AvalancheRow> = rows.iter().filter(|r| &r.family == tag).collect();
        let dist = AvalancheDistribution::from_sizes(tag.clone(), family_sizes(rows, tag))?;
        for (&m, &count) in &dist.counts {
            out.distribution.push(DistributionRow {
                m,
                count,
                frequency: dist.frequency(m),
                family: tag.clone(),
            });
        }
        let sa: Vec<f64> = fam
            .iter()
            .filter_map(|r| r.event().map(|(sa, _)| sa))
            .collect();
        let has_data = dist.total > 0;
        out.summary.push(AvalancheSummary {
            family: tag.clone(),
            n_networks,
            n_knockouts: dist.total,
            unresolved_attractors: fam.iter().filter(|r| r.attractor_id.is_none()).count(),
            unresolved_knockouts: fam
                .iter()
                .filter(|r| r.attractor_id.is_some() && !r.resolved_flag)
                .count(),
            mean_m: has_data.then(|| dist.mean()),
            max_m: dist.counts.keys().next_back().copied(),
            tail_threshold: params.tail_threshold,
            tail_fraction: has_data.then(|| dist.tail_fraction(params.tail_threshold)),
            sa_i_mean: mean_of(&sa),
        });
    }
    for (i, a) in families.iter().enumerate() {
        for b in &families[i + 1..] {
            let xa: Vec<f64> = family_sizes(rows, a)
                .into_iter()
                .map(|m| m as f64)
                .collect();
            let xb: Vec<f64> = family_sizes(rows, b)
                .into_iter()
                .map(|m| m as f64)
                .collect();
            if xa.is_empty() || xb.is_empty() {
                continue;
            }
            let KsResult { statistic, p_value } = ks_two_sample(&xa, &xb);
            out.ks.push(KsRow {
                family_a: a.clone(),
                family_b: b.clone(),
                n_a: xa.len(),
                n_b: xb.len(),
                statistic,
                p_value,
            });
        }
    }
    Ok(out)
}

/// Compares every SA bin against the reference bins of `lambda_a` at each
/// requested avalanche size.
pub fn ratio_table(
    rows: &[AvalancheRow],
    families: &[String],
    params: &AvalancheParams,
    replicates: usize,
    src: &RandomSource,
) -> Result<Vec<RatioRow>> {
    let w = params.bin_width;
    let mut out = Vec::new();
    for tag in families {
        let events = rows
            .iter()
            .filter(|r| &r.family == tag)
            .filter_map(AvalancheRow::event);
        let bins: BTreeMap<i64, AvalancheDistribution> =
            group_by_sa_bin(events, w, params.min_bin_events)?;
        for &lambda_a in &params.lambda_a {
            let ref_bin = sa_bin(lambda_a, w);
            let Some(dist_a) = bins.get(&ref_bin) else {
                continue;
            };
            let la = ref_bin as f64 / w.recip();
            let mut rng = src.stream(&stream_tag(tag, &format!("bootstrap/{ref_bin}")), 0);
            for (&bin, dist_b) in &bins {
                let lb = bin as f64 / w.recip();
                if bin == ref_bin || lb <= 0.0 || la <= 0.0 {
                    continue;
                }
                for &m in &params.m_values {
                    let theoretical = theoretical_ratio_rm(m, la, lb)?;
                    let est = empirical_ratio(dist_a, dist_b, m, replicates, &mut rng).ok();
                    out.push(RatioRow {
                        m,
                        lambda_a_bin: la,
                        lambda_b_bin: lb,
                        empirical_ratio: est.map(|e| e.ratio),
                        bootstrap_std: est.map(|e| e.bootstrap_std),
                        theoretical_ratio: theoretical,
                        n_a: dist_a.total,
                        n_b: dist_b.total,
                        within_2sd: est
                            .map(|e| (e.ratio - theoretical).abs() <= 2.0 * e.bootstrap_std),
                        family: tag.clone(),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Ratio analysis of previously written avalanche rows.
pub fn ratio_from_rows(
    rows: Vec<AvalancheRow>,
    params: &AvalancheParams,
    replicates: usize,
    src: &RandomSource,
) -> Result<AvalancheOutcome> {
    let mut tags: Vec<String> = Vec::new();
    for r in &rows {
        if !tags.contains(&r.family) {
            tags.push(r.family.clone());
        }
    }
    let n_networks = rows.iter().map(|r| r.net_id + 1).max().unwrap_or(0) as usize;
    let mut out = summarize_avalanches(&rows, &tags, params, n_networks)?;
    out.ratio = ratio_table(&rows, &tags, params, replicates, src)?;
    out.rows = rows;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportAttractor {
    #[serde(flatten)]
    pub dump: AttractorDump,
    #[serde(rename = "SA_i")]
    pub sa_i: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetworkReport {
    pub source: String,
    pub n_nodes: usize,
    pub mean_k_in: f64,
    pub self_loops: bool,
    pub duplicate_inputs: bool,
    pub exact: bool,
    pub record: NetworkRow,
    pub attractors: Vec<ReportAttractor>,
}

pub struct ReportOutcome {
    pub network: BooleanNetwork,
    pub generated: bool,
    pub report: NetworkReport,
    pub attractors: Vec<AttractorRow>,
}

pub fn run_single_report(
    ctx: &Context,
    network: Option<&Path>,
    family: Option<&FamilySpec>,
    net_index: u64,
    with_cycles: bool,
    exact: bool,
) -> Result<ReportOutcome> {
    let (net, tag, source) = match (network, family) {
        (Some(path), _) => (
            import_network(path)?,
            "file".to_string(),
            path.display().to_string(),
        ),
        (None, Some(f)) => (
            generate(ctx, f, net_index)?,
            f.tag.clone(),
            format!("family {} #{net_index}", f.tag),
        ),
        (None, None) => return Err(Error::Config("no network or family given".into())),
    };
    if exact && net.n_nodes() > EXACT_LIMIT {
        return Err(Error::TooLarge {
            n: net.n_nodes(),
            limit: EXACT_LIMIT,
        });
    }
    let a = analyze_network(
        &net,
        &tag,
        net_index,
        ctx.src,
        ctx.sampling,
        ctx.policy,
        exact,
    );
    let dumps = match &a.set {
        Some(set) => set
            .entries
            .iter()
            .zip(&a.attractors)
            .map(|(e, r)| ReportAttractor {
                dump: AttractorDump::new(e, with_cycles),
                sa_i: r.sa_i,
            })
            .collect(),
        None => Vec::new(),
    };
    let flags = net.flags();
    let report = NetworkReport {
        source,
        n_nodes: net.n_nodes(),
        mean_k_in: net.mean_in_degree(),
        self_loops: flags.self_loops,
        duplicate_inputs: flags.duplicate_inputs,
        exact,
        record: a.row,
        attractors: dumps,
    };
    Ok(ReportOutcome {
        network: net,
        generated: network.is_none(),
        report,
        attractors: a.attractors,
    })
}
