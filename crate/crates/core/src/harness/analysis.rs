//! Per-network measurement pipeline shared by the ensemble experiments.

use serde::{Deserialize, Serialize};

use crate::dynamics::{enumerate_attractors_exact, sample_attractors, AttractorSet};
use crate::error::Result;
use crate::measures::{
    attractor_bias_weighted_sensitivity, attractor_sensitivity, derrida_da, derrida_da_multipoint,
    network_bias_weighted_sensitivity, network_static_sensitivity, weighted_sa,
};
use crate::model::BooleanNetwork;
use crate::rng::RandomSource;

use super::config::{BiasWeighting, PolicyFlags, SamplingParams};

/// One row of `networks.csv`. Failed measurements leave fields empty and
/// set `error`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NetworkRow {
    pub family: String,
    pub net_id: u64,
    pub n_nodes: usize,
    pub mean_k_in: f64,
    #[serde(rename = "DA")]
    pub da: Option<f64>,
    #[serde(rename = "DA_std_error")]
    pub da_std_error: Option<f64>,
    #[serde(rename = "SA")]
    pub sa: Option<f64>,
    #[serde(rename = "SA_std_error")]
    pub sa_std_error: Option<f64>,
    pub static_sensitivity: Option<f64>,
    /// Static sensitivity with inputs weighted by the attractor bias.
    pub bias_weighted_sensitivity: Option<f64>,
    pub n_attractors: Option<usize>,
    pub n_initial_states: Option<u64>,
    pub unresolved_fraction: Option<f64>,
    pub b: Option<f64>,
    /// Basin weight of the all-0 and all-1 fixed points.
    pub homogeneous_fp_weight: Option<f64>,
    pub error: Option<String>,
}

/// One row of `attractors.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttractorRow {
    pub family: String,
    pub net_id: u64,
    pub attractor_id: String,
    pub period: usize,
    pub b: f64,
    pub basin_weight: f64,
    pub hits: u64,
    #[serde(rename = "SA_i")]
    pub sa_i: f64,
    #[serde(rename = "SA_i_std_error")]
    pub sa_i_std_error: f64,
}

pub struct NetworkAnalysis {
    pub row: NetworkRow,
    pub attractors: Vec<AttractorRow>,
    pub set: Option<AttractorSet>,
}

/// Stream tags used for one network of a family.
pub(crate) fn stream_tag(family: &str, purpose: &str) -> String {
    format!("{family}/{purpose}")
}

/// Measures one network: DA on random states, basin sampling, SA_i per
/// attractor, basin-weighted SA and the static sensitivities.
pub fn analyze_network(
    net: &BooleanNetwork,
    family: &str,
    net_id: u64,
    src: &RandomSource,
    sampling: &SamplingParams,
    policy: &PolicyFlags,
    exact: bool,
) -> NetworkAnalysis {
    let mut row = NetworkRow {
        family: family.to_string(),
        net_id,
        n_nodes: net.n_nodes(),
        mean_k_in: net.mean_in_degree(),
        ..Default::default()
    };
    match measure(net, family, net_id, src, sampling, policy, exact, &mut row) {
        Ok((attractors, set)) => NetworkAnalysis {
            row,
            attractors,
            set: Some(set),
        },
        Err(e) => {
            row.error = Some(e.to_string());
            NetworkAnalysis {
                row,
                attractors: Vec::new(),
                set: None,
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn measure(
    net: &BooleanNetwork,
    family: &str,
    net_id: u64,
    src: &RandomSource,
    sampling: &SamplingParams,
    policy: &PolicyFlags,
    exact: bool,
    row: &mut NetworkRow,
) -> Result<(Vec<AttractorRow>, AttractorSet)> {
    let n = net.n_nodes();
    row.static_sensitivity = Some(network_static_sensitivity(net).lambda);

    let mut rng = src.stream(&stream_tag(family, "derrida"), net_id);
    let da = if sampling.derrida_max_flips > 1 {
        derrida_da_multipoint(
            net,
            sampling.n_derrida_samples,
            sampling.derrida_max_flips.min(n),
            &mut rng,
        )?
    } else {
        derrida_da(net, sampling.n_derrida_samples, &mut rng)
    };
    row.da = Some(da.lambda);
    row.da_std_error = Some(da.std_error);

    let set = if exact {
        enumerate_attractors_exact(net)?
    } else {
        let mut rng = src.stream(&stream_tag(family, "basin"), net_id);
        sample_attractors(net, sampling.n_initial_states, sampling.caps(), &mut rng)
    };
    row.n_attractors = Some(set.len());
    row.n_initial_states = Some(set.n_samples);
    row.unresolved_fraction = Some(set.unresolved_fraction());
    row.b = set.weighted_bias();
    let resolved = set.resolved_weight();
    if resolved > 0.0 {
        let homogeneous: f64 = set
            .entries
            .iter()
            .filter(|e| {
                let ones = e.attractor.first_state().count_ones();
                e.attractor.is_fixed_point() && (ones == 0 || ones == n)
            })
            .map(|e| e.weight)
            .sum();
        row.homogeneous_fp_weight = Some(homogeneous / resolved);
    }

    let mut rng = src.stream(&stream_tag(family, "sa"), net_id);
    let per_attractor: Vec<_> = set
        .entries
        .iter()
        .map(|e| attractor_sensitivity(net, &e.attractor, sampling.sa_options(), &mut rng))
        .collect();
    if !set.is_empty() {
        let sa = weighted_sa(&set, &per_attractor)?;
        row.sa = Some(sa.lambda);
        row.sa_std_error = Some(sa.std_error);
        row.bias_weighted_sensitivity = Some(match policy.bias_weighting {
            BiasWeighting::Scalar => {
                network_bias_weighted_sensitivity(net, row.b.expect("resolved attractors"))?.lambda
            }
            BiasWeighting::PerNode => {
                let mut acc = 0.0;
                for e in &set.entries {
                    acc += e.weight / resolved
                        * attractor_bias_weighted_sensitivity(net, &e.attractor)?.lambda;
                }
                acc
            }
        });
    }

    let rows = set
        .entries
        .iter()
        .zip(&per_attractor)
        .map(|(e, sa)| AttractorRow {
            family: family.to_string(),
            net_id,
            attractor_id: e.attractor.id().to_string(),
            period: e.attractor.period(),
            b: e.attractor.bias(),
            basin_weight: e.weight,
            hits: e.hits,
            sa_i: sa.lambda,
            sa_i_std_error: sa.std_error,
        })
        .collect();
    Ok((rows, set))
}
