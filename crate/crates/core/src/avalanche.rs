//! Gene knock-out avalanches.
//!
//! A knock-out clamps one node to 0 starting from an attractor state. The
//! perturbed run is the original network with that node's table replaced by
//! constant FALSE, started from the attractor state with the node already
//! set to 0. A node is affected when its value differs between the two runs
//! at one or more compared steps.

use std::collections::BTreeMap;

use rand::{Rng, RngCore};
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::dynamics::{find_attractor, step_into, Attractor, Caps, Search};
use crate::error::{Error, Result};
use crate::model::{BooleanNetwork, NetworkState};

/// Which steps of the two runs are compared.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HorizonPolicy {
    /// From the knock-out instant through the perturbed transient and one
    /// joint period of both attractors.
    #[default]
    Inclusive,
    /// Only the joint period after the perturbed transient.
    AsymptoticOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnockoutOptions {
    pub policy: HorizonPolicy,
    pub caps: Caps,
    /// Longest comparison window, also used when the perturbed run is
    /// unresolved.
    pub max_horizon: usize,
}

impl Default for KnockoutOptions {
    fn default() -> Self {
        Self {
            policy: HorizonPolicy::Inclusive,
            caps: Caps::default(),
            max_horizon: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnockoutResult {
    pub gene: usize,
    /// Index into the source attractor's cycle.
    pub start_index: usize,
    /// Affected nodes, ascending; always contains `gene`.
    pub affected: Vec<usize>,
    /// Number of compared steps.
    pub comparison_horizon: usize,
    pub perturbed_resolved: bool,
}

impl KnockoutResult {
    /// Avalanche size `m`.
    pub fn size(&self) -> usize {
        self.affected.len()
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm_capped(a: usize, b: usize, cap: usize) -> usize {
    (a / gcd(a, b)).checked_mul(b).map_or(cap, |l| l.min(cap))
}

/// Clamps `gene` to 0 from cycle state `start_index` of `attr` and collects
/// the nodes whose time series change.
pub fn knockout_run(
    net: &BooleanNetwork,
    attr: &Attractor,
    start_index: usize,
    gene: usize,
    opts: KnockoutOptions,
) -> Result<KnockoutResult> {
    let n = net.n_nodes();
    if gene >= n {
        return Err(Error::contract(format!(
            "gene {gene} out of range for {n} nodes"
        )));
    }
    if start_index >= attr.period() {
        return Err(Error::contract(format!(
            "start index {start_index} outside an attractor of period {}",
            attr.period()
        )));
    }
    if attr.n_nodes() != n {
        return Err(Error::contract("attractor does not belong to this network"));
    }
    let knocked = net.with_constant_node(gene, false)?;
    let s0 = attr.states()[start_index].clone();
    let mut p0 = s0.clone();
    p0.set(gene, false);

    let (start, end, resolved) = match find_attractor(&knocked, &p0, opts.caps) {
        Search::Found {
            attractor,
            transient,
        } => {
            let joint = lcm_capped(attr.period(), attractor.period(), opts.max_horizon);
            match opts.policy {
                HorizonPolicy::Inclusive => (0, (transient + joint).min(opts.max_horizon), true),
                HorizonPolicy::AsymptoticOnly => (transient, transient + joint, true),
            }
        }
        Search::Unresolved { .. } => (0, opts.max_horizon, false),
    };

    let mut acc = NetworkState::zeros(n);
    let mut u = s0;
    let mut p = p0;
    let mut u_next = NetworkState::zeros(n);
    let mut p_next = NetworkState::zeros(n);
    for t in 0..end {
        if t >= start {
            acc.accumulate_diff(&u, &p);
        }
        step_into(net, &u, &mut u_next);
        step_into(&knocked, &p, &mut p_next);
        std::mem::swap(&mut u, &mut u_next);
        std::mem::swap(&mut p, &mut p_next);
    }
    acc.set(gene, true);
    Ok(KnockoutResult {
        gene,
        start_index,
        affected: acc.ones(),
        comparison_horizon: end - start,
        perturbed_resolved: resolved,
    })
}

/// Histogram of avalanche sizes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvalancheDistribution {
    pub counts: BTreeMap<usize, u64>,
    pub total: u64,
    /// Grouping key (family tag, SA bin, ...).
    pub key: String,
}

impl AvalancheDistribution {
    pub fn new(key: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            ..Self::default()
        }
    }

    pub fn from_sizes<I: IntoIterator<Item = usize>>(
        key: impl Into<String>,
        sizes: I,
    ) -> Result<Self> {
        let mut d = Self::new(key);
        for m in sizes {
            d.add(m)?;
        }
        Ok(d)
    }

    pub fn add(&mut self, m: usize) -> Result<()> {
        if m == 0 {
            return Err(Error::contract("avalanche sizes start at 1"));
        }
        *self.counts.entry(m).or_insert(0) += 1;
        self.total += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &Self) {
        for (&m, &c) in &other.counts {
            *self.counts.entry(m).or_insert(0) += c;
        }
        self.total += other.total;
    }

    pub fn count(&self, m: usize) -> u64 {
        self.counts.get(&m).copied().unwrap_or(0)
    }

    pub fn frequency(&self, m: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(m) as f64 / self.total as f64
        }
    }

    /// Fraction of events with `m >= threshold`.
    pub fn tail_fraction(&self, threshold: usize) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.counts.range(threshold..).map(|(_, c)| c).sum::<u64>() as f64 / self.total as f64
    }

    pub fn mean(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.counts
            .iter()
            .map(|(&m, &c)| m as f64 * c as f64)
            .sum::<f64>()
            / self.total as f64
    }

    /// All recorded sizes, ascending.
    pub fn sizes(&self) -> Vec<usize> {
        self.counts
            .iter()
            .flat_map(|(&m, &c)| std::iter::repeat_n(m, c as usize))
            .collect()
    }
}

/// Histogram over a non-empty collection of knock-outs.
pub fn avalanche_distribution<'a, I>(key: &str, runs: I) -> Result<AvalancheDistribution>
where
    I: IntoIterator<Item = &'a KnockoutResult>,
{
    let d = AvalancheDistribution::from_sizes(key, runs.into_iter().map(KnockoutResult::size))?;
    if d.total == 0 {
        return Err(Error::Undefined("no knock-outs to aggregate".into()));
    }
    Ok(d)
}

/// Bin index of a sensitivity value for bins of `width` centred on
/// multiples of `width`.
pub fn sa_bin(sa: f64, width: f64) -> i64 {
    (sa / width).round() as i64
}

/// Groups `(SA_i, m)` events by SA bin, keeping bins with at least
/// `min_events` events.
pub fn group_by_sa_bin<I>(
    events: I,
    width: f64,
    min_events: u64,
) -> Result<BTreeMap<i64, AvalancheDistribution>>
where
    I: IntoIterator<Item = (f64, usize)>,
{
    if width.is_nan() || width <= 0.0 {
        return Err(Error::param("bin width must be positive"));
    }
    let mut bins: BTreeMap<i64, AvalancheDistribution> = BTreeMap::new();
    for (sa, m) in events {
        let b = sa_bin(sa, width);
        bins.entry(b)
            .or_insert_with(|| {
                AvalancheDistribution::new(format!("SA_bin={:.4}", b as f64 * width))
            })
            .add(m)?;
    }
    bins.retain(|_, d| d.total >= min_events);
    Ok(bins)
}

/// Perturbation-spreading rate `(1 - q) <k_out>`.
pub fn lambda_from_structure(q: f64, mean_k_out: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::param(format!("q = {q} outside [0, 1]")));
    }
    if mean_k_out.is_nan() || mean_k_out < 0.0 {
        return Err(Error::param("mean out-degree must be non-negative"));
    }
    Ok((1.0 - q) * mean_k_out)
}

/// Structural estimate of lambda for a network: mean no-change probability
/// of its tables combined with its mean out-degree.
pub fn structural_lambda(net: &BooleanNetwork) -> f64 {
    let q = net
        .tables()
        .iter()
        .map(crate::measures::no_change_probability)
        .sum::<f64>()
        / net.n_nodes() as f64;
    (1.0 - q) * net.mean_out_degree()
}

/// Ratio of the frequencies of size-`m` avalanches from attractors with
/// spreading rates `lambda_a` and `lambda_b`; the size-dependent prefactor
/// common to both cancels.
pub fn theoretical_ratio_rm(m: usize, lambda_a: f64, lambda_b: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::param("avalanche size m must be at least 1"));
    }
    if !(lambda_a > 0.0 && lambda_b > 0.0) {
        return Err(Error::param("lambdas must be positive"));
    }
    let m_f = m as f64;
    Ok((lambda_a / lambda_b).powf(m_f - 1.0) * (-m_f * (lambda_a - lambda_b)).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioEstimate {
    pub ratio: f64,
    pub bootstrap_std: f64,
}

/// Bootstrap spread of the observed frequency of size `m`.
///
/// Resampling `n` events with replacement and counting those of size `m` is
/// a Binomial(`n`, `p`) draw, so each replicate draws that count directly.
fn bootstrap_frequency_std<R: Rng + ?Sized>(
    d: &AvalancheDistribution,
    m: usize,
    replicates: usize,
    rng: &mut R,
) -> f64 {
    let n = d.total;
    let p = d.frequency(m);
    let binom = Binomial::new(n, p).expect("valid binomial");
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..replicates {
        let f = binom.sample(rng) as f64 / n as f64;
        sum += f;
        sum_sq += f * f;
    }
    let r = replicates as f64;
    if replicates < 2 {
        return 0.0;
    }
    ((sum_sq - sum * sum / r) / (r - 1.0)).max(0.0).sqrt()
}

/// `P_m(a) / P_m(b)` with a bootstrap standard deviation propagated
/// through the quotient.
pub fn empirical_ratio<R: RngCore + ?Sized>(
    dist_a: &AvalancheDistribution,
    dist_b: &AvalancheDistribution,
    m: usize,
    replicates: usize,
    rng: &mut R,
) -> Result<RatioEstimate> {
    let (ca, cb) = (dist_a.count(m), dist_b.count(m));
    if ca == 0 || cb == 0 {
        return Err(Error::Undefined(format!(
            "no avalanches of size {m} in {}",
            if ca == 0 { &dist_a.key } else { &dist_b.key }
        )));
    }
    let (pa, pb) = (dist_a.frequency(m), dist_b.frequency(m));
    let ratio = pa / pb;
    let sa = bootstrap_frequency_std(dist_a, m, replicates, rng);
    let sb = bootstrap_frequency_std(dist_b, m, replicates, rng);
    let bootstrap_std = ratio * ((sa / pa).powi(2) + (sb / pb).powi(2)).sqrt();
    Ok(RatioEstimate {
        ratio,
        bootstrap_std,
    })
}
