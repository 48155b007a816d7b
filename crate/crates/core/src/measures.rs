//! Sensitivity measures.
//!
//! All one-step perturbation statistics use unnormalized Hamming distances:
//! a single flipped node and the number of nodes that differ one update
//! later. The static measures work directly on truth tables.

use rand::seq::index;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::dynamics::{step_into, Attractor, AttractorSet};
use crate::error::{Error, Result};
use crate::generation::FunctionSet;
use crate::model::{BooleanNetwork, NetworkState, TruthTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    DaRandom,
    SaAttractor,
    SaWeighted,
    StaticUniform,
    StaticBiasWeighted,
}

/// A lambda-type measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityEstimate {
    pub lambda: f64,
    pub mode: Mode,
    pub n_samples: u64,
    pub std_error: f64,
    /// Free-form provenance (network or attractor id, sampling notes).
    pub context: String,
}

impl SensitivityEstimate {
    fn new(lambda: f64, mode: Mode, n_samples: u64, std_error: f64) -> Self {
        Self {
            lambda,
            mode,
            n_samples,
            std_error,
            context: String::new(),
        }
    }

    pub fn with_context(mut self, context: impl Into<String>) -> Self {
        self.context = context.into();
        self
    }
}

/// Per-input influences of one truth table under a stated input distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct InfluenceProfile {
    pub influences: Vec<f64>,
    /// Sum of the influences.
    pub sensitivity: f64,
    /// Probability of a 1 on each input used for the weighting.
    pub input_bias: Vec<f64>,
}

/// Input weighting for [`bias_weighted_influence`].
#[derive(Clone, Debug, PartialEq)]
pub enum Bias {
    Scalar(f64),
    PerInput(Vec<f64>),
}

impl Bias {
    fn resolve(&self, arity: usize) -> Result<Vec<f64>> {
        let v = match self {
            Bias::Scalar(b) => vec![*b; arity],
            Bias::PerInput(v) => {
                if v.len() != arity {
                    return Err(Error::contract(format!(
                        "{} input biases for a table of arity {arity}",
                        v.len()
                    )));
                }
                v.clone()
            }
        };
        if let Some(bad) = v.iter().find(|b| !(0.0..=1.0).contains(*b)) {
            return Err(Error::param(format!("bias {bad} outside [0, 1]")));
        }
        Ok(v)
    }
}

/// Influences under uniformly distributed inputs, by exact counting.
pub fn uniform_sensitivity(t: &TruthTable) -> InfluenceProfile {
    let k = t.arity();
    let rows = 1usize << k;
    let influences: Vec<f64> = (0..k)
        .map(|j| {
            let mask = t.input_mask(j);
            let changes = (0..rows)
                .filter(|&r| t.output(r) != t.output(r ^ mask))
                .count();
            changes as f64 / rows as f64
        })
        .collect();
    InfluenceProfile {
        sensitivity: influences.iter().sum(),
        influences,
        input_bias: vec![0.5; k],
    }
}

/// Probability of each row when input `j` is 1 with probability `bias[j]`
/// independently.
fn row_weights(t: &TruthTable, bias: &[f64]) -> Vec<f64> {
    let k = t.arity();
    (0..1usize << k)
        .map(|r| {
            (0..k)
                .map(|j| {
                    if r & t.input_mask(j) != 0 {
                        bias[j]
                    } else {
                        1.0 - bias[j]
                    }
                })
                .product()
        })
        .collect()
}

/// Influences with input configurations weighted by the product of their
/// marginals.
pub fn bias_weighted_influence(t: &TruthTable, bias: &Bias) -> Result<InfluenceProfile> {
    let k = t.arity();
    let b = bias.resolve(k)?;
    let weights = row_weights(t, &b);
    let influences: Vec<f64> = (0..k)
        .map(|j| {
            let mask = t.input_mask(j);
            weights
                .iter()
                .enumerate()
                .filter(|&(r, _)| t.output(r) != t.output(r ^ mask))
                .map(|(_, w)| w)
                .sum()
        })
        .collect();
    Ok(InfluenceProfile {
        sensitivity: influences.iter().sum(),
        influences,
        input_bias: b,
    })
}

/// Probability that flipping one uniformly chosen input of a uniformly
/// chosen configuration leaves the output unchanged, counted directly.
pub fn no_change_probability(t: &TruthTable) -> f64 {
    let k = t.arity();
    let rows = 1usize << k;
    let mut same = 0usize;
    for r in 0..rows {
        for j in 0..k {
            if t.output(r) == t.output(r ^ t.input_mask(j)) {
                same += 1;
            }
        }
    }
    same as f64 / (rows * k) as f64
}

/// Mean uniform sensitivity over all nodes.
pub fn network_static_sensitivity(net: &BooleanNetwork) -> SensitivityEstimate {
    let n = net.n_nodes();
    let total: f64 = net
        .tables()
        .iter()
        .map(|t| uniform_sensitivity(t).sensitivity)
        .sum();
    SensitivityEstimate::new(total / n as f64, Mode::StaticUniform, n as u64, 0.0)
}

/// Mean bias-weighted sensitivity over all nodes, every input weighted with
/// the same bias `b`.
pub fn network_bias_weighted_sensitivity(
    net: &BooleanNetwork,
    b: f64,
) -> Result<SensitivityEstimate> {
    let n = net.n_nodes();
    let mut total = 0.0;
    for t in net.tables() {
        total += bias_weighted_influence(t, &Bias::Scalar(b))?.sensitivity;
    }
    Ok(SensitivityEstimate::new(
        total / n as f64,
        Mode::StaticBiasWeighted,
        n as u64,
        0.0,
    ))
}

/// Bias-weighted sensitivity of a network on one attractor, each input
/// weighted with the time-averaged value of the node it reads.
pub fn attractor_bias_weighted_sensitivity(
    net: &BooleanNetwork,
    attr: &Attractor,
) -> Result<SensitivityEstimate> {
    let node_bias = attr.node_bias();
    let n = net.n_nodes();
    let mut total = 0.0;
    for i in 0..n {
        let b: Vec<f64> = net.inputs(i).iter().map(|&src| node_bias[src]).collect();
        total += bias_weighted_influence(net.table(i), &Bias::PerInput(b))?.sensitivity;
    }
    Ok(
        SensitivityEstimate::new(total / n as f64, Mode::StaticBiasWeighted, n as u64, 0.0)
            .with_context(format!("attractor {}", attr.id())),
    )
}

/// Number of nodes that differ one step after flipping node `flip` of `s`.
///
/// Only successors of the flipped node can change, so this looks at their
/// input rows instead of running two full updates.
pub fn one_step_spread(net: &BooleanNetwork, s: &NetworkState, flip: usize) -> usize {
    net.successors(flip)
        .iter()
        .filter(|&&j| {
            let table = net.table(j);
            let row = net.row_for(j, s);
            let toggled = net
                .inputs(j)
                .iter()
                .enumerate()
                .filter(|&(_, &src)| src == flip)
                .fold(row, |r, (pos, _)| r ^ table.input_mask(pos));
            table.output(row) != table.output(toggled)
        })
        .count()
}

#[derive(Default)]
struct Moments {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }

    fn std_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Derrida slope from single flips on uniformly random states.
pub fn derrida_da<R: RngCore + ?Sized>(
    net: &BooleanNetwork,
    n_samples: usize,
    rng: &mut R,
) -> SensitivityEstimate {
    let n = net.n_nodes();
    let mut m = Moments::default();
    for _ in 0..n_samples.max(1) {
        let s = NetworkState::random(n, rng);
        let i = rng.random_range(0..n);
        m.push(one_step_spread(net, &s, i) as f64);
    }
    SensitivityEstimate::new(m.mean(), Mode::DaRandom, m.n, m.std_error())
}

/// Least-squares slope through the origin of `h(1)` against
/// `h(0) = 1..=max_flips`, with `n_samples` pairs per perturbation size.
pub fn derrida_da_multipoint<R: RngCore + ?Sized>(
    net: &BooleanNetwork,
    n_samples: usize,
    max_flips: usize,
    rng: &mut R,
) -> Result<SensitivityEstimate> {
    let n = net.n_nodes();
    if max_flips == 0 || max_flips > n {
        return Err(Error::param(format!("max_flips must be in 1..={n}")));
    }
    let mut a = NetworkState::zeros(n);
    let mut b = NetworkState::zeros(n);
    let (mut num, mut den, mut var) = (0.0, 0.0, 0.0);
    let mut total = 0u64;
    for h0 in 1..=max_flips {
        let mut m = Moments::default();
        for _ in 0..n_samples.max(1) {
            let s = NetworkState::random(n, rng);
            let mut p = s.clone();
            for i in index::sample(rng, n, h0) {
                p.toggle(i);
            }
            step_into(net, &s, &mut a);
            step_into(net, &p, &mut b);
            m.push(a.hamming_unchecked(&b) as f64);
        }
        let x = h0 as f64;
        num += x * m.mean();
        den += x * x;
        var += x * x * m.std_error().powi(2);
        total += m.n;
    }
    Ok(
        SensitivityEstimate::new(num / den, Mode::DaRandom, total, var.sqrt() / den)
            .with_context(format!("multipoint h0=1..{max_flips}")),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaOptions {
    /// Exhaustive over all (cycle state, node) pairs when `period * N` is at
    /// most this.
    pub exhaustive_threshold: usize,
    /// Sampled pairs otherwise.
    pub n_samples: usize,
}

impl Default for SaOptions {
    fn default() -> Self {
        Self {
            exhaustive_threshold: 1_000_000,
            n_samples: 100_000,
        }
    }
}

/// One-step spread of single flips applied to the states of an attractor.
pub fn attractor_sensitivity<R: RngCore + ?Sized>(
    net: &BooleanNetwork,
    attr: &Attractor,
    opts: SaOptions,
    rng: &mut R,
) -> SensitivityEstimate {
    let n = net.n_nodes();
    let states = attr.states();
    let pairs = states.len().saturating_mul(n);
    if pairs <= opts.exhaustive_threshold {
        let total: usize = states
            .iter()
            .map(|s| (0..n).map(|i| one_step_spread(net, s, i)).sum::<usize>())
            .sum();
        SensitivityEstimate::new(
            total as f64 / pairs as f64,
            Mode::SaAttractor,
            pairs as u64,
            0.0,
        )
        .with_context(format!("attractor {} exhaustive", attr.id()))
    } else {
        let mut m = Moments::default();
        for _ in 0..opts.n_samples.max(1) {
            let s = &states[rng.random_range(0..states.len())];
            let i = rng.random_range(0..n);
            m.push(one_step_spread(net, s, i) as f64);
        }
        SensitivityEstimate::new(m.mean(), Mode::SaAttractor, m.n, m.std_error())
            .with_context(format!("attractor {} sampled", attr.id()))
    }
}

/// Basin-weighted mean of per-attractor sensitivities, renormalized over
/// the resolved samples.
pub fn weighted_sa(
    attrs: &AttractorSet,
    per_attractor: &[SensitivityEstimate],
) -> Result<SensitivityEstimate> {
    if attrs.is_empty() {
        return Err(Error::Undefined("no resolved attractors to weight".into()));
    }
    if per_attractor.len() != attrs.len() {
        return Err(Error::contract(format!(
            "{} attractor sensitivities for {} attractors",
            per_attractor.len(),
            attrs.len()
        )));
    }
    let w = attrs.resolved_weight();
    if w <= 0.0 {
        return Err(Error::Undefined("attractor weights sum to zero".into()));
    }
    let mut lambda = 0.0;
    let mut var = 0.0;
    for (e, sa) in attrs.entries.iter().zip(per_attractor) {
        let f = e.weight / w;
        lambda += f * sa.lambda;
        var += (f * sa.std_error).powi(2);
    }
    Ok(
        SensitivityEstimate::new(lambda, Mode::SaWeighted, attrs.n_samples, var.sqrt())
            .with_context(format!(
                "unresolved_fraction={}",
                attrs.unresolved_fraction()
            )),
    )
}

/// Expected function sensitivity of a set member drawn with the set's
/// probabilities, inputs independent Bernoulli(`b`).
pub fn theoretical_sa(set: &FunctionSet, b: f64) -> Result<f64> {
    let mut total = 0.0;
    for (t, p) in set.iter() {
        total += p * bias_weighted_influence(t, &Bias::Scalar(b))?.sensitivity;
    }
    Ok(total)
}

/// Probability that `t` outputs 1 on independent Bernoulli(`b`) inputs.
pub fn expected_output(t: &TruthTable, b: f64) -> f64 {
    let k = t.arity();
    (0..1usize << k)
        .filter(|&r| t.output(r))
        .map(|r| {
            let ones = r.count_ones() as i32;
            b.powi(ones) * (1.0 - b).powi(k as i32 - ones)
        })
        .sum()
}

fn expected_output_derivative(t: &TruthTable, b: f64) -> f64 {
    let k = t.arity() as i32;
    (0..1usize << t.arity())
        .filter(|&r| t.output(r))
        .map(|r| {
            let c = r.count_ones() as i32;
            let up = if c > 0 {
                c as f64 * b.powi(c - 1) * (1.0 - b).powi(k - c)
            } else {
                0.0
            };
            let down = if c < k {
                (k - c) as f64 * b.powi(c) * (1.0 - b).powi(k - c - 1)
            } else {
                0.0
            };
            up - down
        })
        .sum()
}

/// One application of the mean-field bias map.
pub fn annealed_bias_step(set: &FunctionSet, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&b) {
        return Err(Error::param(format!("bias {b} outside [0, 1]")));
    }
    // A probability; summation error must not push it outside [0, 1].
    Ok(set
        .iter()
        .map(|(t, p)| p * expected_output(t, b))
        .sum::<f64>()
        .clamp(0.0, 1.0))
}

fn annealed_slope(set: &FunctionSet, b: f64) -> f64 {
    set.iter()
        .map(|(t, p)| p * expected_output_derivative(t, b))
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FixedPoint {
    pub b: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `|f(b) - b|` at the returned value.
    pub residual: f64,
}

/// Iterates the bias map from `b0` until successive values differ by less
/// than `tol`, then polishes the root of `f(b) - b` with Newton steps.
///
/// Near a tangent fixed point (slope 1, as for M5 at 0) the plain iteration
/// stops a long way from the root; Newton still converges there, linearly.
pub fn annealed_fixed_point(
    set: &FunctionSet,
    b0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPoint> {
    if !(0.0..=1.0).contains(&b0) {
        return Err(Error::param(format!("initial bias {b0} outside [0, 1]")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::param("tolerance must be positive"));
    }
    let mut b = b0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let next = annealed_bias_step(set, b)?;
        iterations += 1;
        let delta = (next - b).abs();
        b = next;
        if delta < tol {
            converged = true;
            break;
        }
    }
    if converged {
        b = polish_root(set, b)?;
    }
    let residual = (annealed_bias_step(set, b)? - b).abs();
    Ok(FixedPoint {
        b,
        iterations,
        converged,
        residual,
    })
}

fn polish_root(set: &FunctionSet, mut b: f64) -> Result<f64> {
    let g = |x: f64| -> Result<f64> { Ok(annealed_bias_step(set, x)? - x) };
    let mut gb = g(b)?;
    for _ in 0..2000 {
        if gb == 0.0 {
            break;
        }
        let slope = annealed_slope(set, b) - 1.0;
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let candidate = (b - gb / slope).clamp(0.0, 1.0);
        let gc = g(candidate)?;
        if gc.abs() > gb.abs() || candidate == b {
            break;
        }
        b = candidate;
        gb = gc;
    }
    Ok(b)
}
