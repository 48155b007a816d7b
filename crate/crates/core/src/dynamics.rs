//! Synchronous dynamics and attractors.

use std::collections::HashMap;
use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{BooleanNetwork, NetworkState};

/// Default size limit of [`enumerate_attractors_exact`].
pub const EXACT_LIMIT: usize = 20;

/// One synchronous update of every node.
pub fn step(net: &BooleanNetwork, s: &NetworkState) -> NetworkState {
    let mut out = NetworkState::zeros(net.n_nodes());
    step_into(net, s, &mut out);
    out
}

/// [`step`] writing into an existing buffer of the right length.
pub fn step_into(net: &BooleanNetwork, s: &NetworkState, out: &mut NetworkState) {
    debug_assert_eq!(s.len(), net.n_nodes());
    debug_assert_eq!(out.len(), net.n_nodes());
    for node in 0..net.n_nodes() {
        out.set(node, net.node_update(node, s));
    }
}

/// Limits on the attractor search. A trajectory whose transient or period
/// exceeds its cap is reported as unresolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub max_transient: usize,
    pub max_period: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            max_transient: 10_000,
            max_period: 10_000,
        }
    }
}

/// Hash of the canonical cycle, stable across runs and platforms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AttractorId(pub u64);

impl fmt::Display for AttractorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// A state cycle, rotated so that its lexicographically smallest state comes
/// first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Attractor {
    cycle: Vec<NetworkState>,
    id: AttractorId,
}

impl Attractor {
    /// Builds an attractor from consecutive cycle states (any rotation).
    fn from_cycle(mut cycle: Vec<NetworkState>) -> Self {
        let start = cycle
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        cycle.rotate_left(start);
        let mut h = Sha256::new();
        h.update((cycle.len() as u64).to_le_bytes());
        for s in &cycle {
            h.update((s.len() as u64).to_le_bytes());
            for w in s.words() {
                h.update(w.to_le_bytes());
            }
        }
        let digest = h.finalize();
        let mut id = [0u8; 8];
        id.copy_from_slice(&digest[..8]);
        Self {
            cycle,
            id: AttractorId(u64::from_be_bytes(id)),
        }
    }

    /// Checks that `states` is a cycle of `net` (in order, no repeats) and
    /// canonicalizes it.
    pub fn from_states(net: &BooleanNetwork, states: Vec<NetworkState>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::contract("an attractor needs at least one state"));
        }
        let p = states.len();
        for t in 0..p {
            if states[t].len() != net.n_nodes() {
                return Err(Error::contract("state length does not match the network"));
            }
            if step(net, &states[t]) != states[(t + 1) % p] {
                return Err(Error::contract(format!(
                    "state {t} does not step to state {}",
                    (t + 1) % p
                )));
            }
        }
        if p > 1 && states[1..].contains(&states[0]) {
            return Err(Error::contract("cycle states repeat"));
        }
        Ok(Self::from_cycle(states))
    }

    pub fn id(&self) -> AttractorId {
        self.id
    }

    pub fn period(&self) -> usize {
        self.cycle.len()
    }

    pub fn states(&self) -> &[NetworkState] {
        &self.cycle
    }

    pub fn first_state(&self) -> &NetworkState {
        &self.cycle[0]
    }

    pub fn n_nodes(&self) -> usize {
        self.cycle[0].len()
    }

    pub fn is_fixed_point(&self) -> bool {
        self.cycle.len() == 1
    }

    /// Fraction of ones over all nodes and all cycle states.
    pub fn bias(&self) -> f64 {
        let ones: usize = self.cycle.iter().map(NetworkState::count_ones).sum();
        ones as f64 / (self.period() * self.n_nodes()) as f64
    }

    /// Per-node time average of the node's value along the cycle.
    pub fn node_bias(&self) -> Vec<f64> {
        let p = self.period() as f64;
        (0..self.n_nodes())
            .map(|i| self.cycle.iter().filter(|s| s.get(i)).count() as f64 / p)
            .collect()
    }
}

pub fn measure_bias(attr: &Attractor) -> f64 {
    attr.bias()
}

/// Outcome of following one trajectory.
#[derive(Clone, Debug, PartialEq)]
pub enum Search {
    Found {
        attractor: Attractor,
        transient: usize,
    },
    Unresolved {
        steps: usize,
    },
}

impl Search {
    pub fn attractor(&self) -> Option<&Attractor> {
        match self {
            Search::Found { attractor, .. } => Some(attractor),
            Search::Unresolved { .. } => None,
        }
    }
}

/// Follows the trajectory from `s0` until a state repeats.
///
/// Each visited state is stored with its first visit time, so the repeat
/// gives transient length and period directly.
pub fn find_attractor(net: &BooleanNetwork, s0: &NetworkState, caps: Caps) -> Search {
    let limit = caps.max_transient + caps.max_period;
    let mut seen: HashMap<NetworkState, usize> = HashMap::new();
    let mut trajectory: Vec<NetworkState> = Vec::new();
    let mut current = s0.clone();
    let mut next = NetworkState::zeros(net.n_nodes());
    for t in 0..=limit {
        if let Some(&first) = seen.get(&current) {
            let period = t - first;
            if first > caps.max_transient || period > caps.max_period {
                return Search::Unresolved { steps: t };
            }
            trajectory.truncate(t);
            let cycle = trajectory.split_off(first);
            return Search::Found {
                attractor: Attractor::from_cycle(cycle),
                transient: first,
            };
        }
        seen.insert(current.clone(), t);
        step_into(net, &current, &mut next);
        trajectory.push(std::mem::replace(&mut current, next.clone()));
    }
    Search::Unresolved { steps: limit + 1 }
}

/// One attractor with the share of initial conditions that reached it.
#[derive(Clone, Debug, PartialEq)]
pub struct BasinEntry {
    pub attractor: Attractor,
    pub hits: u64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttractorSet {
    /// Sorted by the canonical first state.
    pub entries: Vec<BasinEntry>,
    pub n_samples: u64,
    pub n_unresolved: u64,
    /// True when every state was classified by exhaustive enumeration.
    pub exact: bool,
}

impl AttractorSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn unresolved_fraction(&self) -> f64 {
        if self.n_samples == 0 {
            0.0
        } else {
            self.n_unresolved as f64 / self.n_samples as f64
        }
    }

    pub fn resolved_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.weight).sum()
    }

    pub fn get(&self, id: AttractorId) -> Option<&BasinEntry> {
        self.entries.iter().find(|e| e.attractor.id() == id)
    }

    /// Basin-weighted mean attractor bias over resolved samples.
    pub fn weighted_bias(&self) -> Option<f64> {
        let w = self.resolved_weight();
        if w <= 0.0 {
            return None;
        }
        Some(
            self.entries
                .iter()
                .map(|e| e.weight * e.attractor.bias())
                .sum::<f64>()
                / w,
        )
    }
}

/// Classifies each of `states` by the attractor its trajectory reaches.
pub fn attractors_from_states<I>(net: &BooleanNetwork, states: I, caps: Caps) -> AttractorSet
where
    I: IntoIterator<Item = NetworkState>,
{
    let mut found: HashMap<NetworkState, (Attractor, u64)> = HashMap::new();
    let mut n_samples = 0u64;
    let mut n_unresolved = 0u64;
    for s0 in states {
        n_samples += 1;
        match find_attractor(net, &s0, caps) {
            Search::Found { attractor, .. } => {
                found
                    .entry(attractor.first_state().clone())
                    .or_insert_with(|| (attractor, 0))
                    .1 += 1;
            }
            Search::Unresolved { .. } => n_unresolved += 1,
        }
    }
    let mut entries: Vec<BasinEntry> = found
        .into_values()
        .map(|(attractor, hits)| BasinEntry {
            attractor,
            hits,
            weight: hits as f64 / n_samples as f64,
        })
        .collect();
    entries.sort_by(|a, b| a.attractor.first_state().cmp(b.attractor.first_state()));
    AttractorSet {
        entries,
        n_samples,
        n_unresolved,
        exact: false,
    }
}

/// Basin estimate from `n_samples` uniformly random initial states.
pub fn sample_attractors<R: RngCore + ?Sized>(
    net: &BooleanNetwork,
    n_samples: usize,
    caps: Caps,
    rng: &mut R,
) -> AttractorSet {
    let n = net.n_nodes();
    let states: Vec<NetworkState> = (0..n_samples)
        .map(|_| NetworkState::random(n, rng))
        .collect();
    attractors_from_states(net, states, caps)
}

/// Every state of `{0,1}^N` classified, with exact basin sizes.
pub fn enumerate_attractors_exact(net: &BooleanNetwork) -> Result<AttractorSet> {
    enumerate_attractors_exact_with_limit(net, EXACT_LIMIT)
}

pub fn enumerate_attractors_exact_with_limit(
    net: &BooleanNetwork,
    limit: usize,
) -> Result<AttractorSet> {
    let n = net.n_nodes();
    if n > limit || n > 30 {
        return Err(Error::TooLarge {
            n,
            limit: limit.min(30),
        });
    }
    let size = 1usize << n;
    // successor table over integer codes, bit i of the code = node i
    let succ: Vec<u32> = (0..size as u32)
        .map(|code| {
            let mut next = 0u32;
            for node in 0..n {
                let row = net.inputs(node).iter().fold(0usize, |acc, &src| {
                    (acc << 1) | ((code >> src) & 1) as usize
                });
                if net.table(node).output(row) {
                    next |= 1 << node;
                }
            }
            next
        })
        .collect();

    const NONE: u32 = u32::MAX;
    let mut label = vec![NONE; size];
    let mut walk = vec![NONE; size];
    let mut cycles: Vec<Vec<u32>> = Vec::new();
    let mut basin: Vec<u64> = Vec::new();
    let mut path = Vec::new();
    for start in 0..size as u32 {
        if label[start as usize] != NONE {
            continue;
        }
        path.clear();
        let mut x = start;
        while label[x as usize] == NONE && walk[x as usize] != start {
            walk[x as usize] = start;
            path.push(x);
            x = succ[x as usize];
        }
        let lab = if label[x as usize] != NONE {
            label[x as usize]
        } else {
            let mut cycle = vec![x];
            let mut y = succ[x as usize];
            while y != x {
                cycle.push(y);
                y = succ[y as usize];
            }
            cycles.push(cycle);
            basin.push(0);
            (cycles.len() - 1) as u32
        };
        for &p in &path {
            label[p as usize] = lab;
        }
        basin[lab as usize] += path.len() as u64;
    }

    let mut entries: Vec<BasinEntry> = cycles
        .into_iter()
        .zip(basin)
        .map(|(cycle, hits)| BasinEntry {
            attractor: Attractor::from_cycle(
                cycle
                    .into_iter()
                    .map(|c| NetworkState::from_code(n, c as u64))
                    .collect(),
            ),
            hits,
            weight: hits as f64 / size as f64,
        })
        .collect();
    entries.sort_by(|a, b| a.attractor.first_state().cmp(b.attractor.first_state()));
    Ok(AttractorSet {
        entries,
        n_samples: size as u64,
        n_unresolved: 0,
        exact: true,
    })
}

/// Every state of `{0,1}^N` in code order (for small networks).
pub fn all_states(n: usize) -> impl Iterator<Item = NetworkState> {
    assert!(n <= 30, "all_states is meant for small networks");
    (0..1u64 << n).map(move |c| NetworkState::from_code(n, c))
}

/// Serializable view of an attractor for dumps.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AttractorDump {
    pub id: String,
    pub period: usize,
    pub b: f64,
    pub basin_weight: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cycle: Option<Vec<String>>,
}

impl AttractorDump {
    pub fn new(entry: &BasinEntry, with_cycle: bool) -> Self {
        Self {
            id: entry.attractor.id().to_string(),
            period: entry.attractor.period(),
            b: entry.attractor.bias(),
            basin_weight: entry.weight,
            cycle: with_cycle.then(|| {
                entry
                    .attractor
                    .states()
                    .iter()
                    .map(|s| s.to_bitstring())
                    .collect()
            }),
        }
    }
}



#[cfg(test)]
mod proptests {
    use super::*;
    use crate::generation::{build_network, FamilySpec};
    use crate::rng::RandomSource;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn cycles_close_and_are_canonical(seed in any::<u64>(), n in 3usize..40, k in 1usize..4) {
            prop_assume!(k < n);
            let src = RandomSource::new(seed);
            let net = build_network(&FamilySpec::bernoulli("p", n, k, 0.5), &mut src.stream("g", 0)).unwrap();
            let s0 = NetworkState::random(n, &mut src.stream("s", 0));
            if let Search::Found { attractor, .. } = find_attractor(&net, &s0, Caps::default()) {
                let p = attractor.period();
                for t in 0..p {
                    prop_assert_eq!(&step(&net, &attractor.states()[t]), &attractor.states()[(t + 1) % p]);
                }
                let mut s = attractor.states()[p / 2].clone();
                for _ in 0..p {
                    s = step(&net, &s);
                }
                prop_assert_eq!(&s, &attractor.states()[p / 2]);
                prop_assert!(attractor.states().iter().all(|x| x >= attractor.first_state()));
                let mut rotated = attractor.states().to_vec();
                rotated.rotate_left(p / 2);
                let again = Attractor::from_states(&net, rotated).unwrap();
                prop_assert_eq!(again.id(), attractor.id());
                prop_assert_eq!(again.states(), attractor.states());
            }
        }
    }
}
