//! Network families: random topology plus bias-sampled, set-sampled or
//! majority-rule truth tables.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BooleanNetwork, TruthTable};

/// Which of the two roots of `2 p (1 - p) = 1 / k` to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootSelector {
    #[default]
    Lower,
    Upper,
}

/// Bias on the order/chaos boundary for in-degree `k_in`.
pub fn critical_bias(k_in: usize, root: RootSelector) -> Result<f64> {
    if k_in < 2 {
        return Err(Error::param(format!(
            "k_in = {k_in} has no real critical bias (needs k_in >= 2)"
        )));
    }
    let half_width = 0.5 * (1.0 - 2.0 / k_in as f64).sqrt();
    Ok(match root {
        RootSelector::Lower => 0.5 - half_width,
        RootSelector::Upper => 0.5 + half_width,
    })
}

/// Uniform choice of `k_in` distinct sources per node among the other
/// `n - 1` nodes.
pub fn generate_topology<R: Rng + ?Sized>(
    n: usize,
    k_in: usize,
    rng: &mut R,
) -> Result<Vec<Vec<usize>>> {
    if n == 0 {
        return Err(Error::param("network size must be positive"));
    }
    if k_in + 1 > n {
        return Err(Error::param(format!(
            "k_in = {k_in} needs at least {} nodes without self-loops, got {n}",
            k_in + 1
        )));
    }
    Ok((0..n)
        .map(|i| {
            rand::seq::index::sample(rng, n - 1, k_in)
                .into_iter()
                .map(|j| if j >= i { j + 1 } else { j })
                .collect()
        })
        .collect())
}

/// Table whose `2^k` rows are independent Bernoulli(`p`) draws.
pub fn sample_table_bernoulli<R: Rng + ?Sized>(
    k: usize,
    p: f64,
    rng: &mut R,
) -> Result<TruthTable> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("bias {p} outside [0, 1]")));
    }
    if k == 0 || k > crate::model::MAX_ARITY {
        return Err(Error::param(format!("unsupported arity {k}")));
    }
    let outputs = (0..1usize << k).map(|_| rng.random_bool(p)).collect();
    TruthTable::new(k, outputs)
}

/// Weighted collection of truth tables of a common arity.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionSet {
    members: Vec<TruthTable>,
    probabilities: Vec<f64>,
}

impl FunctionSet {
    pub fn new(members: Vec<TruthTable>, probabilities: Vec<f64>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::param("function set is empty"));
        }
        if members.len() != probabilities.len() {
            return Err(Error::param(format!(
                "{} members but {} probabilities",
                members.len(),
                probabilities.len()
            )));
        }
        let arity = members[0].arity();
        if members.iter().any(|m| m.arity() != arity) {
            return Err(Error::param("function set members have different arities"));
        }
        if probabilities.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::param(
                "function set probabilities must be non-negative",
            ));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param(format!(
                "function set probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self {
            members,
            probabilities,
        })
    }

    pub fn uniform(members: Vec<TruthTable>) -> Result<Self> {
        let p = 1.0 / members.len().max(1) as f64;
        let n = members.len();
        // exact 1/n sums can drift from 1 by an ulp or two; that passes the 1e-12 check
        Self::new(members, vec![p; n])
    }

    fn from_bitstrings(tables: &[&str]) -> Self {
        let members = tables
            .iter()
            .map(|t| TruthTable::from_bitstring(t).expect("built-in table"))
            .collect();
        Self::uniform(members).expect("built-in set")
    }

    /// Two-input functions of the threshold +0.5 family:
    /// `A OR B`, `NOT A AND B`, `A AND NOT B`, `FALSE`.
    pub fn m5() -> Self {
        Self::from_bitstrings(&["0111", "0100", "0010", "0000"])
    }

    /// Member-wise complement of [`FunctionSet::m5`]:
    /// `NOR`, `A OR NOT B`, `NOT A OR B`, `TRUE`.
    pub fn m6() -> Self {
        Self::from_bitstrings(&["1000", "1011", "1101", "1111"])
    }

    /// The 13 two-input functions left after removing XOR, XNOR and FALSE.
    pub fn yeast13() -> Self {
        let members = (0u8..16)
            .filter(|code| !matches!(code, 0b0110 | 0b1001 | 0b0000))
            .map(|code| {
                let bits: Vec<bool> = (0..4).map(|row| (code >> (3 - row)) & 1 == 1).collect();
                TruthTable::new(2, bits).expect("two-input table")
            })
            .collect();
        Self::uniform(members).expect("yeast13")
    }

    /// Built-in sets: `M5`, `M6`, `yeast13`.
    pub fn named(name: &str) -> Result<Self> {
        match name {
            "M5" | "m5" => Ok(Self::m5()),
            "M6" | "m6" => Ok(Self::m6()),
            "yeast13" => Ok(Self::yeast13()),
            other => Err(Error::Config(format!(
                "unknown function set {other:?} (known: M5, M6, yeast13)"
            ))),
        }
    }

    pub fn members(&self) -> &[TruthTable] {
        &self.members
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn arity(&self) -> usize {
        self.members[0].arity()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TruthTable, f64)> {
        self.members.iter().zip(self.probabilities.iter().copied())
    }
}

/// Draws one member according to the set's probabilities.
pub fn sample_table_from_set<R: Rng + ?Sized>(set: &FunctionSet, rng: &mut R) -> TruthTable {
    if set.members.len() == 1 {
        return set.members[0].clone();
    }
    let dist = WeightedIndex::new(&set.probabilities).expect("validated probabilities");
    set.members[dist.sample(rng)].clone()
}

/// Majority rule over an odd number of inputs.
pub fn majority_table(k: usize) -> Result<TruthTable> {
    if k.is_multiple_of(2) {
        return Err(Error::param(format!(
            "majority rule needs an odd arity, got {k}"
        )));
    }
    if k > crate::model::MAX_ARITY {
        return Err(Error::param(format!("unsupported arity {k}")));
    }
    let outputs = (0..1usize << k)
        .map(|row| row.count_ones() as usize > k / 2)
        .collect();
    TruthTable::new(k, outputs)
}

/// Function set referenced from a family spec: a built-in name or an
/// explicit list of tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSetRef {
    Named {
        name: String,
    },
    Custom {
        tables: Vec<String>,
        #[serde(default)]
        probabilities: Option<Vec<f64>>,
    },
}

impl FunctionSetRef {
    pub fn resolve(&self) -> Result<FunctionSet> {
        match self {
            FunctionSetRef::Named { name } => FunctionSet::named(name),
            FunctionSetRef::Custom {
                tables,
                probabilities,
            } => {
                let members = tables
                    .iter()
                    .map(|t| TruthTable::from_bitstring(t))
                    .collect::<Result<Vec<_>>>()?;
                match probabilities {
                    Some(p) => FunctionSet::new(members, p.clone()),
                    None => FunctionSet::uniform(members),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum FunctionScheme {
    Bernoulli {
        p: f64,
    },
    FunctionSet {
        #[serde(flatten)]
        set: FunctionSetRef,
    },
    Majority,
    CriticalBias {
        #[serde(default)]
        root: RootSelector,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyScheme {
    #[default]
    RandomNoDupNoSelf,
}

/// Everything needed to draw one network of a family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(default)]
    pub tag: String,
    pub n_nodes: usize,
    pub k_in: usize,
    pub functions: FunctionScheme,
    #[serde(default)]
    pub topology: TopologyScheme,
}

impl FamilySpec {
    pub fn bernoulli(tag: &str, n_nodes: usize, k_in: usize, p: f64) -> Self {
        Self {
            tag: tag.to_string(),
            n_nodes,
            k_in,
            functions: FunctionScheme::Bernoulli { p },
            topology: TopologyScheme::default(),
        }
    }

    pub fn named_set(tag: &str, n_nodes: usize, k_in: usize, name: &str) -> Self {
        Self {
            tag: tag.to_string(),
            n_nodes,
            k_in,
            functions: FunctionScheme::FunctionSet {
                set: FunctionSetRef::Named {
                    name: name.to_string(),
                },
            },
            topology: TopologyScheme::default(),
        }
    }

    pub fn majority(tag: &str, n_nodes: usize, k_in: usize) -> Self {
        Self {
            tag: tag.to_string(),
            n_nodes,
            k_in,
            functions: FunctionScheme::Majority,
            topology: TopologyScheme::default(),
        }
    }

    pub fn critical(tag: &str, n_nodes: usize, k_in: usize, root: RootSelector) -> Self {
        Self {
            tag: tag.to_string(),
            n_nodes,
            k_in,
            functions: FunctionScheme::CriticalBias { root },
            topology: TopologyScheme::default(),
        }
    }

    /// Checks the spec and resolves it into a ready-to-sample form.
    pub fn compile(&self) -> Result<CompiledFamily> {
        if self.n_nodes == 0 {
            return Err(Error::param("n_nodes must be positive"));
        }
        if self.k_in == 0 {
            return Err(Error::param("k_in must be at least 1"));
        }
        if self.k_in + 1 > self.n_nodes {
            return Err(Error::param(format!(
                "k_in = {} requires n_nodes >= {}",
                self.k_in,
                self.k_in + 1
            )));
        }
        let tables = match &self.functions {
            FunctionScheme::Bernoulli { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::param(format!("bias {p} outside [0, 1]")));
                }
                TableSource::Bernoulli(*p)
            }
            FunctionScheme::CriticalBias { root } => {
                TableSource::Bernoulli(critical_bias(self.k_in, *root)?)
            }
            FunctionScheme::Majority => TableSource::Fixed(majority_table(self.k_in)?),
            FunctionScheme::FunctionSet { set } => {
                let set = set.resolve()?;
                if set.arity() != self.k_in {
                    return Err(Error::param(format!(
                        "function set arity {} does not match k_in = {}",
                        set.arity(),
                        self.k_in
                    )));
                }
                TableSource::Set(set)
            }
        };
        Ok(CompiledFamily {
            n_nodes: self.n_nodes,
            k_in: self.k_in,
            tables,
        })
    }
}

#[derive(Clone, Debug)]
enum TableSource {
    Bernoulli(f64),
    Set(FunctionSet),
    Fixed(TruthTable),
}

/// A validated family spec.
#[derive(Clone, Debug)]
pub struct CompiledFamily {
    n_nodes: usize,
    k_in: usize,
    tables: TableSource,
}

impl CompiledFamily {
    /// Generation bias of the truth tables, when the family has one.
    pub fn bias(&self) -> Option<f64> {
        match self.tables {
            TableSource::Bernoulli(p) => Some(p),
            _ => None,
        }
    }

    pub fn function_set(&self) -> Option<&FunctionSet> {
        match &self.tables {
            TableSource::Set(s) => Some(s),
            _ => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<BooleanNetwork> {
        let inputs = generate_topology(self.n_nodes, self.k_in, rng)?;
        let tables = (0..self.n_nodes)
            .map(|_| match &self.tables {
                TableSource::Bernoulli(p) => sample_table_bernoulli(self.k_in, *p, rng),
                TableSource::Set(set) => Ok(sample_table_from_set(set, rng)),
                TableSource::Fixed(t) => Ok(t.clone()),
            })
            .collect::<Result<Vec<_>>>()?;
        BooleanNetwork::new(inputs, tables)
    }
}

/// Draws one network of the family.
pub fn build_network<R: Rng + ?Sized>(spec: &FamilySpec, rng: &mut R) -> Result<BooleanNetwork> {
    spec.compile()?.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::to_canonical_string;
    use crate::rng::RandomSource;

    #[test]
    fn critical_bias_values() {
        assert_eq!(critical_bias(2, RootSelector::Lower).unwrap(), 0.5);
        assert_eq!(critical_bias(2, RootSelector::Upper).unwrap(), 0.5);
        // (1 - sqrt(1/2)) / 2
        let p4 = critical_bias(4, RootSelector::Lower).unwrap();
        assert!((p4 - 0.146_446_609_406_726_24).abs() < 1e-12);
        assert!((p4 - 0.146447).abs() < 1e-6);
        assert!(critical_bias(1, RootSelector::Lower).is_err());
        assert!(critical_bias(0, RootSelector::Upper).is_err());
    }

    #[test]
    fn critical_bias_roots_satisfy_the_curve() {
        for k in 2..=10 {
            let lo = critical_bias(k, RootSelector::Lower).unwrap();
            let hi = critical_bias(k, RootSelector::Upper).unwrap();
            for p in [lo, hi] {
                assert!((2.0 * p * (1.0 - p) - 1.0 / k as f64).abs() < 1e-12);
            }
            assert!(lo <= 0.5 && 0.5 <= hi);
        }
    }

    #[test]
    fn topology_n3_is_forced() {
        let mut rng = RandomSource::new(1).stream("topo", 0);
        let t = generate_topology(3, 2, &mut rng).unwrap();
        for (i, srcs) in t.iter().enumerate() {
            let mut s = srcs.clone();
            s.sort();
            let expect: Vec<usize> = (0..3).filter(|&j| j != i).collect();
            assert_eq!(s, expect);
        }
    }

    #[test]
    fn topology_n100_postconditions() {
        let mut rng = RandomSource::new(2).stream("topo", 0);
        let t = generate_topology(100, 2, &mut rng).unwrap();
        for (i, srcs) in t.iter().enumerate() {
            assert_eq!(srcs.len(), 2);
            assert!(!srcs.contains(&i));
            assert_ne!(srcs[0], srcs[1]);
        }
        assert!(generate_topology(3, 3, &mut rng).is_err());
    }

    #[test]
    fn topology_sources_are_uniform() {
        // node 0 of a 6-node net, k = 2: every one of nodes 1..5 appears with
        // probability 2/5; chi-square over 10^4 draws with 4 dof
        let mut rng = RandomSource::new(3).stream("topo", 0);
        let draws = 10_000;
        let mut counts = [0usize; 6];
        for _ in 0..draws {
            let t = generate_topology(6, 2, &mut rng).unwrap();
            for &s in &t[0] {
                counts[s] += 1;
            }
        }
        assert_eq!(counts[0], 0);
        let expected = draws as f64 * 2.0 / 5.0;
        let chi2: f64 = counts[1..]
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 99.9% quantile of chi-square(4) is 18.47
        assert!(chi2 < 18.47, "chi2 = {chi2}");
    }

    #[test]
    fn bernoulli_extremes_and_balance() {
        let mut rng = RandomSource::new(4).stream("tables", 0);
        assert!(sample_table_bernoulli(3, 0.0, &mut rng)
            .unwrap()
            .outputs()
            .iter()
            .all(|b| !b));
        assert!(sample_table_bernoulli(3, 1.0, &mut rng)
            .unwrap()
            .outputs()
            .iter()
            .all(|&b| b));
        assert!(sample_table_bernoulli(2, 1.5, &mut rng).is_err());
        let tables = 100_000;
        let ones: usize = (0..tables)
            .map(|_| {
                sample_table_bernoulli(2, 0.5, &mut rng)
                    .unwrap()
                    .outputs()
                    .iter()
                    .filter(|&&b| b)
                    .count()
            })
            .sum();
        let bits = (tables * 4) as f64;
        let frac = ones as f64 / bits;
        let sigma = (0.25 / bits).sqrt();
        assert!((frac - 0.5).abs() < 3.0 * sigma, "frac = {frac}");
    }

    #[test]
    fn m5_members_drawn_uniformly() {
        let set = FunctionSet::m5();
        let mut rng = RandomSource::new(5).stream("set", 0);
        let draws = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..draws {
            let t = sample_table_from_set(&set, &mut rng);
            let idx = set.members().iter().position(|m| *m == t).unwrap();
            counts[idx] += 1;
        }
        let sigma = (0.25 * 0.75 / draws as f64).sqrt();
        for c in counts {
            assert!(
                (c as f64 / draws as f64 - 0.25).abs() < 3.0 * sigma,
                "{counts:?}"
            );
        }
    }

    #[test]
    fn singleton_set_always_returns_its_member() {
        let t = TruthTable::from_bitstring("0110").unwrap();
        let set = FunctionSet::uniform(vec![t.clone()]).unwrap();
        let mut rng = RandomSource::new(6).stream("set", 0);
        for _ in 0..100 {
            assert_eq!(sample_table_from_set(&set, &mut rng), t);
        }
    }

    #[test]
    fn m6_is_memberwise_complement_of_m5() {
        for (a, b) in FunctionSet::m5()
            .members()
            .iter()
            .zip(FunctionSet::m6().members())
        {
            for row in 0..4 {
                assert_eq!(a.output(row), !b.output(row));
            }
        }
    }

    #[test]
    fn yeast13_excludes_xor_xnor_false() {
        let set = FunctionSet::yeast13();
        assert_eq!(set.members().len(), 13);
        let names: Vec<String> = set.members().iter().map(|t| t.to_bitstring()).collect();
        for excluded in ["0110", "1001", "0000"] {
            assert!(!names.contains(&excluded.to_string()));
        }
        assert!(names.contains(&"1111".to_string()));
    }

    #[test]
    fn function_set_validation() {
        let t2 = TruthTable::from_bitstring("0111").unwrap();
        let t3 = TruthTable::from_bitstring("00010111").unwrap();
        assert!(FunctionSet::new(vec![], vec![]).is_err());
        assert!(FunctionSet::new(vec![t2.clone(), t3], vec![0.5, 0.5]).is_err());
        assert!(FunctionSet::new(vec![t2.clone()], vec![0.9]).is_err());
        assert!(FunctionSet::new(vec![t2.clone(), t2], vec![1.5, -0.5]).is_err());
        assert!(FunctionSet::named("M9").is_err());
    }

    #[test]
    fn majority_examples() {
        let m = majority_table(3).unwrap();
        assert!(m.eval(&[true, true, false]).unwrap());
        assert!(!m.eval(&[false, false, true]).unwrap());
        assert_eq!(m.to_bitstring(), "00010111");
        assert!(majority_table(4).is_err());
    }

    #[test]
    fn build_m1_and_m7_style() {
        let src = RandomSource::new(7);
        let m1 = build_network(
            &FamilySpec::bernoulli("M1", 100, 2, 0.5),
            &mut src.stream("g", 0),
        )
        .unwrap();
        assert_eq!(m1.n_nodes(), 100);
        assert_eq!(m1.flags(), Default::default());
        let m7 =
            build_network(&FamilySpec::majority("M7", 71, 3), &mut src.stream("g", 1)).unwrap();
        let maj = majority_table(3).unwrap();
        assert!(m7.tables().iter().all(|t| *t == maj));
        for i in 0..71 {
            assert_eq!(m7.inputs(i).len(), 3);
        }
    }

    #[test]
    fn build_is_deterministic() {
        let src = RandomSource::new(8);
        let spec = FamilySpec::named_set("M5", 50, 2, "M5");
        let a = build_network(&spec, &mut src.stream("g", 3)).unwrap();
        let b = build_network(&spec, &mut src.stream("g", 3)).unwrap();
        assert_eq!(to_canonical_string(&a), to_canonical_string(&b));
    }

    #[test]
    fn spec_validation() {
        let mut rng = RandomSource::new(9).stream("g", 0);
        assert!(build_network(&FamilySpec::majority("x", 10, 2), &mut rng).is_err());
        assert!(build_network(&FamilySpec::bernoulli("x", 2, 2, 0.5), &mut rng).is_err());
        assert!(build_network(&FamilySpec::named_set("x", 10, 3, "M5"), &mut rng).is_err());
        assert!(build_network(
            &FamilySpec::critical("x", 10, 1, RootSelector::Lower),
            &mut rng
        )
        .is_err());
    }

    #[test]
    fn family_spec_toml_shape() {
        let spec: FamilySpec = toml::from_str(
            r#"
            tag = "M5"
            n_nodes = 70
            k_in = 2
            functions = { scheme = "function_set", name = "M5" }
            "#,
        )
        .unwrap();
        assert_eq!(spec, FamilySpec::named_set("M5", 70, 2, "M5"));
        let spec: FamilySpec = toml::from_str(
            r#"
            n_nodes = 20
            k_in = 2
            functions = { scheme = "function_set", tables = ["0111", "1000"] }
            "#,
        )
        .unwrap();
        assert_eq!(
            spec.compile()
                .unwrap()
                .function_set()
                .unwrap()
                .members()
                .len(),
            2
        );
        let spec: FamilySpec = toml::from_str(
            "n_nodes = 20\nk_in = 4\nfunctions = { scheme = \"critical_bias\", root = \"upper\" }\n",
        )
        .unwrap();
        assert!(spec.compile().unwrap().bias().unwrap() > 0.5);
    }
}
