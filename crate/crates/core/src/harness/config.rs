//! Experiment configuration (TOML, versioned schema).
//!
//! ```toml
//! schema_version = 1
//! seed = 2024
//!
//! [sampling]
//! n_initial_states = 1000
//!
//! [experiment]
//! kind = "ensemble_DA_SA"
//! n_networks = 20
//!
//! [[experiment.families]]
//! tag = "M1-N50"
//! n_nodes = 50
//! k_in = 2
//! functions = { scheme = "bernoulli", p = 0.5 }
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::avalanche::{HorizonPolicy, KnockoutOptions};
use crate::dynamics::Caps;
use crate::error::{Error, Result};
use crate::generation::{FamilySpec, RootSelector};
use crate::measures::SaOptions;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub sampling: SamplingParams,
    #[serde(default)]
    pub policy: PolicyFlags,
    pub experiment: Experiment,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingParams {
    /// Random initial conditions per network for basin estimation.
    pub n_initial_states: usize,
    pub max_transient: usize,
    pub max_period: usize,
    /// Perturbation pairs for DA.
    pub n_derrida_samples: usize,
    /// Largest perturbation size of the DA fit (1 = slope from single flips).
    pub derrida_max_flips: usize,
    /// SA_i is exhaustive when period * N is at most this.
    pub exhaustive_threshold: usize,
    /// Perturbation pairs for SA_i above the threshold.
    pub n_sa_samples: usize,
    pub bootstrap_replicates: usize,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self {
            n_initial_states: 1000,
            max_transient: 10_000,
            max_period: 10_000,
            n_derrida_samples: 10_000,
            derrida_max_flips: 1,
            exhaustive_threshold: 1_000_000,
            n_sa_samples: 100_000,
            bootstrap_replicates: 1000,
        }
    }
}

impl SamplingParams {
    pub fn caps(&self) -> Caps {
        Caps {
            max_transient: self.max_transient,
            max_period: self.max_period,
        }
    }

    pub fn sa_options(&self) -> SaOptions {
        SaOptions {
            exhaustive_threshold: self.exhaustive_threshold,
            n_samples: self.n_sa_samples,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasWeighting {
    /// One network-wide attractor bias.
    #[default]
    Scalar,
    /// Each input weighted by the time average of the node it reads.
    PerNode,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartState {
    /// First state of the canonical cycle.
    #[default]
    Canonical,
    /// Uniformly chosen cycle state per knock-out.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyFlags {
    pub horizon: HorizonPolicy,
    pub max_horizon: usize,
    pub start_state: StartState,
    pub root: RootSelector,
    pub bias_weighting: BiasWeighting,
}

impl Default for PolicyFlags {
    fn default() -> Self {
        Self {
            horizon: HorizonPolicy::Inclusive,
            max_horizon: 10_000,
            start_state: StartState::Canonical,
            root: RootSelector::Lower,
            bias_weighting: BiasWeighting::Scalar,
        }
    }
}

impl PolicyFlags {
    pub fn knockout_options(&self, caps: Caps) -> KnockoutOptions {
        KnockoutOptions {
            policy: self.horizon,
            caps,
            max_horizon: self.max_horizon,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum Experiment {
    #[serde(rename = "ensemble_DA_SA", alias = "ensemble")]
    Ensemble {
        n_networks: usize,
        families: Vec<FamilySpec>,
    },
    #[serde(rename = "critical_scan")]
    CriticalScan {
        n_networks: usize,
        n_nodes: usize,
        k_min: usize,
        k_max: usize,
    },
    #[serde(rename = "m5m6_table", alias = "m5m6")]
    M5m6Table {
        n_networks: usize,
        #[serde(default = "default_m5m6_sizes")]
        sizes: Vec<usize>,
    },
    #[serde(rename = "annealed")]
    Annealed {
        #[serde(default = "default_annealed_sets")]
        sets: Vec<String>,
        #[serde(default = "default_b0")]
        b0: f64,
        #[serde(default = "default_tol")]
        tol: f64,
        #[serde(default = "default_max_iter")]
        max_iter: usize,
    },
    #[serde(rename = "avalanche")]
    Avalanche(AvalancheParams),
    #[serde(rename = "ratio_test", alias = "ratio")]
    RatioTest(AvalancheParams),
    #[serde(rename = "single_net_report", alias = "report")]
    SingleNetReport {
        #[serde(default)]
        network: Option<PathBuf>,
        #[serde(default)]
        family: Option<FamilySpec>,
        #[serde(default)]
        net_index: u64,
        #[serde(default)]
        with_cycles: bool,
        /// Enumerate the full state space instead of sampling basins.
        #[serde(default)]
        exact: bool,
    },
}

fn default_m5m6_sizes() -> Vec<usize> {
    vec![70, 700]
}

fn default_annealed_sets() -> Vec<String> {
    vec!["M5".into(), "M6".into()]
}

fn default_b0() -> f64 {
    0.5
}

fn default_tol() -> f64 {
    1e-12
}

fn default_max_iter() -> usize {
    10_000_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AvalancheParams {
    pub n_networks: usize,
    pub families: Vec<FamilySpec>,
    #[serde(default = "one")]
    pub knockouts_per_network: usize,
    #[serde(default = "default_bin_width")]
    pub bin_width: f64,
    #[serde(default = "default_min_bin_events")]
    pub min_bin_events: u64,
    /// Threshold `m` of the reported tail fraction `P(m >= threshold)`.
    #[serde(default = "default_tail_threshold")]
    pub tail_threshold: usize,
    /// Reference SA values whose bins are compared against all others.
    #[serde(default)]
    pub lambda_a: Vec<f64>,
    #[serde(default = "default_m_values")]
    pub m_values: Vec<usize>,
}

fn one() -> usize {
    1
}

fn default_bin_width() -> f64 {
    0.01
}

fn default_min_bin_events() -> u64 {
    30
}

fn default_tail_threshold() -> usize {
    20
}

fn default_m_values() -> Vec<usize> {
    vec![1]
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Ensemble { .. } => "ensemble_DA_SA",
            Experiment::CriticalScan { .. } => "critical_scan",
            Experiment::M5m6Table { .. } => "m5m6_table",
            Experiment::Annealed { .. } => "annealed",
            Experiment::Avalanche(_) => "avalanche",
            Experiment::RatioTest(_) => "ratio_test",
            Experiment::SingleNetReport { .. } => "single_net_report",
        }
    }

    /// Whether the experiment draws random numbers (and so needs a seed).
    pub fn is_randomized(&self) -> bool {
        !matches!(self, Experiment::Annealed { .. })
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let context = match e.span() {
                Some(span) => {
                    let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
                    format!("config line {line}")
                }
                None => "config".to_string(),
            };
            Error::parse(context, e.message().to_string())
        })?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Parse { context, message } => Error::Parse {
                context: format!("{}: {context}", path.display()),
                message,
            },
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Seed, refusing to run randomized experiments without one.
    pub fn require_seed(&self) -> Result<u64> {
        match self.seed {
            Some(s) => Ok(s),
            None if !self.experiment.is_randomized() => Ok(0),
            None => Err(Error::Config(format!(
                "experiment {} is randomized and needs an explicit seed",
                self.experiment.kind()
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.require_seed()?;
        let s = &self.sampling;
        let positive = [
            ("n_initial_states", s.n_initial_states),
            ("max_transient", s.max_transient),
            ("max_period", s.max_period),
            ("n_derrida_samples", s.n_derrida_samples),
            ("derrida_max_flips", s.derrida_max_flips),
            ("n_sa_samples", s.n_sa_samples),
            ("bootstrap_replicates", s.bootstrap_replicates),
            ("max_horizon", self.policy.max_horizon),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        let check_families = |families: &[FamilySpec]| -> Result<()> {
            if families.is_empty() {
                return Err(Error::Config("at least one family is required".into()));
            }
            let mut tags = HashSet::new();
            for f in families {
                f.compile()
                    .map_err(|e| Error::Config(format!("family {:?}: {e}", f.tag)))?;
                if f.tag.is_empty() || !tags.insert(f.tag.as_str()) {
                    return Err(Error::Config(format!(
                        "family tags must be unique and non-empty ({:?})",
                        f.tag
                    )));
                }
            }
            Ok(())
        };
        let positive_count = |n: usize| -> Result<()> {
            if n == 0 {
                Err(Error::Config("n_networks must be positive".into()))
            } else {
                Ok(())
            }
        };
        match &self.experiment {
            Experiment::Ensemble {
                n_networks,
                families,
            } => {
                positive_count(*n_networks)?;
                check_families(families)?;
            }
            Experiment::CriticalScan {
                n_networks,
                n_nodes,
                k_min,
                k_max,
            } => {
                positive_count(*n_networks)?;
                if *k_min < 2 || k_max < k_min {
                    return Err(Error::Config(
                        "critical scan needs 2 <= k_min <= k_max".into(),
                    ));
                }
                if k_max + 1 > *n_nodes {
                    return Err(Error::Config("critical scan needs n_nodes > k_max".into()));
                }
            }
            Experiment::M5m6Table { n_networks, sizes } => {
                positive_count(*n_networks)?;
                if sizes.is_empty() || sizes.iter().any(|&n| n < 3) {
                    return Err(Error::Config(
                        "m5m6 sizes must be non-empty and at least 3".into(),
                    ));
                }
            }
            Experiment::Annealed {
                sets,
                b0,
                tol,
                max_iter,
            } => {
                if sets.is_empty() {
                    return Err(Error::Config("annealed needs at least one set".into()));
                }
                for name in sets {
                    crate::generation::FunctionSet::named(name)?;
                }
                if !(0.0..=1.0).contains(b0) || tol.is_nan() || *tol <= 0.0 || *max_iter == 0 {
                    return Err(Error::Config(
                        "annealed needs b0 in [0,1], tol > 0, max_iter > 0".into(),
                    ));
                }
            }
            Experiment::Avalanche(p) | Experiment::RatioTest(p) => {
                positive_count(p.n_networks)?;
                check_families(&p.families)?;
                if p.knockouts_per_network == 0 {
                    return Err(Error::Config(
                        "knockouts_per_network must be positive".into(),
                    ));
                }
                if let Some(f) = p
                    .families
                    .iter()
                    .find(|f| p.knockouts_per_network > f.n_nodes)
                {
                    return Err(Error::Config(format!(
                        "knockouts_per_network exceeds the size of family {:?}",
                        f.tag
                    )));
                }
                if p.bin_width.is_nan() || p.bin_width <= 0.0 {
                    return Err(Error::Config("bin_width must be positive".into()));
                }
                if p.m_values.contains(&0) {
                    return Err(Error::Config("m_values start at 1".into()));
                }
                if matches!(self.experiment, Experiment::RatioTest(_)) && p.lambda_a.is_empty() {
                    return Err(Error::Config(
                        "ratio_test needs at least one lambda_a".into(),
                    ));
                }
            }
            Experiment::SingleNetReport {
                network, family, ..
            } => match (network, family) {
                (Some(_), None) => {}
                (None, Some(f)) => {
                    f.compile().map_err(|e| Error::Config(e.to_string()))?;
                }
                _ => {
                    return Err(Error::Config(
                        "single_net_report needs exactly one of `network` or `family`".into(),
                    ))
                }
            },
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ENSEMBLE: &str = r#"
schema_version = 1
seed = 7

[sampling]
n_initial_states = 200

[experiment]
kind = "ensemble_DA_SA"
n_networks = 3

[[experiment.families]]
tag = "M1"
n_nodes = 20
k_in = 2
functions = { scheme = "bernoulli", p = 0.5 }
"#;

    #[test]
    fn parses_and_validates() {
        let cfg = ExperimentConfig::from_toml_str(ENSEMBLE).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.sampling.n_initial_states, 200);
        assert_eq!(cfg.sampling.n_derrida_samples, 10_000);
        assert_eq!(cfg.experiment.kind(), "ensemble_DA_SA");
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn missing_seed_is_refused() {
        let cfg = ExperimentConfig::from_toml_str(&ENSEMBLE.replace("seed = 7\n", "")).unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let annealed = ExperimentConfig::from_toml_str(
            "schema_version = 1\n[experiment]\nkind = \"annealed\"\n",
        )
        .unwrap();
        annealed.validate().unwrap();
    }

    #[test]
    fn unknown_fields_and_versions_are_rejected() {
        let err =
            ExperimentConfig::from_toml_str(&ENSEMBLE.replace("n_initial_states", "n_initial"))
                .unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
        let cfg = ExperimentConfig::from_toml_str(
            &ENSEMBLE.replace("schema_version = 1", "schema_version = 9"),
        )
        .unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn zero_counts_are_rejected() {
        let cfg =
            ExperimentConfig::from_toml_str(&ENSEMBLE.replace("n_networks = 3", "n_networks = 0"))
                .unwrap();
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig::from_toml_str(
            &ENSEMBLE.replace("n_initial_states = 200", "n_initial_states = 0"),
        )
        .unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn avalanche_defaults() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
schema_version = 1
seed = 1
[experiment]
kind = "ratio_test"
n_networks = 10
lambda_a = [1.0]
[[experiment.families]]
tag = "yeast13"
n_nodes = 100
k_in = 2
functions = { scheme = "function_set", name = "yeast13" }
"#,
        )
        .unwrap();
        cfg.validate().unwrap();
        let Experiment::RatioTest(p) = &cfg.experiment else {
            panic!()
        };
        assert_eq!(p.bin_width, 0.01);
        assert_eq!(p.min_bin_events, 30);
        assert_eq!(p.m_values, vec![1]);
    }
}
