//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use rbn_core::avalanche::sa_bin;
use rbn_core::dynamics::{
    all_states, attractors_from_states, enumerate_attractors_exact, step, AttractorSet, Caps,
};
use rbn_core::generation::{build_network, sample_table_bernoulli, FamilySpec, FunctionSet};
use rbn_core::harness::experiments::{self, Context};
use rbn_core::harness::{run_config, Experiment, ExperimentConfig, RunOptions};
use rbn_core::measures::{
    annealed_fixed_point, attractor_sensitivity, bias_weighted_influence, theoretical_sa,
    uniform_sensitivity, Bias, SaOptions,
};
use rbn_core::model::{flip_bit, hamming_distance};
use rbn_core::{BooleanNetwork, RandomSource, TruthTable};

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn recipes() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../recipes")
}

fn recipe(name: &str) -> ExperimentConfig {
    let cfg = ExperimentConfig::load(recipes().join(name)).expect("recipe loads");
    cfg.validate().expect("recipe validates");
    cfg
}

fn context<'a>(cfg: &'a ExperimentConfig, src: &'a RandomSource) -> Context<'a> {
    Context {
        src,
        sampling: &cfg.sampling,
        policy: &cfg.policy,
        threads: 0,
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sensitivity by flipping each input of every row and comparing outputs.
fn brute_sensitivity(t: &TruthTable) -> f64 {
    let k = t.arity();
    let rows = 1usize << k;
    let mut changes = 0usize;
    for r in 0..rows {
        for j in 0..k {
            if t.output(r) != t.output(r ^ (1 << j)) {
                changes += 1;
            }
        }
    }
    changes as f64 / rows as f64
}

fn static_identity() -> Verdict {
    let src = RandomSource::new(1);
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for k in [2usize, 3] {
        for p in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let mut rng = src.stream(&format!("static/k{k}"), (p * 100.0) as u64);
            let xs: Vec<f64> = (0..10_000)
                .map(|_| {
                    let t = sample_table_bernoulli(k, p, &mut rng).unwrap();
                    let s = uniform_sensitivity(&t).sensitivity;
                    assert!((s - brute_sensitivity(&t)).abs() < 1e-12);
                    s
                })
                .collect();
            let m = mean(&xs);
            let sd =
                (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt();
            let se = sd / (xs.len() as f64).sqrt();
            let expected = 2.0 * p * (1.0 - p) * k as f64;
            let z = (m - expected).abs() / se;
            worst = worst.max(z);
            notes.push(format!("k={k} p={p}: {m:.4} vs {expected:.4}"));
        }
    }
    verdict(
        worst <= 3.0,
        format!("max deviation {worst:.2} SE ({})", notes.join("; ")),
    )
}

fn m1_ensembles() -> Verdict {
    let cfg = recipe("ensemble.toml");
    let Experiment::Ensemble {
        n_networks,
        families,
    } = &cfg.experiment
    else {
        unreachable!()
    };
    assert_eq!(*n_networks, 20);
    assert_eq!(cfg.sampling.n_initial_states, 1000);
    let src = RandomSource::new(cfg.seed.unwrap());
    let (_, summary) =
        experiments::run_ensemble(&context(&cfg, &src), families, *n_networks).unwrap();
    let mut pass = true;
    let mut notes = Vec::new();
    for s in &summary {
        let (da, sa) = (s.da_mean.unwrap(), s.sa_mean.unwrap());
        let ok = (0.9..=1.1).contains(&da)
            && (0.9..=1.1).contains(&sa)
            && (da - sa).abs() <= 0.1
            && s.n_failed == 0;
        pass &= ok;
        notes.push(format!(
            "{} N={}: DA={da:.4} SA={sa:.4}",
            s.family, s.n_nodes
        ));
    }
    verdict(pass && summary.len() == 2, notes.join("; "))
}

fn m5m6_at_70() -> Verdict {
    let cfg = recipe("m5m6.toml");
    let Experiment::M5m6Table { n_networks, sizes } = &cfg.experiment else {
        unreachable!()
    };
    assert_eq!((*n_networks, sizes.as_slice()), (50, &[70][..]));
    let src = RandomSource::new(cfg.seed.unwrap());
    let (_, rows) = experiments::run_m5m6_table(&context(&cfg, &src), *n_networks, sizes).unwrap();
    let get = |measure: &str, family: &str| {
        rows.iter()
            .find(|r| r.measure == measure && r.family == family && r.n_nodes == "70")
            .and_then(|r| r.experimental)
            .unwrap()
    };
    let checks = [
        ("DA(M5)", get("DA", "M5"), 0.71, 0.77),
        ("DA(M6)", get("DA", "M6"), 0.71, 0.77),
        ("SA(M5)", get("SA", "M5"), 0.90, 0.98),
        ("SA(M6)", get("SA", "M6"), 0.62, 0.70),
        ("b(M5)", get("b", "M5"), 0.04, 0.12),
        ("b(M6)", get("b", "M6"), 0.63, 0.71),
    ];
    let pass = checks.iter().all(|(_, v, lo, hi)| (*lo..=*hi).contains(v));
    let detail = checks
        .iter()
        .map(|(n, v, lo, hi)| format!("{n}={v:.4} in [{lo}, {hi}]"))
        .collect::<Vec<_>>()
        .join("; ");
    verdict(pass, detail)
}

/// Member-average sensitivity of M5 and of M6 (complement, same value) at
/// input bias `b`: OR / NOR contribute 2(1 - b), the two mixed literals 1
/// each, the constant 0.
fn closed_form_sa(b: f64) -> f64 {
    (2.0 * (1.0 - b) + 1.0 + 1.0 + 0.0) / 4.0
}

fn annealed_fixed_points() -> Verdict {
    let m5 = annealed_fixed_point(&FunctionSet::m5(), 0.5, 1e-12, 10_000_000).unwrap();
    let m6 = annealed_fixed_point(&FunctionSet::m6(), 0.5, 1e-12, 10_000_000).unwrap();
    let sa5 = theoretical_sa(&FunctionSet::m5(), 0.0).unwrap();
    let sa6 = theoretical_sa(&FunctionSet::m6(), 2.0 / 3.0).unwrap();
    let pass = m5.converged
        && m6.converged
        && m5.b.abs() < 1e-9
        && (m6.b - 2.0 / 3.0).abs() < 1e-9
        && (sa5 - closed_form_sa(0.0)).abs() < 1e-9
        && (sa5 - 1.0).abs() < 1e-9
        && (sa6 - closed_form_sa(2.0 / 3.0)).abs() < 1e-9;
    verdict(
        pass,
        format!(
            "b*(M5)={:.3e} b*(M6)={:.12} SA(M5,0)={sa5:.12} SA(M6,2/3)={sa6:.12}",
            m5.b, m6.b
        ),
    )
}

fn influence_table() -> Verdict {
    let or = TruthTable::from_bitstring("0111").unwrap();
    let prof = bias_weighted_influence(&or, &Bias::Scalar(0.08)).unwrap();
    let or_ok = (prof.influences[0] - 0.92).abs() < 1e-12
        && (prof.influences[1] - 0.92).abs() < 1e-12
        && (prof.sensitivity - 1.84).abs() < 1e-12;
    let sa5 = theoretical_sa(&FunctionSet::m5(), 0.08).unwrap();
    let sa6 = theoretical_sa(&FunctionSet::m6(), 0.67).unwrap();
    let pass = or_ok && (sa5 - 0.96).abs() < 5e-3 && (0.66..=0.67).contains(&sa6);
    verdict(
        pass,
        format!(
            "OR I=({:.12}, {:.12}) sum {:.12}; SA(M5,0.08)={sa5:.6}; SA(M6,0.67)={sa6:.6}",
            prof.influences[0], prof.influences[1], prof.sensitivity
        ),
    )
}

fn brute_sa(net: &BooleanNetwork, states: &[rbn_core::NetworkState]) -> f64 {
    let n = net.n_nodes();
    let mut total = 0usize;
    for s in states {
        let next = step(net, s);
        for i in 0..n {
            total += hamming_distance(&next, &step(net, &flip_bit(s, i).unwrap())).unwrap();
        }
    }
    total as f64 / (states.len() * n) as f64
}

fn same_sets(a: &AttractorSet, b: &AttractorSet) -> bool {
    a.len() == b.len()
        && a.entries.iter().zip(&b.entries).all(|(x, y)| {
            x.attractor.id() == y.attractor.id() && x.weight == y.weight && x.hits == y.hits
        })
}

fn oracle_equivalence() -> Verdict {
    let src = RandomSource::new(6);
    let caps = Caps {
        max_transient: 1 << 13,
        max_period: 1 << 13,
    };
    let mut mismatches = Vec::new();
    let mut n_attractors = 0;
    for i in 0..50u64 {
        let n = 4 + (i % 9) as usize;
        let spec = match i % 5 {
            0 => FamilySpec::bernoulli("o", n, 2, 0.5),
            1 => FamilySpec::bernoulli("o", n, 3, 0.3),
            2 => FamilySpec::named_set("o", n, 2, "M5"),
            3 => FamilySpec::named_set("o", n, 2, "yeast13"),
            _ => FamilySpec::majority("o", n, 3),
        };
        let net = build_network(&spec, &mut src.stream("oracle", i)).unwrap();
        let exact = enumerate_attractors_exact(&net).unwrap();
        let sampled = attractors_from_states(&net, all_states(n), caps);
        if sampled.n_unresolved != 0 || !same_sets(&exact, &sampled) {
            mismatches.push(format!("net {i}: basins"));
        }
        let mut rng = src.stream("oracle/sa", i);
        for e in &exact.entries {
            n_attractors += 1;
            let sa = attractor_sensitivity(&net, &e.attractor, SaOptions::default(), &mut rng);
            if sa.lambda != brute_sa(&net, e.attractor.states()) {
                mismatches.push(format!("net {i}: SA_i of {}", e.attractor.id()));
            }
        }
    }
    verdict(
        mismatches.is_empty(),
        format!("50 networks, {n_attractors} attractors, mismatches: {mismatches:?}"),
    )
}

fn majority_networks() -> Verdict {
    let cfg = ExperimentConfig::from_toml_str(
        r#"
schema_version = 1
seed = 7007
[sampling]
n_initial_states = 1000
n_derrida_samples = 20000
[experiment]
kind = "ensemble_DA_SA"
n_networks = 20
[[experiment.families]]
tag = "majority-K3-N71"
n_nodes = 71
k_in = 3
functions = { scheme = "majority" }
"#,
    )
    .unwrap();
    cfg.validate().unwrap();
    let Experiment::Ensemble {
        n_networks,
        families,
    } = &cfg.experiment
    else {
        unreachable!()
    };
    let src = RandomSource::new(cfg.seed.unwrap());
    let (outcome, summary) =
        experiments::run_ensemble(&context(&cfg, &src), families, *n_networks).unwrap();
    let da = summary[0].da_mean.unwrap();
    let sa = summary[0].sa_mean.unwrap();

    // SA_i on each homogeneous fixed point, recomputed from generated networks.
    let mut homogeneous = 0;
    let mut nonzero = 0;
    for row in &outcome.attractors {
        let net = build_network(
            &families[0],
            &mut src.stream("majority-K3-N71/gen", row.net_id),
        )
        .unwrap();
        let set = enumerate_or_sample(&net, &src, row.net_id, &cfg);
        for e in set
            .entries
            .iter()
            .filter(|e| e.attractor.id().to_string() == row.attractor_id)
        {
            let ones = e.attractor.first_state().count_ones();
            if e.attractor.is_fixed_point() && (ones == 0 || ones == net.n_nodes()) {
                homogeneous += 1;
                if row.sa_i != 0.0 || brute_sa(&net, e.attractor.states()) != 0.0 {
                    nonzero += 1;
                }
            }
        }
    }
    let dominance: Vec<f64> = outcome
        .networks
        .iter()
        .filter_map(|r| r.homogeneous_fp_weight)
        .collect();
    let dominated: Vec<_> = outcome
        .networks
        .iter()
        .filter(|r| r.homogeneous_fp_weight.unwrap_or(0.0) >= 0.95)
        .collect();
    let dominated_ok = dominated.iter().all(|r| r.sa.unwrap() <= 0.05);
    let ensemble_dominance = mean(&dominance);
    let ensemble_ok = ensemble_dominance < 0.95 || sa <= 0.05;
    let pass =
        (da - 1.5).abs() <= 0.05 && homogeneous > 0 && nonzero == 0 && dominated_ok && ensemble_ok;
    verdict(
        pass,
        format!(
            "DA={da:.4}; SA={sa:.4}; {homogeneous} homogeneous fixed points, {nonzero} with SA_i != 0; \
             mean dominance fraction {ensemble_dominance:.3}; {} of 20 networks dominated (>= 0.95), all SA <= 0.05: {dominated_ok}",
            dominated.len()
        ),
    )
}

fn enumerate_or_sample(
    net: &BooleanNetwork,
    src: &RandomSource,
    net_id: u64,
    cfg: &ExperimentConfig,
) -> AttractorSet {
    let mut rng = src.stream("majority-K3-N71/basin", net_id);
    rbn_core::dynamics::sample_attractors(
        net,
        cfg.sampling.n_initial_states,
        cfg.sampling.caps(),
        &mut rng,
    )
}

fn ratio_law() -> Verdict {
    let mut cfg = recipe("ratio_full.toml");
    let Experiment::RatioTest(params) = &mut cfg.experiment else {
        unreachable!()
    };
    params.lambda_a = vec![1.0];
    params.m_values = vec![1];
    assert_eq!(params.n_networks, 2000);
    assert_eq!(params.knockouts_per_network, 1);
    assert_eq!(params.families[0].n_nodes, 600);
    let params = params.clone();
    let src = RandomSource::new(cfg.seed.unwrap());
    let out = experiments::run_avalanche(&context(&cfg, &src), &params).unwrap();

    let events: Vec<(f64, usize)> = out.rows.iter().filter_map(|r| r.event()).collect();
    let in_ref = events
        .iter()
        .filter(|(sa, _)| sa_bin(*sa, params.bin_width) == 100)
        .count();
    let sa: Vec<f64> = events.iter().map(|e| e.0).collect();
    let judged: Vec<bool> = out.ratio.iter().filter_map(|r| r.within_2sd).collect();
    let ok = judged.iter().filter(|&&b| b).count();
    let enough = in_ref >= params.min_bin_events as usize;
    let pass = enough && !judged.is_empty() && ok as f64 >= 0.8 * judged.len() as f64;
    let mode_note = {
        // Same comparison around the most populated bin, for context only.
        let mut counts = std::collections::BTreeMap::new();
        for &(s, _) in &events {
            *counts.entry(sa_bin(s, params.bin_width)).or_insert(0usize) += 1;
        }
        let (&mode, &c) = counts.iter().max_by_key(|(_, &c)| c).unwrap();
        let mut p2 = params.clone();
        p2.lambda_a = vec![mode as f64 * params.bin_width];
        let tags = vec![params.families[0].tag.clone()];
        let rows = experiments::ratio_table(
            &out.rows,
            &tags,
            &p2,
            cfg.sampling.bootstrap_replicates,
            &src,
        )
        .unwrap();
        let j: Vec<bool> = rows.iter().filter_map(|r| r.within_2sd).collect();
        format!(
            "most populated bin {:.2} ({c} events): {}/{} within 2 sd",
            mode as f64 * params.bin_width,
            j.iter().filter(|&&b| b).count(),
            j.len()
        )
    };
    verdict(
        pass,
        format!(
            "{} resolved events, SA_i mean {:.4} range [{:.3}, {:.3}]; reference bin 1.00 holds {in_ref} events \
             (need {}); {ok}/{} comparisons within 2 sd; {mode_note}",
            events.len(),
            mean(&sa),
            sa.iter().copied().fold(f64::INFINITY, f64::min),
            sa.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            params.min_bin_events,
            judged.len()
        ),
    )
}

fn avalanche_tails() -> Verdict {
    let cfg = recipe("avalanche_full.toml");
    let Experiment::Avalanche(params) = &cfg.experiment else {
        unreachable!()
    };
    assert_eq!(params.n_networks, 500);
    let src = RandomSource::new(cfg.seed.unwrap());
    let out = experiments::run_avalanche(&context(&cfg, &src), params).unwrap();
    let tail = |tag: &str| {
        out.summary
            .iter()
            .find(|s| s.family == tag)
            .unwrap()
            .tail_fraction
            .unwrap()
    };
    let (t5, t6) = (tail("M5"), tail("M6"));
    let ks = &out.ks[0];
    verdict(
        t5 > t6 && ks.p_value < 0.01,
        format!(
            "P(m>=20): M5={t5:.4} M6={t6:.4}; KS D={:.4} p={:.2e}",
            ks.statistic, ks.p_value
        ),
    )
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

fn determinism() -> Verdict {
    let mut checked = Vec::new();
    let mut differing = Vec::new();
    let mut names: Vec<String> = fs::read_dir(recipes())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".toml") && !n.contains("_full"))
        .collect();
    names.sort();
    for name in names {
        let cfg = recipe(&name);
        let outputs: Vec<_> = [1usize, 4]
            .iter()
            .map(|&threads| {
                let dir = tempfile::tempdir().unwrap();
                let opts = RunOptions {
                    threads,
                    ..Default::default()
                };
                run_config(&cfg, &opts, dir.path()).unwrap();
                read_dir_sorted(dir.path())
            })
            .collect();
        if outputs[0] != outputs[1] {
            differing.push(name.clone());
        }
        checked.push(name);
    }
    verdict(
        differing.is_empty(),
        format!(
            "{} recipes at 1 and 4 threads; differing: {differing:?}",
            checked.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("static sensitivity identity", static_identity),
        ("M1 ensembles: DA ~ SA ~ 1", m1_ensembles),
        ("M5/M6 at N=70", m5m6_at_70),
        ("annealed fixed points", annealed_fixed_points),
        ("bias-weighted influences", influence_table),
        ("exact oracle equivalence", oracle_equivalence),
        ("majority networks: DA >> SA", majority_networks),
        ("avalanche ratio law", ratio_law),
        ("avalanche tail separation", avalanche_tails),
        ("determinism across thread counts", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} [{}] {name} ({:.1}s): {}",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
