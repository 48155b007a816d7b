//! `rbn`: command-line front end for the experiment harness.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rbn_core::format::export_network;
use rbn_core::generation::{FamilySpec, RootSelector};
use rbn_core::harness::{run_config, Experiment, ExperimentConfig, OutputFormat, RunOptions};
use rbn_core::{Error, RandomSource};

#[derive(Parser)]
#[command(name = "rbn", version, about = "Random Boolean network experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Experiment config (TOML). Defaults to the built-in recipe of the command.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "rbn-out")]
    out: PathBuf,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Root {
    Lower,
    Upper,
}

#[derive(Subcommand)]
enum Command {
    /// Generate networks and write them as JSON.
    Gen(GenArgs),
    /// Analyse one network: attractors, DA, SA, static sensitivity.
    Report {
        /// Network JSON file; without it the config's family is used.
        #[arg(long)]
        network: Option<PathBuf>,
        /// Include the states of every cycle.
        #[arg(long)]
        cycles: bool,
        /// Enumerate the full state space (small N only).
        #[arg(long)]
        exact: bool,
    },
    /// DA / SA over network ensembles.
    Ensemble,
    /// Critical-bias families over a range of K.
    CriticalScan,
    /// M5 / M6 theory vs experiment table.
    M5m6,
    /// Fixed points of the annealed bias map.
    Annealed,
    /// Knock-out avalanche distributions.
    Avalanche,
    /// Avalanche-size ratio law between SA bins.
    Ratio {
        /// Reuse an existing avalanche table instead of simulating.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Print a built-in recipe.
    Recipe {
        /// ensemble, critical-scan, m5m6, annealed, avalanche, ratio or report
        name: String,
        /// The full-scale variant.
        #[arg(long)]
        full: bool,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    nodes: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Bernoulli output bias.
    #[arg(long, group = "functions")]
    bias: Option<f64>,
    /// Named function set (M5, M6, yeast13).
    #[arg(long, group = "functions")]
    set: Option<String>,
    /// Majority rule (odd K).
    #[arg(long, group = "functions")]
    majority: bool,
    /// Critical bias for K.
    #[arg(long, group = "functions", value_enum)]
    critical: Option<Root>,
    /// Number of networks.
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Index of the first network in the family's stream.
    #[arg(long, default_value_t = 0)]
    index: u64,
    /// Family tag (selects the random stream together with the seed).
    #[arg(long, default_value = "gen")]
    tag: String,
}

const RECIPES: [(&str, &str, &str); 7] = [
    (
        "ensemble",
        include_str!("../../../recipes/ensemble.toml"),
        include_str!("../../../recipes/ensemble_full.toml"),
    ),
    (
        "critical-scan",
        include_str!("../../../recipes/critical_scan.toml"),
        include_str!("../../../recipes/critical_scan_full.toml"),
    ),
    (
        "m5m6",
        include_str!("../../../recipes/m5m6.toml"),
        include_str!("../../../recipes/m5m6_full.toml"),
    ),
    (
        "annealed",
        include_str!("../../../recipes/annealed.toml"),
        include_str!("../../../recipes/annealed_full.toml"),
    ),
    (
        "avalanche",
        include_str!("../../../recipes/avalanche.toml"),
        include_str!("../../../recipes/avalanche_full.toml"),
    ),
    (
        "ratio",
        include_str!("../../../recipes/ratio.toml"),
        include_str!("../../../recipes/ratio_full.toml"),
    ),
    (
        "report",
        include_str!("../../../recipes/report.toml"),
        include_str!("../../../recipes/report.toml"),
    ),
];

fn recipe(name: &str, full: bool) -> Result<&'static str, Error> {
    RECIPES
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, desk, big)| if full { *big } else { *desk })
        .ok_or_else(|| Error::Config(format!("no built-in recipe {name:?}")))
}

fn load_config(global: &Global, default_recipe: &str) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &global.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::from_toml_str(recipe(default_recipe, false)?)?,
    };
    if global.seed.is_some() {
        cfg.seed = global.seed;
    }
    Ok(cfg)
}

fn kind_matches(command: &str, exp: &Experiment) -> bool {
    matches!(
        (command, exp),
        ("ensemble", Experiment::Ensemble { .. })
            | ("critical-scan", Experiment::CriticalScan { .. })
            | ("m5m6", Experiment::M5m6Table { .. })
            | ("annealed", Experiment::Annealed { .. })
            | ("avalanche", Experiment::Avalanche(_))
            | ("ratio", Experiment::RatioTest(_) | Experiment::Avalanche(_))
            | ("report", Experiment::SingleNetReport { .. })
    )
}

fn run_experiment(
    global: &Global,
    command: &str,
    cfg: ExperimentConfig,
    input: Option<PathBuf>,
) -> Result<(), Error> {
    if !kind_matches(command, &cfg.experiment) {
        return Err(Error::Config(format!(
            "config describes a {} experiment, not `{command}`",
            cfg.experiment.kind()
        )));
    }
    let opts = RunOptions {
        threads: global.threads,
        format: match global.format {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        },
        avalanche_input: input,
    };
    let report = run_config(&cfg, &opts, &global.out)?;
    for line in &report.lines {
        println!("{line}");
    }
    println!(
        "wrote {} files to {}",
        report.outputs.len(),
        global.out.display()
    );
    Ok(())
}

fn gen(global: &Global, args: &GenArgs) -> Result<(), Error> {
    let seed = global
        .seed
        .ok_or_else(|| Error::Config("gen is randomized and needs --seed".into()))?;
    let family = if let Some(p) = args.bias {
        FamilySpec::bernoulli(&args.tag, args.nodes, args.k, p)
    } else if let Some(name) = &args.set {
        FamilySpec::named_set(&args.tag, args.nodes, args.k, name)
    } else if args.majority {
        FamilySpec::majority(&args.tag, args.nodes, args.k)
    } else if let Some(root) = args.critical {
        let root = match root {
            Root::Lower => RootSelector::Lower,
            Root::Upper => RootSelector::Upper,
        };
        FamilySpec::critical(&args.tag, args.nodes, args.k, root)
    } else {
        FamilySpec::bernoulli(&args.tag, args.nodes, args.k, 0.5)
    };
    let compiled = family
        .compile()
        .map_err(|e| Error::Config(format!("invalid family: {e}")))?;
    std::fs::create_dir_all(&global.out)?;
    let src = RandomSource::new(seed);
    for i in args.index..args.index + args.count {
        let mut rng = src.stream(&format!("{}/gen", args.tag), i);
        let net = compiled.sample(&mut rng)?;
        let path = global.out.join(format!("network_{i:04}.json"));
        export_network(&net, &path)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn report_config(
    global: &Global,
    network: Option<&Path>,
    cycles: bool,
    exact: bool,
) -> Result<ExperimentConfig, Error> {
    let mut cfg = load_config(global, "report")?;
    if let Experiment::SingleNetReport {
        network: n,
        family,
        with_cycles,
        exact: e,
        ..
    } = &mut cfg.experiment
    {
        if let Some(path) = network {
            // An explicit file starts from plain defaults, not the recipe's.
            *n = Some(path.to_path_buf());
            *family = None;
            *with_cycles = cycles;
            *e = exact;
        } else {
            *with_cycles |= cycles;
            *e |= exact;
        }
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    let g = &cli.global;
    match cli.command {
        Command::Gen(args) => gen(g, &args),
        Command::Report {
            network,
            cycles,
            exact,
        } => {
            let cfg = report_config(g, network.as_deref(), cycles, exact)?;
            run_experiment(g, "report", cfg, None)
        }
        Command::Ensemble => run_experiment(g, "ensemble", load_config(g, "ensemble")?, None),
        Command::CriticalScan => {
            run_experiment(g, "critical-scan", load_config(g, "critical-scan")?, None)
        }
        Command::M5m6 => run_experiment(g, "m5m6", load_config(g, "m5m6")?, None),
        Command::Annealed => run_experiment(g, "annealed", load_config(g, "annealed")?, None),
        Command::Avalanche => run_experiment(g, "avalanche", load_config(g, "avalanche")?, None),
        Command::Ratio { input } => run_experiment(g, "ratio", load_config(g, "ratio")?, input),
        Command::Recipe { name, full } => {
            print!("{}", recipe(&name, full)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_user_error() { 1 } else { 2 })
        }
    }
}
