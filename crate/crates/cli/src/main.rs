use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use lastmile_cli::config::{paper_matrix, ConfigError, ConfigFile};
use lastmile_cli::runner::{run_matrix, RunSettings, DEFAULT_MASTER_SEED};
use lastmile_cli::synth::{generate_synthetic_network, SyntheticNetworkSpec};

/// Agent-based simulator for robot, drone and hybrid hub-and-spoke
/// last-mile food delivery fleets.
#[derive(Parser)]
#[command(name = "lastmile", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenarios from a config file or a built-in preset.
    Run(RunArgs),
    /// Generate a synthetic road network document.
    GenNetwork(GenNetworkArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario config file (JSON).
    #[arg(long, value_name = "FILE", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario set; `paper-matrix` is the 42-run fleet matrix.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Run only the scenario with this id.
    #[arg(long, value_name = "ID")]
    scenario: Option<String>,
    /// Override every scenario's network ("synthetic" or a file path).
    #[arg(long, value_name = "REF")]
    network: Option<String>,
    /// Override every scenario's demand with a fixed demand document.
    #[arg(long, value_name = "FILE")]
    demand: Option<PathBuf>,
    /// Master seed; scenario, demand and placement seeds derive from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for metrics, logs and plot data.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out_dir: PathBuf,
    /// Override every scenario's replication count.
    #[arg(long)]
    replications: Option<u32>,
    /// Write a per-run itinerary CSV.
    #[arg(long)]
    emit_itineraries: bool,
    /// Write per-vehicle road path node lists.
    #[arg(long)]
    emit_paths: bool,
}

#[derive(Args)]
struct GenNetworkArgs {
    /// Output path for the network document.
    #[arg(long, short, value_name = "FILE")]
    out: PathBuf,
    #[arg(long, default_value_t = 199)]
    nodes: usize,
    /// Undirected street links.
    #[arg(long, default_value_t = 286)]
    links: usize,
    #[arg(long, default_value_t = 5.80)]
    area_km2: f64,
    #[arg(long, default_value_t = 0.08)]
    restaurant_fraction: f64,
    /// Density gradient toward the center: 0 = uniform grid pitch.
    #[arg(long, default_value_t = 0.8)]
    center_compression: f64,
    /// Skip the depot (robot-only / drone-only networks).
    #[arg(long)]
    no_depot: bool,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run_command(args),
        Command::GenNetwork(args) => gen_network_command(args),
    }
}

fn run_command(args: RunArgs) -> anyhow::Result<()> {
    let (scenarios, file_seed) = match (&args.config, args.preset.as_deref()) {
        (Some(path), None) => {
            let file = ConfigFile::load(path)
                .with_context(|| format!("loading config {}", path.display()))?;
            (file.scenarios, file.master_seed)
        }
        (None, Some("paper-matrix")) => (paper_matrix(), None),
        (None, Some(other)) => bail!("unknown preset {other:?}; available: paper-matrix"),
        (None, None) => bail!("pass --config FILE or --preset paper-matrix"),
        (Some(_), Some(_)) => unreachable!("clap rejects --config with --preset"),
    };

    let scenarios = match &args.scenario {
        None => scenarios,
        Some(id) => {
            let selected: Vec<_> = scenarios
                .into_iter()
                .filter(|s| &s.scenario_id == id)
                .collect();
            if selected.is_empty() {
                return Err(ConfigError::UnknownScenario(id.clone()).into());
            }
            selected
        }
    };

    let settings = RunSettings {
        out_dir: Some(args.out_dir.clone()),
        master_seed: args.seed.or(file_seed).unwrap_or(DEFAULT_MASTER_SEED),
        emit_itineraries: args.emit_itineraries,
        emit_paths: args.emit_paths,
        network_override: args.network.clone(),
        demand_override: args.demand.map(|p| p.display().to_string()),
        replications_override: args.replications,
    };

    let output = run_matrix(&scenarios, &settings)?;
    let mut failures = 0usize;
    for r in &output.records {
        match &r.outcome {
            Ok(Some(s)) => println!(
                "{} rep{}: mean wait {:.1} min over {} orders (LOS {})",
                r.scenario.scenario_id, r.replication, s.mean_min, r.n_orders, s.system_los
            ),
            Ok(None) => println!(
                "{} rep{}: no orders",
                r.scenario.scenario_id, r.replication
            ),
            Err(e) => {
                failures += 1;
                eprintln!("{} rep{}: FAILED: {e}", r.scenario.scenario_id, r.replication);
            }
        }
    }
    println!(
        "{} runs -> {}",
        output.records.len(),
        args.out_dir.join("metrics.csv").display()
    );
    if failures > 0 {
        bail!("{failures} run(s) failed; see metrics.csv for the failure markers");
    }
    Ok(())
}

fn gen_network_command(args: GenNetworkArgs) -> anyhow::Result<()> {
    let spec = SyntheticNetworkSpec {
        target_nodes: args.nodes,
        target_links: args.links,
        area_km2: args.area_km2,
        restaurant_fraction: args.restaurant_fraction,
        center_compression: args.center_compression,
        central_depot: !args.no_depot,
        seed: args.seed,
    };
    let doc = generate_synthetic_network(&spec)?;
    std::fs::write(&args.out, serde_json::to_string_pretty(&doc)?)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "wrote {} nodes / {} links to {}",
        doc.nodes.len(),
        doc.links.len(),
        args.out.display()
    );
    Ok(())
}
