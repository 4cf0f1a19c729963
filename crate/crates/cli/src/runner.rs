//! Expands scenario configs into seeded runs, executes them in parallel,
//! and collects one merged metrics table.
//!
//! Seed derivation from the run's master seed:
//! - synthetic network: `derive(master, [NS_NETWORK])`, one network shared
//!   by every scenario of the batch;
//! - demand: `derive(master, [NS_DEMAND, growth, replication])`, so fleet
//!   sizes within a sweep see identical demand;
//! - scenario base: the config's own seed, or
//!   `derive(master, [NS_SCENARIO, index])` when omitted;
//! - vehicle placement: `derive(base, [NS_PLACEMENT, replication])`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use lastmile_core::rng::derive_seed;
use lastmile_core::{
    generate_demand, load_network, orders_from_doc, replay_audit, run, summarize, DemandError,
    DispatchPolicy, FleetSpec, NetError, Network, Order, OrderDoc, WaitSummary,
};

use crate::config::{ConfigError, ScenarioConfig};
use crate::output;
use crate::synth::{generate_synthetic_network, SynthError, SyntheticNetworkSpec};

const NS_NETWORK: u64 = 1;
const NS_DEMAND: u64 = 2;
const NS_SCENARIO: u64 = 3;
const NS_PLACEMENT: u64 = 4;

pub const DEFAULT_MASTER_SEED: u64 = 42;

/// Batch-level settings, mostly mirroring the CLI flags.
#[derive(Clone, Debug)]
pub struct RunSettings {
    /// Where to write metrics, logs and plot data; `None` keeps the run
    /// entirely in memory.
    pub out_dir: Option<PathBuf>,
    pub master_seed: u64,
    pub emit_itineraries: bool,
    pub emit_paths: bool,
    pub network_override: Option<String>,
    pub demand_override: Option<String>,
    pub replications_override: Option<u32>,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            out_dir: None,
            master_seed: DEFAULT_MASTER_SEED,
            emit_itineraries: false,
            emit_paths: false,
            network_override: None,
            demand_override: None,
            replications_override: None,
        }
    }
}

/// Result row for one (scenario, replication) run. `outcome` is
/// `Ok(None)` for a clean run with zero orders and `Err` carries the
/// failure marker recorded in the metrics CSV.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub scenario: ScenarioConfig,
    pub replication: u32,
    pub placement_seed: u64,
    pub n_orders: u32,
    pub outcome: Result<Option<WaitSummary>, String>,
}

#[derive(Clone, Debug)]
pub struct MatrixOutput {
    /// Sorted by scenario id, then replication.
    pub records: Vec<RunRecord>,
    pub metrics_csv: String,
}

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("scenario {0}: {1}")]
    Demand(String, DemandError),
    #[error("demand document {0}: {1}")]
    DemandDoc(String, String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

struct RunUnit {
    scenario: ScenarioConfig,
    replication: u32,
    placement_seed: u64,
    net: Arc<Network>,
    orders: Arc<Vec<Order>>,
}

/// Run every (scenario, replication) pair and merge the metrics.
///
/// Scenario runs execute in parallel; each writes only its own files. The
/// merged CSV is written once, after collection, in (scenario_id,
/// replication) order, so reruns with the same master seed are
/// byte-identical regardless of scheduling.
pub fn run_matrix(
    configs: &[ScenarioConfig],
    settings: &RunSettings,
) -> Result<MatrixOutput, RunnerError> {
    let configs = apply_overrides(configs, settings);
    let mut ids = std::collections::HashSet::new();
    for c in &configs {
        c.validate()?;
        if !ids.insert(c.scenario_id.clone()) {
            return Err(ConfigError::DuplicateScenarioId(c.scenario_id.clone()).into());
        }
    }

    if let Some(dir) = &settings.out_dir {
        std::fs::create_dir_all(dir.join("logs"))?;
        if settings.emit_itineraries {
            std::fs::create_dir_all(dir.join("itineraries"))?;
        }
        if settings.emit_paths {
            std::fs::create_dir_all(dir.join("paths"))?;
        }
    }

    let networks = resolve_networks(&configs, settings)?;
    for c in &configs {
        c.validate_against(&networks[&c.network])?;
    }
    let units = expand_units(&configs, settings, &networks)?;

    let mut records: Vec<RunRecord> = units
        .par_iter()
        .map(|unit| execute(unit, settings))
        .collect();
    records.sort_by(|a, b| {
        (&a.scenario.scenario_id, a.replication).cmp(&(&b.scenario.scenario_id, b.replication))
    });

    let metrics_csv = output::metrics_csv(&records);
    if let Some(dir) = &settings.out_dir {
        std::fs::write(dir.join("metrics.csv"), &metrics_csv)?;
        std::fs::write(
            dir.join("plot_fleet_sweep.csv"),
            output::fleet_sweep_csv(&records),
        )?;
        std::fs::write(
            dir.join("plot_los_histogram.csv"),
            output::los_histogram_csv(&records),
        )?;
        std::fs::write(
            dir.join("plot_wait_summary.csv"),
            output::wait_summary_csv(&records),
        )?;
    }
    Ok(MatrixOutput {
        records,
        metrics_csv,
    })
}

fn apply_overrides(configs: &[ScenarioConfig], settings: &RunSettings) -> Vec<ScenarioConfig> {
    configs
        .iter()
        .cloned()
        .map(|mut c| {
            if let Some(net) = &settings.network_override {
                c.network = net.clone();
            }
            if let Some(demand) = &settings.demand_override {
                c.demand_file = Some(demand.clone());
            }
            if let Some(reps) = settings.replications_override {
                c.replications = reps;
            }
            c
        })
        .collect()
}

fn resolve_networks(
    configs: &[ScenarioConfig],
    settings: &RunSettings,
) -> Result<HashMap<String, Arc<Network>>, RunnerError> {
    let mut networks = HashMap::new();
    for c in configs {
        if networks.contains_key(&c.network) {
            continue;
        }
        let net = if c.network == "synthetic" {
            let spec = SyntheticNetworkSpec {
                seed: derive_seed(settings.master_seed, &[NS_NETWORK]),
                ..SyntheticNetworkSpec::default()
            };
            let doc = generate_synthetic_network(&spec)?;
            if let Some(dir) = &settings.out_dir {
                std::fs::write(
                    dir.join("network-synthetic.json"),
                    serde_json::to_string_pretty(&doc).expect("document serializes"),
                )?;
            }
            Network::from_doc(&doc)?
        } else {
            load_network(Path::new(&c.network))?
        };
        networks.insert(c.network.clone(), Arc::new(net));
    }
    Ok(networks)
}

/// (network ref, demand file, base demand, window, growth, replication)
type DemandKey = (String, Option<String>, u32, u64, u32, u32);

fn expand_units(
    configs: &[ScenarioConfig],
    settings: &RunSettings,
    networks: &HashMap<String, Arc<Network>>,
) -> Result<Vec<RunUnit>, RunnerError> {
    // demand is cached so every fleet size of a sweep shares the same
    // realization for a given (growth, replication)
    let mut demand_cache: HashMap<DemandKey, Arc<Vec<Order>>> = HashMap::new();
    let mut units = Vec::new();
    for (index, c) in configs.iter().enumerate() {
        let net = Arc::clone(&networks[&c.network]);
        let base_seed = c
            .seed
            .unwrap_or_else(|| derive_seed(settings.master_seed, &[NS_SCENARIO, index as u64]));
        for rep in 0..c.replications {
            let key = (
                c.network.clone(),
                c.demand_file.clone(),
                c.base_demand,
                c.window,
                c.demand_growth_percent,
                rep,
            );
            let orders = match demand_cache.get(&key) {
                Some(orders) => Arc::clone(orders),
                None => {
                    let orders = Arc::new(build_demand(c, &net, settings, rep)?);
                    demand_cache.insert(key, Arc::clone(&orders));
                    orders
                }
            };
            units.push(RunUnit {
                scenario: c.clone(),
                replication: rep,
                placement_seed: derive_seed(base_seed, &[NS_PLACEMENT, u64::from(rep)]),
                net: Arc::clone(&net),
                orders,
            });
        }
    }
    Ok(units)
}

fn build_demand(
    c: &ScenarioConfig,
    net: &Network,
    settings: &RunSettings,
    rep: u32,
) -> Result<Vec<Order>, RunnerError> {
    match &c.demand_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| RunnerError::DemandDoc(path.clone(), e.to_string()))?;
            let doc: Vec<OrderDoc> = serde_json::from_str(&text)
                .map_err(|e| RunnerError::DemandDoc(path.clone(), e.to_string()))?;
            orders_from_doc(&doc, net)
                .map_err(|e| RunnerError::Demand(c.scenario_id.clone(), e))
        }
        None => {
            let seed = derive_seed(
                settings.master_seed,
                &[
                    NS_DEMAND,
                    u64::from(c.demand_growth_percent),
                    u64::from(rep),
                ],
            );
            generate_demand(net, c.n_orders(), c.window, seed)
                .map_err(|e| RunnerError::Demand(c.scenario_id.clone(), e))
        }
    }
}

fn execute(unit: &RunUnit, settings: &RunSettings) -> RunRecord {
    let c = &unit.scenario;
    let policy = DispatchPolicy::for_system(c.system);
    let fleet = FleetSpec {
        robots: c.robots,
        drones: c.drones,
    };
    let outcome = (|| -> Result<Option<WaitSummary>, String> {
        let result = run(
            &unit.net,
            &unit.orders,
            &policy,
            fleet,
            unit.placement_seed,
        )
        .map_err(|e| e.to_string())?;
        replay_audit(&unit.net, &policy, &result).map_err(|e| format!("replay audit: {e}"))?;

        if let Some(dir) = &settings.out_dir {
            let stem = format!("{}-rep{}", c.scenario_id, unit.replication);
            std::fs::write(
                dir.join("logs").join(format!("{stem}.jsonl")),
                result.log.to_jsonl(),
            )
            .map_err(|e| e.to_string())?;
            if settings.emit_itineraries {
                std::fs::write(
                    dir.join("itineraries").join(format!("{stem}.csv")),
                    output::itinerary_csv(&result, c.system),
                )
                .map_err(|e| e.to_string())?;
            }
            if settings.emit_paths {
                std::fs::write(
                    dir.join("paths").join(format!("{stem}.txt")),
                    output::paths_export(&result),
                )
                .map_err(|e| e.to_string())?;
            }
        }

        if unit.orders.is_empty() {
            return Ok(None);
        }
        let waits: Vec<u64> = result.per_order.values().map(|o| o.wait).collect();
        summarize(&waits).map(Some).map_err(|e| e.to_string())
    })();

    RunRecord {
        scenario: c.clone(),
        replication: unit.replication,
        placement_seed: unit.placement_seed,
        n_orders: unit.orders.len() as u32,
        outcome,
    }
}
