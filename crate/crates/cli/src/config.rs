//! Scenario configuration files and the built-in scenario matrix.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use lastmile_core::{Network, SystemKind};

fn default_base_demand() -> u32 {
    340
}

fn default_window() -> u64 {
    3600
}

fn default_network() -> String {
    "synthetic".into()
}

fn default_replications() -> u32 {
    1
}

/// One scenario: a system, a fleet, a demand level and its seeds.
///
/// `network` is either a path to a network document or the literal
/// `"synthetic"` for the built-in generator. When `seed` is omitted it is
/// derived from the run's master seed and the scenario's position.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario_id: String,
    pub system: SystemKind,
    #[serde(default)]
    pub robots: u32,
    #[serde(default)]
    pub drones: u32,
    #[serde(default)]
    pub demand_growth_percent: u32,
    #[serde(default = "default_base_demand")]
    pub base_demand: u32,
    #[serde(default = "default_window")]
    pub window: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_network")]
    pub network: String,
    /// Optional fixed demand document, bypassing generation.
    #[serde(default)]
    pub demand_file: Option<String>,
    #[serde(default = "default_replications")]
    pub replications: u32,
}

impl ScenarioConfig {
    pub fn new(scenario_id: impl Into<String>, system: SystemKind) -> Self {
        ScenarioConfig {
            scenario_id: scenario_id.into(),
            system,
            robots: 0,
            drones: 0,
            demand_growth_percent: 0,
            base_demand: default_base_demand(),
            window: default_window(),
            seed: None,
            network: default_network(),
            demand_file: None,
            replications: default_replications(),
        }
    }

    /// Check the scenario's own invariants; network-dependent rules live in
    /// [`ScenarioConfig::validate_against`].
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.scenario_id.is_empty() {
            return Err(ConfigError::EmptyScenarioId);
        }
        match self.system {
            SystemKind::RobotOnly if self.drones > 0 => Err(ConfigError::RobotOnlyWithDrones {
                scenario: self.scenario_id.clone(),
                drones: self.drones,
            }),
            SystemKind::DroneOnly if self.robots > 0 => Err(ConfigError::DroneOnlyWithRobots {
                scenario: self.scenario_id.clone(),
                robots: self.robots,
            }),
            SystemKind::Hybrid if self.robots < 1 || self.drones < 1 => {
                Err(ConfigError::HybridFleetTooSmall {
                    scenario: self.scenario_id.clone(),
                    robots: self.robots,
                    drones: self.drones,
                })
            }
            _ if self.replications < 1 => Err(ConfigError::NoReplications {
                scenario: self.scenario_id.clone(),
            }),
            _ if self.window < 1 => Err(ConfigError::EmptyWindow {
                scenario: self.scenario_id.clone(),
            }),
            _ => Ok(()),
        }
    }

    /// Rules that need the resolved network: a hybrid scenario requires
    /// exactly one depot.
    pub fn validate_against(&self, net: &Network) -> Result<(), ConfigError> {
        if self.system == SystemKind::Hybrid && net.depot().is_none() {
            return Err(ConfigError::HybridNeedsDepot {
                scenario: self.scenario_id.clone(),
            });
        }
        Ok(())
    }

    /// Orders for one demand level of this scenario.
    pub fn n_orders(&self) -> u32 {
        lastmile_core::scale_demand(self.base_demand, self.demand_growth_percent)
    }
}

/// A config file: `{"master_seed": ..., "scenarios": [...]}`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub master_seed: Option<u64>,
    pub scenarios: Vec<ScenarioConfig>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let file: ConfigFile = serde_json::from_str(&text)?;
        file.validate()?;
        Ok(file)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut seen = std::collections::HashSet::new();
        for s in &self.scenarios {
            s.validate()?;
            if !seen.insert(s.scenario_id.as_str()) {
                return Err(ConfigError::DuplicateScenarioId(s.scenario_id.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("scenario id must not be empty")]
    EmptyScenarioId,
    #[error("scenario {scenario}: robot_only requires drones = 0, got {drones}")]
    RobotOnlyWithDrones { scenario: String, drones: u32 },
    #[error("scenario {scenario}: drone_only requires robots = 0, got {robots}")]
    DroneOnlyWithRobots { scenario: String, robots: u32 },
    #[error(
        "scenario {scenario}: hybrid requires robots >= 1 and drones >= 1, \
         got {robots} robots and {drones} drones"
    )]
    HybridFleetTooSmall {
        scenario: String,
        robots: u32,
        drones: u32,
    },
    #[error("scenario {scenario}: hybrid requires a network with a depot")]
    HybridNeedsDepot { scenario: String },
    #[error("scenario {scenario}: replications must be >= 1")]
    NoReplications { scenario: String },
    #[error("scenario {scenario}: window must be >= 1 second")]
    EmptyWindow { scenario: String },
    #[error("duplicate scenario id {0}")]
    DuplicateScenarioId(String),
    #[error("no scenario named {0} in the config")]
    UnknownScenario(String),
    #[error("failed to read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
}

pub const ROBOT_FLEETS: [u32; 6] = [25, 50, 75, 100, 125, 150];
pub const DRONE_FLEETS: [u32; 6] = [5, 10, 15, 20, 25, 30];
pub const DEMAND_LEVELS: [u32; 3] = [0, 10, 20];
pub const HYBRID_ROBOT_FLEETS: [u32; 2] = [25, 30];
pub const HYBRID_DRONE_FLEETS: [u32; 3] = [10, 15, 20];

/// The built-in scenario matrix: robot fleets 25..150 and drone fleets
/// 5..30, each at demand growth 0/10/20%, plus the six hybrid fleet mixes
/// at +20%: 42 runs at one replication each, all on the synthetic network.
pub fn paper_matrix() -> Vec<ScenarioConfig> {
    let mut out = Vec::with_capacity(42);
    for fleet in ROBOT_FLEETS {
        for growth in DEMAND_LEVELS {
            let mut s = ScenarioConfig::new(
                format!("robot-f{fleet:03}-d{growth:02}"),
                SystemKind::RobotOnly,
            );
            s.robots = fleet;
            s.demand_growth_percent = growth;
            out.push(s);
        }
    }
    for fleet in DRONE_FLEETS {
        for growth in DEMAND_LEVELS {
            let mut s = ScenarioConfig::new(
                format!("drone-f{fleet:03}-d{growth:02}"),
                SystemKind::DroneOnly,
            );
            s.drones = fleet;
            s.demand_growth_percent = growth;
            out.push(s);
        }
    }
    for robots in HYBRID_ROBOT_FLEETS {
        for drones in HYBRID_DRONE_FLEETS {
            let mut s = ScenarioConfig::new(
                format!("hybrid-r{robots:03}-d{drones:03}-d20"),
                SystemKind::Hybrid,
            );
            s.robots = robots;
            s.drones = drones;
            s.demand_growth_percent = 20;
            out.push(s);
        }
    }
    out
}

/// Short system label used in CSV columns.
pub fn system_label(system: SystemKind) -> &'static str {
    match system {
        SystemKind::RobotOnly => "robot",
        SystemKind::DroneOnly => "drone",
        SystemKind::Hybrid => "hybrid",
    }
}
