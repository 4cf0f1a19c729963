//! Scenario configuration, the built-in scenario matrix, synthetic network
//! generation and all file outputs around `lastmile-core`.

pub mod config;
pub mod output;
pub mod runner;
pub mod synth;

pub use config::{paper_matrix, ConfigError, ConfigFile, ScenarioConfig};
pub use output::{itinerary_csv, metrics_csv, paths_export};
pub use runner::{run_matrix, MatrixOutput, RunRecord, RunSettings, RunnerError};
pub use synth::{generate_synthetic_network, SynthError, SyntheticNetworkSpec};
