//! Deterministic agent-based simulation of last-mile food delivery fleets.
//!
//! Three systems are modeled: sidewalk robots routed over a road graph,
//! drones flying straight lines, and a hub-and-spoke hybrid in which robots
//! shuttle meals from restaurants to a central depot and drones fly the
//! final leg to the customer. The simulation is time-stepped at 1 second,
//! fully seeded, and writes an append-only event log from which every
//! service metric is derived.

pub mod analytics;
pub mod demand;
pub mod dispatch;
pub mod engine;
pub mod fleet;
pub mod net;
pub mod rng;

pub use analytics::{
    fleet_sweep_summary, los_of, los_of_minutes, summarize, wait_time, AnalyticsError,
    LosCategory, LosHistogram, SweepRow, SweepTable, WaitSummary,
};
pub use demand::{
    generate_demand, orders_from_doc, scale_demand, DemandError, Order, OrderDoc, RequestTable,
};
pub use dispatch::{
    assignment_order_check, tick_hybrid, tick_standalone, Assignment, DispatchPolicy,
    HybridQueues, IdleVehicle, SystemKind, PREP_GATE_SECS,
};
pub use engine::{
    replay_audit, replay_check, run, run_with_options, EngineError, Event, EventLog, FleetSpec,
    OrderOutcome, RunOptions, SimResult,
};
pub use fleet::{travel_time, vehicle_distance_to, Leg, Speed, Vehicle, VehicleMode, VehicleState};
pub use net::{
    load_network, straight_line_distance, Link, NetError, Network, NetworkDoc, Node, NodeId,
    NodeKind, Path, UndirectedLink,
};
