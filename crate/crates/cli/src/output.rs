//! CSV and text exports: the merged metrics table, per-order itineraries,
//! per-vehicle path node lists, and the plot-data files.

use std::collections::BTreeMap;

use lastmile_core::analytics::{plateau_fleet, LosCategory, SweepRow};
use lastmile_core::{SimResult, SystemKind, PREP_GATE_SECS};

use crate::config::system_label;
use crate::runner::RunRecord;

pub const METRICS_HEADER: &str = "scenario_id,replication,system,robots,drones,\
demand_growth_percent,n_orders,seed,status,mean_wait_min,median_wait_min,min_wait_min,\
max_wait_min,q1_wait_min,q3_wait_min,los_a,los_b,los_c,los_d,los_f,system_los";

/// Merged metrics table, one row per (scenario, replication).
pub fn metrics_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&metrics_row(r));
        out.push('\n');
    }
    out
}

fn metrics_row(r: &RunRecord) -> String {
    let c = &r.scenario;
    let prefix = format!(
        "{},{},{},{},{},{},{},{}",
        c.scenario_id,
        r.replication,
        system_label(c.system),
        c.robots,
        c.drones,
        c.demand_growth_percent,
        r.n_orders,
        r.placement_seed
    );
    match &r.outcome {
        Ok(Some(s)) => format!(
            "{prefix},ok,{:.1},{:.1},{:.1},{:.1},{:.1},{:.1},{},{},{},{},{},{}",
            s.mean_min,
            s.median_min,
            s.min_min,
            s.max_min,
            s.q1_min,
            s.q3_min,
            s.los_histogram.count(LosCategory::A),
            s.los_histogram.count(LosCategory::B),
            s.los_histogram.count(LosCategory::C),
            s.los_histogram.count(LosCategory::D),
            s.los_histogram.count(LosCategory::F),
            s.system_los
        ),
        Ok(None) => format!("{prefix},ok,,,,,,,,,,,,"),
        Err(msg) => format!("{prefix},failed: {},,,,,,,,,,,,", sanitize(msg)),
    }
}

fn sanitize(msg: &str) -> String {
    msg.replace([',', '\n', '\r'], ";")
}

/// Per-order itinerary table.
///
/// Standalone columns: o_ID, R_t, FP_t, beta, alpha, P_t, D_t, W_t.
/// Hybrid columns: o_ID, R_t, beta, alpha, rP_t, rD_t, dP_t, dD_t, W_t.
pub fn itinerary_csv(result: &SimResult, system: SystemKind) -> String {
    let mut out = String::new();
    match system {
        SystemKind::Hybrid => {
            out.push_str("o_ID,R_t,beta,alpha,rP_t,rD_t,dP_t,dD_t,W_t\n");
            for o in result.per_order.values() {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    o.order_id,
                    o.request_time,
                    o.restaurant,
                    o.home,
                    o.pickup,
                    o.depot_arrival.expect("hybrid order crossed the depot"),
                    o.drone_pickup.expect("hybrid order flew the last leg"),
                    o.dropoff,
                    o.wait
                ));
            }
        }
        _ => {
            out.push_str("o_ID,R_t,FP_t,beta,alpha,P_t,D_t,W_t\n");
            for o in result.per_order.values() {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    o.order_id,
                    o.request_time,
                    PREP_GATE_SECS,
                    o.restaurant,
                    o.home,
                    o.pickup,
                    o.dropoff,
                    o.wait
                ));
            }
        }
    }
    out
}

/// Road-following node sequences, one line per delivery engagement:
/// `Vehicle(3).Pathnode=[190,189,...]`. Drone legs fly straight and are
/// omitted.
pub fn paths_export(result: &SimResult) -> String {
    let mut out = String::new();
    for (vehicle, legs) in &result.vehicle_legs {
        // legs come in pickup/delivery pairs per engagement
        for pair in legs.chunks(2) {
            let mut nodes: Vec<lastmile_core::NodeId> = Vec::new();
            for leg in pair {
                if let Some(path) = &leg.path {
                    let skip = usize::from(!nodes.is_empty());
                    nodes.extend(path.nodes.iter().skip(skip).copied());
                }
            }
            if nodes.is_empty() {
                continue;
            }
            let joined = nodes
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(",");
            out.push_str(&format!("Vehicle({vehicle}).Pathnode=[{joined}]\n"));
        }
    }
    out
}

/// Mean wait per fleet size for the standalone sweeps, with the plateau
/// fleet (smallest fleet within 5% of the largest fleet's mean) repeated
/// per group. Replications are averaged.
pub fn fleet_sweep_csv(records: &[RunRecord]) -> String {
    let mut groups: BTreeMap<(&'static str, u32), BTreeMap<u32, Vec<f64>>> = BTreeMap::new();
    for r in records {
        let c = &r.scenario;
        if c.system == SystemKind::Hybrid {
            continue;
        }
        if let Ok(Some(s)) = &r.outcome {
            let fleet = c.robots + c.drones;
            groups
                .entry((system_label(c.system), c.demand_growth_percent))
                .or_default()
                .entry(fleet)
                .or_default()
                .push(s.mean_min);
        }
    }
    let mut out = String::from("system,demand_growth_percent,fleet_size,mean_wait_min,plateau_fleet\n");
    for ((system, growth), by_fleet) in groups {
        let rows: Vec<SweepRow> = by_fleet
            .iter()
            .map(|(&fleet_size, means)| SweepRow {
                fleet_size,
                mean_wait_min: means.iter().sum::<f64>() / means.len() as f64,
            })
            .collect();
        let plateau = if rows.len() >= 2 {
            plateau_fleet(&rows).map(|p| p.to_string()).unwrap_or_default()
        } else {
            String::new()
        };
        for row in rows {
            out.push_str(&format!(
                "{system},{growth},{},{:.1},{plateau}\n",
                row.fleet_size, row.mean_wait_min
            ));
        }
    }
    out
}

/// Per-run LOS histogram (the per-order grades, not the system grade).
pub fn los_histogram_csv(records: &[RunRecord]) -> String {
    let mut out = String::from("scenario_id,replication,los_a,los_b,los_c,los_d,los_f\n");
    for r in records {
        if let Ok(Some(s)) = &r.outcome {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.scenario.scenario_id,
                r.replication,
                s.los_histogram.count(LosCategory::A),
                s.los_histogram.count(LosCategory::B),
                s.los_histogram.count(LosCategory::C),
                s.los_histogram.count(LosCategory::D),
                s.los_histogram.count(LosCategory::F),
            ));
        }
    }
    out
}

/// Per-run five-number wait summary in minutes.
pub fn wait_summary_csv(records: &[RunRecord]) -> String {
    let mut out = String::from("scenario_id,replication,min_min,q1_min,median_min,q3_min,max_min\n");
    for r in records {
        if let Ok(Some(s)) = &r.outcome {
            out.push_str(&format!(
                "{},{},{:.1},{:.1},{:.1},{:.1},{:.1}\n",
                r.scenario.scenario_id,
                r.replication,
                s.min_min,
                s.q1_min,
                s.median_min,
                s.q3_min,
                s.max_min
            ));
        }
    }
    out
}
