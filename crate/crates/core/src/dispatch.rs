//! Centralized dispatcher: FIFO order queues matched to the nearest idle
//! vehicle, in the standalone single-fleet form and the two-phase
//! hub-and-spoke hybrid form.
//!
//! The tick functions are called once per simulated second. They pop
//! assigned orders from the request tables and return the chosen matches;
//! the engine applies all movement and state effects.

use serde::{Deserialize, Serialize};

use crate::demand::{Order, RequestTable};
use crate::engine::{Event, EventLog};
use crate::fleet::{Vehicle, VehicleMode};
use crate::net::{NetError, Network, NodeId};

/// Meal preparation gate for the standalone systems: 12 minutes added to
/// every request time before it may be assigned.
pub const PREP_GATE_SECS: u64 = 720;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    RobotOnly,
    DroneOnly,
    Hybrid,
}

impl SystemKind {
    pub fn is_hybrid(self) -> bool {
        self == SystemKind::Hybrid
    }
}

/// Dispatching rules for one system type.
///
/// The hybrid runs with a zero preparation gate: its slow robot leg from
/// the depot to the restaurant stands in for the preparation delay.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DispatchPolicy {
    pub system: SystemKind,
    pub prep_gate: u64,
    /// Dispatcher update interval; locked to the 1-second simulation tick.
    pub update_interval: u64,
}

impl DispatchPolicy {
    pub fn robot_only() -> Self {
        Self::for_system(SystemKind::RobotOnly)
    }

    pub fn drone_only() -> Self {
        Self::for_system(SystemKind::DroneOnly)
    }

    pub fn hybrid() -> Self {
        Self::for_system(SystemKind::Hybrid)
    }

    pub fn for_system(system: SystemKind) -> Self {
        let prep_gate = match system {
            SystemKind::RobotOnly | SystemKind::DroneOnly => PREP_GATE_SECS,
            SystemKind::Hybrid => 0,
        };
        DispatchPolicy {
            system,
            prep_gate,
            update_interval: 1,
        }
    }
}

/// The hybrid's two queues: orders awaiting a robot (keyed by request time)
/// and meals at the depot awaiting a drone (keyed by depot-arrival time).
#[derive(Clone, Debug, Default)]
pub struct HybridQueues {
    pub robot_table: RequestTable,
    pub drone_table: RequestTable,
}

/// An idle vehicle observed at assignment time, with its distance to the
/// pickup point. Snapshots make greedy-nearest auditable from the log alone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdleVehicle {
    pub vehicle: u32,
    pub location: NodeId,
    pub distance: f64,
}

/// One dispatcher decision: `order` assigned to `vehicle` at `t`.
#[derive(Clone, Debug)]
pub struct Assignment {
    pub t: u64,
    pub order: Order,
    pub vehicle: u32,
    /// Distance from the chosen vehicle to the pickup point.
    pub distance: f64,
    pub idle_snapshot: Vec<IdleVehicle>,
}

fn pick_nearest(snapshot: &[IdleVehicle]) -> &IdleVehicle {
    snapshot
        .iter()
        .min_by(|a, b| {
            a.distance
                .total_cmp(&b.distance)
                .then_with(|| a.vehicle.cmp(&b.vehicle))
        })
        .expect("snapshot is non-empty")
}

/// Standalone dispatch (robot-only or drone-only).
///
/// While the front queued order has cleared the preparation gate and an
/// idle vehicle exists, assign that order to the idle vehicle nearest to
/// its restaurant (ties to the lowest vehicle id). Several orders may be
/// assigned within one tick; with no idle vehicle the order simply waits.
pub fn tick_standalone(
    policy: &DispatchPolicy,
    net: &Network,
    table: &mut RequestTable,
    vehicles: &[Vehicle],
    now: u64,
) -> Result<Vec<Assignment>, NetError> {
    debug_assert!(!policy.system.is_hybrid());
    let mut taken = vec![false; vehicles.len()];
    let mut out = Vec::new();
    while let Some(order) = table.peek_next_eligible(now, policy.prep_gate) {
        if !vehicles
            .iter()
            .zip(&taken)
            .any(|(v, &t)| v.is_idle() && !t)
        {
            break;
        }
        // One distance field per order serves every idle robot at once.
        let road = match vehicles.iter().find(|v| v.mode == VehicleMode::Robot) {
            Some(_) => Some(net.distances_from(order.restaurant)?),
            None => None,
        };
        let mut snapshot = Vec::new();
        for (i, v) in vehicles.iter().enumerate() {
            if !v.is_idle() || taken[i] {
                continue;
            }
            let distance = match v.mode {
                VehicleMode::Robot => road
                    .as_ref()
                    .and_then(|d| d.to(v.location))
                    .ok_or(NetError::NoPath {
                        from: v.location,
                        to: order.restaurant,
                    })?,
                VehicleMode::Drone => net.straight_distance(v.location, order.restaurant)?,
            };
            snapshot.push(IdleVehicle {
                vehicle: v.id,
                location: v.location,
                distance,
            });
        }
        let chosen = *pick_nearest(&snapshot);
        let i = vehicles
            .iter()
            .position(|v| v.id == chosen.vehicle)
            .expect("chosen vehicle exists");
        taken[i] = true;
        let order = table
            .pop_next_eligible(now, policy.prep_gate)
            .expect("peeked order is still queued");
        out.push(Assignment {
            t: now,
            order,
            vehicle: chosen.vehicle,
            distance: chosen.distance,
            idle_snapshot: snapshot,
        });
    }
    Ok(out)
}

/// Hybrid dispatch, two phases per tick.
///
/// Phase 1: idle robots at the depot take the front order of the robot
/// table (no preparation gate) and will shuttle depot -> restaurant ->
/// depot. Phase 2: idle drones at the depot take the front meal of the
/// drone table and will fly depot -> home -> depot. Robot assignments are
/// returned before drone assignments.
pub fn tick_hybrid(
    net: &Network,
    queues: &mut HybridQueues,
    vehicles: &[Vehicle],
    depot: NodeId,
    now: u64,
) -> Result<Vec<Assignment>, NetError> {
    let mut taken = vec![false; vehicles.len()];
    let mut out = Vec::new();

    // Phase 1: robots fetch meals from restaurants.
    let mut depot_field = None;
    while let Some(order) = queues.robot_table.peek_next_eligible(now, 0) {
        let field = match &depot_field {
            Some(f) => f,
            None => {
                depot_field = Some(net.distances_from(depot)?);
                depot_field.as_ref().unwrap()
            }
        };
        let pickup_distance = field.to(order.restaurant).ok_or(NetError::NoPath {
            from: depot,
            to: order.restaurant,
        })?;
        let snapshot: Vec<IdleVehicle> = vehicles
            .iter()
            .zip(&taken)
            .filter(|(v, &t)| v.mode == VehicleMode::Robot && v.is_idle() && !t)
            .map(|(v, _)| {
                debug_assert_eq!(v.location, depot);
                IdleVehicle {
                    vehicle: v.id,
                    location: v.location,
                    distance: pickup_distance,
                }
            })
            .collect();
        if snapshot.is_empty() {
            break;
        }
        let chosen = *pick_nearest(&snapshot);
        taken[vehicles.iter().position(|v| v.id == chosen.vehicle).unwrap()] = true;
        let order = queues.robot_table.pop_next_eligible(now, 0).unwrap();
        out.push(Assignment {
            t: now,
            order,
            vehicle: chosen.vehicle,
            distance: chosen.distance,
            idle_snapshot: snapshot,
        });
    }

    // Phase 2: drones deliver meals waiting at the depot.
    while queues.drone_table.peek_next_eligible(now, 0).is_some() {
        let snapshot: Vec<IdleVehicle> = vehicles
            .iter()
            .zip(&taken)
            .filter(|(v, &t)| v.mode == VehicleMode::Drone && v.is_idle() && !t)
            .map(|(v, _)| {
                debug_assert_eq!(v.location, depot);
                // the meal is picked up at the depot the drone sits on
                IdleVehicle {
                    vehicle: v.id,
                    location: v.location,
                    distance: 0.0,
                }
            })
            .collect();
        if snapshot.is_empty() {
            break;
        }
        let chosen = *pick_nearest(&snapshot);
        taken[vehicles.iter().position(|v| v.id == chosen.vehicle).unwrap()] = true;
        let order = queues.drone_table.pop_next_eligible(now, 0).unwrap();
        out.push(Assignment {
            t: now,
            order,
            vehicle: chosen.vehicle,
            distance: chosen.distance,
            idle_snapshot: snapshot,
        });
    }

    Ok(out)
}

/// FIFO audit over a completed event log.
///
/// Within each queue, orders that became eligible earlier must not be
/// assigned later than orders that became eligible after them. Eligibility
/// order equals (ready time, order id) because gates are uniform per queue:
/// request time for the standalone table and the hybrid robot table,
/// depot-arrival time for the hybrid drone table.
pub fn assignment_order_check(log: &EventLog) -> bool {
    #[derive(Default)]
    struct Times {
        placed: Option<u64>,
        assigned: Vec<u64>,
        depot: Option<u64>,
    }
    let mut orders: std::collections::HashMap<u32, Times> = std::collections::HashMap::new();
    let mut hybrid = false;
    for ev in log.records() {
        match *ev {
            Event::OrderPlaced { t, order } => {
                orders.entry(order).or_default().placed = Some(t);
            }
            Event::Assigned { t, order, .. } => {
                orders.entry(order).or_default().assigned.push(t);
            }
            Event::DepotArrival { t, order, .. } => {
                orders.entry(order).or_default().depot = Some(t);
                hybrid = true;
            }
            _ => {}
        }
    }

    let nondecreasing = |mut keyed: Vec<(u64, u32, u64)>| -> bool {
        keyed.sort_by_key(|&(ready, id, _)| (ready, id));
        keyed.windows(2).all(|w| w[0].2 <= w[1].2)
    };

    let first_queue: Vec<(u64, u32, u64)> = orders
        .iter()
        .filter_map(|(&id, t)| Some((t.placed?, id, *t.assigned.first()?)))
        .collect();
    if !nondecreasing(first_queue) {
        return false;
    }
    if hybrid {
        let drone_queue: Vec<(u64, u32, u64)> = orders
            .iter()
            .filter_map(|(&id, t)| Some((t.depot?, id, *t.assigned.get(1)?)))
            .collect();
        if !nondecreasing(drone_queue) {
            return false;
        }
    }
    true
}
