//! Post-run self-audit: replays the event log against the network and
//! dispatch policy, re-deriving every invariant the engine claims to hold.
//! Used by the test suite instead of trusting the engine's own bookkeeping.

use std::collections::{HashMap, HashSet};

use crate::dispatch::{assignment_order_check, DispatchPolicy, IdleVehicle, SystemKind};
use crate::fleet::{travel_time, VehicleMode};
use crate::net::{Network, NodeId, NodeKind};

use super::{Event, SimResult};

/// True iff the result passes the full audit; see [`replay_audit`] for the
/// checks.
pub fn replay_check(net: &Network, policy: &DispatchPolicy, result: &SimResult) -> bool {
    replay_audit(net, policy, result).is_ok()
}

#[derive(Clone, Copy, PartialEq)]
enum Phase {
    Idle,
    EnRoute,
}

struct VehicleTrace {
    phase: Phase,
    node: NodeId,
    /// Node the next VehicleIdle record must report, when one is owed.
    expect_idle_at: Option<NodeId>,
    idles: Vec<(u64, NodeId)>,
}

#[derive(Default)]
struct OrderTrace {
    placed: Option<u64>,
    /// (t, vehicle, chosen distance) per Assigned record, in log order.
    assigned: Vec<(u64, u32, f64)>,
    picked: Vec<(u64, u32, NodeId)>,
    depot: Option<(u64, u32)>,
    dropped: Vec<(u64, u32, NodeId)>,
}

/// Re-derives, from the log plus network geometry:
///
/// - record times nondecreasing and per-order lifecycle order/multiplicity;
/// - FIFO assignment order within each queue;
/// - greedy-nearest vehicle choice, verified from the idle snapshots;
/// - capacity-1: a vehicle is only ever assigned while idle;
/// - idle placement (standalone vehicles wait at their last drop-off node)
///   and hybrid depot-return discipline;
/// - exact travel-time arithmetic for every recorded leg;
/// - the preparation gate and the wait-time identity per order.
///
/// Returns a description of the first violation found.
pub fn replay_audit(
    net: &Network,
    policy: &DispatchPolicy,
    result: &SimResult,
) -> Result<(), String> {
    let records = result.log.records();
    for w in records.windows(2) {
        if w[0].t() > w[1].t() {
            return Err(format!(
                "log times decrease: {} after {}",
                w[1].t(),
                w[0].t()
            ));
        }
    }

    let hybrid = policy.system == SystemKind::Hybrid;
    let depot = if hybrid {
        Some(net.require_depot().map_err(|e| e.to_string())?)
    } else {
        None
    };

    let mut vehicles: HashMap<u32, VehicleTrace> = HashMap::new();
    let mut orders: HashMap<u32, OrderTrace> = HashMap::new();

    for ev in records {
        match ev {
            Event::VehicleIdle { t, vehicle, node } => {
                match vehicles.get_mut(vehicle) {
                    None => {
                        if *t != 0 {
                            return Err(format!(
                                "vehicle {vehicle} first appears idle at t={t}, not 0"
                            ));
                        }
                        if let Some(mu) = depot {
                            if *node != mu {
                                return Err(format!(
                                    "hybrid vehicle {vehicle} starts at {node}, not the depot"
                                ));
                            }
                        }
                        vehicles.insert(
                            *vehicle,
                            VehicleTrace {
                                phase: Phase::Idle,
                                node: *node,
                                expect_idle_at: None,
                                idles: vec![(*t, *node)],
                            },
                        );
                    }
                    Some(v) => {
                        if v.phase == Phase::Idle {
                            return Err(format!(
                                "vehicle {vehicle} reported idle twice without an assignment"
                            ));
                        }
                        match v.expect_idle_at.take() {
                            Some(expected) if expected != *node => {
                                return Err(format!(
                                    "vehicle {vehicle} idles at {node}, expected {expected}"
                                ));
                            }
                            Some(_) => {}
                            None => {
                                return Err(format!(
                                    "vehicle {vehicle} went idle with a leg still owed"
                                ));
                            }
                        }
                        v.phase = Phase::Idle;
                        v.node = *node;
                        v.idles.push((*t, *node));
                    }
                }
            }
            Event::Assigned {
                t,
                order,
                vehicle,
                idle_snapshot,
            } => {
                for s in idle_snapshot {
                    let v = vehicles
                        .get(&s.vehicle)
                        .ok_or_else(|| format!("snapshot lists unknown vehicle {}", s.vehicle))?;
                    if v.phase != Phase::Idle {
                        return Err(format!(
                            "snapshot at t={t} lists busy vehicle {}",
                            s.vehicle
                        ));
                    }
                    if v.node != s.location {
                        return Err(format!(
                            "snapshot at t={t} places vehicle {} at {}, it idles at {}",
                            s.vehicle, s.location, v.node
                        ));
                    }
                }
                let chosen = idle_snapshot
                    .iter()
                    .find(|s| s.vehicle == *vehicle)
                    .ok_or_else(|| {
                        format!("assigned vehicle {vehicle} missing from its own snapshot")
                    })?;
                let best = nearest(idle_snapshot);
                if best.vehicle != *vehicle {
                    return Err(format!(
                        "greedy violated at t={t}: vehicle {} at {} m was idle but {} at {} m \
                         was chosen",
                        best.vehicle, best.distance, vehicle, chosen.distance
                    ));
                }
                let v = vehicles
                    .get_mut(vehicle)
                    .ok_or_else(|| format!("unknown vehicle {vehicle} assigned"))?;
                if v.phase != Phase::Idle {
                    return Err(format!(
                        "capacity violated: vehicle {vehicle} assigned order {order} while busy"
                    ));
                }
                v.phase = Phase::EnRoute;
                orders
                    .entry(*order)
                    .or_default()
                    .assigned
                    .push((*t, *vehicle, chosen.distance));
            }
            Event::OrderPlaced { t, order } => {
                let trace = orders.entry(*order).or_default();
                if trace.placed.is_some() {
                    return Err(format!("order {order} placed twice"));
                }
                trace.placed = Some(*t);
            }
            Event::PickedUp {
                t,
                order,
                vehicle,
                node,
            } => {
                require_en_route(&vehicles, *vehicle, "picked up")?;
                orders
                    .entry(*order)
                    .or_default()
                    .picked
                    .push((*t, *vehicle, *node));
            }
            Event::DepotArrival { t, order, vehicle } => {
                require_en_route(&vehicles, *vehicle, "arrived at depot")?;
                let v = vehicles.get_mut(vehicle).unwrap();
                v.node = depot.ok_or("depot arrival in a non-hybrid log")?;
                v.expect_idle_at = depot;
                let trace = orders.entry(*order).or_default();
                if trace.depot.is_some() {
                    return Err(format!("order {order} delivered to the depot twice"));
                }
                trace.depot = Some((*t, *vehicle));
            }
            Event::DroppedOff {
                t,
                order,
                vehicle,
                node,
            } => {
                require_en_route(&vehicles, *vehicle, "dropped off")?;
                let v = vehicles.get_mut(vehicle).unwrap();
                v.node = *node;
                // standalone vehicles wait where they delivered; hybrid
                // drones owe a return flight to the depot
                v.expect_idle_at = if hybrid { depot } else { Some(*node) };
                orders
                    .entry(*order)
                    .or_default()
                    .dropped
                    .push((*t, *vehicle, *node));
            }
        }
    }

    if !assignment_order_check(&result.log) {
        return Err("FIFO assignment order violated".into());
    }

    let placed_count = orders.values().filter(|o| o.placed.is_some()).count();
    let dropped_count = orders.values().filter(|o| !o.dropped.is_empty()).count();
    if placed_count != result.per_order.len() || dropped_count != result.per_order.len() {
        return Err(format!(
            "conservation violated: {placed_count} placed, {dropped_count} dropped, \
             {} outcomes",
            result.per_order.len()
        ));
    }
    let last_drop = orders
        .values()
        .flat_map(|o| o.dropped.iter().map(|d| d.0))
        .max()
        .unwrap_or(0);
    if result.termination_time != last_drop {
        return Err(format!(
            "termination time {} does not match final drop-off {last_drop}",
            result.termination_time
        ));
    }

    let mut robot_ids: HashSet<u32> = HashSet::new();
    let mut drone_ids: HashSet<u32> = HashSet::new();
    let mut ids: Vec<u32> = orders.keys().copied().collect();
    ids.sort_unstable();
    for id in ids {
        let trace = &orders[&id];
        audit_order(net, policy, result, id, trace, depot, &vehicles)?;
        if hybrid {
            robot_ids.insert(trace.assigned[0].1);
            drone_ids.insert(trace.assigned[1].1);
        }
    }
    if let Some(shared) = robot_ids.intersection(&drone_ids).next() {
        return Err(format!(
            "vehicle {shared} served both robot and drone phases"
        ));
    }
    Ok(())
}

fn require_en_route(
    vehicles: &HashMap<u32, VehicleTrace>,
    vehicle: u32,
    action: &str,
) -> Result<(), String> {
    match vehicles.get(&vehicle) {
        Some(v) if v.phase == Phase::EnRoute => Ok(()),
        Some(_) => Err(format!("vehicle {vehicle} {action} while idle")),
        None => Err(format!("unknown vehicle {vehicle} {action}")),
    }
}

fn nearest(snapshot: &[IdleVehicle]) -> &IdleVehicle {
    snapshot
        .iter()
        .min_by(|a, b| {
            a.distance
                .total_cmp(&b.distance)
                .then_with(|| a.vehicle.cmp(&b.vehicle))
        })
        .expect("snapshot non-empty")
}

fn audit_order(
    net: &Network,
    policy: &DispatchPolicy,
    result: &SimResult,
    id: u32,
    trace: &OrderTrace,
    depot: Option<NodeId>,
    vehicles: &HashMap<u32, VehicleTrace>,
) -> Result<(), String> {
    let placed = trace
        .placed
        .ok_or(format!("order {id} has lifecycle events but no placement"))?;
    let outcome = result
        .per_order
        .get(&id)
        .ok_or(format!("order {id} missing from per-order outcomes"))?;
    if trace.dropped.len() != 1 {
        return Err(format!(
            "order {id} has {} drop-offs, expected exactly one",
            trace.dropped.len()
        ));
    }
    let (drop_t, drop_vehicle, drop_node) = trace.dropped[0];
    let home_kind = net.node(drop_node).map_err(|e| e.to_string())?.kind;
    if home_kind != NodeKind::Home {
        return Err(format!("order {id} dropped at non-home node {drop_node}"));
    }
    if drop_node != outcome.home || placed != outcome.request_time {
        return Err(format!("order {id} outcome disagrees with the log"));
    }
    if outcome.dropoff != drop_t || outcome.wait != drop_t - placed {
        return Err(format!(
            "order {id} wait arithmetic broken: wait {} vs {} - {}",
            outcome.wait, drop_t, placed
        ));
    }

    match policy.system {
        SystemKind::RobotOnly | SystemKind::DroneOnly => {
            if trace.assigned.len() != 1 || trace.picked.len() != 1 || trace.depot.is_some() {
                return Err(format!("order {id} has a malformed standalone lifecycle"));
            }
            let (a_t, a_v, a_dist) = trace.assigned[0];
            let (p_t, p_v, p_node) = trace.picked[0];
            if a_v != p_v || a_v != drop_vehicle {
                return Err(format!("order {id} changed vehicles mid-delivery"));
            }
            if net.node(p_node).map_err(|e| e.to_string())?.kind != NodeKind::Restaurant
                || p_node != outcome.restaurant
            {
                return Err(format!("order {id} picked up at wrong node {p_node}"));
            }
            let gate = placed + policy.prep_gate;
            if a_t < gate || p_t < gate {
                return Err(format!(
                    "order {id} beat the preparation gate: assigned {a_t}, picked {p_t}, \
                     gate {gate}"
                ));
            }
            let mode = match policy.system {
                SystemKind::RobotOnly => VehicleMode::Robot,
                _ => VehicleMode::Drone,
            };
            let expect_pickup = a_t + travel_time(a_dist, mode.speed());
            if p_t != expect_pickup {
                return Err(format!(
                    "order {id} pickup kinematics: got {p_t}, expected {expect_pickup}"
                ));
            }
            let delivery_dist = match mode {
                VehicleMode::Robot => net
                    .shortest_path(p_node, drop_node)
                    .map_err(|e| e.to_string())?
                    .total_length,
                VehicleMode::Drone => net
                    .straight_distance(p_node, drop_node)
                    .map_err(|e| e.to_string())?,
            };
            let expect_drop = p_t + travel_time(delivery_dist, mode.speed());
            if drop_t != expect_drop {
                return Err(format!(
                    "order {id} delivery kinematics: got {drop_t}, expected {expect_drop}"
                ));
            }
            if outcome.assigned != a_t || outcome.pickup != p_t {
                return Err(format!("order {id} outcome timestamps disagree with log"));
            }
        }
        SystemKind::Hybrid => {
            let mu = depot.expect("hybrid audit has a depot");
            if trace.assigned.len() != 2 || trace.picked.len() != 2 || trace.depot.is_none() {
                return Err(format!("order {id} has a malformed hybrid lifecycle"));
            }
            let (a1, v1, d1) = trace.assigned[0];
            let (p1, pv1, n1) = trace.picked[0];
            let (dep_t, dep_v) = trace.depot.unwrap();
            let (a2, v2, _) = trace.assigned[1];
            let (p2, pv2, n2) = trace.picked[1];
            if v1 != pv1 || v1 != dep_v {
                return Err(format!("order {id} robot phase changed vehicles"));
            }
            if v2 != pv2 || v2 != drop_vehicle {
                return Err(format!("order {id} drone phase changed vehicles"));
            }
            if !(placed <= a1 && a1 <= p1 && p1 <= dep_t && dep_t <= a2 && a2 == p2 && p2 <= drop_t)
            {
                return Err(format!("order {id} hybrid handoff out of order"));
            }
            if net.node(n1).map_err(|e| e.to_string())?.kind != NodeKind::Restaurant
                || n1 != outcome.restaurant
            {
                return Err(format!("order {id} robot pickup at wrong node {n1}"));
            }
            if n2 != mu {
                return Err(format!("order {id} drone pickup away from the depot"));
            }
            let robot = VehicleMode::Robot.speed();
            let drone = VehicleMode::Drone.speed();
            if p1 != a1 + travel_time(d1, robot) {
                return Err(format!("order {id} robot pickup kinematics broken"));
            }
            let back = net
                .shortest_path(n1, mu)
                .map_err(|e| e.to_string())?
                .total_length;
            if dep_t != p1 + travel_time(back, robot) {
                return Err(format!("order {id} robot return kinematics broken"));
            }
            let flight = net
                .straight_distance(mu, drop_node)
                .map_err(|e| e.to_string())?;
            if drop_t != p2 + travel_time(flight, drone) {
                return Err(format!("order {id} drone flight kinematics broken"));
            }
            if flight > 0.0 && drop_t == p2 {
                return Err(format!("order {id} flew a nonzero leg in zero time"));
            }
            // the drone must land back at the depot before it can serve again
            let drone_trace = &vehicles[&v2];
            let expect_home = drop_t
                + travel_time(
                    net.straight_distance(drop_node, mu)
                        .map_err(|e| e.to_string())?,
                    drone,
                );
            let landed = drone_trace
                .idles
                .iter()
                .find(|&&(t, _)| t >= drop_t)
                .copied();
            match landed {
                Some((t, node)) if node == mu && t == expect_home => {}
                other => {
                    return Err(format!(
                        "order {id}: drone {v2} did not return to the depot on time \
                         (expected t={expect_home}, saw {other:?})"
                    ));
                }
            }
            if outcome.assigned != a1
                || outcome.pickup != p1
                || outcome.depot_arrival != Some(dep_t)
                || outcome.drone_pickup != Some(p2)
                || outcome.drone_vehicle != Some(v2)
            {
                return Err(format!("order {id} outcome timestamps disagree with log"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::Order;
    use crate::engine::{run, FleetSpec};
    use crate::net::{NetworkDoc, Node, UndirectedLink};

    fn standalone_fixture() -> (Network, SimResult, DispatchPolicy) {
        let net = Network::from_doc(&NetworkDoc {
            nodes: vec![
                Node {
                    id: NodeId(1),
                    x: 0.0,
                    y: 0.0,
                    kind: NodeKind::Home,
                },
                Node {
                    id: NodeId(2),
                    x: 45.0,
                    y: 0.0,
                    kind: NodeKind::Restaurant,
                },
                Node {
                    id: NodeId(3),
                    x: 135.0,
                    y: 0.0,
                    kind: NodeKind::Home,
                },
            ],
            links: vec![
                UndirectedLink {
                    from: NodeId(1),
                    to: NodeId(2),
                },
                UndirectedLink {
                    from: NodeId(2),
                    to: NodeId(3),
                },
            ],
        })
        .unwrap();
        let orders = vec![
            Order {
                order_id: 1,
                request_time: 5,
                restaurant: NodeId(2),
                home: NodeId(3),
            },
            Order {
                order_id: 2,
                request_time: 40,
                restaurant: NodeId(2),
                home: NodeId(1),
            },
        ];
        let policy = DispatchPolicy::robot_only();
        let result = run(&net, &orders, &policy, FleetSpec::robots(2), 9).unwrap();
        (net, result, policy)
    }

    #[test]
    fn engine_output_passes() {
        let (net, result, policy) = standalone_fixture();
        replay_audit(&net, &policy, &result).unwrap();
    }

    #[test]
    fn dropoff_before_pickup_fails() {
        let (net, mut result, policy) = standalone_fixture();
        let records = &mut result.log.records;
        let pick = records
            .iter()
            .position(|e| matches!(e, Event::PickedUp { order: 1, .. }))
            .unwrap();
        let drop = records
            .iter()
            .position(|e| matches!(e, Event::DroppedOff { order: 1, .. }))
            .unwrap();
        records.swap(pick, drop);
        assert!(!replay_check(&net, &policy, &result));
    }

    #[test]
    fn wait_mismatch_fails() {
        let (net, mut result, policy) = standalone_fixture();
        result.per_order.get_mut(&1).unwrap().wait += 1;
        assert!(!replay_check(&net, &policy, &result));
    }

    #[test]
    fn swapped_assignments_fail_fifo() {
        let (net, mut result, policy) = standalone_fixture();
        // pretend order 2 was assigned before order 1 became eligible
        let records = &mut result.log.records;
        for ev in records.iter_mut() {
            if let Event::Assigned { t, order: 2, .. } = ev {
                *t -= 40;
            }
        }
        // keep per-order outcomes in sync so only FIFO trips
        result.per_order.get_mut(&2).unwrap().assigned -= 40;
        assert!(!assignment_order_check(&result.log));
        assert!(!replay_check(&net, &policy, &result));
    }

    #[test]
    fn empty_log_passes_fifo() {
        let log = super::super::EventLog::new();
        assert!(assignment_order_check(&log));
    }

    #[test]
    fn tampered_greedy_choice_fails() {
        let (net, mut result, policy) = standalone_fixture();
        // claim the farther vehicle was nearer by faking the snapshot
        for ev in result.log.records.iter_mut() {
            if let Event::Assigned { idle_snapshot, vehicle, .. } = ev {
                if idle_snapshot.len() > 1 {
                    for s in idle_snapshot.iter_mut() {
                        if s.vehicle != *vehicle {
                            s.distance = 0.0;
                        }
                    }
                }
            }
        }
        assert!(!replay_check(&net, &policy, &result));
    }
}
