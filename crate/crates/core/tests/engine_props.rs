//! End-to-end engine properties over seeded random scenarios: every
//! produced log must survive the full replay audit, reruns must be
//! byte-identical, and the itinerary arithmetic must hold on every order.

mod common;

use common::random_net;
use lastmile_core::{
    assignment_order_check, generate_demand, replay_audit, run, DispatchPolicy, FleetSpec,
    PREP_GATE_SECS,
};

#[test]
fn standalone_robot_runs_survive_replay_audit() {
    for seed in 0..8 {
        let net = random_net(seed, 12, false);
        let orders = generate_demand(&net, 15, 600, seed ^ 0xABCD).unwrap();
        let policy = DispatchPolicy::robot_only();
        let result = run(&net, &orders, &policy, FleetSpec::robots(3), seed).unwrap();
        replay_audit(&net, &policy, &result).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        assert!(assignment_order_check(&result.log));
        assert_eq!(result.per_order.len(), orders.len());
        for o in result.per_order.values() {
            assert!(o.assigned >= o.request_time + PREP_GATE_SECS);
            assert!(o.pickup >= o.request_time + PREP_GATE_SECS);
            assert_eq!(o.wait, o.dropoff - o.request_time);
        }
    }
}

#[test]
fn standalone_drone_runs_survive_replay_audit() {
    for seed in 0..8 {
        let net = random_net(seed, 12, false);
        let orders = generate_demand(&net, 15, 600, seed ^ 0x1234).unwrap();
        let policy = DispatchPolicy::drone_only();
        let result = run(&net, &orders, &policy, FleetSpec::drones(2), seed).unwrap();
        replay_audit(&net, &policy, &result).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        assert!(assignment_order_check(&result.log));
    }
}

#[test]
fn hybrid_runs_survive_replay_audit() {
    for seed in 0..8 {
        let net = random_net(seed, 12, true);
        let orders = generate_demand(&net, 15, 600, seed ^ 0x77).unwrap();
        let policy = DispatchPolicy::hybrid();
        let result = run(
            &net,
            &orders,
            &policy,
            FleetSpec {
                robots: 2,
                drones: 2,
            },
            seed,
        )
        .unwrap();
        replay_audit(&net, &policy, &result).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        for o in result.per_order.values() {
            let depot_arrival = o.depot_arrival.expect("hybrid order crossed the depot");
            let drone_pickup = o.drone_pickup.expect("hybrid order flew the last leg");
            assert!(drone_pickup >= depot_arrival, "dP_t must not precede rD_t");
            assert!(o.dropoff >= drone_pickup);
            assert_eq!(o.wait, o.dropoff - o.request_time);
        }
    }
}

#[test]
fn reruns_serialize_identically() {
    for seed in 0..4 {
        let net = random_net(seed, 12, true);
        let orders = generate_demand(&net, 12, 600, seed).unwrap();
        for (policy, fleet) in [
            (DispatchPolicy::robot_only(), FleetSpec::robots(2)),
            (DispatchPolicy::drone_only(), FleetSpec::drones(2)),
            (
                DispatchPolicy::hybrid(),
                FleetSpec {
                    robots: 2,
                    drones: 1,
                },
            ),
        ] {
            let a = run(&net, &orders, &policy, fleet, seed).unwrap();
            let b = run(&net, &orders, &policy, fleet, seed).unwrap();
            assert_eq!(a.log.to_jsonl(), b.log.to_jsonl());
            assert_eq!(a.termination_time, b.termination_time);
        }
    }
}

/// Vehicles that finished an order and found no new work must sit at their
/// drop-off node (standalone) until reassigned.
#[test]
fn standalone_vehicles_wait_where_they_dropped_off() {
    use lastmile_core::Event;
    let net = random_net(5, 10, false);
    let orders = generate_demand(&net, 10, 300, 5).unwrap();
    let policy = DispatchPolicy::robot_only();
    let result = run(&net, &orders, &policy, FleetSpec::robots(2), 5).unwrap();
    let mut last_drop = std::collections::HashMap::new();
    for ev in result.log.records() {
        match *ev {
            Event::DroppedOff { vehicle, node, .. } => {
                last_drop.insert(vehicle, node);
            }
            Event::VehicleIdle { t, vehicle, node } if t > 0 => {
                assert_eq!(Some(&node), last_drop.get(&vehicle));
            }
            _ => {}
        }
    }
}
