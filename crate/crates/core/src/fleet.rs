//! Vehicle agents: modes, exact-rational speeds, travel-time quantization
//! onto the 1-second tick, and movement legs.

use serde::{Deserialize, Serialize};

use crate::net::{NetError, Network, NodeId, Path};

/// Vehicle technology. Robots follow the road graph, drones fly straight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VehicleMode {
    Robot,
    Drone,
}

/// Exact rational speed: `meters` per `seconds`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Speed {
    pub meters: u64,
    pub seconds: u64,
}

impl Speed {
    pub fn meters_per_second(self) -> f64 {
        self.meters as f64 / self.seconds as f64
    }
}

impl VehicleMode {
    /// Robot: 4.5 m/s sidewalk speed (9 m / 2 s).
    /// Drone: 40 km/h cruise, i.e. 40000 m / 3600 s = 100 m / 9 s; takeoff
    /// and landing overhead is already folded into this halved cruise speed.
    pub fn speed(self) -> Speed {
        match self {
            VehicleMode::Robot => Speed { meters: 9, seconds: 2 },
            VehicleMode::Drone => Speed {
                meters: 100,
                seconds: 9,
            },
        }
    }
}

/// Whole-second travel time: `ceil(distance / speed)`.
///
/// The multiplication by the rational denominator happens before the
/// division so that exactly representable cases (e.g. 1000 m at 100/9 m/s)
/// stay exact instead of picking up a spurious extra second from the ceil.
pub fn travel_time(distance_m: f64, speed: Speed) -> u64 {
    debug_assert!(distance_m.is_finite() && distance_m >= 0.0);
    if distance_m == 0.0 {
        return 0;
    }
    ((distance_m * speed.seconds as f64) / speed.meters as f64).ceil() as u64
}

/// Availability state of a vehicle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VehicleState {
    Idle,
    ToPickup,
    ToDropoff,
    /// Hybrid drones flying home empty after a drop-off.
    ReturningToDepot,
}

/// A robot or drone agent. `location` is only meaningful while idle; during
/// a leg the position is not tracked, only departure and arrival events.
#[derive(Clone, Debug)]
pub struct Vehicle {
    pub id: u32,
    pub mode: VehicleMode,
    pub location: NodeId,
    pub state: VehicleState,
    pub assignment: Option<u32>,
    /// Next state-transition time while busy; last transition time when idle.
    pub busy_until: u64,
}

impl Vehicle {
    pub fn new(id: u32, mode: VehicleMode, location: NodeId) -> Self {
        Vehicle {
            id,
            mode,
            location,
            state: VehicleState::Idle,
            assignment: None,
            busy_until: 0,
        }
    }

    pub fn is_idle(&self) -> bool {
        self.state == VehicleState::Idle
    }
}

/// One scheduled movement between two nodes.
#[derive(Clone, Debug)]
pub struct Leg {
    pub origin: NodeId,
    pub destination: NodeId,
    pub distance_m: f64,
    pub depart: u64,
    pub arrive: u64,
    /// Road path for robots; drones carry none.
    pub path: Option<Path>,
}

/// Distance from an idle vehicle to a target node under the vehicle's
/// routing metric: road shortest path for robots, straight line for drones.
pub fn vehicle_distance_to(net: &Network, v: &Vehicle, target: NodeId) -> Result<f64, NetError> {
    debug_assert!(v.is_idle());
    match v.mode {
        VehicleMode::Robot => Ok(net.shortest_path(v.location, target)?.total_length),
        VehicleMode::Drone => net.straight_distance(v.location, target),
    }
}

/// Build the leg a vehicle departs on at `now`. The caller owns the state
/// transition; the vehicle must be at `origin`.
pub fn dispatch_leg(
    v: &Vehicle,
    origin: NodeId,
    destination: NodeId,
    distance_m: f64,
    now: u64,
) -> Leg {
    debug_assert!(v.state != VehicleState::Idle || v.location == origin);
    Leg {
        origin,
        destination,
        distance_m,
        depart: now,
        arrive: now + travel_time(distance_m, v.mode.speed()),
        path: None,
    }
}
