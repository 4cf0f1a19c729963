//! Seeded order generation and the FIFO food request table.

use std::collections::{HashMap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{Network, NodeId, NodeKind};
use crate::rng::rng_from_seed;

/// One food request: a restaurant/home pair with a request timestamp in
/// whole seconds from study start.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Order {
    /// 1-based, assigned in request-time order.
    pub order_id: u32,
    pub request_time: u64,
    pub restaurant: NodeId,
    pub home: NodeId,
}

/// Demand document entry, for replaying a fixed order set.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OrderDoc {
    pub order_id: u32,
    pub request_time: u64,
    pub restaurant: NodeId,
    pub home: NodeId,
}

#[derive(Debug, Error)]
pub enum DemandError {
    #[error("network has no restaurant nodes")]
    NoRestaurants,
    #[error("network has no home nodes")]
    NoHomes,
    #[error("order {0}: node {1} is not a {2}")]
    WrongKind(u32, NodeId, &'static str),
    #[error("order ids must be consecutive from 1; found {found} at position {position}")]
    NonConsecutiveIds { found: u32, position: usize },
    #[error("orders must be sorted by request time; order {0} is out of order")]
    Unsorted(u32),
}

/// Generate `n_orders` orders: restaurant and home drawn uniformly from the
/// network's restaurant and home node sets, request time drawn uniformly
/// from integer seconds in `[0, window)`.
///
/// Draw order per order: restaurant index, home index, timestamp. The list
/// is then stable-sorted by request time (ties keep generation sequence)
/// and ids are assigned 1..=n, so output is a pure function of the node
/// sets, `n_orders`, `window` and `seed`.
pub fn generate_demand(
    net: &Network,
    n_orders: u32,
    window: u64,
    seed: u64,
) -> Result<Vec<Order>, DemandError> {
    if n_orders == 0 {
        return Ok(Vec::new());
    }
    let restaurants = net.restaurants();
    let homes = net.homes();
    if restaurants.is_empty() {
        return Err(DemandError::NoRestaurants);
    }
    if homes.is_empty() {
        return Err(DemandError::NoHomes);
    }
    let mut rng = rng_from_seed(seed);
    let mut orders: Vec<Order> = (0..n_orders)
        .map(|_| {
            let restaurant = restaurants[rng.gen_range(0..restaurants.len())];
            let home = homes[rng.gen_range(0..homes.len())];
            let request_time = rng.gen_range(0..window);
            Order {
                order_id: 0,
                request_time,
                restaurant,
                home,
            }
        })
        .collect();
    orders.sort_by_key(|o| o.request_time);
    for (i, o) in orders.iter_mut().enumerate() {
        o.order_id = i as u32 + 1;
    }
    Ok(orders)
}

/// Demand growth: `round_half_up(base * (1 + percent/100))`, in exact
/// integer arithmetic.
pub fn scale_demand(base: u32, growth_percent: u32) -> u32 {
    let scaled = u64::from(base) * (100 + u64::from(growth_percent));
    ((scaled + 50) / 100) as u32
}

/// Validate a replayed demand document against a network.
pub fn orders_from_doc(doc: &[OrderDoc], net: &Network) -> Result<Vec<Order>, DemandError> {
    let mut out = Vec::with_capacity(doc.len());
    let mut last_time = 0u64;
    for (i, d) in doc.iter().enumerate() {
        if d.order_id != i as u32 + 1 {
            return Err(DemandError::NonConsecutiveIds {
                found: d.order_id,
                position: i,
            });
        }
        if d.request_time < last_time {
            return Err(DemandError::Unsorted(d.order_id));
        }
        last_time = d.request_time;
        let restaurant = net
            .node(d.restaurant)
            .map_err(|_| DemandError::WrongKind(d.order_id, d.restaurant, "restaurant"))?;
        if restaurant.kind != NodeKind::Restaurant {
            return Err(DemandError::WrongKind(d.order_id, d.restaurant, "restaurant"));
        }
        let home = net
            .node(d.home)
            .map_err(|_| DemandError::WrongKind(d.order_id, d.home, "home"))?;
        if home.kind != NodeKind::Home {
            return Err(DemandError::WrongKind(d.order_id, d.home, "home"));
        }
        out.push(Order {
            order_id: d.order_id,
            request_time: d.request_time,
            restaurant: d.restaurant,
            home: d.home,
        });
    }
    Ok(out)
}

/// FIFO queue of unserved orders, ordered by (ready time, order id).
///
/// For the standalone systems the ready time is the request time; for the
/// hybrid drone table it is the timestamp of the robot's depot drop-off.
#[derive(Clone, Debug, Default)]
pub struct RequestTable {
    queue: VecDeque<(u64, u32)>,
    lookup: HashMap<u32, Order>,
}

impl RequestTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Enqueue an order with the given ready time, keeping (ready, id) order.
    pub fn push(&mut self, ready_time: u64, order: Order) {
        debug_assert!(!self.lookup.contains_key(&order.order_id));
        let entry = (ready_time, order.order_id);
        let at = self
            .queue
            .iter()
            .rposition(|&e| e <= entry)
            .map_or(0, |i| i + 1);
        self.queue.insert(at, entry);
        self.lookup.insert(order.order_id, order);
    }

    /// Front-most order whose gate has elapsed, without removing it.
    ///
    /// Entries are sorted by ready time and the gate is uniform per queue,
    /// so only the front entry can qualify first.
    pub fn peek_next_eligible(&self, now: u64, prep_gate: u64) -> Option<&Order> {
        let &(ready, id) = self.queue.front()?;
        (ready + prep_gate <= now).then(|| &self.lookup[&id])
    }

    /// Remove and return the front-most order whose ready time plus
    /// `prep_gate` is at or before `now`.
    pub fn pop_next_eligible(&mut self, now: u64, prep_gate: u64) -> Option<Order> {
        let &(ready, id) = self.queue.front()?;
        if ready + prep_gate > now {
            return None;
        }
        self.queue.pop_front();
        self.lookup.remove(&id)
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{NetworkDoc, Node, UndirectedLink};

    fn test_net(restaurants: u32, homes: u32) -> Network {
        let mut nodes = Vec::new();
        let mut links = Vec::new();
        for i in 0..restaurants + homes {
            let kind = if i < restaurants {
                NodeKind::Restaurant
            } else {
                NodeKind::Home
            };
            nodes.push(Node {
                id: NodeId(i + 1),
                x: f64::from(i) * 100.0,
                y: 0.0,
                kind,
            });
            if i > 0 {
                links.push(UndirectedLink {
                    from: NodeId(i),
                    to: NodeId(i + 1),
                });
            }
        }
        Network::from_doc(&NetworkDoc { nodes, links }).unwrap()
    }

    fn order(id: u32, t: u64) -> Order {
        Order {
            order_id: id,
            request_time: t,
            restaurant: NodeId(1),
            home: NodeId(2),
        }
    }

    #[test]
    fn zero_orders_gives_empty_list() {
        let net = test_net(1, 1);
        assert!(generate_demand(&net, 0, 3600, 1).unwrap().is_empty());
    }

    #[test]
    fn generated_orders_have_expected_shape() {
        let net = test_net(3, 7);
        let orders = generate_demand(&net, 340, 3600, 99).unwrap();
        assert_eq!(orders.len(), 340);
        for (i, o) in orders.iter().enumerate() {
            assert_eq!(o.order_id, i as u32 + 1);
            assert!(o.request_time < 3600);
            assert_eq!(net.node(o.restaurant).unwrap().kind, NodeKind::Restaurant);
            assert_eq!(net.node(o.home).unwrap().kind, NodeKind::Home);
            if i > 0 {
                assert!(orders[i - 1].request_time <= o.request_time);
            }
        }
    }

    #[test]
    fn same_seed_reproduces_and_seeds_differ() {
        let net = test_net(3, 7);
        let a = generate_demand(&net, 50, 3600, 42).unwrap();
        let b = generate_demand(&net, 50, 3600, 42).unwrap();
        let c = generate_demand(&net, 50, 3600, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn empty_restaurant_set_errors() {
        let net = test_net(1, 1);
        // carve a homes-only view by using a network with no restaurants
        let nodes: Vec<Node> = net
            .nodes()
            .iter()
            .map(|n| Node {
                kind: NodeKind::Home,
                ..*n
            })
            .collect();
        let doc = NetworkDoc {
            nodes,
            links: vec![UndirectedLink {
                from: NodeId(1),
                to: NodeId(2),
            }],
        };
        let homes_only = Network::from_doc(&doc).unwrap();
        assert!(matches!(
            generate_demand(&homes_only, 1, 3600, 1),
            Err(DemandError::NoRestaurants)
        ));
    }

    #[test]
    fn scale_demand_examples() {
        assert_eq!(scale_demand(340, 0), 340);
        assert_eq!(scale_demand(340, 10), 374);
        assert_eq!(scale_demand(340, 20), 408);
    }

    #[test]
    fn prep_gate_boundary() {
        let mut table = RequestTable::new();
        table.push(2, order(1, 2));
        assert!(table.pop_next_eligible(721, 720).is_none());
        let popped = table.pop_next_eligible(722, 720).unwrap();
        assert_eq!(popped.order_id, 1);
        assert!(table.is_empty());
    }

    #[test]
    fn empty_table_pops_none() {
        let mut table = RequestTable::new();
        assert!(table.pop_next_eligible(10_000, 0).is_none());
    }

    #[test]
    fn queue_orders_by_ready_time_then_id() {
        let mut table = RequestTable::new();
        table.push(30, order(3, 30));
        table.push(10, order(1, 10));
        table.push(10, order(2, 10));
        assert_eq!(table.pop_next_eligible(100, 0).unwrap().order_id, 1);
        assert_eq!(table.pop_next_eligible(100, 0).unwrap().order_id, 2);
        assert_eq!(table.pop_next_eligible(100, 0).unwrap().order_id, 3);
    }

    #[test]
    fn restaurant_draws_are_uniform() {
        let net = test_net(5, 5);
        let orders = generate_demand(&net, 10_000, 3600, 7).unwrap();
        let mut counts = HashMap::new();
        for o in &orders {
            *counts.entry(o.restaurant).or_insert(0u32) += 1;
        }
        // binomial: mean n/R, sigma = sqrt(n p (1-p)); accept +-5 sigma
        let n = 10_000.0_f64;
        let p = 1.0 / 5.0;
        let sigma = (n * p * (1.0 - p)).sqrt();
        for id in net.restaurants() {
            let c = f64::from(*counts.get(id).unwrap_or(&0));
            assert!(
                (c - n * p).abs() <= 5.0 * sigma,
                "restaurant {id} drawn {c} times, expected {} +- {}",
                n * p,
                5.0 * sigma
            );
        }
    }

    #[test]
    fn doc_validation_catches_wrong_kind_and_order() {
        let net = test_net(2, 2);
        let good = vec![
            OrderDoc {
                order_id: 1,
                request_time: 5,
                restaurant: NodeId(1),
                home: NodeId(3),
            },
            OrderDoc {
                order_id: 2,
                request_time: 9,
                restaurant: NodeId(2),
                home: NodeId(4),
            },
        ];
        assert_eq!(orders_from_doc(&good, &net).unwrap().len(), 2);

        let mut wrong_kind = good.clone();
        wrong_kind[0].restaurant = NodeId(3);
        assert!(matches!(
            orders_from_doc(&wrong_kind, &net),
            Err(DemandError::WrongKind(1, NodeId(3), "restaurant"))
        ));

        let mut unsorted = good.clone();
        unsorted[1].request_time = 1;
        assert!(matches!(
            orders_from_doc(&unsorted, &net),
            Err(DemandError::Unsorted(2))
        ));

        let mut bad_ids = good;
        bad_ids[1].order_id = 7;
        assert!(matches!(
            orders_from_doc(&bad_ids, &net),
            Err(DemandError::NonConsecutiveIds { found: 7, .. })
        ));
    }
}
