//! Shared fixtures: seeded random Euclidean road networks and an exhaustive
//! shortest-path oracle that is independent of the library's Dijkstra.
#![allow(dead_code)] // each test target uses its own slice of this module

use std::collections::HashMap;

use lastmile_core::rng::rng_from_seed;
use lastmile_core::{Network, NetworkDoc, Node, NodeId, NodeKind, UndirectedLink};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random connected network with up to `max_nodes` nodes on a 50 m grid.
/// Node 1 is a restaurant; when `with_depot` is set the last node is the
/// depot; everything else is a home.
pub fn random_net(seed: u64, max_nodes: usize, with_depot: bool) -> Network {
    let mut rng = rng_from_seed(seed);
    let n = rng.gen_range(2..=max_nodes);

    // distinct grid cells keep every link length strictly positive
    let mut cells: Vec<(u32, u32)> = (0..10u32)
        .flat_map(|x| (0..10u32).map(move |y| (x, y)))
        .collect();
    cells.shuffle(&mut rng);
    cells.truncate(n);

    let nodes: Vec<Node> = cells
        .iter()
        .enumerate()
        .map(|(i, &(cx, cy))| {
            let kind = if i == 0 {
                NodeKind::Restaurant
            } else if with_depot && i == n - 1 {
                NodeKind::Depot
            } else {
                NodeKind::Home
            };
            Node {
                id: NodeId(i as u32 + 1),
                x: f64::from(cx) * 50.0,
                y: f64::from(cy) * 50.0,
                kind,
            }
        })
        .collect();

    // spanning tree first, then a sprinkle of extra edges
    let mut links = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        links.push(UndirectedLink {
            from: NodeId(j as u32 + 1),
            to: NodeId(i as u32 + 1),
        });
        seen.insert((j.min(i), j.max(i)));
    }
    let extras = rng.gen_range(0..=n);
    for _ in 0..extras {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b && seen.insert((a.min(b), a.max(b))) {
            links.push(UndirectedLink {
                from: NodeId(a as u32 + 1),
                to: NodeId(b as u32 + 1),
            });
        }
    }

    Network::from_doc(&NetworkDoc { nodes, links }).expect("constructed network is valid")
}

/// Exhaustive minimum over all simple paths, summing link lengths
/// left-to-right exactly like a path traversal would.
pub fn brute_force_shortest(net: &Network, from: NodeId, to: NodeId) -> Option<f64> {
    let mut adjacency: HashMap<NodeId, Vec<(NodeId, f64)>> = HashMap::new();
    for l in net.links() {
        adjacency.entry(l.from).or_default().push((l.to, l.length));
    }
    let mut best: Option<f64> = None;
    let mut visited = vec![from];
    dfs(&adjacency, from, to, 0.0, &mut visited, &mut best);
    best
}

fn dfs(
    adjacency: &HashMap<NodeId, Vec<(NodeId, f64)>>,
    at: NodeId,
    to: NodeId,
    cost: f64,
    visited: &mut Vec<NodeId>,
    best: &mut Option<f64>,
) {
    if at == to {
        *best = Some(best.map_or(cost, |b: f64| b.min(cost)));
        return;
    }
    if let Some(out) = adjacency.get(&at) {
        for &(next, length) in out {
            if visited.contains(&next) {
                continue;
            }
            visited.push(next);
            dfs(adjacency, next, to, cost + length, visited, best);
            visited.pop();
        }
    }
}
