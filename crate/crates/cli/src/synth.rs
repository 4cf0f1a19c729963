//! Synthetic road network generator.
//!
//! Builds an irregular grid over a rectangle of the requested area: place a
//! grid large enough to cover the node target, jitter every coordinate,
//! then delete surplus nodes and non-bridge links (seeded) until the exact
//! node and link counts are met, keeping the graph connected throughout.
//! `center_compression` grades the grid pitch from dense downtown blocks at
//! the middle of the rectangle to long arterials at its edge; the nodes
//! still span the full rectangle. Restaurants are a seeded subset clustered
//! around the center of the area; the depot is the node whose coordinate
//! ranks are the most balanced, i.e. roughly as many nodes above it as
//! below it and to either side.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use lastmile_core::rng::rng_from_seed;
use lastmile_core::{NetworkDoc, Node, NodeId, NodeKind, UndirectedLink};

#[derive(Clone, Debug)]
pub struct SyntheticNetworkSpec {
    pub target_nodes: usize,
    /// Undirected street links; the loader doubles them.
    pub target_links: usize,
    pub area_km2: f64,
    /// Fraction of nodes marked as restaurants. This is a free parameter
    /// of the generator, not a surveyed value.
    pub restaurant_fraction: f64,
    /// Density gradient of the grid, in [0, 1): 0 keeps a uniform pitch,
    /// larger values pull nodes toward the center (downtown-core shape).
    /// A free parameter of the generator, like `restaurant_fraction`.
    pub center_compression: f64,
    /// Place the depot at the most rank-balanced central node.
    pub central_depot: bool,
    pub seed: u64,
}

impl Default for SyntheticNetworkSpec {
    fn default() -> Self {
        SyntheticNetworkSpec {
            target_nodes: 199,
            target_links: 286,
            area_km2: 5.80,
            restaurant_fraction: 0.08,
            center_compression: 0.8,
            central_depot: true,
            seed: 42,
        }
    }
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("need at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("{links} links cannot connect {nodes} nodes (need at least nodes - 1)")]
    TooFewLinks { nodes: usize, links: usize },
    #[error("a jittered grid over {nodes} nodes supports at most {max} links, {links} requested")]
    TooManyLinks {
        nodes: usize,
        links: usize,
        max: usize,
    },
    #[error("restaurant fraction must lie in (0, 1), got {0}")]
    BadRestaurantFraction(f64),
    #[error("center compression must lie in [0, 1), got {0}")]
    BadCompression(f64),
    #[error("area must be positive, got {0} km^2")]
    BadArea(f64),
}

/// Generate a network document hitting the requested node and link counts
/// exactly. Deterministic in the seed; draw order is: coordinate jitter
/// (node by node, x then y), node-deletion shuffles, link-deletion
/// shuffles, then the restaurant subset shuffle.
pub fn generate_synthetic_network(spec: &SyntheticNetworkSpec) -> Result<NetworkDoc, SynthError> {
    let n = spec.target_nodes;
    if n < 2 {
        return Err(SynthError::TooFewNodes(n));
    }
    if spec.target_links < n - 1 {
        return Err(SynthError::TooFewLinks {
            nodes: n,
            links: spec.target_links,
        });
    }
    if !spec.area_km2.is_finite() || spec.area_km2 <= 0.0 {
        return Err(SynthError::BadArea(spec.area_km2));
    }
    if !(spec.restaurant_fraction > 0.0 && spec.restaurant_fraction < 1.0) {
        return Err(SynthError::BadRestaurantFraction(spec.restaurant_fraction));
    }
    if !(0.0..1.0).contains(&spec.center_compression) {
        return Err(SynthError::BadCompression(spec.center_compression));
    }

    let cols = (n as f64).sqrt().ceil() as usize;
    let rows = n.div_ceil(cols);
    let grid_n = rows * cols;
    // grid links minus what node trimming can consume at worst
    let grid_links = rows * (cols - 1) + cols * (rows - 1);
    let spare = grid_n - n;
    if spec.target_links > grid_links.saturating_sub(spare) {
        return Err(SynthError::TooManyLinks {
            nodes: n,
            links: spec.target_links,
            max: grid_links.saturating_sub(spare),
        });
    }

    let mut rng = rng_from_seed(spec.seed);

    // rectangle with the grid's aspect ratio and the requested area
    let area_m2 = spec.area_km2 * 1.0e6;
    let width = (area_m2 * cols as f64 / rows as f64).sqrt();
    let height = area_m2 / width;

    // grid index -> position: jitter in index space (+-25% of a cell keeps
    // nodes distinct), then grade the pitch toward the center
    let gamma = spec.center_compression;
    let place = |index: usize, count: usize, jitter: f64, span: f64| -> f64 {
        let u = if count <= 1 {
            0.5
        } else {
            ((index as f64 + jitter) / (count - 1) as f64).clamp(0.0, 1.0)
        };
        let t = 2.0 * u - 1.0;
        let graded = (1.0 - gamma) * t.abs() + gamma * t.abs().powi(3);
        round_mm((0.5 + 0.5 * t.signum() * graded) * span)
    };

    let mut xs = vec![0.0f64; grid_n];
    let mut ys = vec![0.0f64; grid_n];
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            let jx = rng.gen_range(-0.25..0.25);
            let jy = rng.gen_range(-0.25..0.25);
            xs[i] = place(c, cols, jx, width);
            ys[i] = place(r, rows, jy, height);
        }
    }

    let mut alive: Vec<bool> = vec![true; grid_n];
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(grid_links);
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            if c + 1 < cols {
                edges.push((i, i + 1));
            }
            if r + 1 < rows {
                edges.push((i, i + cols));
            }
        }
    }

    // trim surplus nodes, preserving connectivity and the link budget
    let mut node_count = grid_n;
    while node_count > n {
        let mut candidates: Vec<usize> = (0..grid_n).filter(|&i| alive[i]).collect();
        candidates.shuffle(&mut rng);
        let victim = candidates
            .into_iter()
            .find(|&i| {
                let remaining = edges
                    .iter()
                    .filter(|&&(a, b)| a != i && b != i && alive[a] && alive[b])
                    .count();
                remaining >= spec.target_links
                    && connected_without(&alive, &edges, node_count - 1, Some(i))
            })
            .expect("a jittered grid always has a removable node");
        alive[victim] = false;
        edges.retain(|&(a, b)| a != victim && b != victim);
        node_count -= 1;
    }

    // trim surplus links: any non-bridge will do
    while edges.len() > spec.target_links {
        let mut order: Vec<usize> = (0..edges.len()).collect();
        order.shuffle(&mut rng);
        let victim = order
            .into_iter()
            .find(|&e| {
                let mut trimmed = edges.clone();
                trimmed.swap_remove(e);
                connected(&alive, &trimmed, node_count)
            })
            .expect("a graph with more links than nodes - 1 has a non-bridge link");
        edges.swap_remove(victim);
    }

    // renumber the survivors 1..=n in grid order
    let mut new_id = vec![0u32; grid_n];
    let mut next = 1u32;
    for i in 0..grid_n {
        if alive[i] {
            new_id[i] = next;
            next += 1;
        }
    }

    let survivors: Vec<usize> = (0..grid_n).filter(|&i| alive[i]).collect();

    // depot: minimize the worse of the x- and y-rank imbalances
    let depot_idx = if spec.central_depot {
        let imbalance = |i: usize| -> usize {
            let below_x = survivors.iter().filter(|&&j| xs[j] < xs[i]).count();
            let above_x = survivors.iter().filter(|&&j| xs[j] > xs[i]).count();
            let below_y = survivors.iter().filter(|&&j| ys[j] < ys[i]).count();
            let above_y = survivors.iter().filter(|&&j| ys[j] > ys[i]).count();
            below_x.abs_diff(above_x).max(below_y.abs_diff(above_y))
        };
        survivors
            .iter()
            .copied()
            .min_by_key(|&i| (imbalance(i), new_id[i]))
    } else {
        None
    };

    // restaurants: a seeded subset drawn from the nodes nearest the center
    let n_restaurants = ((n as f64 * spec.restaurant_fraction).round() as usize)
        .clamp(1, n - 1 - usize::from(depot_idx.is_some()));
    let center = (width / 2.0, height / 2.0);
    let mut by_center_distance: Vec<usize> = survivors
        .iter()
        .copied()
        .filter(|&i| Some(i) != depot_idx)
        .collect();
    by_center_distance.sort_by(|&a, &b| {
        let da = (xs[a] - center.0).hypot(ys[a] - center.1);
        let db = (xs[b] - center.0).hypot(ys[b] - center.1);
        da.total_cmp(&db).then(new_id[a].cmp(&new_id[b]))
    });
    let pool = (n_restaurants * 13 / 10).max(n_restaurants).min(by_center_distance.len());
    let mut cluster = by_center_distance[..pool].to_vec();
    cluster.shuffle(&mut rng);
    let restaurant_set: std::collections::HashSet<usize> =
        cluster.into_iter().take(n_restaurants).collect();

    let nodes: Vec<Node> = survivors
        .iter()
        .map(|&i| {
            let kind = if Some(i) == depot_idx {
                NodeKind::Depot
            } else if restaurant_set.contains(&i) {
                NodeKind::Restaurant
            } else {
                NodeKind::Home
            };
            Node {
                id: NodeId(new_id[i]),
                x: xs[i],
                y: ys[i],
                kind,
            }
        })
        .collect();

    let links: Vec<UndirectedLink> = edges
        .iter()
        .map(|&(a, b)| UndirectedLink {
            from: NodeId(new_id[a]),
            to: NodeId(new_id[b]),
        })
        .collect();

    Ok(NetworkDoc { nodes, links })
}

fn round_mm(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

fn connected(alive: &[bool], edges: &[(usize, usize)], node_count: usize) -> bool {
    connected_without(alive, edges, node_count, None)
}

/// BFS connectivity over the alive nodes, optionally pretending `skip` is
/// already deleted.
fn connected_without(
    alive: &[bool],
    edges: &[(usize, usize)],
    node_count: usize,
    skip: Option<usize>,
) -> bool {
    if node_count == 0 {
        return true;
    }
    let is_live = |i: usize| alive[i] && Some(i) != skip;
    let mut adjacency: std::collections::HashMap<usize, Vec<usize>> =
        std::collections::HashMap::new();
    for &(a, b) in edges {
        if is_live(a) && is_live(b) {
            adjacency.entry(a).or_default().push(b);
            adjacency.entry(b).or_default().push(a);
        }
    }
    let start = match (0..alive.len()).find(|&i| is_live(i)) {
        Some(s) => s,
        None => return true,
    };
    let mut seen = std::collections::HashSet::from([start]);
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &v in adjacency.get(&u).into_iter().flatten() {
            if seen.insert(v) {
                stack.push(v);
            }
        }
    }
    seen.len() == node_count
}

#[cfg(test)]
mod tests {
    use super::*;
    use lastmile_core::Network;

    #[test]
    fn defaults_hit_exact_counts_and_validate() {
        let doc = generate_synthetic_network(&SyntheticNetworkSpec::default()).unwrap();
        assert_eq!(doc.nodes.len(), 199);
        assert_eq!(doc.links.len(), 286);
        let net = Network::from_doc(&doc).unwrap();
        assert_eq!(net.links().len(), 572);
        assert!(net.depot().is_some());
        assert!(!net.restaurants().is_empty());
        assert!(!net.homes().is_empty());
    }

    #[test]
    fn minimal_spec_yields_spanning_tree() {
        let spec = SyntheticNetworkSpec {
            target_nodes: 4,
            target_links: 3,
            area_km2: 0.01,
            ..SyntheticNetworkSpec::default()
        };
        let doc = generate_synthetic_network(&spec).unwrap();
        assert_eq!(doc.nodes.len(), 4);
        assert_eq!(doc.links.len(), 3);
        Network::from_doc(&doc).unwrap();
    }

    #[test]
    fn same_seed_reproduces_byte_for_byte() {
        let spec = SyntheticNetworkSpec::default();
        let a = serde_json::to_string(&generate_synthetic_network(&spec).unwrap()).unwrap();
        let b = serde_json::to_string(&generate_synthetic_network(&spec).unwrap()).unwrap();
        assert_eq!(a, b);
        let other = SyntheticNetworkSpec {
            seed: 43,
            ..SyntheticNetworkSpec::default()
        };
        let c = serde_json::to_string(&generate_synthetic_network(&other).unwrap()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn infeasible_specs_are_rejected() {
        let too_few = SyntheticNetworkSpec {
            target_nodes: 10,
            target_links: 5,
            ..SyntheticNetworkSpec::default()
        };
        assert!(matches!(
            generate_synthetic_network(&too_few),
            Err(SynthError::TooFewLinks { .. })
        ));
        let too_many = SyntheticNetworkSpec {
            target_nodes: 10,
            target_links: 200,
            ..SyntheticNetworkSpec::default()
        };
        assert!(matches!(
            generate_synthetic_network(&too_many),
            Err(SynthError::TooManyLinks { .. })
        ));
    }

    #[test]
    fn restaurants_cluster_around_the_center() {
        let doc = generate_synthetic_network(&SyntheticNetworkSpec::default()).unwrap();
        let net = Network::from_doc(&doc).unwrap();
        let (mut cx, mut cy) = (0.0, 0.0);
        for node in net.nodes() {
            cx += node.x;
            cy += node.y;
        }
        let n = net.nodes().len() as f64;
        let (cx, cy) = (cx / n, cy / n);
        let mean_dist = |ids: &[lastmile_core::NodeId]| -> f64 {
            ids.iter()
                .map(|id| {
                    let node = net.node(*id).unwrap();
                    (node.x - cx).hypot(node.y - cy)
                })
                .sum::<f64>()
                / ids.len() as f64
        };
        let restaurants = mean_dist(net.restaurants());
        let homes = mean_dist(net.homes());
        assert!(
            restaurants < homes / 2.0,
            "restaurants ({restaurants:.0} m) should sit well inside homes ({homes:.0} m)"
        );
    }
}
