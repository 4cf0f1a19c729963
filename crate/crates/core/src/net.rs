//! Road network model: located nodes, bidirectional road links, Dijkstra
//! routing for sidewalk robots and the straight-line metric flown by drones.
//!
//! Link lengths are always derived from endpoint coordinates (planar meters),
//! never stored in the input document. That keeps the straight-line metric a
//! lower bound of every road distance.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Integer node identifier, unique within a network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Role of a node in the delivery network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Restaurant,
    Home,
    Depot,
}

/// A located intersection. Coordinates are planar meters, already projected.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
    pub kind: NodeKind,
}

/// Euclidean distance between two nodes; this is the drone flight metric.
pub fn straight_line_distance(a: &Node, b: &Node) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// A directed road link with its derived length in meters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
    pub length: f64,
}

/// One undirected link of the network document; the loader expands it into
/// two directed [`Link`]s.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UndirectedLink {
    pub from: NodeId,
    pub to: NodeId,
}

/// On-disk network document: `{"nodes": [{id, x, y, kind}], "links": [{from, to}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetworkDoc {
    pub nodes: Vec<Node>,
    pub links: Vec<UndirectedLink>,
}

/// A routed path over the road graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub nodes: Vec<NodeId>,
    pub total_length: f64,
}

#[derive(Debug, Error)]
pub enum NetError {
    #[error("network has no nodes")]
    Empty,
    #[error("duplicate node id {0}")]
    DuplicateNodeId(NodeId),
    #[error("link {from}-{to} references missing node {missing}")]
    DanglingEndpoint {
        from: NodeId,
        to: NodeId,
        missing: NodeId,
    },
    #[error("self-loop link at node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate link between {0} and {1}")]
    DuplicateLink(NodeId, NodeId),
    #[error("zero-length link between distinct nodes {0} and {1}")]
    DegenerateLink(NodeId, NodeId),
    #[error("road graph is disconnected: node {0} is unreachable")]
    Disconnected(NodeId),
    #[error("network declares {0} depots; at most one is supported")]
    MultipleDepots(usize),
    #[error("scenario requires a depot but the network has none")]
    MissingDepot,
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("no path from {from} to {to}")]
    NoPath { from: NodeId, to: NodeId },
    #[error("failed to read network document: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed network document: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Validated road network. Immutable after load; shared freely across
/// parallel scenario runs.
#[derive(Clone, Debug)]
pub struct Network {
    nodes: Vec<Node>,
    links: Vec<Link>,
    /// dense node index -> outgoing (dense neighbor index, length)
    adjacency: Vec<Vec<(usize, f64)>>,
    index: HashMap<NodeId, usize>,
    restaurants: Vec<NodeId>,
    homes: Vec<NodeId>,
    depot: Option<NodeId>,
}

impl Network {
    /// Build and validate a network from a parsed document.
    ///
    /// Checks: unique node ids, link endpoints exist, no self-loops or
    /// duplicate undirected links, strictly positive link lengths, at most
    /// one depot, and a connected road graph.
    pub fn from_doc(doc: &NetworkDoc) -> Result<Self, NetError> {
        if doc.nodes.is_empty() {
            return Err(NetError::Empty);
        }
        let mut nodes = doc.nodes.clone();
        nodes.sort_by_key(|n| n.id);
        for pair in nodes.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(NetError::DuplicateNodeId(pair[0].id));
            }
        }
        let index: HashMap<NodeId, usize> =
            nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();

        let mut restaurants = Vec::new();
        let mut homes = Vec::new();
        let mut depots = Vec::new();
        for n in &nodes {
            match n.kind {
                NodeKind::Restaurant => restaurants.push(n.id),
                NodeKind::Home => homes.push(n.id),
                NodeKind::Depot => depots.push(n.id),
            }
        }
        if depots.len() > 1 {
            return Err(NetError::MultipleDepots(depots.len()));
        }

        let mut links = Vec::with_capacity(doc.links.len() * 2);
        let mut adjacency = vec![Vec::new(); nodes.len()];
        let mut seen = HashSet::new();
        for l in &doc.links {
            if l.from == l.to {
                return Err(NetError::SelfLoop(l.from));
            }
            let fi = *index.get(&l.from).ok_or(NetError::DanglingEndpoint {
                from: l.from,
                to: l.to,
                missing: l.from,
            })?;
            let ti = *index.get(&l.to).ok_or(NetError::DanglingEndpoint {
                from: l.from,
                to: l.to,
                missing: l.to,
            })?;
            let key = (l.from.min(l.to), l.from.max(l.to));
            if !seen.insert(key) {
                return Err(NetError::DuplicateLink(key.0, key.1));
            }
            let length = straight_line_distance(&nodes[fi], &nodes[ti]);
            if length == 0.0 {
                return Err(NetError::DegenerateLink(key.0, key.1));
            }
            links.push(Link {
                from: l.from,
                to: l.to,
                length,
            });
            links.push(Link {
                from: l.to,
                to: l.from,
                length,
            });
            adjacency[fi].push((ti, length));
            adjacency[ti].push((fi, length));
        }
        // Deterministic relaxation order regardless of document link order.
        for out in &mut adjacency {
            out.sort_by_key(|edge| edge.0);
        }

        let net = Network {
            nodes,
            links,
            adjacency,
            index,
            restaurants,
            homes,
            depot: depots.first().copied(),
        };
        net.check_connected()?;
        Ok(net)
    }

    pub fn from_json_str(text: &str) -> Result<Self, NetError> {
        let doc: NetworkDoc = serde_json::from_str(text)?;
        Self::from_doc(&doc)
    }

    fn check_connected(&self) -> Result<(), NetError> {
        let n = self.nodes.len();
        if n <= 1 {
            return Ok(());
        }
        let mut reached = vec![false; n];
        let mut stack = vec![0usize];
        reached[0] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adjacency[u] {
                if !reached[v] {
                    reached[v] = true;
                    stack.push(v);
                }
            }
        }
        match reached.iter().position(|r| !r) {
            None => Ok(()),
            Some(i) => Err(NetError::Disconnected(self.nodes[i].id)),
        }
    }

    /// Nodes sorted by id.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Directed links (two per undirected input link).
    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node(&self, id: NodeId) -> Result<&Node, NetError> {
        self.index
            .get(&id)
            .map(|&i| &self.nodes[i])
            .ok_or(NetError::UnknownNode(id))
    }

    /// Restaurant node ids, sorted.
    pub fn restaurants(&self) -> &[NodeId] {
        &self.restaurants
    }

    /// Home node ids, sorted.
    pub fn homes(&self) -> &[NodeId] {
        &self.homes
    }

    pub fn depot(&self) -> Option<NodeId> {
        self.depot
    }

    /// The depot, or an error for scenarios that require one.
    pub fn require_depot(&self) -> Result<NodeId, NetError> {
        self.depot.ok_or(NetError::MissingDepot)
    }

    /// Straight-line distance between two nodes by id.
    pub fn straight_distance(&self, from: NodeId, to: NodeId) -> Result<f64, NetError> {
        Ok(straight_line_distance(self.node(from)?, self.node(to)?))
    }

    /// Minimum-length road path from `from` to `to`.
    ///
    /// Deterministic under ties: when two relaxations reach a node at equal
    /// distance, the predecessor with the smaller node id wins, and the
    /// frontier pops equal-distance entries in ascending node id order.
    pub fn shortest_path(&self, from: NodeId, to: NodeId) -> Result<Path, NetError> {
        let source = *self.index.get(&from).ok_or(NetError::UnknownNode(from))?;
        let target = *self.index.get(&to).ok_or(NetError::UnknownNode(to))?;
        if source == target {
            return Ok(Path {
                nodes: vec![from],
                total_length: 0.0,
            });
        }
        let (dist, pred) = self.dijkstra(source);
        if dist[target].is_infinite() {
            return Err(NetError::NoPath { from, to });
        }
        let mut rev = vec![self.nodes[target].id];
        let mut cur = target;
        while cur != source {
            cur = pred[cur];
            rev.push(self.nodes[cur].id);
        }
        rev.reverse();
        Ok(Path {
            nodes: rev,
            total_length: dist[target],
        })
    }

    /// Road distances from `source` to every node, for the dispatcher's
    /// greedy scan over idle vehicles.
    pub fn distances_from(&self, source: NodeId) -> Result<Distances<'_>, NetError> {
        let s = *self.index.get(&source).ok_or(NetError::UnknownNode(source))?;
        let (dist, _) = self.dijkstra(s);
        Ok(Distances { net: self, dist })
    }

    fn dijkstra(&self, source: usize) -> (Vec<f64>, Vec<usize>) {
        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Frontier {
            cost: 0.0,
            node: source,
            node_id: self.nodes[source].id,
        });
        while let Some(Frontier { cost, node, .. }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            for &(next, length) in &self.adjacency[node] {
                let candidate = cost + length;
                if candidate < dist[next] {
                    dist[next] = candidate;
                    pred[next] = node;
                    heap.push(Frontier {
                        cost: candidate,
                        node: next,
                        node_id: self.nodes[next].id,
                    });
                } else if candidate == dist[next]
                    && pred[next] != usize::MAX
                    && self.nodes[node].id < self.nodes[pred[next]].id
                {
                    pred[next] = node;
                }
            }
        }
        (dist, pred)
    }
}

/// Result of a single-source Dijkstra run.
pub struct Distances<'a> {
    net: &'a Network,
    dist: Vec<f64>,
}

impl Distances<'_> {
    /// Distance to `id` in meters; `None` when unreachable or unknown.
    pub fn to(&self, id: NodeId) -> Option<f64> {
        let i = *self.net.index.get(&id)?;
        let d = self.dist[i];
        d.is_finite().then_some(d)
    }
}

/// Min-heap entry ordered by (cost, node id).
struct Frontier {
    cost: f64,
    node: usize,
    node_id: NodeId,
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.cost == other.cost && self.node_id == other.node_id
    }
}
impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for BinaryHeap: smallest cost first, then smallest id
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node_id.cmp(&self.node_id))
    }
}
impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Read and validate a network document from a JSON file.
pub fn load_network(path: &FsPath) -> Result<Network, NetError> {
    let text = std::fs::read_to_string(path)?;
    Network::from_json_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: u32, x: f64, y: f64, kind: NodeKind) -> Node {
        Node {
            id: NodeId(id),
            x,
            y,
            kind,
        }
    }

    fn link(from: u32, to: u32) -> UndirectedLink {
        UndirectedLink {
            from: NodeId(from),
            to: NodeId(to),
        }
    }

    /// Line graph 1 -- 2 -- 3 with segment lengths 45 m and 90 m.
    fn line_doc() -> NetworkDoc {
        NetworkDoc {
            nodes: vec![
                node(1, 0.0, 0.0, NodeKind::Restaurant),
                node(2, 45.0, 0.0, NodeKind::Home),
                node(3, 135.0, 0.0, NodeKind::Home),
            ],
            links: vec![link(1, 2), link(2, 3)],
        }
    }

    #[test]
    fn minimal_network_expands_links_both_ways() {
        let doc = NetworkDoc {
            nodes: vec![
                node(1, 0.0, 0.0, NodeKind::Restaurant),
                node(2, 3.0, 4.0, NodeKind::Home),
            ],
            links: vec![link(1, 2)],
        };
        let net = Network::from_doc(&doc).unwrap();
        assert_eq!(net.links().len(), 2);
        assert_eq!(net.links()[0].length, 5.0);
        assert_eq!(net.restaurants(), &[NodeId(1)]);
        assert_eq!(net.homes(), &[NodeId(2)]);
        assert_eq!(net.depot(), None);
    }

    #[test]
    fn dangling_endpoint_is_rejected() {
        let mut doc = line_doc();
        doc.links.push(link(2, 999));
        match Network::from_doc(&doc) {
            Err(NetError::DanglingEndpoint { missing, .. }) => assert_eq!(missing, NodeId(999)),
            other => panic!("expected dangling endpoint error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_node_id_is_rejected() {
        let mut doc = line_doc();
        doc.nodes.push(node(2, 7.0, 7.0, NodeKind::Home));
        assert!(matches!(
            Network::from_doc(&doc),
            Err(NetError::DuplicateNodeId(NodeId(2)))
        ));
    }

    #[test]
    fn disconnected_graph_is_rejected() {
        let mut doc = line_doc();
        doc.nodes.push(node(9, 500.0, 500.0, NodeKind::Home));
        match Network::from_doc(&doc) {
            Err(NetError::Disconnected(id)) => assert_eq!(id, NodeId(9)),
            other => panic!("expected disconnected error, got {other:?}"),
        }
    }

    #[test]
    fn zero_length_link_is_rejected() {
        let doc = NetworkDoc {
            nodes: vec![
                node(1, 0.0, 0.0, NodeKind::Restaurant),
                node(2, 0.0, 0.0, NodeKind::Home),
            ],
            links: vec![link(1, 2)],
        };
        assert!(matches!(
            Network::from_doc(&doc),
            Err(NetError::DegenerateLink(..))
        ));
    }

    #[test]
    fn multiple_depots_rejected() {
        let doc = NetworkDoc {
            nodes: vec![
                node(1, 0.0, 0.0, NodeKind::Depot),
                node(2, 10.0, 0.0, NodeKind::Depot),
            ],
            links: vec![link(1, 2)],
        };
        assert!(matches!(
            Network::from_doc(&doc),
            Err(NetError::MultipleDepots(2))
        ));
    }

    #[test]
    fn shortest_path_identity() {
        let net = Network::from_doc(&line_doc()).unwrap();
        let p = net.shortest_path(NodeId(2), NodeId(2)).unwrap();
        assert_eq!(p.nodes, vec![NodeId(2)]);
        assert_eq!(p.total_length, 0.0);
    }

    #[test]
    fn shortest_path_on_line_graph() {
        let net = Network::from_doc(&line_doc()).unwrap();
        let p = net.shortest_path(NodeId(1), NodeId(3)).unwrap();
        assert_eq!(p.nodes, vec![NodeId(1), NodeId(2), NodeId(3)]);
        assert_eq!(p.total_length, 135.0);
    }

    #[test]
    fn straight_line_examples() {
        let a = node(1, 0.0, 0.0, NodeKind::Restaurant);
        let b = node(2, 3.0, 4.0, NodeKind::Home);
        assert_eq!(straight_line_distance(&a, &a), 0.0);
        assert_eq!(straight_line_distance(&a, &b), 5.0);
    }

    #[test]
    fn unknown_node_errors() {
        let net = Network::from_doc(&line_doc()).unwrap();
        assert!(matches!(
            net.shortest_path(NodeId(1), NodeId(42)),
            Err(NetError::UnknownNode(NodeId(42)))
        ));
    }

    #[test]
    fn doc_roundtrip_via_json() {
        let doc = line_doc();
        let text = serde_json::to_string(&doc).unwrap();
        let net = Network::from_json_str(&text).unwrap();
        assert_eq!(net.nodes().len(), 3);
        assert_eq!(net.links().len(), 4);
    }
}
