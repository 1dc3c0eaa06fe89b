//! Network graph: loading, validation and structural metrics.
//!
//! A topology is an undirected graph of nodes joined by fiber links, each
//! with a physical length in km. Every undirected link carries two
//! independent directed spectrum states (see [`DirectedLink`]).

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense node index, `0..node_count`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Dense undirected link index, assigned in file order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub usize);

impl LinkId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One direction of an undirected link.
///
/// Index `2 * link` is the `u -> v` direction, `2 * link + 1` is `v -> u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DirectedLink(pub usize);

impl DirectedLink {
    pub fn new(link: LinkId, forward: bool) -> Self {
        DirectedLink(2 * link.0 + usize::from(!forward))
    }

    pub fn index(self) -> usize {
        self.0
    }

    pub fn link(self) -> LinkId {
        LinkId(self.0 / 2)
    }

    pub fn is_forward(self) -> bool {
        self.0 % 2 == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub id: LinkId,
    pub u: NodeId,
    pub v: NodeId,
    pub length_km: f64,
}

impl Link {
    /// The endpoint opposite `node`, if `node` is an endpoint.
    pub fn other(&self, node: NodeId) -> Option<NodeId> {
        if node == self.u {
            Some(self.v)
        } else if node == self.v {
            Some(self.u)
        } else {
            None
        }
    }

    /// The directed state used when traversing this link starting at `from`.
    pub fn directed_from(&self, from: NodeId) -> DirectedLink {
        DirectedLink::new(self.id, from == self.u)
    }
}

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("failed to read topology file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse topology document: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("topology has no nodes")]
    Empty,
    #[error("node list must contain every id 0..{count} exactly once")]
    NodeIds { count: usize },
    #[error("link {index} references unknown node {node}")]
    UnknownNode { index: usize, node: usize },
    #[error("link {index} is a self-loop on node {node}")]
    SelfLoop { index: usize, node: usize },
    #[error("link {index} duplicates the link between {u} and {v}")]
    DuplicateLink { index: usize, u: usize, v: usize },
    #[error("link {index} has non-positive length {length_km}")]
    NonPositiveLength { index: usize, length_km: f64 },
    #[error("topology is disconnected: node {node} is unreachable from node 0")]
    Disconnected { node: usize },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum NodesField {
    Count(usize),
    Ids(Vec<usize>),
}

#[derive(Debug, Deserialize)]
struct LinkRecord {
    u: usize,
    v: usize,
    length_km: f64,
}

#[derive(Debug, Deserialize)]
struct TopologyDocument {
    name: String,
    nodes: NodesField,
    links: Vec<LinkRecord>,
}

/// Immutable validated network graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    name: String,
    node_count: usize,
    links: Vec<Link>,
    adjacency: Vec<Vec<(NodeId, LinkId)>>,
}

impl Topology {
    /// Builds and validates a topology from `(u, v, length_km)` triples.
    ///
    /// Nodes with degree below two are accepted with a logged warning.
    pub fn new(
        name: impl Into<String>,
        node_count: usize,
        links: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, TopologyError> {
        if node_count == 0 {
            return Err(TopologyError::Empty);
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut adjacency = vec![Vec::new(); node_count];
        for (index, (u, v, length_km)) in links.into_iter().enumerate() {
            for node in [u, v] {
                if node >= node_count {
                    return Err(TopologyError::UnknownNode { index, node });
                }
            }
            if u == v {
                return Err(TopologyError::SelfLoop { index, node: u });
            }
            if !(length_km > 0.0) || !length_km.is_finite() {
                return Err(TopologyError::NonPositiveLength { index, length_km });
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(TopologyError::DuplicateLink { index, u, v });
            }
            let id = LinkId(index);
            adjacency[u].push((NodeId(v), id));
            adjacency[v].push((NodeId(u), id));
            out.push(Link {
                id,
                u: NodeId(u),
                v: NodeId(v),
                length_km,
            });
        }
        // Neighbor order is the tie-break order used by routing.
        for adj in &mut adjacency {
            adj.sort();
        }
        let topology = Topology {
            name: name.into(),
            node_count,
            links: out,
            adjacency,
        };
        if let Some(node) = topology.first_unreachable() {
            return Err(TopologyError::Disconnected { node: node.0 });
        }
        for node in topology.low_degree_nodes() {
            log::warn!(
                "topology {}: node {} has degree {} (< 2)",
                topology.name,
                node,
                topology.degree(node)
            );
        }
        Ok(topology)
    }

    /// Parses a topology document (TOML) with `name`, `nodes` and `links`.
    pub fn from_toml_str(source: &str) -> Result<Self, TopologyError> {
        let doc: TopologyDocument = toml::from_str(source)?;
        let node_count = match doc.nodes {
            NodesField::Count(n) => n,
            NodesField::Ids(ids) => {
                let count = ids.len();
                let unique: BTreeSet<usize> = ids.into_iter().collect();
                if unique.len() != count || unique.iter().next_back().is_some_and(|&m| m + 1 != count)
                {
                    return Err(TopologyError::NodeIds { count });
                }
                count
            }
        };
        Topology::new(
            doc.name,
            node_count,
            doc.links.into_iter().map(|l| (l.u, l.v, l.length_km)),
        )
    }

    pub fn from_file(path: impl AsRef<FsPath>) -> Result<Self, TopologyError> {
        let path = path.as_ref();
        let source = std::fs::read_to_string(path).map_err(|source| TopologyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Topology::from_toml_str(&source)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn directed_link_count(&self) -> usize {
        2 * self.links.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count).map(NodeId)
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.0]
    }

    /// Neighbors of `node` as `(neighbor, link)`, sorted by neighbor id.
    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, LinkId)] {
        &self.adjacency[node.0]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node.0].len()
    }

    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<LinkId> {
        self.adjacency[a.0]
            .iter()
            .find(|(n, _)| *n == b)
            .map(|&(_, l)| l)
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.links.iter().map(|l| l.length_km).collect()
    }

    pub fn max_link_length(&self) -> f64 {
        self.links.iter().map(|l| l.length_km).fold(0.0, f64::max)
    }

    pub fn low_degree_nodes(&self) -> Vec<NodeId> {
        self.nodes().filter(|&n| self.degree(n) < 2).collect()
    }

    fn first_unreachable(&self) -> Option<NodeId> {
        let mut seen = vec![false; self.node_count];
        let mut queue = VecDeque::from([NodeId(0)]);
        seen[0] = true;
        while let Some(n) = queue.pop_front() {
            for &(m, _) in self.neighbors(n) {
                if !seen[m.0] {
                    seen[m.0] = true;
                    queue.push_back(m);
                }
            }
        }
        seen.iter().position(|s| !s).map(NodeId)
    }

    /// Average nodal degree and average link length.
    pub fn summary(&self) -> TopologySummary {
        let total: f64 = self.links.iter().map(|l| l.length_km).sum();
        TopologySummary {
            nodes: self.node_count,
            links: self.links.len(),
            d_avg: 2.0 * self.links.len() as f64 / self.node_count as f64,
            l_avg_km: if self.links.is_empty() {
                0.0
            } else {
                total / self.links.len() as f64
            },
        }
    }

    /// Link-betweenness centrality of every link plus the summary attributes.
    pub fn metrics(&self) -> TopologyMetrics {
        compute_lbc(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TopologySummary {
    pub nodes: usize,
    pub links: usize,
    pub d_avg: f64,
    pub l_avg_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologyMetrics {
    pub d_avg: f64,
    pub l_avg_km: f64,
    /// Per-link betweenness, indexed by [`LinkId`].
    pub lbc: Vec<f64>,
    /// Population standard deviation of `lbc`.
    pub sigma_lbc: f64,
    /// Total number of shortest paths over all unordered node pairs.
    pub shortest_path_count: u64,
}

/// Relative tolerance for treating two path lengths as equal.
pub(crate) fn nearly_equal(a: f64, b: f64) -> bool {
    a == b || (a.is_finite() && b.is_finite() && (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0))
}

/// Single-source length-weighted distances and shortest-path counts.
fn distances_and_counts(t: &Topology, source: NodeId) -> (Vec<f64>, Vec<u64>) {
    let n = t.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut count = vec![0u64; n];
    let mut done = vec![false; n];
    dist[source.0] = 0.0;
    count[source.0] = 1;
    // Dense O(V^2) Dijkstra: settle in distance order so counts are final
    // before they propagate.
    for _ in 0..n {
        let Some(u) = (0..n)
            .filter(|&i| !done[i] && dist[i].is_finite())
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
        else {
            break;
        };
        done[u] = true;
        for &(v, l) in t.neighbors(NodeId(u)) {
            if done[v.0] {
                continue;
            }
            let cand = dist[u] + t.link(l).length_km;
            if nearly_equal(cand, dist[v.0]) {
                count[v.0] += count[u];
            } else if cand < dist[v.0] {
                dist[v.0] = cand;
                count[v.0] = count[u];
            }
        }
    }
    (dist, count)
}

/// Link-betweenness centrality with equal-length shortest paths counted
/// with multiplicity, over all unordered node pairs.
pub fn compute_lbc(t: &Topology) -> TopologyMetrics {
    let n = t.node_count();
    let all: Vec<(Vec<f64>, Vec<u64>)> = t.nodes().map(|s| distances_and_counts(t, s)).collect();
    let mut through = vec![0u64; t.link_count()];
    let mut sigma = 0u64;
    for s in 0..n {
        for d in (s + 1)..n {
            let (dist_s, cnt_s) = &all[s];
            let (dist_d, cnt_d) = &all[d];
            let target = dist_s[d];
            sigma += cnt_s[d];
            for link in t.links() {
                let (a, b) = (link.u.0, link.v.0);
                // A link is on a shortest s-d path in at most one orientation.
                if nearly_equal(dist_s[a] + link.length_km + dist_d[b], target) {
                    through[link.id.0] += cnt_s[a] * cnt_d[b];
                } else if nearly_equal(dist_s[b] + link.length_km + dist_d[a], target) {
                    through[link.id.0] += cnt_s[b] * cnt_d[a];
                }
            }
        }
    }
    let lbc: Vec<f64> = through
        .iter()
        .map(|&c| if sigma == 0 { 0.0 } else { c as f64 / sigma as f64 })
        .collect();
    let mean = lbc.iter().sum::<f64>() / lbc.len().max(1) as f64;
    let var = lbc.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / lbc.len().max(1) as f64;
    let summary = t.summary();
    TopologyMetrics {
        d_avg: summary.d_avg,
        l_avg_km: summary.l_avg_km,
        lbc,
        sigma_lbc: var.sqrt(),
        shortest_path_count: sigma,
    }
}
