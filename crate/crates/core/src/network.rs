//! Typed undirected networks with per-node direct-compromise probabilities
//! and per-direction indirect-compromise probabilities.
//!
//! Node ids are dense (`0..N`). Every edge carries two probabilities, one
//! for each direction of attack; pairs that are not edges implicitly have
//! `q = 0`, and `q_ii` is always `0`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_prob, Error, Result};

pub type NodeId = usize;
pub type NodeTypeId = usize;

/// One entry of the `nodes` array in the network JSON file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: NodeId,
    #[serde(rename = "type")]
    pub node_type: NodeTypeId,
    pub p: f64,
}

/// One entry of the `edges` array. `q_uv` is the probability that a
/// compromised `u` compromises `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub u: NodeId,
    pub v: NodeId,
    #[serde(default)]
    pub q_uv: f64,
    #[serde(default)]
    pub q_vu: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NetworkFile {
    nodes: Vec<NodeSpec>,
    edges: Vec<EdgeSpec>,
}

/// Incremental construction of a [`NetworkModel`]. Validation happens in
/// [`NetworkBuilder::build`].
#[derive(Debug, Clone, Default)]
pub struct NetworkBuilder {
    nodes: Vec<NodeSpec>,
    edges: Vec<(NodeId, NodeId)>,
    q: Vec<(NodeId, NodeId, f64)>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(mut self, id: NodeId, node_type: NodeTypeId, p: f64) -> Self {
        self.nodes.push(NodeSpec { id, node_type, p });
        self
    }

    pub fn edge(mut self, u: NodeId, v: NodeId) -> Self {
        self.edges.push((u, v));
        self
    }

    /// Sets the probability that `from` compromises `to`. The pair must be an edge.
    pub fn q(mut self, from: NodeId, to: NodeId, q: f64) -> Self {
        self.q.push((from, to, q));
        self
    }

    pub fn build(self) -> Result<NetworkModel> {
        let mut edge_map: BTreeMap<(NodeId, NodeId), (f64, f64)> = BTreeMap::new();
        for &(u, v) in &self.edges {
            if u == v {
                return Err(Error::InvalidNetwork(format!("self-loop on node {u}")));
            }
            let key = (u.min(v), u.max(v));
            if edge_map.insert(key, (0.0, 0.0)).is_some() {
                return Err(Error::InvalidNetwork(format!(
                    "duplicate edge {{{u}, {v}}}"
                )));
            }
        }
        for &(from, to, q) in &self.q {
            let key = (from.min(to), from.max(to));
            let entry = edge_map.get_mut(&key).ok_or_else(|| {
                Error::InvalidNetwork(format!("q given for ({from}, {to}) which is not an edge"))
            })?;
            if from < to {
                entry.0 = q;
            } else {
                entry.1 = q;
            }
        }
        let edges = edge_map
            .into_iter()
            .map(|((u, v), (q_uv, q_vu))| EdgeSpec { u, v, q_uv, q_vu })
            .collect();
        build_network(self.nodes, edges)
    }
}

/// Validated, immutable network model.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    nodes: Vec<NodeSpec>,
    /// Sorted by `(u, v)` with `u < v`.
    edges: Vec<EdgeSpec>,
    type_sizes: Vec<usize>,
    /// Per node: `(neighbor, q node→neighbor, q neighbor→node)`, sorted by neighbor.
    adjacency: Vec<Vec<(NodeId, f64, f64)>>,
}

/// Builds and validates a network from node and edge specifications.
pub fn build_network(mut nodes: Vec<NodeSpec>, edges: Vec<EdgeSpec>) -> Result<NetworkModel> {
    if nodes.is_empty() {
        return Err(Error::InvalidNetwork("network has no nodes".into()));
    }
    nodes.sort_by_key(|n| n.id);
    let n = nodes.len();
    for (expected, node) in nodes.iter().enumerate() {
        if node.id != expected {
            return Err(if node.id < expected {
                Error::InvalidNetwork(format!("duplicate node id {}", node.id))
            } else {
                Error::InvalidNetwork(format!("node ids must be 0..{n}; {expected} is missing"))
            });
        }
        check_prob(|| format!("p[{}]", node.id), node.p)?;
    }
    let type_count = nodes.iter().map(|n| n.node_type).max().unwrap() + 1;
    let mut type_sizes = vec![0usize; type_count];
    for node in &nodes {
        type_sizes[node.node_type] += 1;
    }
    if let Some(t) = type_sizes.iter().position(|&s| s == 0) {
        return Err(Error::InvalidNetwork(format!("node type {t} has no nodes")));
    }

    let mut seen = BTreeSet::new();
    let mut normalized = Vec::with_capacity(edges.len());
    for e in edges {
        if e.u >= n {
            return Err(Error::UnknownNode(e.u));
        }
        if e.v >= n {
            return Err(Error::UnknownNode(e.v));
        }
        if e.u == e.v {
            return Err(Error::InvalidNetwork(format!("self-loop on node {}", e.u)));
        }
        check_prob(|| format!("q[{}→{}]", e.u, e.v), e.q_uv)?;
        check_prob(|| format!("q[{}→{}]", e.v, e.u), e.q_vu)?;
        let e = if e.u < e.v {
            e
        } else {
            EdgeSpec {
                u: e.v,
                v: e.u,
                q_uv: e.q_vu,
                q_vu: e.q_uv,
            }
        };
        if !seen.insert((e.u, e.v)) {
            return Err(Error::InvalidNetwork(format!(
                "duplicate edge {{{}, {}}}",
                e.u, e.v
            )));
        }
        normalized.push(e);
    }
    normalized.sort_by_key(|e| (e.u, e.v));
    Ok(NetworkModel::assemble(nodes, normalized, type_sizes))
}

impl NetworkModel {
    fn assemble(nodes: Vec<NodeSpec>, edges: Vec<EdgeSpec>, type_sizes: Vec<usize>) -> Self {
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for e in &edges {
            adjacency[e.u].push((e.v, e.q_uv, e.q_vu));
            adjacency[e.v].push((e.u, e.q_vu, e.q_uv));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(w, _, _)| w);
        }
        NetworkModel {
            nodes,
            edges,
            type_sizes,
            adjacency,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn type_count(&self) -> usize {
        self.type_sizes.len()
    }

    /// `N_i` for every type `i`.
    pub fn type_sizes(&self) -> &[usize] {
        &self.type_sizes
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn edges(&self) -> &[EdgeSpec] {
        &self.edges
    }

    pub fn node_type(&self, id: NodeId) -> NodeTypeId {
        self.nodes[id].node_type
    }

    pub fn p(&self, id: NodeId) -> f64 {
        self.nodes[id].p
    }

    /// Probability that a compromised `from` compromises `to`; zero off-edge.
    pub fn q(&self, from: NodeId, to: NodeId) -> f64 {
        self.adjacency[from]
            .binary_search_by_key(&to, |&(w, _, _)| w)
            .map(|i| self.adjacency[from][i].1)
            .unwrap_or(0.0)
    }

    /// Neighbors of `id` in ascending order with `(neighbor, q id→neighbor, q neighbor→id)`.
    pub fn neighbors(&self, id: NodeId) -> &[(NodeId, f64, f64)] {
        &self.adjacency[id]
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.adjacency[id].len()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(w, _, _) in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }

    /// The subnetwork induced by `subset`, with nodes relabelled `0..|U|` in
    /// ascending order of their original ids. The type count is preserved,
    /// so a type can be empty in the result.
    pub fn induced_subnetwork(&self, subset: &[NodeId]) -> Result<NetworkModel> {
        let keep: BTreeSet<NodeId> = subset.iter().copied().collect();
        if let Some(&bad) = keep.iter().find(|&&id| id >= self.node_count()) {
            return Err(Error::UnknownNode(bad));
        }
        let mut relabel = vec![usize::MAX; self.node_count()];
        let mut nodes = Vec::with_capacity(keep.len());
        let mut type_sizes = vec![0; self.type_count()];
        for (new_id, &old) in keep.iter().enumerate() {
            relabel[old] = new_id;
            let node = self.nodes[old];
            type_sizes[node.node_type] += 1;
            nodes.push(NodeSpec { id: new_id, ..node });
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| keep.contains(&e.u) && keep.contains(&e.v))
            .map(|e| EdgeSpec {
                u: relabel[e.u],
                v: relabel[e.v],
                ..*e
            })
            .collect();
        Ok(NetworkModel::assemble(nodes, edges, type_sizes))
    }

    /// Assigns the `top_k` highest-degree nodes to type 0 and all others to
    /// type 1. Ties go to the smaller id.
    pub fn assign_types_by_degree(&self, top_k: usize) -> Result<NetworkModel> {
        let n = self.node_count();
        if top_k == 0 || top_k >= n {
            return Err(Error::InvalidParameter(format!(
                "top_k must be in 1..{n}, got {top_k}"
            )));
        }
        let mut order: Vec<NodeId> = (0..n).collect();
        order.sort_by_key(|&id| (std::cmp::Reverse(self.degree(id)), id));
        let mut nodes = self.nodes.clone();
        for node in &mut nodes {
            node.node_type = 1;
        }
        for &id in &order[..top_k] {
            nodes[id].node_type = 0;
        }
        Ok(NetworkModel::assemble(
            nodes,
            self.edges.clone(),
            vec![top_k, n - top_k],
        ))
    }

    /// Sets `p_i = p_by_type[type(i)]` and `q_lj = q_from_type[type(l)]` on
    /// every edge: the indirect probability depends on the attacking node's type.
    pub fn with_type_parameters(
        &self,
        p_by_type: &[f64],
        q_from_type: &[f64],
    ) -> Result<NetworkModel> {
        let m = self.type_count();
        if p_by_type.len() != m || q_from_type.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "expected {m} per-type probabilities, got {} (p) and {} (q)",
                p_by_type.len(),
                q_from_type.len()
            )));
        }
        for (t, (&p, &q)) in p_by_type.iter().zip(q_from_type).enumerate() {
            check_prob(|| format!("p for type {t}"), p)?;
            check_prob(|| format!("q from type {t}"), q)?;
        }
        let nodes = self
            .nodes
            .iter()
            .map(|n| NodeSpec {
                p: p_by_type[n.node_type],
                ..*n
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|e| EdgeSpec {
                q_uv: q_from_type[self.node_type(e.u)],
                q_vu: q_from_type[self.node_type(e.v)],
                ..*e
            })
            .collect();
        Ok(NetworkModel::assemble(
            nodes,
            edges,
            self.type_sizes.clone(),
        ))
    }

    /// Multiplies every `p` by `p_factor` and every `q` by `q_factor`,
    /// clamping at 1.
    pub fn scaled(&self, p_factor: f64, q_factor: f64) -> Result<NetworkModel> {
        if !(p_factor >= 0.0 && q_factor >= 0.0) {
            return Err(Error::InvalidParameter(
                "scaling factors must be non-negative".into(),
            ));
        }
        let nodes = self
            .nodes
            .iter()
            .map(|n| NodeSpec {
                p: (n.p * p_factor).min(1.0),
                ..*n
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|e| EdgeSpec {
                q_uv: (e.q_uv * q_factor).min(1.0),
                q_vu: (e.q_vu * q_factor).min(1.0),
                ..*e
            })
            .collect();
        Ok(NetworkModel::assemble(
            nodes,
            edges,
            self.type_sizes.clone(),
        ))
    }

    pub fn to_json(&self) -> Result<String> {
        let file = NetworkFile {
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<NetworkModel> {
        let file: NetworkFile = serde_json::from_str(text)?;
        build_network(file.nodes, file.edges)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = self.to_json()?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<NetworkModel> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Complete graph with homogeneous `p` and `q`. Nodes are laid out type by
/// type: the first `sizes[0]` ids are type 0, and so on.
pub fn complete_network(sizes: &[usize], p: f64, q: f64) -> Result<NetworkModel> {
    let nodes = typed_nodes(sizes, |_| p);
    let n = nodes.len();
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            edges.push(EdgeSpec {
                u,
                v,
                q_uv: q,
                q_vu: q,
            });
        }
    }
    build_network(nodes, edges)
}

/// Star with hub `0` (type 0) and `n - 1` leaves (type 1).
/// `q_hub_leaf` is the hub→leaf probability, `q_leaf_hub` the reverse.
pub fn star_network(
    n: usize,
    p_hub: f64,
    p_leaf: f64,
    q_hub_leaf: f64,
    q_leaf_hub: f64,
) -> Result<NetworkModel> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "star needs at least 2 nodes, got {n}"
        )));
    }
    let nodes = typed_nodes(&[1, n - 1], |t| if t == 0 { p_hub } else { p_leaf });
    let edges = (1..n)
        .map(|v| EdgeSpec {
            u: 0,
            v,
            q_uv: q_hub_leaf,
            q_vu: q_leaf_hub,
        })
        .collect();
    build_network(nodes, edges)
}

/// Complete bipartite graph `K_{n1,n2}`: ids `0..n1` are type 0, the rest type 1.
pub fn bipartite_network(
    n1: usize,
    n2: usize,
    p1: f64,
    p2: f64,
    q12: f64,
    q21: f64,
) -> Result<NetworkModel> {
    let nodes = typed_nodes(&[n1, n2], |t| if t == 0 { p1 } else { p2 });
    let mut edges = Vec::with_capacity(n1 * n2);
    for u in 0..n1 {
        for v in n1..n1 + n2 {
            edges.push(EdgeSpec {
                u,
                v,
                q_uv: q12,
                q_vu: q21,
            });
        }
    }
    build_network(nodes, edges)
}

fn typed_nodes(sizes: &[usize], p_of_type: impl Fn(NodeTypeId) -> f64) -> Vec<NodeSpec> {
    sizes
        .iter()
        .enumerate()
        .flat_map(|(t, &size)| std::iter::repeat_n(t, size))
        .enumerate()
        .map(|(id, node_type)| NodeSpec {
            id,
            node_type,
            p: p_of_type(node_type),
        })
        .collect()
}

/// Parameters of the preferential-attachment generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaParams {
    pub nodes: usize,
    pub attach: usize,
    pub init: usize,
}

/// Barabási–Albert growth from a complete seed graph on `init` nodes. Each
/// new node attaches to `attach` distinct existing nodes drawn without
/// replacement with probability proportional to their current degree.
/// All nodes are type 0 with `p = q = 0`.
pub fn generate_ba(params: BaParams, seed: u64) -> Result<NetworkModel> {
    let BaParams {
        nodes: n,
        attach,
        init,
    } = params;
    if attach == 0 || init < attach || n < init {
        return Err(Error::InvalidParameter(format!(
            "need nodes >= init >= attach >= 1 (nodes={n}, init={init}, attach={attach})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degree = vec![0usize; n];
    let mut edges = Vec::new();
    for u in 0..init {
        for v in u + 1..init {
            edges.push(EdgeSpec {
                u,
                v,
                q_uv: 0.0,
                q_vu: 0.0,
            });
            degree[u] += 1;
            degree[v] += 1;
        }
    }
    let mut chosen = Vec::with_capacity(attach);
    for new in init..n {
        chosen.clear();
        for _ in 0..attach {
            // A single-node seed has zero degree everywhere; fall back to uniform.
            let weight = |v: usize| {
                if chosen.contains(&v) {
                    0.0
                } else {
                    degree[v].max(1) as f64
                }
            };
            let total: f64 = (0..new).map(weight).sum();
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for v in 0..new {
                let w = weight(v);
                if w == 0.0 {
                    continue;
                }
                pick = Some(v);
                if target < w {
                    break;
                }
                target -= w;
            }
            chosen.push(pick.expect("at least `attach` candidates exist"));
        }
        for &v in &chosen {
            edges.push(EdgeSpec {
                u: v,
                v: new,
                q_uv: 0.0,
                q_vu: 0.0,
            });
            degree[v] += 1;
            degree[new] += 1;
        }
    }
    let nodes = typed_nodes(&[n], |_| 0.0);
    build_network(nodes, edges)
}
