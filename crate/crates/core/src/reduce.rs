//! Reduction of a lattice plus outcome configuration to the domain graph.
//!
//! Contraction merges every edge whose endpoints share an outcome (a
//! union-find labelling, equivalent to a generalized Hoshen-Kopelman sweep).
//! The surviving inter-domain edges form a multigraph; the mod-2 reduction
//! keeps exactly the domain pairs joined by an odd number of lattice edges.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::PovmConfig;
use crate::error::{Error, Result};
use crate::lattice::SiteGraph;
use crate::union_find::UnionFind;

/// Partition of sites into domains.
///
/// Domains are identified by their smallest member site. They also carry a
/// dense index `0..n_domains` in increasing id order, which is what the graph
/// types use for vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainPartition {
    domain_of: Vec<usize>,
    dense_of: Vec<usize>,
    ids: Vec<usize>,
    sizes: Vec<usize>,
    unions: usize,
}

impl DomainPartition {
    pub fn n_sites(&self) -> usize {
        self.domain_of.len()
    }

    pub fn n_domains(&self) -> usize {
        self.ids.len()
    }

    /// Canonical id (smallest member site) of the domain containing `site`.
    pub fn domain_of(&self, site: usize) -> usize {
        self.domain_of[site]
    }

    /// Dense index of the domain containing `site`.
    pub fn dense_of(&self, site: usize) -> usize {
        self.dense_of[site]
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    /// Site count per dense domain index.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Number of union operations that merged two distinct sets.
    pub fn successful_unions(&self) -> usize {
        self.unions
    }

    /// Member sites of every domain, by dense index.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_domains()];
        for (site, &d) in self.dense_of.iter().enumerate() {
            out[d].push(site);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiEdge {
    pub u: usize,
    pub v: usize,
    pub count: u32,
}

impl MultiEdge {
    pub fn is_odd(&self) -> bool {
        self.count & 1 == 1
    }
}

/// Inter-domain multigraph on dense domain indices, `u <= v` per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainMultiGraph {
    ids: Vec<usize>,
    edges: Vec<MultiEdge>,
}

impl DomainMultiGraph {
    pub fn new(ids: Vec<usize>, edges: Vec<MultiEdge>) -> Self {
        Self { ids, edges }
    }

    pub fn n_vertices(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    /// Distinct domain pairs.
    pub fn edges(&self) -> &[MultiEdge] {
        &self.edges
    }

    /// Inter-domain edge count with multiplicity.
    pub fn total_multiplicity(&self) -> usize {
        self.edges.iter().map(|e| e.count as usize).sum()
    }

    pub fn multiplicity(&self, u: usize, v: usize) -> u32 {
        let key = (u.min(v), u.max(v));
        self.edges
            .binary_search_by(|e| (e.u, e.v).cmp(&key))
            .map(|i| self.edges[i].count)
            .unwrap_or(0)
    }
}

/// Simple undirected graph on dense vertex indices.
///
/// `ids[i]` is the domain id of vertex `i`; after random deletions the ids of
/// surviving vertices are kept so boundary membership still resolves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimpleGraph {
    ids: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

impl SimpleGraph {
    /// Builds a graph, normalising each edge to `u < v` and sorting.
    ///
    /// Panics on self-loops, duplicate edges or out-of-range endpoints.
    pub fn new(ids: Vec<usize>, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let n = ids.len();
        let mut edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(u, v)| {
                assert!(u != v && u < n && v < n, "bad simple edge ({u}, {v})");
                (u.min(v), u.max(v))
            })
            .collect();
        edges.sort_unstable();
        let before = edges.len();
        edges.dedup();
        assert_eq!(before, edges.len(), "duplicate edge in simple graph");
        Self { ids, edges }
    }

    /// Graph on vertices `0..n` with ids equal to indices.
    pub fn with_vertices(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self::new((0..n).collect(), edges)
    }

    pub fn n_vertices(&self) -> usize {
        self.ids.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_vertices()];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// Component label per vertex (label = smallest vertex index in the
    /// component) and the number of components.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let n = self.n_vertices();
        let mut uf = UnionFind::new(n);
        for &(u, v) in &self.edges {
            uf.union(u, v);
        }
        let mut label = vec![usize::MAX; n];
        let mut root_label = vec![usize::MAX; n];
        let mut count = 0;
        for v in 0..n {
            let r = uf.find(v);
            if root_label[r] == usize::MAX {
                root_label[r] = v;
                count += 1;
            }
            label[v] = root_label[r];
        }
        (label, count)
    }

    pub fn n_components(&self) -> usize {
        self.components().1
    }

    pub fn as_multigraph(&self) -> DomainMultiGraph {
        DomainMultiGraph::new(
            self.ids.clone(),
            self.edges.iter().map(|&(u, v)| MultiEdge { u, v, count: 1 }).collect(),
        )
    }

    /// Adjacency list keyed by domain id.
    pub fn to_adjacency_json(&self) -> serde_json::Value {
        let adj = self.adjacency();
        let map: BTreeMap<String, Vec<usize>> = self
            .ids
            .iter()
            .zip(adj)
            .map(|(&id, nbrs)| {
                let mut ids: Vec<usize> = nbrs.into_iter().map(|n| self.ids[n]).collect();
                ids.sort_unstable();
                (id.to_string(), ids)
            })
            .collect();
        serde_json::json!({ "n_vertices": self.n_vertices(), "n_edges": self.n_edges(), "adjacency": map })
    }

    /// One `"u v"` line per edge, using domain ids.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for &(u, v) in &self.edges {
            out.push_str(&format!("{} {}\n", self.ids[u], self.ids[v]));
        }
        out
    }
}

/// Rule R1: contract monochromatic edges, collect the inter-domain multigraph.
pub fn contract_domains(graph: &impl SiteGraph, cfg: &PovmConfig) -> Result<(DomainPartition, DomainMultiGraph)> {
    let n = graph.n_sites();
    cfg.check_len(n)?;
    let mut uf = UnionFind::new(n);
    let mut unions = 0;
    for &(a, b) in graph.edges() {
        if cfg.get(a) == cfg.get(b) && uf.union(a, b) {
            unions += 1;
        }
    }

    // Sites are visited in increasing order, so the first site seen for a
    // root is the smallest member and dense indices follow id order.
    let mut dense_of_root = vec![usize::MAX; n];
    let mut dense_of = vec![0; n];
    let mut domain_of = vec![0; n];
    let mut ids = Vec::new();
    let mut sizes = Vec::new();
    for site in 0..n {
        let r = uf.find(site);
        if dense_of_root[r] == usize::MAX {
            dense_of_root[r] = ids.len();
            ids.push(site);
            sizes.push(0);
        }
        let d = dense_of_root[r];
        dense_of[site] = d;
        domain_of[site] = ids[d];
        sizes[d] += 1;
    }

    let mut pairs: Vec<(usize, usize)> = graph
        .edges()
        .iter()
        .filter(|&&(a, b)| cfg.get(a) != cfg.get(b))
        .map(|&(a, b)| {
            let (u, v) = (dense_of[a], dense_of[b]);
            (u.min(v), u.max(v))
        })
        .collect();
    pairs.sort_unstable();
    let mut edges: Vec<MultiEdge> = Vec::new();
    for (u, v) in pairs {
        match edges.last_mut() {
            Some(e) if e.u == u && e.v == v => e.count += 1,
            _ => edges.push(MultiEdge { u, v, count: 1 }),
        }
    }

    let part = DomainPartition {
        domain_of,
        dense_of,
        ids: ids.clone(),
        sizes,
        unions,
    };
    Ok((part, DomainMultiGraph::new(ids, edges)))
}

/// Rule R2: keep odd-multiplicity pairs as single edges, drop even ones.
pub fn mod2_reduce(mg: &DomainMultiGraph) -> Result<SimpleGraph> {
    if let Some(e) = mg.edges.iter().find(|e| e.u == e.v) {
        return Err(Error::SelfLoop(mg.ids[e.u]));
    }
    Ok(SimpleGraph::new(
        mg.ids.clone(),
        mg.edges.iter().filter(|e| e.is_odd()).map(|e| (e.u, e.v)),
    ))
}

/// Convenience: R1 followed by R2.
pub fn reduce(graph: &impl SiteGraph, cfg: &PovmConfig) -> Result<(DomainPartition, DomainMultiGraph, SimpleGraph)> {
    let (part, mg) = contract_domains(graph, cfg)?;
    let simple = mod2_reduce(&mg)?;
    Ok((part, mg, simple))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSizeStats {
    pub histogram: BTreeMap<usize, usize>,
    pub mean: f64,
    /// Population standard deviation of domain sizes.
    pub width: f64,
    pub max: usize,
}

pub fn domain_size_histogram(part: &DomainPartition) -> DomainSizeStats {
    let mut histogram = BTreeMap::new();
    for &s in part.sizes() {
        *histogram.entry(s).or_insert(0) += 1;
    }
    let k = part.n_domains() as f64;
    let mean = part.n_sites() as f64 / k;
    let var = part.sizes().iter().map(|&s| (s as f64 - mean).powi(2)).sum::<f64>() / k;
    DomainSizeStats {
        histogram,
        mean,
        width: var.sqrt(),
        max: part.sizes().iter().copied().max().unwrap_or(0),
    }
}

/// Plain cycle graph on `n` sites, handy for hand-checkable examples.
#[derive(Debug, Clone)]
pub struct CycleGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl CycleGraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            edges: (0..n).map(|i| (i, (i + 1) % n)).collect(),
        }
    }
}

impl SiteGraph for CycleGraph {
    fn n_sites(&self) -> usize {
        self.n
    }

    fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}
