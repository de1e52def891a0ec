//! Constrained shortest path instances and their exact classical oracles.
//!
//! An instance is a directed graph whose edge list is kept in canonical
//! `(u, v)` order; edge index `i` is the binary decision variable (and qubit)
//! `i` everywhere else in the crate. Only a single scalar resource is modelled.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::{RngExt, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Directed edge with a travel cost and a resource consumption.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub cost: f64,
    pub resource: f64,
}

/// On-disk layout of an instance. Validated into [`CsppInstance`] on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct InstanceFile {
    num_nodes: usize,
    edges: Vec<Edge>,
    source: usize,
    target: usize,
    resource_limit: f64,
    seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct CsppInstance {
    num_nodes: usize,
    edges: Vec<Edge>,
    source: usize,
    target: usize,
    resource_limit: f64,
    seed: u64,
}

impl TryFrom<InstanceFile> for CsppInstance {
    type Error = Error;

    fn try_from(f: InstanceFile) -> Result<Self> {
        CsppInstance::new(f.num_nodes, f.edges, f.source, f.target, f.resource_limit, f.seed)
    }
}

impl From<CsppInstance> for InstanceFile {
    fn from(i: CsppInstance) -> Self {
        InstanceFile {
            num_nodes: i.num_nodes,
            edges: i.edges,
            source: i.source,
            target: i.target,
            resource_limit: i.resource_limit,
            seed: i.seed,
        }
    }
}

impl CsppInstance {
    /// Validates and builds an instance. The edge list must already be in
    /// canonical order; use [`CsppInstance::from_unordered`] to sort first.
    pub fn new(
        num_nodes: usize,
        edges: Vec<Edge>,
        source: usize,
        target: usize,
        resource_limit: f64,
        seed: u64,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if num_nodes == 0 {
            return bad("num_nodes must be positive".into());
        }
        if source >= num_nodes || target >= num_nodes {
            return bad(format!(
                "source {source} / target {target} out of range for {num_nodes} nodes"
            ));
        }
        if source == target {
            return bad("source and target must differ".into());
        }
        if !(resource_limit.is_finite() && resource_limit >= 0.0) {
            return bad(format!(
                "resource limit {resource_limit} must be finite and non-negative"
            ));
        }
        for (i, e) in edges.iter().enumerate() {
            if e.u >= num_nodes || e.v >= num_nodes {
                return bad(format!("edge {i} ({}, {}) references a missing node", e.u, e.v));
            }
            if e.u == e.v {
                return bad(format!("edge {i} is a self-loop on node {}", e.u));
            }
            if !(e.cost.is_finite() && e.cost >= 0.0) {
                return bad(format!("edge {i} has invalid cost {}", e.cost));
            }
            if !(e.resource.is_finite() && e.resource >= 0.0) {
                return bad(format!("edge {i} has invalid resource {}", e.resource));
            }
        }
        for (i, w) in edges.windows(2).enumerate() {
            let (a, b) = ((w[0].u, w[0].v), (w[1].u, w[1].v));
            if a == b {
                return bad(format!("duplicate edge {a:?}"));
            }
            if a > b {
                return bad(format!("edges {i} and {} are not in canonical (u, v) order", i + 1));
            }
        }
        Ok(CsppInstance {
            num_nodes,
            edges,
            source,
            target,
            resource_limit,
            seed,
        })
    }

    /// Like [`CsppInstance::new`] but sorts the edge list into canonical order.
    pub fn from_unordered(
        num_nodes: usize,
        mut edges: Vec<Edge>,
        source: usize,
        target: usize,
        resource_limit: f64,
        seed: u64,
    ) -> Result<Self> {
        edges.sort_by_key(|e| (e.u, e.v));
        Self::new(num_nodes, edges, source, target, resource_limit, seed)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn resource_limit(&self) -> f64 {
        self.resource_limit
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn total_cost(&self) -> f64 {
        self.edges.iter().map(|e| e.cost).sum()
    }

    /// Indices of edges leaving `node`, ascending by head vertex.
    pub fn out_edges(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.u == node)
            .map(|(i, _)| i)
    }

    /// Indices of edges entering `node`.
    pub fn in_edges(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.v == node)
            .map(|(i, _)| i)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization is infallible")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = self.to_json();
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// A simple source-to-target path with its accumulated cost and resource.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSolution {
    pub vertices: Vec<usize>,
    pub edge_indices: Vec<usize>,
    pub path_cost: f64,
    pub path_resource: f64,
    pub feasible: bool,
}

impl PathSolution {
    /// Indicator vector over the instance's edges.
    pub fn bitstring(&self, num_edges: usize) -> Vec<bool> {
        let mut bits = vec![false; num_edges];
        for &i in &self.edge_indices {
            bits[i] = true;
        }
        bits
    }
}

/// Every simple path from source to target, in lexicographic vertex order.
pub fn enumerate_paths(instance: &CsppInstance) -> Vec<PathSolution> {
    let adjacency: Vec<Vec<usize>> = (0..instance.num_nodes)
        .map(|n| instance.out_edges(n).collect())
        .collect();

    let mut out = Vec::new();
    let mut on_path = vec![false; instance.num_nodes];
    let mut vertices = vec![instance.source];
    let mut edge_indices = Vec::new();
    on_path[instance.source] = true;

    fn dfs(
        inst: &CsppInstance,
        adjacency: &[Vec<usize>],
        on_path: &mut [bool],
        vertices: &mut Vec<usize>,
        edge_indices: &mut Vec<usize>,
        out: &mut Vec<PathSolution>,
    ) {
        let here = *vertices.last().expect("path is never empty");
        if here == inst.target {
            let path_cost = edge_indices.iter().map(|&i| inst.edges[i].cost).sum();
            let path_resource: f64 = edge_indices.iter().map(|&i| inst.edges[i].resource).sum();
            out.push(PathSolution {
                vertices: vertices.clone(),
                edge_indices: edge_indices.clone(),
                path_cost,
                path_resource,
                feasible: path_resource <= inst.resource_limit,
            });
            return;
        }
        for &ei in &adjacency[here] {
            let next = inst.edges[ei].v;
            if on_path[next] {
                continue;
            }
            on_path[next] = true;
            vertices.push(next);
            edge_indices.push(ei);
            dfs(inst, adjacency, on_path, vertices, edge_indices, out);
            edge_indices.pop();
            vertices.pop();
            on_path[next] = false;
        }
    }

    dfs(
        instance,
        &adjacency,
        &mut on_path,
        &mut vertices,
        &mut edge_indices,
        &mut out,
    );
    out
}

/// Minimum-cost resource-feasible path. Ties go to the smaller resource, then
/// to the lexicographically smaller vertex sequence.
pub fn solve_exact(instance: &CsppInstance) -> Option<PathSolution> {
    enumerate_paths(instance)
        .into_iter()
        .filter(|p| p.feasible)
        .min_by(|a, b| {
            a.path_cost
                .total_cmp(&b.path_cost)
                .then(a.path_resource.total_cmp(&b.path_resource))
                .then_with(|| a.vertices.cmp(&b.vertices))
        })
}

/// Constraint families of the binary program over edge variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Violation {
    /// Not exactly one selected edge leaves the source.
    SourceOut,
    /// Some selected edge enters the source.
    SourceIn,
    /// Not exactly one selected edge enters the target.
    TargetIn,
    /// Some selected edge leaves the target.
    TargetOut,
    /// In-degree differs from out-degree at some interior vertex.
    FlowConservation,
    /// Selected resource exceeds the limit.
    ResourceBudget,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodedCandidate {
    pub bitstring: Vec<bool>,
    /// All flow constraints (source, target, conservation) hold.
    pub is_valid_path: bool,
    pub violations: Vec<Violation>,
    pub cost_if_valid: Option<f64>,
}

/// Evaluates every constraint family on an edge-selection bitstring.
pub fn decode_bitstring(instance: &CsppInstance, bits: &[bool]) -> Result<DecodedCandidate> {
    if bits.len() != instance.num_edges() {
        return Err(Error::LengthMismatch {
            expected: instance.num_edges(),
            actual: bits.len(),
        });
    }
    let mut out_deg = vec![0usize; instance.num_nodes];
    let mut in_deg = vec![0usize; instance.num_nodes];
    let mut cost = 0.0;
    let mut resource = 0.0;
    for (e, _) in instance.edges.iter().zip(bits).filter(|(_, &b)| b) {
        out_deg[e.u] += 1;
        in_deg[e.v] += 1;
        cost += e.cost;
        resource += e.resource;
    }

    let (s, t) = (instance.source, instance.target);
    let mut violations = Vec::new();
    if out_deg[s] != 1 {
        violations.push(Violation::SourceOut);
    }
    if in_deg[s] != 0 {
        violations.push(Violation::SourceIn);
    }
    if in_deg[t] != 1 {
        violations.push(Violation::TargetIn);
    }
    if out_deg[t] != 0 {
        violations.push(Violation::TargetOut);
    }
    if (0..instance.num_nodes).any(|v| v != s && v != t && in_deg[v] != out_deg[v]) {
        violations.push(Violation::FlowConservation);
    }
    let is_valid_path = violations.is_empty();
    if resource > instance.resource_limit {
        violations.push(Violation::ResourceBudget);
    }

    Ok(DecodedCandidate {
        bitstring: bits.to_vec(),
        is_valid_path,
        violations,
        cost_if_valid: is_valid_path.then_some(cost),
    })
}

/// Bitstring for computational-basis index `k` (bit `i` of `k` is variable `i`).
pub fn bits_from_index(k: usize, n: usize) -> Vec<bool> {
    (0..n).map(|i| (k >> i) & 1 == 1).collect()
}

pub fn index_from_bits(bits: &[bool]) -> usize {
    bits.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .fold(0, |acc, (i, _)| acc | (1 << i))
}

/// Walks selected edges from the source. Returns the vertex sequence when the
/// selection is exactly one simple source-to-target path and nothing else.
pub fn trace_path(instance: &CsppInstance, bits: &[bool]) -> Option<Vec<usize>> {
    if bits.len() != instance.num_edges() {
        return None;
    }
    let mut used = 0;
    let mut vertices = vec![instance.source];
    let mut here = instance.source;
    while here != instance.target {
        let mut next = instance.out_edges(here).filter(|&i| bits[i]);
        let ei = next.next()?;
        if next.next().is_some() {
            return None;
        }
        here = instance.edges[ei].v;
        if vertices.contains(&here) {
            return None;
        }
        vertices.push(here);
        used += 1;
    }
    let selected = bits.iter().filter(|&&b| b).count();
    (selected == used).then_some(vertices)
}

/// Random-instance generator settings. Costs and resources are integers drawn
/// uniformly from the inclusive ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub cost_range: (u32, u32),
    pub resource_range: (u32, u32),
    /// Resource limit as a multiple of the minimum-resource path, rounded up.
    pub slack_factor: f64,
    pub max_retries: u32,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            cost_range: (1, 10),
            resource_range: (1, 10),
            slack_factor: 1.2,
            max_retries: 1000,
        }
    }
}

impl GenConfig {
    fn validate(&self) -> Result<()> {
        let (c0, c1) = self.cost_range;
        let (r0, r1) = self.resource_range;
        if c0 > c1 || r0 > r1 {
            return Err(Error::InvalidArgument(format!(
                "empty range: cost {:?}, resource {:?}",
                self.cost_range, self.resource_range
            )));
        }
        if !(self.slack_factor.is_finite() && self.slack_factor > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "slack factor {} must be positive",
                self.slack_factor
            )));
        }
        if self.max_retries == 0 {
            return Err(Error::InvalidArgument("max_retries must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of a generation run, with the attempt accounting.
#[derive(Debug, Clone)]
pub struct Generated {
    pub instance: CsppInstance,
    /// Candidate graphs drawn, including the accepted one.
    pub attempts: u32,
    /// Feasible candidates turned down by the acceptance predicate.
    pub rejected_by_predicate: u32,
}

/// Draws a random instance with exactly `num_edges` edges and at least one
/// resource-feasible path. Uses SplitMix64 seeded with `seed`, so the result
/// is a pure function of the arguments.
pub fn generate_instance(seed: u64, num_edges: usize, config: &GenConfig) -> Result<CsppInstance> {
    generate_instance_where(seed, num_edges, config, |_| true).map(|g| g.instance)
}

/// [`generate_instance`] with an extra acceptance predicate; rejected
/// candidates count against `max_retries`.
pub fn generate_instance_where(
    seed: u64,
    num_edges: usize,
    config: &GenConfig,
    mut accept: impl FnMut(&CsppInstance) -> bool,
) -> Result<Generated> {
    if num_edges < 3 {
        return Err(Error::InvalidArgument(format!(
            "num_edges must be at least 3, got {num_edges}"
        )));
    }
    config.validate()?;

    // Smallest node count whose complete digraph can hold num_edges edges.
    let dense_min = (2..).find(|n: &usize| n * (n - 1) >= num_edges).unwrap();
    let lo = dense_min.max(4);
    let hi = lo.max(num_edges);

    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut rejected = 0;
    for attempt in 1..=config.max_retries {
        let num_nodes = rng.random_range(lo..=hi);
        let mut pairs = Vec::with_capacity(num_edges);
        while pairs.len() < num_edges {
            let u = rng.random_range(0..num_nodes);
            let v = rng.random_range(0..num_nodes);
            if u != v && !pairs.contains(&(u, v)) {
                pairs.push((u, v));
            }
        }
        pairs.sort_unstable();
        let edges: Vec<Edge> = pairs
            .into_iter()
            .map(|(u, v)| {
                let cost = rng.random_range(config.cost_range.0..=config.cost_range.1);
                let resource = rng.random_range(config.resource_range.0..=config.resource_range.1);
                Edge {
                    u,
                    v,
                    cost: cost as f64,
                    resource: resource as f64,
                }
            })
            .collect();

        // Limit is provisional until the minimum-resource path is known.
        let mut candidate = CsppInstance::new(num_nodes, edges, 0, num_nodes - 1, f64::MAX, seed)?;
        let min_resource = enumerate_paths(&candidate)
            .iter()
            .map(|p| p.path_resource)
            .min_by(f64::total_cmp);
        let Some(min_resource) = min_resource else {
            continue;
        };
        // 1.2 * 5 is 6.000000000000001 in binary floating point.
        candidate.resource_limit = (config.slack_factor * min_resource - 1e-9).ceil();

        if accept(&candidate) {
            return Ok(Generated {
                instance: candidate,
                attempts: attempt,
                rejected_by_predicate: rejected,
            });
        }
        rejected += 1;
    }
    Err(Error::NoFeasibleInstance {
        seed,
        num_edges,
        attempts: config.max_retries,
    })
}
