//! Directed weighted network graphs and the two experiment generators.
//!
//! A [`Topology`] is immutable once built: construction validates every edge
//! and precomputes sorted in/out adjacency so the routing layer can walk
//! neighbours in ascending node order.

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::Error;

/// Dense node index in `[0, node_count)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(index: usize) -> Self {
        NodeId(index)
    }
}

/// A directed link; `weight` is a traversal duration in milliseconds.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub weight: f64,
}

impl Edge {
    pub fn new(from: usize, to: usize, weight: f64) -> Self {
        Edge {
            from: NodeId(from),
            to: NodeId(to),
            weight,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    EmptyGraph,
    EndpointOutOfRange { edge: usize, node: NodeId },
    SelfLoop { edge: usize, node: NodeId },
    DuplicateEdge { edge: usize, from: NodeId, to: NodeId },
    NegativeWeight { edge: usize, weight: f64 },
    NonFiniteWeight { edge: usize },
    EligibilityLength { expected: usize, found: usize },
}

impl Violation {
    /// Short machine-friendly label for the violation kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::EmptyGraph => "empty graph",
            Violation::EndpointOutOfRange { .. } => "endpoint out of range",
            Violation::SelfLoop { .. } => "self-loop",
            Violation::DuplicateEdge { .. } => "duplicate edge",
            Violation::NegativeWeight { .. } => "negative weight",
            Violation::NonFiniteWeight { .. } => "non-finite weight",
            Violation::EligibilityLength { .. } => "eligibility length mismatch",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyGraph => write!(f, "empty graph: node count must be positive"),
            Violation::EndpointOutOfRange { edge, node } => {
                write!(f, "edge #{edge}: endpoint out of range ({node})")
            }
            Violation::SelfLoop { edge, node } => write!(f, "edge #{edge}: self-loop at {node}"),
            Violation::DuplicateEdge { edge, from, to } => {
                write!(f, "edge #{edge}: duplicate edge {from}->{to}")
            }
            Violation::NegativeWeight { edge, weight } => {
                write!(f, "edge #{edge}: negative weight {weight}")
            }
            Violation::NonFiniteWeight { edge } => write!(f, "edge #{edge}: non-finite weight"),
            Violation::EligibilityLength { expected, found } => write!(
                f,
                "eligibility length mismatch: expected {expected}, found {found}"
            ),
        }
    }
}

/// Every problem found in a candidate graph. Empty means valid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: &str) -> bool {
        self.violations.iter().any(|v| v.kind() == kind)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.violations {
            if !first {
                f.write_str("; ")?;
            }
            first = false;
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks a raw graph description. Never fails; problems are reported.
pub fn validate(node_count: usize, edges: &[Edge]) -> ValidationReport {
    let mut violations = Vec::new();
    if node_count == 0 {
        violations.push(Violation::EmptyGraph);
    }
    let mut seen = HashSet::with_capacity(edges.len());
    for (i, e) in edges.iter().enumerate() {
        for node in [e.from, e.to] {
            if node.0 >= node_count {
                violations.push(Violation::EndpointOutOfRange { edge: i, node });
            }
        }
        if e.from == e.to {
            violations.push(Violation::SelfLoop { edge: i, node: e.from });
        }
        if !e.weight.is_finite() {
            violations.push(Violation::NonFiniteWeight { edge: i });
        } else if e.weight < 0.0 {
            violations.push(Violation::NegativeWeight {
                edge: i,
                weight: e.weight,
            });
        }
        if !seen.insert((e.from, e.to)) {
            violations.push(Violation::DuplicateEdge {
                edge: i,
                from: e.from,
                to: e.to,
            });
        }
    }
    ValidationReport { violations }
}

/// Outgoing or incoming arc stored in an adjacency list.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Arc {
    pub node: NodeId,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    node_count: usize,
    edges: Vec<Edge>,
    eligible: Vec<bool>,
    out_arcs: Vec<Vec<Arc>>,
    in_arcs: Vec<Vec<Arc>>,
}

impl Topology {
    /// Builds a topology with every node eligible to host an appliance.
    pub fn new(node_count: usize, edges: Vec<Edge>) -> Result<Self, Error> {
        Self::with_eligibility(node_count, edges, vec![true; node_count])
    }

    pub fn with_eligibility(
        node_count: usize,
        edges: Vec<Edge>,
        eligible: Vec<bool>,
    ) -> Result<Self, Error> {
        let mut report = validate(node_count, &edges);
        if eligible.len() != node_count {
            report.violations.push(Violation::EligibilityLength {
                expected: node_count,
                found: eligible.len(),
            });
        }
        if !report.is_valid() {
            return Err(Error::InvalidTopology(report));
        }

        let mut out_arcs = vec![Vec::new(); node_count];
        let mut in_arcs = vec![Vec::new(); node_count];
        for e in &edges {
            out_arcs[e.from.0].push(Arc {
                node: e.to,
                weight: e.weight,
            });
            in_arcs[e.to.0].push(Arc {
                node: e.from,
                weight: e.weight,
            });
        }
        for list in out_arcs.iter_mut().chain(in_arcs.iter_mut()) {
            list.sort_by_key(|a| a.node);
        }

        Ok(Topology {
            node_count,
            edges,
            eligible,
            out_arcs,
            in_arcs,
        })
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Edges in construction order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn eligible(&self) -> &[bool] {
        &self.eligible
    }

    #[inline]
    pub fn is_eligible(&self, node: NodeId) -> bool {
        self.eligible[node.0]
    }

    pub fn eligible_count(&self) -> usize {
        self.eligible.iter().filter(|&&e| e).count()
    }

    /// Outgoing arcs sorted by head node.
    #[inline]
    pub fn out_arcs(&self, node: NodeId) -> &[Arc] {
        &self.out_arcs[node.0]
    }

    /// Incoming arcs sorted by tail node.
    #[inline]
    pub fn in_arcs(&self, node: NodeId) -> &[Arc] {
        &self.in_arcs[node.0]
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.0 < self.node_count
    }

    pub fn edge_weight(&self, from: NodeId, to: NodeId) -> Option<f64> {
        let arcs = self.out_arcs.get(from.0)?;
        arcs.binary_search_by_key(&to, |a| a.node)
            .ok()
            .map(|i| arcs[i].weight)
    }

    /// Re-runs validation on the stored graph. Always empty for a built value.
    pub fn report(&self) -> ValidationReport {
        validate(self.node_count, &self.edges)
    }
}

/// Source/destination demand lists. Flows are their cross product.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandSet {
    sources: Vec<NodeId>,
    destinations: Vec<NodeId>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Flow {
    pub source: NodeId,
    pub destination: NodeId,
}

impl DemandSet {
    pub fn new(sources: Vec<NodeId>, destinations: Vec<NodeId>) -> Result<Self, Error> {
        if sources.is_empty() || destinations.is_empty() {
            return Err(Error::InvalidDemands(
                "sources and destinations must be non-empty".into(),
            ));
        }
        for (label, list) in [("source", &sources), ("destination", &destinations)] {
            let mut seen = HashSet::new();
            for n in list.iter() {
                if !seen.insert(*n) {
                    return Err(Error::InvalidDemands(format!("duplicate {label} {n}")));
                }
            }
        }
        if let Some(n) = sources.iter().find(|s| destinations.contains(s)) {
            return Err(Error::InvalidDemands(format!(
                "node {n} is both a source and a destination"
            )));
        }
        Ok(DemandSet {
            sources,
            destinations,
        })
    }

    pub fn from_indices(sources: &[usize], destinations: &[usize]) -> Result<Self, Error> {
        Self::new(
            sources.iter().copied().map(NodeId).collect(),
            destinations.iter().copied().map(NodeId).collect(),
        )
    }

    pub fn sources(&self) -> &[NodeId] {
        &self.sources
    }

    pub fn destinations(&self) -> &[NodeId] {
        &self.destinations
    }

    pub fn flow_count(&self) -> usize {
        self.sources.len() * self.destinations.len()
    }

    /// Cross product ordered lexicographically by (source, destination).
    pub fn flows(&self) -> Vec<Flow> {
        let mut flows: Vec<Flow> = self
            .sources
            .iter()
            .flat_map(|&source| {
                self.destinations.iter().map(move |&destination| Flow {
                    source,
                    destination,
                })
            })
            .collect();
        flows.sort_unstable();
        flows
    }

    /// Fails if any endpoint is outside the topology.
    pub fn check_against(&self, topology: &Topology) -> Result<(), Error> {
        for n in self.sources.iter().chain(&self.destinations) {
            if !topology.contains(*n) {
                return Err(Error::InvalidDemands(format!(
                    "demand endpoint {n} out of range for {} nodes",
                    topology.node_count()
                )));
            }
        }
        Ok(())
    }
}

/// Inclusive integer weight range for random graphs.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightRange {
    pub min: f64,
    pub max: f64,
}

impl WeightRange {
    pub fn new(min: f64, max: f64) -> Self {
        WeightRange { min, max }
    }

    fn integer_bounds(&self) -> Result<(u64, u64), Error> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.min < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "weight range [{}, {}] must be finite and non-negative",
                self.min, self.max
            )));
        }
        let lo = self.min.ceil() as u64;
        let hi = self.max.floor() as u64;
        if lo > hi {
            return Err(Error::InvalidParameter(format!(
                "weight range [{}, {}] contains no integer",
                self.min, self.max
            )));
        }
        Ok((lo, hi))
    }
}

/// Directed Erdős–Rényi graph: each ordered pair `(u, v)`, `u != v`, gets an
/// edge with probability `edge_probability` and an integer weight drawn
/// uniformly from `weights`. Pure in its arguments.
pub fn generate_random(
    n: usize,
    edge_probability: f64,
    weights: WeightRange,
    seed: u64,
) -> Result<Topology, Error> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "random graph needs at least 2 nodes, got {n}"
        )));
    }
    if !(edge_probability > 0.0 && edge_probability <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "edge probability {edge_probability} outside (0, 1]"
        )));
    }
    let (lo, hi) = weights.integer_bounds()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            // Both draws happen for every pair so the weight stream does not
            // shift with the edge pattern.
            let present = rng.gen::<f64>() < edge_probability;
            let w = rng.gen_range(lo..=hi) as f64;
            if present {
                edges.push(Edge::new(u, v, w));
            }
        }
    }
    Topology::new(n, edges)
}

/// Index layout of a k-ary fat tree: hosts, then edge, aggregation and core
/// switch blocks.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct FatTreeLayout {
    pub k: usize,
}

impl FatTreeLayout {
    pub fn new(k: usize) -> Result<Self, Error> {
        if k < 2 || !k.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "fat-tree k must be even and at least 2, got {k}"
            )));
        }
        Ok(FatTreeLayout { k })
    }

    fn half(&self) -> usize {
        self.k / 2
    }

    pub fn host_count(&self) -> usize {
        self.k * self.half() * self.half()
    }

    pub fn edge_count(&self) -> usize {
        self.k * self.half()
    }

    pub fn agg_count(&self) -> usize {
        self.k * self.half()
    }

    pub fn core_count(&self) -> usize {
        self.half() * self.half()
    }

    pub fn node_count(&self) -> usize {
        self.host_count() + self.edge_count() + self.agg_count() + self.core_count()
    }

    pub fn host(&self, pod: usize, edge: usize, slot: usize) -> NodeId {
        NodeId((pod * self.half() + edge) * self.half() + slot)
    }

    pub fn edge_switch(&self, pod: usize, edge: usize) -> NodeId {
        NodeId(self.host_count() + pod * self.half() + edge)
    }

    pub fn agg_switch(&self, pod: usize, agg: usize) -> NodeId {
        NodeId(self.host_count() + self.edge_count() + pod * self.half() + agg)
    }

    /// Core switch `index` of group `group`; group `i` attaches to
    /// aggregation switch `i` of every pod.
    pub fn core_switch(&self, group: usize, index: usize) -> NodeId {
        NodeId(
            self.host_count()
                + self.edge_count()
                + self.agg_count()
                + group * self.half()
                + index,
        )
    }

    pub fn core_switches(&self) -> Vec<NodeId> {
        let start = self.host_count() + self.edge_count() + self.agg_count();
        (start..start + self.core_count()).map(NodeId).collect()
    }

    pub fn is_core(&self, node: NodeId) -> bool {
        let start = self.host_count() + self.edge_count() + self.agg_count();
        node.0 >= start && node.0 < self.node_count()
    }
}

/// Builds a k-ary fat tree with uniform link weight and its demand set.
///
/// Pods `0..k/2` hold the sources and pods `k/2..k` the destinations. Each
/// physical link becomes one directed edge oriented from the source half
/// toward the destination half; `reverse` flips every edge and swaps the
/// two host halves.
pub fn generate_fat_tree(
    k: usize,
    weight: f64,
    reverse: bool,
) -> Result<(Topology, DemandSet), Error> {
    let layout = FatTreeLayout::new(k)?;
    if !(weight.is_finite() && weight > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "fat-tree link weight must be positive, got {weight}"
        )));
    }
    let half = layout.half();
    let mut edges = Vec::new();
    // `up` means the link is traversed toward the core in forward mode.
    let mut link = |lower: NodeId, upper: NodeId, up: bool| {
        let (a, b) = if up { (lower, upper) } else { (upper, lower) };
        let (a, b) = if reverse { (b, a) } else { (a, b) };
        edges.push(Edge {
            from: a,
            to: b,
            weight,
        });
    };

    for pod in 0..k {
        let up = pod < half;
        for e in 0..half {
            for slot in 0..half {
                link(layout.host(pod, e, slot), layout.edge_switch(pod, e), up);
            }
            for a in 0..half {
                link(layout.edge_switch(pod, e), layout.agg_switch(pod, a), up);
            }
        }
        for a in 0..half {
            for c in 0..half {
                link(layout.agg_switch(pod, a), layout.core_switch(a, c), up);
            }
        }
    }

    let hosts_per_half = layout.host_count() / 2;
    let first: Vec<NodeId> = (0..hosts_per_half).map(NodeId).collect();
    let second: Vec<NodeId> = (hosts_per_half..layout.host_count()).map(NodeId).collect();
    let demands = if reverse {
        DemandSet::new(second, first)?
    } else {
        DemandSet::new(first, second)?
    };
    Ok((Topology::new(layout.node_count(), edges)?, demands))
}
