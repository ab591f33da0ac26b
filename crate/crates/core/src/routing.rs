//! Ordered-waypoint shortest paths.
//!
//! For a placement with `T` appliance types, a qualifying flow path must
//! visit a type-1 appliance, then a type-2 appliance, and so on up to type
//! `T`. The search runs Dijkstra over the product graph of
//! `(node, level)` states, where `level` is the length of the prefix
//! `1..=level` already visited in order.
//!
//! Level rules, applied whenever the path enters a node:
//! - a node whose gene is `level + 1` advances the level by one;
//! - any other gene leaves the level unchanged, except that with
//!   `strict_order` entering a node whose gene exceeds `level + 1` is
//!   forbidden;
//! - the flow's own source and destination are neutral: their appliances
//!   are never counted for that flow and never block it. Only nodes in
//!   between the endpoints do the inspecting, and the destination is
//!   accepted only once the level already equals `T`.
//!
//! Because the state space is `node x level`, a path may revisit a node
//! (or edge) at a different level.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::topology::{DemandSet, Flow, NodeId, Topology};
use crate::Error;

/// Largest supported number of appliance types.
pub const MAX_TYPES: usize = u8::MAX as usize;

/// Chromosome: gene `i` is the appliance type at node `i`, `0` for none.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Placement {
    genes: Vec<u8>,
}

impl Placement {
    pub fn empty(node_count: usize) -> Self {
        Placement {
            genes: vec![0; node_count],
        }
    }

    pub fn from_genes(genes: Vec<u8>) -> Self {
        Placement { genes }
    }

    pub fn genes(&self) -> &[u8] {
        &self.genes
    }

    pub fn genes_mut(&mut self) -> &mut [u8] {
        &mut self.genes
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    #[inline]
    pub fn gene(&self, node: NodeId) -> u8 {
        self.genes[node.0]
    }

    /// Number of deployed appliances, `n(x)`.
    pub fn appliance_count(&self) -> usize {
        self.genes.iter().filter(|&&g| g != 0).count()
    }

    /// `(node, type)` for every deployed appliance in node order.
    pub fn deployed(&self) -> impl Iterator<Item = (NodeId, u8)> + '_ {
        self.genes
            .iter()
            .enumerate()
            .filter(|(_, &g)| g != 0)
            .map(|(i, &g)| (NodeId(i), g))
    }

    pub fn check(&self, topology: &Topology, num_types: usize) -> Result<(), Error> {
        if self.genes.len() != topology.node_count() {
            return Err(Error::InvalidPlacement(format!(
                "placement has {} genes for {} nodes",
                self.genes.len(),
                topology.node_count()
            )));
        }
        for (i, &g) in self.genes.iter().enumerate() {
            if g as usize > num_types {
                return Err(Error::InvalidPlacement(format!(
                    "gene {g} at node {i} exceeds type count {num_types}"
                )));
            }
            if g != 0 && !topology.is_eligible(NodeId(i)) {
                return Err(Error::InvalidPlacement(format!(
                    "node {i} is not eligible to host an appliance"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderedPath {
    pub nodes: Vec<NodeId>,
    pub duration: f64,
    /// Level reached after processing each entry of `nodes`.
    pub level_trace: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FlowOutcome {
    Allocated(OrderedPath),
    Unallocated,
}

impl FlowOutcome {
    pub fn path(&self) -> Option<&OrderedPath> {
        match self {
            FlowOutcome::Allocated(p) => Some(p),
            FlowOutcome::Unallocated => None,
        }
    }

    pub fn is_allocated(&self) -> bool {
        matches!(self, FlowOutcome::Allocated(_))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    pub flow: Flow,
    pub outcome: FlowOutcome,
}

#[derive(Copy, Clone, Debug)]
struct Entry {
    cost: f64,
    state: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // Min-heap on cost.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.state.cmp(&self.state))
    }
}

/// Product graph for one flow; states are `level * n + node`.
struct LayeredGraph<'a> {
    topology: &'a Topology,
    genes: &'a [u8],
    source: NodeId,
    destination: NodeId,
    num_types: usize,
    strict: bool,
}

impl<'a> LayeredGraph<'a> {
    #[inline]
    fn n(&self) -> usize {
        self.topology.node_count()
    }

    #[inline]
    fn state(&self, node: NodeId, level: usize) -> usize {
        level * self.n() + node.0
    }

    #[inline]
    fn split(&self, state: usize) -> (NodeId, usize) {
        (NodeId(state % self.n()), state / self.n())
    }

    fn target(&self) -> usize {
        self.state(self.destination, self.num_types)
    }

    /// Level after entering `node` at `level`, or `None` if forbidden.
    #[inline]
    fn enter(&self, level: usize, node: NodeId) -> Option<usize> {
        if node == self.destination || node == self.source {
            return Some(level);
        }
        let gene = self.genes[node.0] as usize;
        if gene == level + 1 {
            Some(level + 1)
        } else if self.strict && gene > level + 1 {
            None
        } else {
            Some(level)
        }
    }

    /// Shortest remaining duration from every state to the target.
    fn distances_to_target(&self) -> Vec<f64> {
        let states = self.n() * (self.num_types + 1);
        let mut dist = vec![f64::INFINITY; states];
        let mut heap = BinaryHeap::new();
        let target = self.target();
        dist[target] = 0.0;
        heap.push(Entry {
            cost: 0.0,
            state: target,
        });

        while let Some(Entry { cost, state }) = heap.pop() {
            if cost > dist[state] {
                continue;
            }
            let (v, after) = self.split(state);
            // A predecessor (u, l) enters v and lands on `after`; only
            // l == after or l == after - 1 can do that.
            let lower = after.saturating_sub(1);
            for arc in self.topology.in_arcs(v) {
                for before in lower..=after {
                    if self.enter(before, v) != Some(after) {
                        continue;
                    }
                    let pred = self.state(arc.node, before);
                    let next = cost + arc.weight;
                    if next < dist[pred] {
                        dist[pred] = next;
                        heap.push(Entry {
                            cost: next,
                            state: pred,
                        });
                    }
                }
            }
        }
        dist
    }

    fn is_tight(weight: f64, rest: f64, here: f64) -> bool {
        (weight + rest - here).abs() <= 1e-9 * here.abs().max(1.0)
    }

    /// True if `from` reaches the target along tight arcs without entering
    /// any state in `visited`.
    fn reaches_target(&self, from: usize, dist: &[f64], visited: &[bool]) -> bool {
        let target = self.target();
        let mut seen = visited.to_vec();
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(state) = queue.pop_front() {
            if state == target {
                return true;
            }
            let (u, level) = self.split(state);
            for arc in self.topology.out_arcs(u) {
                let Some(after) = self.enter(level, arc.node) else {
                    continue;
                };
                let next = self.state(arc.node, after);
                if !seen[next] && Self::is_tight(arc.weight, dist[next], dist[state]) {
                    seen[next] = true;
                    queue.push_back(next);
                }
            }
        }
        false
    }

    /// Lexicographically smallest shortest path from `source`, walking the
    /// tight subgraph greedily.
    fn walk(&self, dist: &[f64]) -> FlowOutcome {
        let source = self.source;
        let start = self.state(source, 0);
        if !dist[start].is_finite() {
            return FlowOutcome::Unallocated;
        }

        let target = self.target();
        let mut visited = vec![false; dist.len()];
        visited[start] = true;
        let mut nodes = vec![source];
        let mut level_trace = vec![0];
        let mut duration = 0.0;
        let mut current = start;

        while current != target {
            let (u, level) = self.split(current);
            let mut chosen = None;
            for arc in self.topology.out_arcs(u) {
                let Some(after) = self.enter(level, arc.node) else {
                    continue;
                };
                let next = self.state(arc.node, after);
                if visited[next] || !Self::is_tight(arc.weight, dist[next], dist[current]) {
                    continue;
                }
                // A strictly closer state cannot loop back onto the walk;
                // a zero-weight step might, so check it still gets home.
                let progressing = dist[next] < dist[current];
                if progressing || self.reaches_target(next, dist, &visited) {
                    chosen = Some((arc, after, next));
                    break;
                }
            }
            let Some((arc, after, next)) = chosen else {
                unreachable!("tight subgraph always leads to the target");
            };
            visited[next] = true;
            duration += arc.weight;
            nodes.push(arc.node);
            level_trace.push(after);
            current = next;
        }

        FlowOutcome::Allocated(OrderedPath {
            nodes,
            duration,
            level_trace,
        })
    }
}

fn check_endpoints(topology: &Topology, source: NodeId, destination: NodeId) -> Result<(), Error> {
    for node in [source, destination] {
        if !topology.contains(node) {
            return Err(Error::InvalidParameter(format!(
                "node {node} out of range for {} nodes",
                topology.node_count()
            )));
        }
    }
    if source == destination {
        return Err(Error::InvalidParameter(format!(
            "source and destination are both {source}"
        )));
    }
    Ok(())
}

/// Minimum-duration path from `source` to `destination` that visits
/// appliance types `1..=num_types` in order.
///
/// Ties between equal-duration paths go to the lexicographically smallest
/// node sequence.
pub fn ordered_shortest_path(
    topology: &Topology,
    placement: &Placement,
    source: NodeId,
    destination: NodeId,
    num_types: usize,
    strict_order: bool,
) -> Result<FlowOutcome, Error> {
    check_endpoints(topology, source, destination)?;
    placement.check(topology, num_types)?;
    let graph = LayeredGraph {
        topology,
        genes: placement.genes(),
        source,
        destination,
        num_types,
        strict: strict_order,
    };
    let dist = graph.distances_to_target();
    Ok(graph.walk(&dist))
}

/// Routes every flow of `demands`, in flow order.
pub fn all_flow_paths(
    topology: &Topology,
    placement: &Placement,
    demands: &DemandSet,
    num_types: usize,
    strict_order: bool,
) -> Result<Vec<FlowResult>, Error> {
    demands.check_against(topology)?;
    placement.check(topology, num_types)?;

    // Sources without an appliance all see the same product graph, so they
    // share one backward search per destination.
    let mut tables: HashMap<(NodeId, Option<NodeId>), Vec<f64>> = HashMap::new();
    let flows = demands.flows();
    let mut results = Vec::with_capacity(flows.len());
    for flow in flows {
        check_endpoints(topology, flow.source, flow.destination)?;
        let graph = LayeredGraph {
            topology,
            genes: placement.genes(),
            source: flow.source,
            destination: flow.destination,
            num_types,
            strict: strict_order,
        };
        let key = (
            flow.destination,
            (placement.gene(flow.source) != 0).then_some(flow.source),
        );
        let dist = tables
            .entry(key)
            .or_insert_with(|| graph.distances_to_target());
        results.push(FlowResult {
            flow,
            outcome: graph.walk(dist),
        });
    }
    Ok(results)
}

/// Plain single-source shortest distances, ignoring appliances.
pub fn plain_distances(topology: &Topology, source: NodeId) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; topology.node_count()];
    let mut heap = BinaryHeap::new();
    dist[source.0] = 0.0;
    heap.push(Entry {
        cost: 0.0,
        state: source.0,
    });
    while let Some(Entry { cost, state }) = heap.pop() {
        if cost > dist[state] {
            continue;
        }
        for arc in topology.out_arcs(NodeId(state)) {
            let next = cost + arc.weight;
            if next < dist[arc.node.0] {
                dist[arc.node.0] = next;
                heap.push(Entry {
                    cost: next,
                    state: arc.node.0,
                });
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{generate_fat_tree, Edge, FatTreeLayout};

    fn topo(n: usize, edges: &[(usize, usize, f64)]) -> Topology {
        Topology::new(n, edges.iter().map(|&(u, v, w)| Edge::new(u, v, w)).collect()).unwrap()
    }

    fn genes(n: usize, set: &[(usize, u8)]) -> Placement {
        let mut p = Placement::empty(n);
        for &(i, g) in set {
            p.genes_mut()[i] = g;
        }
        p
    }

    fn route(t: &Topology, p: &Placement, s: usize, d: usize, types: usize, strict: bool) -> FlowOutcome {
        ordered_shortest_path(t, p, NodeId(s), NodeId(d), types, strict).unwrap()
    }

    fn ids(path: &OrderedPath) -> Vec<usize> {
        path.nodes.iter().map(|n| n.0).collect()
    }

    #[test]
    fn chain_through_single_appliance() {
        let t = topo(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let out = route(&t, &genes(3, &[(1, 1)]), 0, 2, 1, false);
        let path = out.path().unwrap();
        assert_eq!(ids(path), vec![0, 1, 2]);
        assert_eq!(path.duration, 2.0);
        assert_eq!(path.level_trace, vec![0, 1, 1]);
    }

    #[test]
    fn chain_without_appliance_is_unallocated() {
        let t = topo(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        assert_eq!(route(&t, &Placement::empty(3), 0, 2, 1, false), FlowOutcome::Unallocated);
    }

    #[test]
    fn diamond_takes_longer_branch_with_appliance() {
        let t = topo(4, &[(0, 1, 1.0), (1, 3, 1.0), (0, 2, 5.0), (2, 3, 5.0)]);
        let out = route(&t, &genes(4, &[(2, 1)]), 0, 3, 1, false);
        let path = out.path().unwrap();
        assert_eq!(ids(path), vec![0, 2, 3]);
        assert_eq!(path.duration, 10.0);
    }

    #[test]
    fn reversed_types_on_chain_are_unallocated() {
        let t = topo(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]);
        let p = genes(4, &[(1, 2), (2, 1)]);
        assert_eq!(route(&t, &p, 0, 3, 2, false), FlowOutcome::Unallocated);
        assert_eq!(route(&t, &p, 0, 3, 2, true), FlowOutcome::Unallocated);
    }

    #[test]
    fn strict_order_forbids_early_transit() {
        // 0 -> 1(type 2) -> 2(type 1) -> 3(type 2) -> 4 ; plus bypass 0 -> 2
        let t = topo(
            5,
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (0, 2, 5.0)],
        );
        let p = genes(5, &[(1, 2), (2, 1), (3, 2)]);
        let loose = route(&t, &p, 0, 4, 2, false);
        assert_eq!(ids(loose.path().unwrap()), vec![0, 1, 2, 3, 4]);
        let strict = route(&t, &p, 0, 4, 2, true);
        assert_eq!(ids(strict.path().unwrap()), vec![0, 2, 3, 4]);
        assert_eq!(strict.path().unwrap().duration, 7.0);
    }

    #[test]
    fn endpoint_appliances_are_neutral() {
        let t = topo(3, &[(0, 1, 3.0), (1, 2, 1.0)]);
        for at in [0, 2] {
            let out = route(&t, &genes(3, &[(at, 1)]), 0, 2, 1, false);
            assert_eq!(out, FlowOutcome::Unallocated);
        }
        // A later type on the source never blocks, even when strict.
        let chain = topo(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]);
        let out = route(&chain, &genes(4, &[(0, 2), (1, 1), (2, 2), (3, 1)]), 0, 3, 2, true);
        assert_eq!(ids(out.path().unwrap()), vec![0, 1, 2, 3]);
        // The same node still counts for flows it does not terminate.
        let t = topo(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]);
        let p = genes(4, &[(2, 1)]);
        assert!(route(&t, &p, 0, 3, 1, false).is_allocated());
        assert!(!route(&t, &p, 0, 2, 1, false).is_allocated());
    }

    #[test]
    fn revisits_node_at_higher_level() {
        // 0 -> 1 -> 2(type 1) -> 1 -> 3(type 2)... path must pass 1 twice.
        let t = topo(
            5,
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 1, 1.0), (1, 3, 1.0), (3, 4, 1.0)],
        );
        let p = genes(5, &[(2, 1), (3, 2)]);
        let out = route(&t, &p, 0, 4, 2, false);
        let path = out.path().unwrap();
        assert_eq!(ids(path), vec![0, 1, 2, 1, 3, 4]);
        assert_eq!(path.level_trace, vec![0, 0, 1, 1, 2, 2]);
        assert_eq!(path.duration, 5.0);
    }

    #[test]
    fn zero_types_is_plain_dijkstra() {
        let t = topo(
            5,
            &[(0, 1, 4.0), (0, 2, 1.0), (2, 1, 1.0), (1, 3, 1.0), (2, 3, 7.0), (3, 4, 2.0)],
        );
        let dist = plain_distances(&t, NodeId(0));
        for d in 1..5 {
            let out = route(&t, &Placement::empty(5), 0, d, 0, false);
            assert_eq!(out.path().unwrap().duration, dist[d]);
        }
    }

    #[test]
    fn ties_prefer_smaller_node_sequence() {
        let t = topo(4, &[(0, 2, 1.0), (2, 3, 1.0), (0, 1, 1.0), (1, 3, 1.0)]);
        let out = route(&t, &Placement::empty(4), 0, 3, 0, false);
        assert_eq!(ids(out.path().unwrap()), vec![0, 1, 3]);
    }

    #[test]
    fn zero_weight_cycle_terminates() {
        let t = topo(4, &[(0, 1, 0.0), (1, 0, 0.0), (1, 2, 0.0), (2, 1, 0.0), (2, 3, 0.0)]);
        let out = route(&t, &genes(4, &[(2, 1)]), 0, 3, 1, false);
        let path = out.path().unwrap();
        assert_eq!(ids(path), vec![0, 1, 2, 3]);
        assert_eq!(path.duration, 0.0);
    }

    #[test]
    fn rejects_bad_endpoints_and_placements() {
        let t = topo(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let p = Placement::empty(3);
        assert!(ordered_shortest_path(&t, &p, NodeId(0), NodeId(0), 1, false).is_err());
        assert!(ordered_shortest_path(&t, &p, NodeId(0), NodeId(9), 1, false).is_err());
        assert!(ordered_shortest_path(&t, &Placement::empty(2), NodeId(0), NodeId(2), 1, false).is_err());
        assert!(ordered_shortest_path(&t, &genes(3, &[(1, 2)]), NodeId(0), NodeId(2), 1, false).is_err());
    }

    #[test]
    fn fat_tree_core_serves_every_flow_in_six_hops() {
        let (t, d) = generate_fat_tree(4, 1.0, false).unwrap();
        let layout = FatTreeLayout::new(4).unwrap();
        for core in layout.core_switches() {
            let p = genes(36, &[(core.0, 1)]);
            let results = all_flow_paths(&t, &p, &d, 1, false).unwrap();
            assert_eq!(results.len(), 64);
            for r in &results {
                let path = r.outcome.path().expect("allocated");
                assert_eq!(path.duration, 6.0);
                assert!(path.nodes.contains(&core));
            }
        }
    }

    #[test]
    fn empty_placement_leaves_every_flow_unallocated() {
        let (t, d) = generate_fat_tree(4, 1.0, false).unwrap();
        let results = all_flow_paths(&t, &Placement::empty(36), &d, 1, false).unwrap();
        assert!(results.iter().all(|r| r.outcome == FlowOutcome::Unallocated));
    }
}
