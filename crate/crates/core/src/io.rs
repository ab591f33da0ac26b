//! Problem files and placement plans.
//!
//! Problem file grammar (ASCII, line oriented, `#` starts a comment, blank
//! lines ignored):
//!
//! ```text
//! n T evolutions
//! sources: s1 s2 ...
//! destinations: d1 d2 ...
//! u v w          # one directed edge per line
//! ```
//!
//! A plan is written either as text,
//!
//! ```text
//! SM <node> <type>
//! COST <global_cost>
//! BREAKDOWN <f_sm> <f_path> <f_unalloc>
//! FLOW <s> <d> <n0-n1-...-nk | UNALLOCATED>
//! ```
//!
//! preceded by `STATUS NO_FEASIBLE_SOLUTION` when no feasible placement was
//! found, or as pretty-printed JSON mirroring [`PlacementPlan`].

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cost::{evaluate, CostModel, Evaluation};
use crate::ga::{GaConfig, SolveResult, SolveStatus};
use crate::oracle::OracleResult;
use crate::routing::Placement;
use crate::topology::{DemandSet, Edge, NodeId, Topology};
use crate::{Error, Instance};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub node_count: usize,
    pub num_types: usize,
    pub evolutions: usize,
    pub sources: Vec<NodeId>,
    pub destinations: Vec<NodeId>,
    pub edges: Vec<Edge>,
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

fn parse_node_list(line: usize, body: &str, label: &str, n: usize) -> Result<Vec<NodeId>, Error> {
    let mut nodes = Vec::new();
    let mut seen = HashSet::new();
    for token in body.split_whitespace() {
        let id: usize = token
            .parse()
            .map_err(|_| parse_err(line, format!("invalid {label} node '{token}'")))?;
        if id >= n {
            return Err(parse_err(line, format!("{label} {id} out of range for {n} nodes")));
        }
        if !seen.insert(id) {
            return Err(parse_err(line, format!("duplicate {label} {id}")));
        }
        nodes.push(NodeId(id));
    }
    if nodes.is_empty() {
        return Err(parse_err(line, format!("at least one {label} required")));
    }
    Ok(nodes)
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, raw)| (i + 1, raw.split('#').next().unwrap_or("").trim()))
            .filter(|(_, content)| !content.is_empty());
        let total_lines = text.lines().count();
        let mut expect = |what: &str, logical: usize| {
            lines.next().ok_or_else(|| {
                parse_err(total_lines.max(logical - 1) + 1, format!("missing {what} line"))
            })
        };

        let (lno, header) = expect("header", 1)?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(lno, "header must be 'n T evolutions'"));
        }
        let number = |token: &str, name: &str| {
            token
                .parse::<usize>()
                .map_err(|_| parse_err(lno, format!("invalid {name} '{token}'")))
        };
        let node_count = number(fields[0], "node count")?;
        let num_types = number(fields[1], "type count")?;
        let evolutions = number(fields[2], "evolution count")?;
        if node_count == 0 {
            return Err(parse_err(lno, "node count must be positive"));
        }
        if num_types > crate::routing::MAX_TYPES {
            return Err(parse_err(lno, format!("type count {num_types} too large")));
        }

        let (lno, line) = expect("sources", 2)?;
        let body = line
            .strip_prefix("sources:")
            .ok_or_else(|| parse_err(lno, "expected 'sources:' line"))?;
        let sources = parse_node_list(lno, body, "source", node_count)?;

        let (lno, line) = expect("destinations", 3)?;
        let body = line
            .strip_prefix("destinations:")
            .ok_or_else(|| parse_err(lno, "expected 'destinations:' line"))?;
        let destinations = parse_node_list(lno, body, "destination", node_count)?;
        if let Some(n) = sources.iter().find(|s| destinations.contains(s)) {
            return Err(parse_err(lno, format!("node {n} is both a source and a destination")));
        }

        let mut edges = Vec::new();
        let mut seen = HashSet::new();
        for (lno, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(parse_err(lno, "edge must be 'u v w'"));
            }
            let endpoint = |token: &str| {
                let id = token
                    .parse::<usize>()
                    .map_err(|_| parse_err(lno, format!("invalid node '{token}'")))?;
                if id >= node_count {
                    return Err(parse_err(lno, format!("endpoint out of range: {id}")));
                }
                Ok(id)
            };
            let u = endpoint(fields[0])?;
            let v = endpoint(fields[1])?;
            let w: f64 = fields[2]
                .parse()
                .map_err(|_| parse_err(lno, format!("invalid weight '{}'", fields[2])))?;
            if !w.is_finite() {
                return Err(parse_err(lno, "non-finite weight"));
            }
            if w < 0.0 {
                return Err(parse_err(lno, format!("negative weight {w}")));
            }
            if u == v {
                return Err(parse_err(lno, format!("self-loop at {u}")));
            }
            if !seen.insert((u, v)) {
                return Err(parse_err(lno, format!("duplicate edge {u} {v}")));
            }
            edges.push(Edge::new(u, v, w));
        }

        Ok(ProblemFile {
            node_count,
            num_types,
            evolutions,
            sources,
            destinations,
            edges,
        })
    }

    pub fn to_text(&self) -> String {
        let join = |nodes: &[NodeId]| {
            nodes
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.node_count, self.num_types, self.evolutions);
        let _ = writeln!(out, "sources: {}", join(&self.sources));
        let _ = writeln!(out, "destinations: {}", join(&self.destinations));
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {}", e.from, e.to, e.weight);
        }
        out
    }

    pub fn instance(&self) -> Result<Instance, Error> {
        let topology = Topology::new(self.node_count, self.edges.clone())?;
        let demands = DemandSet::new(self.sources.clone(), self.destinations.clone())?;
        Instance::new(topology, demands, self.num_types)
    }

    pub fn from_instance(instance: &Instance, evolutions: usize) -> Self {
        ProblemFile {
            node_count: instance.topology.node_count(),
            num_types: instance.num_types,
            evolutions,
            sources: instance.demands.sources().to_vec(),
            destinations: instance.demands.destinations().to_vec(),
            edges: instance.topology.edges().to_vec(),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SitedAppliance {
    pub node: NodeId,
    #[serde(rename = "type")]
    pub kind: u8,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    pub f_sm: f64,
    pub f_path: f64,
    pub f_unalloc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannedFlow {
    pub source: NodeId,
    pub destination: NodeId,
    /// `None` for an unallocated flow.
    pub path: Option<Vec<NodeId>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanMetadata {
    pub solver: String,
    pub status: SolveStatus,
    pub seed: Option<u64>,
    pub cost_model: CostModel,
    pub ga: Option<GaConfig>,
    pub budget: Option<u64>,
    pub generations_run: Option<usize>,
    pub searched_count: Option<u64>,
    /// Wall-clock time of the solve; the only non-reproducible field.
    pub wall_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacementPlan {
    pub placements: Vec<SitedAppliance>,
    pub global_cost: f64,
    pub breakdown: Breakdown,
    pub flows: Vec<PlannedFlow>,
    pub metadata: PlanMetadata,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PlanFormat {
    Text,
    Json,
}

fn plan_body(placement: &Placement, evaluation: &Evaluation) -> (Vec<SitedAppliance>, f64, Breakdown, Vec<PlannedFlow>) {
    let placements = placement
        .deployed()
        .map(|(node, kind)| SitedAppliance { node, kind })
        .collect();
    let flows = evaluation
        .flow_results
        .iter()
        .map(|r| PlannedFlow {
            source: r.flow.source,
            destination: r.flow.destination,
            path: r.outcome.path().map(|p| p.nodes.clone()),
        })
        .collect();
    let breakdown = Breakdown {
        f_sm: evaluation.f_sm,
        f_path: evaluation.f_path,
        f_unalloc: evaluation.f_unalloc,
    };
    (placements, evaluation.fitness, breakdown, flows)
}

impl PlacementPlan {
    fn assemble(
        instance: &Instance,
        model: &CostModel,
        chosen: Option<(&Placement, &Evaluation)>,
        metadata: PlanMetadata,
    ) -> Result<Self, Error> {
        let empty;
        let fallback;
        let (placement, evaluation) = match chosen {
            Some(pair) => pair,
            None => {
                empty = Placement::empty(instance.topology.node_count());
                fallback = evaluate(instance, &empty, model)?;
                (&empty, &fallback)
            }
        };
        let (placements, global_cost, breakdown, flows) = plan_body(placement, evaluation);
        Ok(PlacementPlan {
            placements,
            global_cost,
            breakdown,
            flows,
            metadata,
        })
    }

    /// Plan for a GA run. Without a feasible solution the plan deploys
    /// nothing and reports the cost of the empty placement.
    pub fn from_solve(
        instance: &Instance,
        model: &CostModel,
        config: &GaConfig,
        result: &SolveResult,
        wall_ms: Option<f64>,
    ) -> Result<Self, Error> {
        let metadata = PlanMetadata {
            solver: "ga".into(),
            status: result.status,
            seed: Some(config.seed),
            cost_model: model.clone(),
            ga: Some(config.clone()),
            budget: None,
            generations_run: Some(result.generations_run),
            searched_count: None,
            wall_ms,
        };
        let chosen = (result.status == SolveStatus::Solved)
            .then_some((&result.best_placement, &result.best_evaluation));
        Self::assemble(instance, model, chosen, metadata)
    }

    pub fn from_oracle(
        instance: &Instance,
        model: &CostModel,
        budget: u64,
        result: &OracleResult,
        wall_ms: Option<f64>,
    ) -> Result<Self, Error> {
        let status = if result.best.is_some() {
            SolveStatus::Solved
        } else {
            SolveStatus::NoFeasibleSolution
        };
        let metadata = PlanMetadata {
            solver: "oracle".into(),
            status,
            seed: None,
            cost_model: model.clone(),
            ga: None,
            budget: Some(budget),
            generations_run: None,
            searched_count: Some(result.searched_count),
            wall_ms,
        };
        let chosen = result.best.as_ref().map(|b| (&b.placement, &b.evaluation));
        Self::assemble(instance, model, chosen, metadata)
    }

    pub fn status(&self) -> SolveStatus {
        self.metadata.status
    }

    /// Gene array described by the plan's appliance list.
    pub fn placement(&self, node_count: usize) -> Result<Placement, Error> {
        let mut p = Placement::empty(node_count);
        for s in &self.placements {
            if s.node.0 >= node_count {
                return Err(Error::InvalidPlacement(format!(
                    "plan places an appliance on node {} of {node_count}",
                    s.node
                )));
            }
            p.genes_mut()[s.node.0] = s.kind;
        }
        Ok(p)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.metadata.status != SolveStatus::Solved {
            let _ = writeln!(out, "STATUS {}", self.metadata.status.as_str());
        }
        for s in &self.placements {
            let _ = writeln!(out, "SM {} {}", s.node, s.kind);
        }
        let _ = writeln!(out, "COST {}", self.global_cost);
        let b = &self.breakdown;
        let _ = writeln!(out, "BREAKDOWN {} {} {}", b.f_sm, b.f_path, b.f_unalloc);
        for f in &self.flows {
            let route = match &f.path {
                Some(nodes) => nodes
                    .iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join("-"),
                None => "UNALLOCATED".to_string(),
            };
            let _ = writeln!(out, "FLOW {} {} {}", f.source, f.destination, route);
        }
        out
    }

    pub fn to_json(&self) -> Result<String, Error> {
        let mut s =
            serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn write(&self, format: PlanFormat) -> Result<Vec<u8>, Error> {
        Ok(match format {
            PlanFormat::Text => self.to_text().into_bytes(),
            PlanFormat::Json => self.to_json()?.into_bytes(),
        })
    }
}
