//! Placement of ordered, multi-type virtual security appliances in a
//! directed network.
//!
//! A placement assigns each node either nothing (gene `0`) or one appliance
//! type `1..=T`. Every demanded flow must visit the types in order on its
//! way from source to destination; the fitness of a placement adds the
//! appliance cost, the total duration of the chosen flow paths, and a
//! penalty per flow that cannot be routed through the full chain.
//!
//! Modules:
//! - [`topology`]: graphs, demand sets, random and fat-tree generators
//! - [`routing`]: exact ordered-waypoint shortest paths on a layered graph
//! - [`cost`]: the fitness function and feasibility thresholds
//! - [`ga`]: the elitist two-parent genetic search
//! - [`oracle`]: exhaustive search used as ground truth on small instances
//! - [`io`]: problem file grammar and placement plans (text and JSON)
//! - [`bench`]: the seeded experiment grid and its CSV report

pub mod bench;
pub mod cost;
pub mod ga;
pub mod io;
pub mod oracle;
pub mod routing;
pub mod topology;

use thiserror::Error;

pub use cost::{evaluate, is_feasible, CostModel, Evaluation, SmLimit};
pub use ga::{solve, GaConfig, SolveResult, SolveStatus};
pub use io::{PlacementPlan, ProblemFile};
pub use oracle::{cardinality_solve, exhaustive_solve, OracleResult};
pub use routing::{
    all_flow_paths, ordered_shortest_path, FlowOutcome, FlowResult, OrderedPath, Placement,
};
pub use topology::{
    generate_fat_tree, generate_random, validate, DemandSet, Edge, Flow, NodeId, Topology,
    ValidationReport, WeightRange,
};

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    InvalidTopology(ValidationReport),
    #[error("invalid demands: {0}")]
    InvalidDemands(String),
    #[error("invalid placement: {0}")]
    InvalidPlacement(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("search space of {required} placements exceeds budget {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("serialization failed: {0}")]
    Serialization(String),
}

/// A topology, its demands and the number of ordered appliance types.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub topology: Topology,
    pub demands: DemandSet,
    pub num_types: usize,
}

impl Instance {
    pub fn new(topology: Topology, demands: DemandSet, num_types: usize) -> Result<Self, Error> {
        demands.check_against(&topology)?;
        if num_types > routing::MAX_TYPES {
            return Err(Error::InvalidParameter(format!(
                "at most {} appliance types supported, got {num_types}",
                routing::MAX_TYPES
            )));
        }
        Ok(Instance {
            topology,
            demands,
            num_types,
        })
    }
}
