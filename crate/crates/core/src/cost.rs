//! Global fitness `F(x) = f_sm(x) + f_path(x) + f_unalloc(x)`.
//!
//! Lower is better. Allocated flows contribute their path duration to
//! `f_path`; unallocated flows contribute only the penalty.

use serde::{Deserialize, Serialize};

use crate::routing::{all_flow_paths, FlowResult, Placement};
use crate::Instance;
use crate::Error;

/// Upper bound on the number of deployed appliances.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmLimit {
    #[default]
    Unlimited,
    AtMost(usize),
}

impl SmLimit {
    pub fn allows(self, count: usize) -> bool {
        match self {
            SmLimit::Unlimited => true,
            SmLimit::AtMost(max) => count <= max,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    /// Cost per deployed appliance, indexed by `type - 1`.
    pub sm_cost: Vec<f64>,
    /// Cost per unanalyzed flow.
    pub penalty: f64,
    pub max_sm: SmLimit,
    pub max_unanalyzed: usize,
    pub strict_order: bool,
}

impl CostModel {
    pub const DEFAULT_SM_COST: f64 = 500.0;
    pub const DEFAULT_PENALTY: f64 = 1000.0;

    /// Same cost for every type, unlimited appliances, no unanalyzed flows
    /// tolerated, non-strict ordering.
    pub fn uniform(num_types: usize, sm_cost: f64, penalty: f64) -> Self {
        CostModel {
            sm_cost: vec![sm_cost; num_types],
            penalty,
            max_sm: SmLimit::Unlimited,
            max_unanalyzed: 0,
            strict_order: false,
        }
    }

    pub fn with_max_sm(mut self, limit: SmLimit) -> Self {
        self.max_sm = limit;
        self
    }

    pub fn with_max_unanalyzed(mut self, max: usize) -> Self {
        self.max_unanalyzed = max;
        self
    }

    pub fn with_strict_order(mut self, strict: bool) -> Self {
        self.strict_order = strict;
        self
    }

    /// Multiplies every appliance cost and the penalty by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        CostModel {
            sm_cost: self.sm_cost.iter().map(|c| c * factor).collect(),
            penalty: self.penalty * factor,
            ..self.clone()
        }
    }

    pub fn check(&self, num_types: usize) -> Result<(), Error> {
        if self.sm_cost.len() != num_types {
            return Err(Error::InvalidParameter(format!(
                "{} appliance costs given for {num_types} types",
                self.sm_cost.len()
            )));
        }
        if let Some(c) = self.sm_cost.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "appliance cost {c} must be positive"
            )));
        }
        if !(self.penalty.is_finite() && self.penalty > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "penalty {} must be positive",
                self.penalty
            )));
        }
        if self.max_sm == SmLimit::AtMost(0) {
            return Err(Error::InvalidParameter("max_sm must be at least 1".into()));
        }
        Ok(())
    }

    /// Cheapest per-appliance cost; used for search lower bounds.
    pub fn min_sm_cost(&self) -> f64 {
        self.sm_cost.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub f_sm: f64,
    pub f_path: f64,
    pub f_unalloc: f64,
    pub fitness: f64,
    pub sm_count: usize,
    pub unanalyzed_count: usize,
    pub feasible: bool,
    pub flow_results: Vec<FlowResult>,
}

impl Evaluation {
    pub fn allocated_count(&self) -> usize {
        self.flow_results.len() - self.unanalyzed_count
    }
}

/// Evaluates `placement` on `instance`. Infeasible placements still get a
/// finite fitness.
pub fn evaluate(
    instance: &Instance,
    placement: &Placement,
    model: &CostModel,
) -> Result<Evaluation, Error> {
    model.check(instance.num_types)?;
    let flow_results = all_flow_paths(
        &instance.topology,
        placement,
        &instance.demands,
        instance.num_types,
        model.strict_order,
    )?;

    let f_sm = placement
        .deployed()
        .fold(0.0, |acc, (_, t)| acc + model.sm_cost[t as usize - 1]);
    let sm_count = placement.appliance_count();

    let mut f_path = 0.0;
    let mut unanalyzed_count = 0;
    for r in &flow_results {
        match r.outcome.path() {
            Some(p) => f_path += p.duration,
            None => unanalyzed_count += 1,
        }
    }
    let f_unalloc = model.penalty * unanalyzed_count as f64;

    let mut eval = Evaluation {
        f_sm,
        f_path,
        f_unalloc,
        fitness: f_sm + f_path + f_unalloc,
        sm_count,
        unanalyzed_count,
        feasible: false,
        flow_results,
    };
    eval.feasible = is_feasible(&eval, model);
    Ok(eval)
}

/// Both thresholds hold (inclusive).
pub fn is_feasible(evaluation: &Evaluation, model: &CostModel) -> bool {
    model.max_sm.allows(evaluation.sm_count) && evaluation.unanalyzed_count <= model.max_unanalyzed
}
