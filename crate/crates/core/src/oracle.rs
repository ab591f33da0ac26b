//! Exact solvers used as ground truth for routing, cost and the GA.
//!
//! [`exhaustive_solve`] enumerates every placement over the eligible nodes.
//! [`cardinality_solve`] reaches the same optimum on larger instances by
//! enumerating placements in order of appliance count and stopping once
//! the count alone forces a fitness above the incumbent.
//!
//! Both break fitness ties toward the lexicographically smallest gene
//! array, so they always return the same placement.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{evaluate, CostModel, Evaluation};
use crate::routing::{plain_distances, Placement};
use crate::topology::NodeId;
use crate::{Error, Instance};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleBest {
    pub placement: Placement,
    pub evaluation: Evaluation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// `None` when no placement is feasible.
    pub best: Option<OracleBest>,
    pub feasible_count: u64,
    /// Placements evaluated. `(T + 1)^eligible` for the exhaustive search.
    pub searched_count: u64,
}

impl OracleResult {
    pub fn best_fitness(&self) -> Option<f64> {
        self.best.as_ref().map(|b| b.evaluation.fitness)
    }

    pub fn best_placement(&self) -> Option<&Placement> {
        self.best.as_ref().map(|b| &b.placement)
    }
}

/// Running reduction: best feasible `(fitness, placement)` and a count.
#[derive(Clone, Debug, Default)]
struct Tally {
    best: Option<(f64, Placement)>,
    feasible: u64,
}

impl Tally {
    fn single(fitness: f64, placement: Placement) -> Self {
        Tally {
            best: Some((fitness, placement)),
            feasible: 1,
        }
    }

    fn merge(self, other: Tally) -> Tally {
        let best = match (self.best, other.best) {
            (Some(a), Some(b)) => {
                let b_wins = match b.0.total_cmp(&a.0) {
                    Ordering::Less => true,
                    Ordering::Equal => b.1 < a.1,
                    Ordering::Greater => false,
                };
                Some(if b_wins { b } else { a })
            }
            (a, b) => a.or(b),
        };
        Tally {
            best,
            feasible: self.feasible + other.feasible,
        }
    }
}

fn eligible_nodes(instance: &Instance) -> Vec<usize> {
    (0..instance.topology.node_count())
        .filter(|&i| instance.topology.is_eligible(NodeId(i)))
        .collect()
}

fn check_inputs(instance: &Instance, model: &CostModel) -> Result<(), Error> {
    model.check(instance.num_types)?;
    instance.demands.check_against(&instance.topology)
}

fn finish(instance: &Instance, model: &CostModel, tally: Tally, searched: u64) -> Result<OracleResult, Error> {
    let best = match tally.best {
        Some((_, placement)) => {
            let evaluation = evaluate(instance, &placement, model)?;
            Some(OracleBest {
                placement,
                evaluation,
            })
        }
        None => None,
    };
    Ok(OracleResult {
        best,
        feasible_count: tally.feasible,
        searched_count: searched,
    })
}

/// Size of the full search space, saturating.
pub fn search_space(num_types: usize, eligible: usize) -> u128 {
    (num_types as u128 + 1)
        .checked_pow(eligible as u32)
        .unwrap_or(u128::MAX)
}

/// Enumerates all `(T + 1)^eligible` placements in lexicographic gene
/// order and returns the feasible one with minimum fitness.
pub fn exhaustive_solve(
    instance: &Instance,
    model: &CostModel,
    budget: u64,
) -> Result<OracleResult, Error> {
    check_inputs(instance, model)?;
    let sites = eligible_nodes(instance);
    let required = search_space(instance.num_types, sites.len());
    if required > budget as u128 {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let total = required as u64;
    let radix = instance.num_types as u64 + 1;
    let n = instance.topology.node_count();

    // Index digits, most significant first, map onto eligible nodes in
    // ascending order, so index order is lexicographic gene order.
    let decode = |mut index: u64| {
        let mut genes = vec![0u8; n];
        for &site in sites.iter().rev() {
            genes[site] = (index % radix) as u8;
            index /= radix;
        }
        Placement::from_genes(genes)
    };

    let tally = (0..total)
        .into_par_iter()
        .map(|index| {
            let placement = decode(index);
            let e = evaluate(instance, &placement, model)?;
            Ok(if e.feasible {
                Tally::single(e.fitness, placement)
            } else {
                Tally::default()
            })
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;

    finish(instance, model, tally, total)
}

/// Lower bound on the non-appliance part of any placement's fitness: each
/// flow costs at least its plain shortest distance or the penalty.
fn flow_cost_floor(instance: &Instance, model: &CostModel) -> f64 {
    let mut floor = 0.0;
    for &source in instance.demands.sources() {
        let dist = plain_distances(&instance.topology, source);
        for &dest in instance.demands.destinations() {
            floor += dist[dest.0].min(model.penalty);
        }
    }
    floor
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

/// Advances `combo` to the next k-combination of `0..n`.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

const BATCH: usize = 4096;

/// Exact optimum found by enumerating placements with 0, 1, 2, ...
/// appliances. A layer with `m` appliances is skipped, and the search ends,
/// once `m * min_sm_cost + floor` exceeds the best feasible fitness found,
/// where `floor` sums `min(penalty, shortest distance)` over all flows.
/// `searched_count` reports the placements actually evaluated; `budget`
/// caps that number.
pub fn cardinality_solve(
    instance: &Instance,
    model: &CostModel,
    budget: u64,
) -> Result<OracleResult, Error> {
    check_inputs(instance, model)?;
    let sites = eligible_nodes(instance);
    let n = instance.topology.node_count();
    let types = instance.num_types;
    let floor = flow_cost_floor(instance, model);
    let min_cost = model.min_sm_cost();

    let max_layer = if types == 0 { 0 } else { sites.len() };
    let mut tally = Tally::default();
    let mut searched: u64 = 0;

    for m in 0..=max_layer {
        if !model.max_sm.allows(m) {
            break;
        }
        if let Some((best, _)) = &tally.best {
            let bound = m as f64 * min_cost + floor;
            if bound > best + 1e-9 * best.abs().max(1.0) {
                break;
            }
        }
        let layer = binomial(sites.len(), m).saturating_mul((types as u128).pow(m as u32));
        if searched as u128 + layer > budget as u128 {
            return Err(Error::BudgetExceeded {
                required: searched as u128 + layer,
                budget,
            });
        }

        let mut batch: Vec<Placement> = Vec::with_capacity(BATCH);
        let flush = |batch: &mut Vec<Placement>, tally: &mut Tally| -> Result<(), Error> {
            let part = batch
                .par_drain(..)
                .map(|placement| {
                    let e = evaluate(instance, &placement, model)?;
                    Ok(if e.feasible {
                        Tally::single(e.fitness, placement)
                    } else {
                        Tally::default()
                    })
                })
                .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
            *tally = std::mem::take(tally).merge(part);
            Ok(())
        };

        let mut combo: Vec<usize> = (0..m).collect();
        loop {
            // Every type assignment for the chosen sites.
            let mut kinds = vec![1u8; m];
            loop {
                let mut genes = vec![0u8; n];
                for (slot, &c) in combo.iter().enumerate() {
                    genes[sites[c]] = kinds[slot];
                }
                batch.push(Placement::from_genes(genes));
                if batch.len() == BATCH {
                    flush(&mut batch, &mut tally)?;
                }
                let mut pos = m;
                let mut carried = true;
                while carried && pos > 0 {
                    pos -= 1;
                    if (kinds[pos] as usize) < types {
                        kinds[pos] += 1;
                        carried = false;
                    } else {
                        kinds[pos] = 1;
                    }
                }
                if carried {
                    break;
                }
            }
            if m == 0 || !next_combination(&mut combo, sites.len()) {
                break;
            }
        }
        flush(&mut batch, &mut tally)?;
        searched += layer as u64;
    }

    finish(instance, model, tally, searched)
}
