//! Elitist two-parent genetic search over placements.
//!
//! Each generation evaluates the whole population, keeps the two fittest
//! feasible individuals as parents, carries them forward unchanged, and
//! fills the rest of the next generation with one-point crossover children
//! of those parents followed by per-gene mutation.
//!
//! All random decisions come from one sequential ChaCha8 stream seeded by
//! [`GaConfig::seed`]; only fitness evaluation runs in parallel, so results
//! do not depend on the thread count.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{evaluate, CostModel, Evaluation};
use crate::routing::Placement;
use crate::topology::{NodeId, Topology};
use crate::{Error, Instance};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub evolutions: usize,
    pub crossover_probability: f64,
    /// Per-gene mutation probability; `None` means `1 / node_count`.
    pub mutation_probability: Option<f64>,
    pub seed: u64,
    /// Stop early once the best feasible fitness is at or below this.
    pub target_fitness: Option<f64>,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 50,
            evolutions: 5,
            crossover_probability: 0.7,
            mutation_probability: None,
            seed: 0,
            target_fitness: None,
        }
    }
}

impl GaConfig {
    pub fn mutation_rate(&self, node_count: usize) -> f64 {
        self.mutation_probability
            .unwrap_or(1.0 / node_count.max(1) as f64)
    }

    pub fn check(&self) -> Result<(), Error> {
        if self.population_size < 2 {
            return Err(Error::InvalidParameter(format!(
                "population size must be at least 2, got {}",
                self.population_size
            )));
        }
        if self.evolutions == 0 {
            return Err(Error::InvalidParameter("evolutions must be positive".into()));
        }
        let probabilities = [
            ("crossover", Some(self.crossover_probability)),
            ("mutation", self.mutation_probability),
        ];
        for (name, p) in probabilities {
            if let Some(p) = p {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidParameter(format!(
                        "{name} probability {p} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SolveStatus {
    Solved,
    NoFeasibleSolution,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Solved => "SOLVED",
            SolveStatus::NoFeasibleSolution => "NO_FEASIBLE_SOLUTION",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    /// Best feasible placement; for `NoFeasibleSolution`, the lowest-fitness
    /// infeasible one seen.
    pub best_placement: Placement,
    pub best_evaluation: Evaluation,
    pub status: SolveStatus,
    pub generations_run: usize,
    /// Best feasible fitness found so far, after each generation.
    pub history: Vec<Option<f64>>,
}

impl SolveResult {
    /// First generation (1-based) whose best-so-far equals the final best.
    pub fn generation_of_best(&self) -> Option<usize> {
        let last = (*self.history.last()?)?;
        self.history
            .iter()
            .position(|h| *h == Some(last))
            .map(|i| i + 1)
    }
}

/// Raised by [`select_parents`] when a generation has fewer than two
/// feasible individuals.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct FewerThanTwoFeasible;

fn random_placement(topology: &Topology, num_types: usize, rng: &mut ChaCha8Rng) -> Placement {
    let genes = (0..topology.node_count())
        .map(|i| {
            if topology.is_eligible(NodeId(i)) {
                rng.gen_range(0..=num_types) as u8
            } else {
                0
            }
        })
        .collect();
    Placement::from_genes(genes)
}

fn random_population(
    topology: &Topology,
    num_types: usize,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Placement> {
    (0..count)
        .map(|_| random_placement(topology, num_types, rng))
        .collect()
}

/// Initial population with genes uniform over `0..=num_types` on eligible
/// nodes. Deterministic in `config.seed`.
pub fn initialize_population(
    topology: &Topology,
    num_types: usize,
    config: &GaConfig,
) -> Vec<Placement> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    random_population(topology, num_types, config.population_size, &mut rng)
}

fn rank(a: &(Placement, Evaluation), b: &(Placement, Evaluation)) -> Ordering {
    a.1.fitness
        .total_cmp(&b.1.fitness)
        .then_with(|| a.0.cmp(&b.0))
}

/// Indices of the two fittest feasible individuals, best first. Ties go to
/// the lexicographically smaller gene array.
pub fn select_parents(
    population: &[(Placement, Evaluation)],
) -> Result<(usize, usize), FewerThanTwoFeasible> {
    let mut feasible: Vec<usize> = (0..population.len())
        .filter(|&i| population[i].1.feasible)
        .collect();
    if feasible.len() < 2 {
        return Err(FewerThanTwoFeasible);
    }
    feasible.sort_by(|&a, &b| rank(&population[a], &population[b]));
    Ok((feasible[0], feasible[1]))
}

/// Exchanges the first `cut` genes of the two parents.
pub fn crossover_at(a: &Placement, b: &Placement, cut: usize) -> (Placement, Placement) {
    let (ga, gb) = (a.genes(), b.genes());
    let first = gb[..cut].iter().chain(&ga[cut..]).copied().collect();
    let second = ga[..cut].iter().chain(&gb[cut..]).copied().collect();
    (Placement::from_genes(first), Placement::from_genes(second))
}

/// One-point crossover applied with `probability`; the cut is uniform in
/// `1..len`. Otherwise the parents are copied.
pub fn crossover(
    a: &Placement,
    b: &Placement,
    probability: f64,
    rng: &mut impl Rng,
) -> (Placement, Placement) {
    assert_eq!(a.len(), b.len(), "crossover parents differ in length");
    if rng.gen_bool(probability) && a.len() >= 2 {
        let cut = rng.gen_range(1..a.len());
        crossover_at(a, b, cut)
    } else {
        (a.clone(), b.clone())
    }
}

/// Redraws each eligible gene from `0..=num_types` with `probability`.
pub fn mutate(
    placement: &mut Placement,
    topology: &Topology,
    num_types: usize,
    probability: f64,
    rng: &mut impl Rng,
) {
    for (i, gene) in placement.genes_mut().iter_mut().enumerate() {
        if rng.gen_bool(probability) && topology.is_eligible(NodeId(i)) {
            *gene = rng.gen_range(0..=num_types) as u8;
        }
    }
}

fn evaluate_all(
    instance: &Instance,
    model: &CostModel,
    population: Vec<Placement>,
) -> Result<Vec<(Placement, Evaluation)>, Error> {
    population
        .into_par_iter()
        .map(|p| {
            let e = evaluate(instance, &p, model)?;
            Ok((p, e))
        })
        .collect()
}

fn improves(candidate: &(Placement, Evaluation), incumbent: &Option<(Placement, Evaluation)>) -> bool {
    match incumbent {
        None => true,
        Some(best) => rank(candidate, best) == Ordering::Less,
    }
}

/// Runs the genetic search.
pub fn solve(instance: &Instance, model: &CostModel, config: &GaConfig) -> Result<SolveResult, Error> {
    config.check()?;
    model.check(instance.num_types)?;
    if instance.num_types == 0 {
        return Err(Error::InvalidParameter(
            "genetic search needs at least one appliance type".into(),
        ));
    }

    let topology = &instance.topology;
    let num_types = instance.num_types;
    let size = config.population_size;
    let mutation_rate = config.mutation_rate(topology.node_count());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut population = random_population(topology, num_types, size, &mut rng);
    let mut best: Option<(Placement, Evaluation)> = None;
    let mut least_bad: Option<(Placement, Evaluation)> = None;
    let mut history = Vec::with_capacity(config.evolutions);

    for generation in 1..=config.evolutions {
        let scored = evaluate_all(instance, model, population)?;
        for individual in &scored {
            let slot = if individual.1.feasible {
                &mut best
            } else {
                &mut least_bad
            };
            if improves(individual, slot) {
                *slot = Some(individual.clone());
            }
        }
        let best_fitness = best.as_ref().map(|b| b.1.fitness);
        history.push(best_fitness);

        let reached = matches!((best_fitness, config.target_fitness), (Some(f), Some(t)) if f <= t);
        if reached || generation == config.evolutions {
            break;
        }

        population = match select_parents(&scored) {
            Ok((i, j)) => {
                let (a, b) = (&scored[i].0, &scored[j].0);
                let mut next = Vec::with_capacity(size);
                next.push(a.clone());
                next.push(b.clone());
                while next.len() < size {
                    let (mut c, mut d) = crossover(a, b, config.crossover_probability, &mut rng);
                    mutate(&mut c, topology, num_types, mutation_rate, &mut rng);
                    mutate(&mut d, topology, num_types, mutation_rate, &mut rng);
                    next.push(c);
                    if next.len() < size {
                        next.push(d);
                    }
                }
                next
            }
            Err(FewerThanTwoFeasible) => {
                // Keep whatever feasible individual exists and restart the rest.
                let mut next: Vec<Placement> = best.iter().map(|b| b.0.clone()).collect();
                let fresh = size - next.len();
                next.extend(random_population(topology, num_types, fresh, &mut rng));
                next
            }
        };
    }

    let generations_run = history.len();
    let (status, (best_placement, best_evaluation)) = match best {
        Some(b) => (SolveStatus::Solved, b),
        None => (
            SolveStatus::NoFeasibleSolution,
            least_bad.expect("population is never empty"),
        ),
    };
    Ok(SolveResult {
        best_placement,
        best_evaluation,
        status,
        generations_run,
        history,
    })
}
