//! Seeded experiment grid: random graphs of several sizes and type counts,
//! plus the k = 4 fat tree in both directions, each solved by the GA.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cost::CostModel;
use crate::ga::{solve, GaConfig, SolveResult, SolveStatus};
use crate::topology::{generate_fat_tree, generate_random, DemandSet, NodeId, WeightRange};
use crate::{Error, Instance};

pub const CSV_HEADER: [&str; 8] = [
    "topology",
    "n",
    "T",
    "evolutions",
    "seed",
    "status",
    "best_fitness",
    "wall_ms",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub max_types: usize,
    /// One run per seed for every cell.
    pub seeds: Vec<u64>,
    pub edge_probability: f64,
    pub weights: WeightRange,
    pub population_size: usize,
    pub evolutions: usize,
    /// `(n, T, evolutions)` overrides for cells that need longer runs.
    pub overrides: Vec<(usize, usize, usize)>,
    pub sm_cost: f64,
    pub penalty: f64,
    pub fat_tree_k: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![10, 20, 50],
            max_types: 5,
            seeds: vec![1],
            edge_probability: 0.3,
            weights: WeightRange::new(1.0, 10.0),
            population_size: 50,
            evolutions: 5,
            overrides: vec![(10, 5, 10)],
            sm_cost: CostModel::DEFAULT_SM_COST,
            penalty: CostModel::DEFAULT_PENALTY,
            fat_tree_k: Some(4),
        }
    }
}

impl BenchConfig {
    pub fn evolutions_for(&self, n: usize, types: usize) -> usize {
        self.overrides
            .iter()
            .find(|&&(on, ot, _)| on == n && ot == types)
            .map_or(self.evolutions, |&(_, _, e)| e)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub topology: String,
    pub n: usize,
    pub types: usize,
    pub evolutions: usize,
    pub seed: u64,
    pub status: SolveStatus,
    pub best_fitness: Option<f64>,
    pub wall_ms: f64,
    /// Not part of the CSV; first generation reaching the final best.
    pub generation_of_best: Option<usize>,
}

/// Random-graph instance used by the grid: flow from node 0 to node n-1.
pub fn random_instance(
    n: usize,
    num_types: usize,
    edge_probability: f64,
    weights: WeightRange,
    seed: u64,
) -> Result<Instance, Error> {
    let topology = generate_random(n, edge_probability, weights, seed)?;
    let demands = DemandSet::new(vec![NodeId(0)], vec![NodeId(n - 1)])?;
    Instance::new(topology, demands, num_types)
}

/// Solves one instance and records the outcome.
pub fn run_cell(
    label: &str,
    instance: &Instance,
    model: &CostModel,
    config: &GaConfig,
) -> Result<(BenchRow, SolveResult), Error> {
    let started = Instant::now();
    let result = solve(instance, model, config)?;
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    let row = BenchRow {
        topology: label.to_string(),
        n: instance.topology.node_count(),
        types: instance.num_types,
        evolutions: config.evolutions,
        seed: config.seed,
        status: result.status,
        best_fitness: (result.status == SolveStatus::Solved).then_some(result.best_evaluation.fitness),
        wall_ms,
        generation_of_best: result.generation_of_best(),
    };
    Ok((row, result))
}

pub fn run_grid(config: &BenchConfig) -> Result<Vec<BenchRow>, Error> {
    let mut rows = Vec::new();
    let ga = |evolutions: usize, seed: u64| GaConfig {
        population_size: config.population_size,
        evolutions,
        seed,
        ..GaConfig::default()
    };
    for &n in &config.sizes {
        for types in 1..=config.max_types {
            let model = CostModel::uniform(types, config.sm_cost, config.penalty);
            let evolutions = config.evolutions_for(n, types);
            for &seed in &config.seeds {
                let instance =
                    random_instance(n, types, config.edge_probability, config.weights, seed)?;
                rows.push(run_cell("random", &instance, &model, &ga(evolutions, seed))?.0);
            }
        }
    }
    if let Some(k) = config.fat_tree_k {
        for (label, reverse) in [("fat-tree", false), ("fat-tree-reverse", true)] {
            let (topology, demands) = generate_fat_tree(k, 1.0, reverse)?;
            for types in 1..=config.max_types {
                let model = CostModel::uniform(types, config.sm_cost, config.penalty);
                let instance = Instance::new(topology.clone(), demands.clone(), types)?;
                for &seed in &config.seeds {
                    let row = run_cell(label, &instance, &model, &ga(config.evolutions, seed))?.0;
                    rows.push(row);
                }
            }
        }
    }
    Ok(rows)
}

pub fn write_csv(rows: &[BenchRow]) -> Result<Vec<u8>, Error> {
    let to_err = |e: csv::Error| Error::Serialization(e.to_string());
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(CSV_HEADER).map_err(to_err)?;
    for r in rows {
        writer
            .write_record([
                r.topology.clone(),
                r.n.to_string(),
                r.types.to_string(),
                r.evolutions.to_string(),
                r.seed.to_string(),
                r.status.as_str().to_string(),
                r.best_fitness.map(|f| f.to_string()).unwrap_or_default(),
                format!("{:.3}", r.wall_ms),
            ])
            .map_err(to_err)?;
    }
    writer
        .into_inner()
        .map_err(|e| Error::Serialization(e.to_string()))
}
