//! Fixtures shared by the criterion benchmarks.

use vsaplace_core::bench::random_instance;
use vsaplace_core::topology::{generate_fat_tree, WeightRange};
use vsaplace_core::{CostModel, Instance};

pub fn fat_tree(k: usize, num_types: usize) -> Instance {
    let (topology, demands) = generate_fat_tree(k, 1.0, false).expect("valid fat tree");
    Instance::new(topology, demands, num_types).expect("valid instance")
}

pub fn random(n: usize, num_types: usize, seed: u64) -> Instance {
    random_instance(n, num_types, 0.3, WeightRange::new(1.0, 10.0), seed).expect("valid instance")
}

pub fn model(num_types: usize) -> CostModel {
    CostModel::uniform(num_types, CostModel::DEFAULT_SM_COST, CostModel::DEFAULT_PENALTY)
}
