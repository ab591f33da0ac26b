//! `vsaplace` command-line interface.
//!
//! Exit codes: `0` solved, `2` no feasible solution, `1` error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use vsaplace_core::bench::{run_grid, write_csv, BenchConfig};
use vsaplace_core::io::PlanFormat;
use vsaplace_core::oracle::{cardinality_solve, exhaustive_solve, DEFAULT_BUDGET};
use vsaplace_core::topology::{generate_fat_tree, generate_random, DemandSet, NodeId, WeightRange};
use vsaplace_core::{
    solve, CostModel, GaConfig, Instance, PlacementPlan, ProblemFile, SmLimit, SolveStatus,
};

pub const EXIT_SOLVED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NO_FEASIBLE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "vsaplace", version, about = "Place ordered security appliances in a network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the genetic search on a problem file.
    Solve(SolveArgs),
    /// Find the exact optimum by enumeration (small instances only).
    Oracle(OracleArgs),
    /// Generate a problem file.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Run the seeded experiment grid and print a CSV report.
    Bench(BenchArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Format {
    Text,
    Json,
}

impl From<Format> for PlanFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => PlanFormat::Text,
            Format::Json => PlanFormat::Json,
        }
    }
}

#[derive(Args, Debug)]
struct CostArgs {
    /// Appliance cost; give once for all types or once per type.
    #[arg(long = "sm-cost")]
    sm_cost: Vec<f64>,
    #[arg(long, default_value_t = CostModel::DEFAULT_PENALTY)]
    penalty: f64,
    /// Maximum number of deployed appliances (unlimited if absent).
    #[arg(long)]
    max_sm: Option<usize>,
    #[arg(long, default_value_t = 0)]
    max_unanalyzed: usize,
    /// Forbid passing a later appliance type before earlier ones.
    #[arg(long)]
    strict_order: bool,
}

impl CostArgs {
    fn model(&self, num_types: usize) -> Result<CostModel> {
        let sm_cost = match self.sm_cost.len() {
            0 => vec![CostModel::DEFAULT_SM_COST; num_types],
            1 => vec![self.sm_cost[0]; num_types],
            k if k == num_types => self.sm_cost.clone(),
            k => bail!("{k} --sm-cost values given for {num_types} appliance types"),
        };
        let model = CostModel {
            sm_cost,
            penalty: self.penalty,
            max_sm: self.max_sm.map_or(SmLimit::Unlimited, SmLimit::AtMost),
            max_unanalyzed: self.max_unanalyzed,
            strict_order: self.strict_order,
        };
        model.check(num_types)?;
        Ok(model)
    }
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct SolveArgs {
    problem: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    population: usize,
    /// Overrides the evolution count from the problem file.
    #[arg(long)]
    evolutions: Option<usize>,
    #[arg(long = "crossover-prob", default_value_t = 0.7)]
    crossover_prob: f64,
    /// Per-gene mutation probability (default 1/n).
    #[arg(long = "mutation-prob")]
    mutation_prob: Option<f64>,
    #[arg(long)]
    target_fitness: Option<f64>,
    #[command(flatten)]
    cost: CostArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct OracleArgs {
    problem: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Enumerate by appliance count and stop at the cost bound.
    #[arg(long)]
    by_count: bool,
    #[command(flatten)]
    cost: CostArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// Directed random graph with integer weights.
    Random(RandomArgs),
    /// k-ary fat tree with uniform weights.
    FatTree(FatTreeArgs),
}

#[derive(Args, Debug)]
struct ProblemArgs {
    #[arg(long, default_value_t = 1)]
    types: usize,
    #[arg(long, default_value_t = 5)]
    evolutions: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RandomArgs {
    #[arg(long)]
    nodes: usize,
    #[arg(long = "edge-prob")]
    edge_prob: f64,
    #[arg(long = "weight-min", default_value_t = 1.0)]
    weight_min: f64,
    #[arg(long = "weight-max", default_value_t = 10.0)]
    weight_max: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of source nodes, taken from the lowest indices.
    #[arg(long, default_value_t = 1)]
    sources: usize,
    /// Number of destination nodes, taken from the highest indices.
    #[arg(long, default_value_t = 1)]
    destinations: usize,
    #[command(flatten)]
    problem: ProblemArgs,
}

#[derive(Args, Debug)]
struct FatTreeArgs {
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    weight: f64,
    #[arg(long)]
    reverse: bool,
    #[command(flatten)]
    problem: ProblemArgs,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Seeds per cell, counting up from --base-seed.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long, default_value_t = 1)]
    base_seed: u64,
    #[arg(long, value_delimiter = ',', default_values_t = [10usize, 20, 50])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    max_types: usize,
    #[arg(long, default_value_t = 50)]
    population: usize,
    #[arg(long, default_value_t = 5)]
    evolutions: usize,
    #[arg(long = "edge-prob", default_value_t = 0.3)]
    edge_prob: f64,
    /// Skip the fat-tree rows.
    #[arg(long)]
    no_fat_tree: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn load_problem(path: &Path) -> Result<ProblemFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ProblemFile::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn exit_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Solved => EXIT_SOLVED,
        SolveStatus::NoFeasibleSolution => EXIT_NO_FEASIBLE,
    }
}

fn run_solve(args: &SolveArgs) -> Result<i32> {
    let problem = load_problem(&args.problem)?;
    let instance = problem.instance()?;
    let model = args.cost.model(instance.num_types)?;
    let config = GaConfig {
        population_size: args.population,
        evolutions: args.evolutions.unwrap_or(problem.evolutions),
        crossover_probability: args.crossover_prob,
        mutation_probability: args.mutation_prob,
        seed: args.seed,
        target_fitness: args.target_fitness,
    };
    let started = Instant::now();
    let result = solve(&instance, &model, &config)?;
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    let plan = PlacementPlan::from_solve(&instance, &model, &config, &result, Some(wall_ms))?;
    emit(args.output.out.as_deref(), &plan.write(args.output.format.into())?)?;
    Ok(exit_code(plan.status()))
}

fn run_oracle(args: &OracleArgs) -> Result<i32> {
    let problem = load_problem(&args.problem)?;
    let instance = problem.instance()?;
    let model = args.cost.model(instance.num_types)?;
    let started = Instant::now();
    let result = if args.by_count {
        cardinality_solve(&instance, &model, args.budget)?
    } else {
        exhaustive_solve(&instance, &model, args.budget)?
    };
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    let plan = PlacementPlan::from_oracle(&instance, &model, args.budget, &result, Some(wall_ms))?;
    emit(args.output.out.as_deref(), &plan.write(args.output.format.into())?)?;
    Ok(exit_code(plan.status()))
}

fn run_gen(command: &GenCommand) -> Result<i32> {
    let (instance, problem) = match command {
        GenCommand::Random(args) => {
            let topology = generate_random(
                args.nodes,
                args.edge_prob,
                WeightRange::new(args.weight_min, args.weight_max),
                args.seed,
            )?;
            if args.sources + args.destinations > args.nodes {
                bail!(
                    "{} sources and {} destinations do not fit in {} nodes",
                    args.sources,
                    args.destinations,
                    args.nodes
                );
            }
            let sources = (0..args.sources).map(NodeId).collect();
            let destinations = (args.nodes - args.destinations..args.nodes).map(NodeId).collect();
            let demands = DemandSet::new(sources, destinations)?;
            (Instance::new(topology, demands, args.problem.types)?, &args.problem)
        }
        GenCommand::FatTree(args) => {
            let (topology, demands) = generate_fat_tree(args.k, args.weight, args.reverse)?;
            (Instance::new(topology, demands, args.problem.types)?, &args.problem)
        }
    };
    let file = ProblemFile::from_instance(&instance, problem.evolutions);
    emit(problem.out.as_deref(), file.to_text().as_bytes())?;
    Ok(EXIT_SOLVED)
}

fn run_bench(args: &BenchArgs) -> Result<i32> {
    let config = BenchConfig {
        sizes: args.sizes.clone(),
        max_types: args.max_types,
        seeds: (args.base_seed..args.base_seed + args.seeds).collect(),
        edge_probability: args.edge_prob,
        population_size: args.population,
        evolutions: args.evolutions,
        fat_tree_k: (!args.no_fat_tree).then_some(4),
        ..BenchConfig::default()
    };
    let rows = run_grid(&config)?;
    emit(args.out.as_deref(), &write_csv(&rows)?)?;
    Ok(EXIT_SOLVED)
}

/// Parses `args` (program name first) and runs the chosen subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_SOLVED };
        }
    };
    let outcome = match &cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Oracle(args) => run_oracle(args),
        Command::Gen(command) => run_gen(command),
        Command::Bench(args) => run_bench(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}
