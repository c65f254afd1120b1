use std::path::PathBuf;
use std::process::ExitCode;

use accelerq::hyperopt::{optimize, HyperparamSpec, SearchConfig, SurrogateObjective};
use accelerq::pipeline::{run_solver, train_surrogate, EvalJob, MiningJob};
use accelerq::surrogate::{read_dataset, GbtConfig, GbtModel};
use accelerq::{ExecutionMode, Hyperparams, PauliHamiltonian, ShotBudget, Solver};
use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "accelerq",
    version,
    about = "Ground-state solvers with surrogate-tuned hyperparameters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the exact ground-state energy.
    Oracle { hamiltonian: PathBuf },
    /// Run one solver on a Hamiltonian.
    Solve(SolveArgs),
    /// Generate training records from a mining job file.
    Mine { config: PathBuf },
    /// Fit a surrogate model on a dataset.
    Train(TrainArgs),
    /// Search hyperparameters for a Hamiltonian under a trained model.
    Optimize(OptimizeArgs),
    /// Compare default and optimized hyperparameters on a set of systems.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_parser = ["qcels", "adapt-qsci"])]
    algo: String,
    hamiltonian: PathBuf,
    /// Hyperparameter file (as written by `optimize`); flags override it.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Exact expectation values instead of shot sampling.
    #[arg(long, conflicts_with = "shots")]
    exact: bool,
    /// Shot budget for sampled execution.
    #[arg(long, default_value_t = ShotBudget::DEFAULT_CAP)]
    shots: u64,
    #[arg(long, env = "ACCELERQ_SEED", default_value_t = 0)]
    seed: u64,
    /// Also report wall-clock time (on stderr).
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    hyper: HyperFlags,
}

#[derive(Args)]
#[command(next_help_heading = "Hyperparameters")]
struct HyperFlags {
    #[arg(long = "delta_t")]
    delta_t: Option<f64>,
    #[arg(long = "n_Z")]
    n_z: Option<f64>,
    #[arg(long = "ham_terms")]
    ham_terms: Option<f64>,
    #[arg(long = "ham_cutoff")]
    ham_cutoff: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "num_pickup")]
    num_pickup: Option<f64>,
    #[arg(long = "coeff_cutoff")]
    coeff_cutoff: Option<f64>,
    #[arg(long = "self_selection", value_parser = clap::builder::BoolishValueParser::new())]
    self_selection: Option<bool>,
    #[arg(long = "iter_max")]
    iter_max: Option<f64>,
    #[arg(long = "sampling_shots")]
    sampling_shots: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    #[arg(long = "final_sampling_shots_coeff")]
    final_sampling_shots_coeff: Option<f64>,
    #[arg(long = "num_precise_gradient")]
    num_precise_gradient: Option<f64>,
    #[arg(long = "max_num_converged")]
    max_num_converged: Option<f64>,
    #[arg(long = "reset_ignored_inx_mode")]
    reset_ignored_inx_mode: Option<f64>,
}

impl HyperFlags {
    fn given(&self) -> Vec<(&'static str, f64)> {
        let flags = [
            ("delta_t", self.delta_t),
            ("n_Z", self.n_z),
            ("ham_terms", self.ham_terms),
            ("ham_cutoff", self.ham_cutoff),
            ("alpha", self.alpha),
            ("num_pickup", self.num_pickup),
            ("coeff_cutoff", self.coeff_cutoff),
            (
                "self_selection",
                self.self_selection.map(|b| if b { 1.0 } else { 0.0 }),
            ),
            ("iter_max", self.iter_max),
            ("sampling_shots", self.sampling_shots),
            ("atol", self.atol),
            (
                "final_sampling_shots_coeff",
                self.final_sampling_shots_coeff,
            ),
            ("num_precise_gradient", self.num_precise_gradient),
            ("max_num_converged", self.max_num_converged),
            ("reset_ignored_inx_mode", self.reset_ignored_inx_mode),
        ];
        flags
            .into_iter()
            .filter_map(|(n, v)| v.map(|v| (n, v)))
            .collect()
    }
}

#[derive(Args)]
struct TrainArgs {
    dataset: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, default_value_t = GbtConfig::default().n_trees)]
    trees: usize,
    #[arg(long, default_value_t = GbtConfig::default().max_depth)]
    depth: usize,
    #[arg(long, default_value_t = GbtConfig::default().learning_rate)]
    learning_rate: f64,
    #[arg(long, default_value_t = GbtConfig::default().min_leaf)]
    min_leaf: usize,
    #[arg(long, default_value_t = GbtConfig::default().subsample)]
    subsample: f64,
    #[arg(long, env = "ACCELERQ_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct OptimizeArgs {
    model: PathBuf,
    hamiltonian: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, default_value_t = SearchConfig::default().population)]
    population: usize,
    #[arg(long, default_value_t = SearchConfig::default().generations)]
    generations: usize,
    #[arg(long, default_value_t = SearchConfig::default().elite_fraction)]
    elite_fraction: f64,
    #[arg(long, env = "ACCELERQ_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EvaluateArgs {
    config: PathBuf,
    /// Solver runs per configuration; the best is reported.
    #[arg(long)]
    repeats: Option<usize>,
    /// Overrides the job file's seed.
    #[arg(long, env = "ACCELERQ_SEED")]
    seed: Option<u64>,
    /// Write the tab-separated report here as well.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Include wall-clock runtimes in the report.
    #[arg(long)]
    timing: bool,
}

/// Errors that should exit with the usage status.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Oracle { hamiltonian } => {
            let h = PauliHamiltonian::read(&hamiltonian)?;
            println!("{:?}", h.exact_ground_state()?.energy);
        }
        Command::Solve(args) => solve(args)?,
        Command::Mine { config } => {
            let job = MiningJob::read(&config)?;
            let s = job.mine()?;
            println!(
                "wrote {} records to {} ({} skipped, {} already present)",
                s.written,
                job.output.display(),
                s.skipped,
                s.resumed
            );
        }
        Command::Train(args) => train(args)?,
        Command::Optimize(args) => optimize_cmd(args)?,
        Command::Evaluate(args) => {
            let mut job = EvalJob::read(&args.config)?;
            if let Some(r) = args.repeats {
                job.repeats = r;
            }
            if let Some(s) = args.seed {
                job.seed = s;
            }
            let report = job.run()?;
            print!("{}", report.to_table(args.timing));
            if let Some(out) = &args.output {
                std::fs::write(out, report.to_tsv(args.timing))
                    .with_context(|| format!("writing {}", out.display()))?;
            }
        }
    }
    Ok(())
}

fn solve(args: SolveArgs) -> anyhow::Result<()> {
    let solver: Solver = args.algo.parse()?;
    let mut hp = match &args.params {
        Some(path) => Hyperparams::read(path)?,
        None => solver.defaults(),
    };
    if hp.solver() != solver {
        return Err(UsageError(format!(
            "{} holds {} hyperparameters but --algo is {solver}",
            args.params
                .as_ref()
                .map_or(String::new(), |p| p.display().to_string()),
            hp.solver()
        ))
        .into());
    }
    for (name, value) in args.hyper.given() {
        if !solver.field_names().contains(&name) {
            return Err(UsageError(format!("--{name} does not apply to {solver}")).into());
        }
        hp.set(name, value)
            .map_err(|e| UsageError(format!("--{name}: {e}")))?;
    }
    let h = PauliHamiltonian::read(&args.hamiltonian)?;
    let (mode, mut budget) = if args.exact {
        (ExecutionMode::Exact, ShotBudget::default())
    } else {
        (ExecutionMode::Sampled, ShotBudget::new(args.shots))
    };
    let est = run_solver(&h, &hp, &mut budget, mode, args.seed)?;
    println!("energy {:?}", est.value);
    println!("iterations {}", est.iterations);
    println!("shots {}", est.shots_used);
    println!("truncated {}", est.truncated);
    println!("degenerate {}", est.degenerate);
    if args.timing {
        eprintln!("runtime_s {:.3}", est.wall_time_s);
    }
    Ok(())
}

fn train(args: TrainArgs) -> anyhow::Result<()> {
    let records = read_dataset(&args.dataset)?;
    if records.len() < 20 {
        bail!(
            "{} has {} records; at least 20 are needed",
            args.dataset.display(),
            records.len()
        );
    }
    let cfg = GbtConfig {
        n_trees: args.trees,
        max_depth: args.depth,
        learning_rate: args.learning_rate,
        min_leaf: args.min_leaf,
        subsample: args.subsample,
        seed: args.seed,
    };
    let out = train_surrogate(&records, &cfg, args.seed)?;
    out.model.save(&args.output)?;
    println!(
        "records {} (train {}, test {}, holdout {})",
        records.len(),
        out.split.train.len(),
        out.split.test.len(),
        out.split.holdout.len()
    );
    for (name, m) in [("test", out.test), ("holdout", out.holdout)] {
        if let Some(m) = m {
            println!("{name} mae {:.6e} mse {:.6e} r2 {:.4}", m.mae, m.mse, m.r2);
        }
    }
    println!("model {}", args.output.display());
    Ok(())
}

fn optimize_cmd(args: OptimizeArgs) -> anyhow::Result<()> {
    let model = GbtModel::load(&args.model)?;
    let solver = model
        .solver
        .with_context(|| format!("{} does not record its solver", args.model.display()))?;
    let h = PauliHamiltonian::read(&args.hamiltonian)?;
    let objective = SurrogateObjective::new(&model, &h, solver)?;
    let cfg = SearchConfig {
        population: args.population,
        generations: args.generations,
        elite_fraction: args.elite_fraction,
        seed: args.seed,
        ..Default::default()
    };
    let spec = HyperparamSpec::for_solver(solver);
    let defaults = solver.defaults();
    let result = optimize(&objective, &spec, &cfg, &[defaults.to_values()])?;
    let best = spec.to_hyperparams(&result.best)?;
    std::fs::write(&args.output, best.to_json() + "\n")
        .with_context(|| format!("writing {}", args.output.display()))?;
    println!("predicted {:?}", result.best_score);
    println!("default_predicted {:?}", objective.predict(&defaults)?);
    println!("evaluations {}", result.evaluations);
    println!("vector {}", args.output.display());
    Ok(())
}
