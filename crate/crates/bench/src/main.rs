use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vqa_bench::commands::{cmd_analyze, cmd_exact, cmd_run, cmd_schedule, cmd_tune};
use vqa_bench::config::ProblemSpec;
use vqa_bench::{BenchError, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "vqa-bench", version, about = "Noisy VQE optimizer benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment configuration (flat TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Overrides `base_seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run all repetitions and write traces, summary and comparison tables.
    Run(Common),
    /// Tune the configured optimizer by iterated racing and write elite configs.
    Tune(Common),
    /// Aggregate summary files into per-system figure tables.
    Analyze {
        /// Run directories or summary files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "analysis")]
        out: PathBuf,
    },
    /// Print the exact ground energy of a problem.
    Exact {
        #[arg(long, conflicts_with = "hamiltonian", required_unless_present = "hamiltonian")]
        config: Option<PathBuf>,
        /// Hamiltonian file, instead of a config.
        #[arg(long)]
        hamiltonian: Option<PathBuf>,
    },
    /// Print the shot schedule of a config.
    Schedule {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &Path, seed: Option<u64>) -> Result<Experiment, BenchError> {
    let exp = ExperimentConfig::load(path)?.validate()?;
    Ok(match seed {
        Some(s) => exp.with_seed(s),
        None => exp,
    })
}

fn execute(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Run(c) => {
            let exp = load(&c.config, c.seed)?;
            let a = cmd_run(&exp, &c.out, c.workers)?;
            let mean = a.outputs.iter().map(|o| o.rel_err_favourite).sum::<f64>() / a.outputs.len().max(1) as f64;
            println!("{}: {} runs, mean favourite relative error {mean:.6e}", exp.label, a.outputs.len());
            println!("wrote {} files to {}", a.files.len(), c.out.display());
        }
        Command::Tune(c) => {
            let exp = load(&c.config, c.seed)?;
            let a = cmd_tune(&exp, &c.out, c.workers)?;
            if let Some(best) = a.report.best() {
                println!("best elite: mean {:.6e} {}", best.mean_score(), a.report.space.describe(&best.values));
            }
            println!("{} evaluations of {}; wrote {} files to {}", a.report.evaluations_used, a.report.budget, a.files.len(), c.out.display());
        }
        Command::Analyze { inputs, out } => {
            for f in cmd_analyze(&inputs, &out)? {
                println!("{}", f.display());
            }
        }
        Command::Exact { config, hamiltonian } => {
            let problem = match (config, hamiltonian) {
                (_, Some(h)) => ProblemSpec::File(h),
                (Some(c), None) => load(&c, None)?.problem,
                (None, None) => unreachable!("clap requires one of the two"),
            };
            print!("{}", cmd_exact(&problem)?.render());
        }
        Command::Schedule { config } => print!("{}", cmd_schedule(&load(&config, None)?)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
