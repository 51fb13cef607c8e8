use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use april::envs::Environment;
use april::loops::{EsRanking, Method};
use april::selection::Criterion;
use april_harness::plots::cmd_export_plots;
use april_harness::runner::cmd_run;
use april_harness::session::SessionStore;
use april_harness::synthetic::{cmd_synthetic, SyntheticArgs};
use april_harness::{ExperimentConfig, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "april", version, about = "Active preference-based policy search experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Selection criteria on the simplex benchmark.
    Synthetic {
        #[arg(long, value_delimiter = ',', default_values_t = [10, 20, 50, 100])]
        dims: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = Criterion::ALL.to_vec())]
        criteria: Vec<Criterion>,
        #[arg(long, default_value_t = 50)]
        iterations: usize,
        #[arg(long, default_value_t = 101)]
        runs: usize,
        #[arg(long, default_value_t = 1000)]
        candidates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "results/synthetic")]
        out: PathBuf,
    },
    /// Independent runs of one method against the emulated expert.
    Run(RunArgs),
    /// Turns summary CSVs into figure JSON files.
    ExportPlots {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "results/figures")]
        out: PathBuf,
    },
    /// Session API for a human expert.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        #[arg(long, default_value = "sessions")]
        state_dir: PathBuf,
        /// Defaults applied before per-session overrides.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML or JSON file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long = "env")]
    environment: Option<Environment>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    hazard: bool,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    lambda: Option<usize>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    rollouts: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_ranking)]
    es_ranking: Option<EsRanking>,
    #[arg(long)]
    irl_generations: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_ranking(s: &str) -> std::result::Result<EsRanking, String> {
    match s {
        "emulated_score" | "score" => Ok(EsRanking::EmulatedScore),
        "random" => Ok(EsRanking::Random),
        other => Err(format!("unknown ranking {other:?}")),
    }
}

impl RunArgs {
    fn into_config(self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.method {
            c.method = v;
        }
        if let Some(v) = self.environment {
            c.environment = v;
        }
        if let Some(v) = self.noise {
            c.noise = v;
        }
        c.hazard |= self.hazard;
        if let Some(v) = self.iterations {
            c.n_iterations = v;
        }
        if let Some(v) = self.runs {
            c.n_runs = v;
        }
        if let Some(v) = self.lambda {
            c.lambda = v;
        }
        if let Some(v) = self.c {
            c.c = v;
        }
        if let Some(v) = self.radius {
            c.radius = v;
        }
        c.n_rollouts = self.rollouts.or(c.n_rollouts);
        c.hidden = self.hidden.or(c.hidden);
        if let Some(v) = self.seed {
            c.seed = v;
        }
        c.es_ranking = self.es_ranking.or(c.es_ranking);
        c.irl_generations = self.irl_generations.or(c.irl_generations);
        c.output = self.out.or(c.output);
        c.validate()?;
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synthetic {
            dims,
            criteria,
            iterations,
            runs,
            candidates,
            seed,
            out,
        } => {
            let args = SyntheticArgs {
                dims,
                criteria,
                iterations,
                runs,
                candidates,
                seed,
            };
            for path in cmd_synthetic(&args, &out)? {
                println!("{}", path.display());
            }
        }
        Command::Run(args) => {
            let config = args.into_config()?;
            let out = config
                .output
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("results/{}_{}", config.method, config.environment)));
            let outcome = cmd_run(&config, &out)?;
            println!("{} runs, config {}", outcome.logs.len(), &config.hash()[..12]);
            println!("{}", outcome.summary_path.display());
        }
        Command::ExportPlots { inputs, out } => {
            for path in cmd_export_plots(&inputs, &out)? {
                println!("{}", path.display());
            }
        }
        Command::Serve { bind, state_dir, config } => {
            let defaults = match config {
                Some(path) => ExperimentConfig::load(&path)?,
                None => ExperimentConfig::default(),
            };
            let store = SessionStore::open(state_dir)?;
            let runtime = tokio::runtime::Runtime::new().map_err(|source| april_harness::HarnessError::Io {
                path: "tokio runtime".into(),
                source,
            })?;
            println!("listening on http://{bind}");
            runtime.block_on(april_harness::server::serve(defaults, store, bind))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
