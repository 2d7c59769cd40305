use std::path::PathBuf;
use std::process::ExitCode;

use betagamma_cli::{exit, runner, Config};
use clap::{Args, Parser, Subcommand};

/// Beta-gamma terahertz channel experiments.
#[derive(Parser)]
#[command(name = "betagamma", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every experiment in the config and write CSV files and a manifest.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Check the config without running anything.
    Validate {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Args)]
struct Overrides {
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn load(path: &PathBuf, o: &Overrides) -> Result<Config, ExitCode> {
    let mut config = Config::from_path(path).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(exit::CONFIG as u8)
    })?;
    if let Some(seed) = o.seed {
        config.seed = seed;
    }
    if let Some(dir) = &o.out_dir {
        config.out_dir = dir.clone();
    }
    if let Some(t) = o.threads {
        config.threads = (t > 0).then_some(t);
    }
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(exit::CONFIG as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Validate { config, overrides } => match load(&config, &overrides) {
            Ok(c) => {
                println!("{}: ok", config.display());
                for line in runner::describe(&c) {
                    println!("  {line}");
                }
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Run { config, overrides } => {
            let c = match load(&config, &overrides) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(c.threads.unwrap_or(0))
                .build()
                .expect("thread pool");
            match pool.install(|| runner::run(&c)) {
                Ok(summary) => {
                    for o in &summary.outputs {
                        println!("{}", c.out_dir.join(&o.file).display());
                    }
                    println!("{}", summary.manifest.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit::RUN as u8)
                }
            }
        }
    }
}
