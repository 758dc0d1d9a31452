use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use netrace::oracle::run_suite;
use netrace_cli::config::check_writable;
use netrace_cli::{parse_config, preset, run, CliError, Format, RunConfig};

#[derive(Parser)]
#[command(name = "netrace", version, about = "Simulate adaptive network tracing designs")]
struct Cli {
    /// Worker threads (default: NETRACE_THREADS, else one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArgs {
    /// Results file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Override every scenario's replicate count.
    #[arg(long)]
    replicates: Option<u64>,
    /// More progress output on standard error.
    #[arg(short, long, action = clap::ArgAction::Count, conflicts_with = "quiet")]
    verbose: u8,
    /// No progress output.
    #[arg(short, long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenarios of a configuration file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a bundled table preset.
    Reproduce {
        #[arg(long, value_parser = ["1", "2", "4"])]
        table: String,
        /// Restrict to one block, e.g. `srs-m1000`.
        #[arg(long)]
        block: Option<String>,
        /// Master seed for every scenario.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check estimators and inclusion probabilities by exhaustive enumeration.
    EnumerateCheck {
        /// Number of random toy populations.
        #[arg(long, default_value_t = 24)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

impl OutputArgs {
    fn apply(&self, config: &mut RunConfig) -> Result<(), CliError> {
        if let Some(out) = &self.out {
            check_writable(out)?;
            config.output = Some(out.clone());
        }
        if let Some(format) = self.format {
            config.format = format;
        }
        if let Some(r) = self.replicates {
            config.replicates = Some(r);
        }
        if self.quiet {
            config.verbosity = 0;
        } else if self.verbose > 0 {
            config.verbosity = (1 + self.verbose).min(2);
        }
        config.validate()
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { config, output } => {
            let text = std::fs::read_to_string(&config).map_err(|e| CliError::io("reading", &config, e))?;
            let mut config = parse_config(&text)?;
            output.apply(&mut config)?;
            run(&config).map(|_| ())
        }
        Command::Reproduce {
            table,
            block,
            seed,
            output,
        } => {
            let table: u8 = table.parse().expect("validated by clap");
            let mut config = preset(table, block.as_deref())?;
            if let Some(seed) = seed {
                config.scenarios.iter_mut().for_each(|sc| sc.seed = seed);
            }
            output.apply(&mut config)?;
            run(&config).map(|_| ())
        }
        Command::EnumerateCheck { count, seed } => {
            let started = Instant::now();
            let report = run_suite(count, seed);
            for failure in &report.failures {
                eprintln!("{failure}");
            }
            println!(
                "{} populations, {} checks, {} failures in {:.2?}",
                report.populations,
                report.checks,
                report.failures.len(),
                started.elapsed()
            );
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::Oracle(report.failures.len()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(netrace::mc::default_threads);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return ExitCode::FAILURE;
        }
    };
    match pool.install(|| execute(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
