use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mixing_sgd::harness::{self, ExperimentConfig};
use mixing_sgd::Error;

#[derive(Parser)]
#[command(name = "mixing-sgd", version, about = "Online SGD experiments over phi-mixing data streams")]
struct Cli {
    /// Override the experiment base seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Print summaries to stderr
    #[arg(long, short, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Bias of the batch loss over a (rate, tau, B) grid
    BiasSweep(Io),
    /// Loss curves of several schemes at equal sample budgets
    Compare(Io),
    /// Exact or estimated mixing coefficients, plain and subsampled
    MixingCheck(Io),
    /// All bound evaluators as JSON
    BoundsReport(Io),
}

fn run(cli: &Cli) -> Result<(), Error> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    }
    let io = match &cli.command {
        Command::BiasSweep(io) | Command::Compare(io) | Command::MixingCheck(io) | Command::BoundsReport(io) => io,
    };
    let mut cfg = ExperimentConfig::from_file(&io.config).map_err(|e| match e {
        Error::Io(err) => Error::Config {
            line: 0,
            msg: format!("{}: {err}", io.config.display()),
        },
        other => other,
    })?;
    if let Some(seed) = cli.seed {
        cfg = cfg.with_base_seed(seed);
    }
    let text = match &cli.command {
        Command::BiasSweep(_) => harness::cmd_bias_sweep(&cfg)?,
        Command::Compare(_) => {
            let res = harness::compare(&cfg)?;
            if cli.verbose {
                for c in &res.curves {
                    eprintln!(
                        "{}: final {:.6} ± {:.6}, tail {:.6} ± {:.6}",
                        c.name, c.final_mean, c.final_stderr, c.tail_mean, c.tail_stderr
                    );
                }
            }
            harness::compare_csv(&res)
        }
        Command::MixingCheck(_) => harness::cmd_mixing_check(&cfg)?,
        Command::BoundsReport(_) => harness::cmd_bounds_report(&cfg)?,
    };
    std::fs::write(&io.out, text)?;
    if cli.verbose {
        eprintln!("wrote {}", io.out.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
