use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cvxgauss_cli::{run, write_outputs, CliError, Command, Report, RunConfig};

#[derive(Parser)]
#[command(name = "cvxgauss", version, about = "Gaussian surface measures and integration by parts on convex sets")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Run config (.json or .toml).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `outputs.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads. Results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let mut cfg = RunConfig::load(&cli.config)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let outcome = with_threads(cli.threads, || run(cli.command, &cfg))??;
    let report = Report::new(&cli.command.name(), cfg.hash(), cfg.seed, &outcome);
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.outputs.dir));
    let path = write_outputs(&dir, &report, &outcome, cfg.outputs.csv)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    for r in &outcome.results {
        println!(
            "{:<40} lhs={:<12.6e} rhs={:<12.6e} diff={:<10.3e} tol={:<10.3e} {:?}",
            r.name, r.lhs, r.rhs, r.diff, r.tol, r.verdict
        );
    }
    println!("report: {} (sha256 {})", path.display(), report.hash());
    Ok(outcome.exit_code())
}

#[cfg(feature = "parallel")]
fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<R: Send>(_threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    Ok(f())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
