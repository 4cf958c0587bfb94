use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use restricted_approx::report::{all_passed, sort_rows, ReportRow};
use restricted_approx_cli::config::ExperimentConfig;
use restricted_approx_cli::output::{write_report, write_rows, Format};
use restricted_approx_cli::run::{self, RunError};

#[derive(Parser)]
#[command(
    name = "rapprox",
    version,
    about = "Restricted nonlinear approximation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment config; every section is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for `<subcommand>.<format>`; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, Subcommand)]
enum Command {
    /// TL, Besov, Lorentz and approximation-space norms of a sequence file.
    Norm,
    /// Exact and greedy restricted approximation errors.
    Sigma,
    /// Integral and dyadic approximation norms, dyadic representation.
    ApproxNorm,
    /// Democracy sweep over cube families.
    Democracy,
    /// Empirical Jackson constants over partition suites.
    Jackson,
    /// Empirical Bernstein constants over partition suites.
    Bernstein,
    /// Lorentz = Besov identity on random sequences.
    LorentzBesov,
    /// All acceptance criteria.
    VerifyAll,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Norm => "norm",
            Command::Sigma => "sigma",
            Command::ApproxNorm => "approx-norm",
            Command::Democracy => "democracy",
            Command::Jackson => "jackson",
            Command::Bernstein => "bernstein",
            Command::LorentzBesov => "lorentz-besov",
            Command::VerifyAll => "verify-all",
        }
    }
}

fn execute(cli: &Cli) -> Result<Vec<ReportRow>, RunError> {
    let cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.validate()?;
    let seed = cli.seed.unwrap_or(cfg.seed);
    let mut rows = match cli.command {
        Command::Norm => run::run_norm(&cfg),
        Command::Sigma => run::run_sigma(&cfg),
        Command::ApproxNorm => run::run_approx_norm(&cfg),
        Command::Democracy => run::run_democracy(&cfg, seed),
        Command::Jackson => run::run_jackson(&cfg, seed),
        Command::Bernstein => run::run_bernstein(&cfg, seed),
        Command::LorentzBesov => run::run_lorentz_besov(&cfg, seed),
        Command::VerifyAll => run::run_verify_all(&cfg, seed),
    }?;
    sort_rows(&mut rows);
    Ok(rows)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let rows = match execute(&cli) {
        Ok(rows) => rows,
        Err(e) => {
            eprintln!("rapprox: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &cli.out {
        Some(dir) => write_report(&rows, cli.format, dir, cli.command.name()).map(|p| {
            eprintln!("wrote {}", p.display());
        }),
        None => write_rows(&rows, cli.format, std::io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("rapprox: cannot write report: {e}");
        return ExitCode::from(2);
    }
    let failed: Vec<&str> = rows
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.id.as_str())
        .collect();
    eprintln!("{} rows, {} failed", rows.len(), failed.len());
    for id in &failed {
        eprintln!("  FAIL {id}");
    }
    if all_passed(&rows) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
