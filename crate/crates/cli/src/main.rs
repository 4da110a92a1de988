use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use asymptopia::Error;
use asymptopia_cli::config::RunConfig;
use asymptopia_cli::report::{emit_report, Format};
use asymptopia_cli::suite::{plan, run_suite, Suite};

#[derive(Parser)]
#[command(
    name = "asymptopia",
    version,
    about = "Numerical verification of the asymptotic charge category"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every suite.
    Verify(Common),
    /// Bi-asymptotic braiding limits per pair and cone.
    Braiding(Common),
    /// Braiding limits along a chain of rotated cones.
    Homotopy(Common),
    /// Decay of the asymptotic residuals with radius.
    Decay(Common),
    /// Sequence-algebra checks on matrix sequences.
    Seqalg(Common),
    /// Run one named suite.
    Report {
        #[arg(long, value_enum)]
        suite: Suite,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Path to a TOML run configuration, or `default` for the built-in one.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(suite: Suite, common: &Common) -> Result<bool, Error> {
    let mut config = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    eprintln!("suite {} plan:", suite.name());
    for (id, rows) in plan(&config, suite) {
        eprintln!("  {id}: {rows} rows");
    }
    let report = run_suite(&config, suite)?;
    let dir = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output_dir));
    let path = emit_report(&report, common.format, &dir)?;
    for row in report.failures() {
        eprintln!(
            "FAIL {} pair={} cone={} radius={:?} residual={:e} threshold={:e}",
            row.check_id, row.charge_pair, row.cone_id, row.radius, row.residual, row.threshold
        );
    }
    eprintln!(
        "{} rows, {} failed, wall time {:.2?}, report at {}",
        report.rows.len(),
        report.failures().count(),
        report.wall_time,
        path.display()
    );
    Ok(report.all_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (suite, common) = match &cli.command {
        Command::Verify(c) => (Suite::All, c),
        Command::Braiding(c) => (Suite::Braiding, c),
        Command::Homotopy(c) => (Suite::Homotopy, c),
        Command::Decay(c) => (Suite::Decay, c),
        Command::Seqalg(c) => (Suite::Seqalg, c),
        Command::Report { suite, common } => (*suite, common),
    };
    match run(suite, common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Usage(_) => ExitCode::from(2),
                Error::Domain(_) | Error::Consistency(_) => ExitCode::from(1),
            }
        }
    }
}
