use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spinfield::scenario::{self, ScenarioError, EXIT_CHECK_FAILED};

#[derive(Parser)]
#[command(name = "spinfield", version, about = "Run spin-field lattice scenarios from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario and write report.json (plus requested CSV outputs).
    Run {
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Print every check.
        #[arg(long)]
        verbose: bool,
    },
    /// Check a config against the schema without running it.
    Validate { config: PathBuf },
}

fn fail(e: &ScenarioError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => match scenario::load_config(&config) {
            Ok(cfg) => {
                println!("{}: valid {} config", config.display(), cfg.scenario.as_str());
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::Run { config, out, verbose } => {
            let outcome = match scenario::load_config(&config).and_then(|cfg| scenario::execute(&cfg)) {
                Ok(o) => o,
                Err(e) => return fail(&e),
            };
            if let Err(e) = scenario::write_outcome(&outcome, &out, Some(&config)) {
                return fail(&e);
            }
            let r = &outcome.report;
            for c in r.checks.iter().filter(|c| verbose || !c.pass) {
                println!(
                    "{} {}: measured {:e}, expected {:e} ({:?} tolerance {:e})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.measured,
                    c.expected,
                    c.gate,
                    c.tolerance
                );
            }
            let passed = r.checks.iter().filter(|c| c.pass).count();
            println!("{}: {passed}/{} checks passed; report in {}", r.scenario, r.checks.len(), out.display());
            if r.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CHECK_FAILED as u8)
            }
        }
    }
}
