use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gn1d::cli_app::{self, parse_config, RunConfig, Verdict, EXIT_CONFIG, EXIT_VERIFY};
use gn1d::verify::{format_table, verify_suite, VerifyOptions};

#[derive(Parser)]
#[command(name = "gn1d", version, about = "1D Green-Naghdi solver over variable bathymetry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured simulation.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Scenario to use when the config names none (overrides it otherwise).
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Run the property-check suite.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write the table to this file.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Negative control: hand the coercivity check an invalid depth.
        #[arg(long, hide = true)]
        violate_depth: bool,
    },
    /// List the named scenarios.
    Scenarios,
    /// Print the fully resolved configuration.
    DumpConfig {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        scenario: Option<String>,
    },
}

fn load(path: &Path, scenario: Option<&str>) -> gn1d::Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| gn1d::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_config(&text, scenario)
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, scenario } => {
            let result = load(&config, scenario.as_deref())
                .and_then(|cfg| cli_app::execute(&cfg, &base_dir(&config), &mut std::io::stdout()));
            match &result {
                Err(e) => eprintln!("gn1d: {e}"),
                Ok(Verdict::Blowup(msg)) => eprintln!("gn1d: blow-up: {msg}"),
                Ok(Verdict::VerificationFailed) => eprintln!("gn1d: verification failed"),
                Ok(Verdict::Success) => {}
            }
            cli_app::exit_code(&result)
        }
        Command::Verify {
            seed,
            output,
            violate_depth,
        } => {
            let results = verify_suite(&VerifyOptions { seed, violate_depth });
            let table = format_table(&results);
            print!("{table}");
            let _ = std::io::stdout().flush();
            if let Some(path) = output {
                if let Err(e) = std::fs::write(&path, &table) {
                    eprintln!("gn1d: {}: {e}", path.display());
                    return ExitCode::from(EXIT_CONFIG as u8);
                }
            }
            if results.iter().all(|r| r.passed) {
                0
            } else {
                EXIT_VERIFY
            }
        }
        Command::Scenarios => {
            print!("{}", cli_app::scenario_table());
            0
        }
        Command::DumpConfig { config, scenario } => {
            let cfg = match (&config, scenario.as_deref()) {
                (Some(path), s) => load(path, s),
                (None, s) => RunConfig::for_scenario(s.unwrap_or("solitary")),
            };
            match cfg {
                Ok(cfg) => {
                    print!("{}", cfg.dump());
                    0
                }
                Err(e) => {
                    eprintln!("gn1d: {e}");
                    EXIT_CONFIG
                }
            }
        }
    };
    ExitCode::from(code as u8)
}
