use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dinavd::analysis::check_inequality_lemmas;
use dinavd::experiment::{error_json, find_preset, list_presets, run_experiment, write_error, ExperimentConfig};
use dinavd::Error;

#[derive(Parser)]
#[command(name = "dinavd", version, about = "Inertial dynamics with Hessian-driven damping: experiments and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run { config: PathBuf },
    /// Run a named preset.
    Preset {
        name: String,
        /// Output directory (defaults to out/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the available presets.
    ListPresets,
    /// Randomized check of the scalar inequalities behind the energy estimates.
    VerifyLemmas {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
}

fn fail(err: &Error) -> ExitCode {
    eprintln!("{}", error_json(err));
    ExitCode::from(2)
}

fn execute(cfg: ExperimentConfig) -> ExitCode {
    match run_experiment(&cfg) {
        Ok(report) => {
            for c in &report.claims {
                let run = c.run.map_or_else(|| "sweep".to_string(), |r| format!("run {r}"));
                println!(
                    "[{}] {:?} ({run}): {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.claim,
                    c.detail
                );
            }
            println!("artifacts written to {}", cfg.output_dir.display());
            if report.all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            write_error(&cfg.output_dir, &e);
            fail(&e)
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config } => match ExperimentConfig::load(&config) {
            Ok(cfg) => execute(cfg),
            Err(e) => fail(&e),
        },
        Command::Preset { name, out } => match find_preset(&name) {
            Some(p) => {
                let mut cfg = p.config();
                if let Some(out) = out {
                    cfg.output_dir = out;
                }
                execute(cfg)
            }
            None => fail(&Error::Config(format!(
                "unknown preset {name:?}; run `dinavd list-presets`"
            ))),
        },
        Command::ListPresets => {
            print!("{}", list_presets());
            ExitCode::SUCCESS
        }
        Command::VerifyLemmas { seed, trials } => match check_inequality_lemmas(seed, trials) {
            Ok(report) => {
                println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
                if report.passed() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => fail(&e),
        },
    }
}
