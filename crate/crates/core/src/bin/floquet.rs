use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use floquet_core::cli::{
    exit, render_diagnostics, run, validate_config, Overrides, OUTPUT_DIR_ENV,
};
use floquet_core::pulses::AveragingConvention;

#[derive(Parser)]
#[command(
    name = "floquet",
    version,
    about = "Floquet pulse design for interacting spin systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
        /// Worker threads for parallel sweeps (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a config file without running it.
    Check {
        config: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args)]
struct Flags {
    /// Directory for the report and CSV artifacts.
    #[arg(long, env = OUTPUT_DIR_ENV)]
    output_dir: Option<PathBuf>,
    /// Truncation order of the pulse series.
    #[arg(long)]
    p_max: Option<usize>,
    /// Moment averaging window.
    #[arg(long, value_parser = ["subcycle", "full_cycle"])]
    convention: Option<String>,
}

impl Flags {
    fn overrides(&self, cli_only_output: bool) -> Overrides {
        Overrides {
            // The environment variable is a fallback below the config file, so only
            // an explicit flag overrides here.
            output_dir: if cli_only_output {
                self.output_dir.clone()
            } else {
                None
            },
            p_max: self.p_max,
            convention: self.convention.as_deref().map(|c| {
                c.parse::<AveragingConvention>()
                    .expect("clap restricts the convention values")
            }),
        }
    }
}

fn output_dir_from_flag() -> bool {
    std::env::args().any(|a| a == "--output-dir" || a.starts_with("--output-dir="))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let explicit = output_dir_from_flag();
    match cli.command {
        Command::Run {
            config,
            flags,
            threads,
        } => {
            if let Some(n) = threads {
                if let Err(e) = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                {
                    eprintln!("error: cannot configure {n} threads: {e}");
                    return ExitCode::from(exit::SCHEMA as u8);
                }
            }
            let outcome = run(&config, &flags.overrides(explicit));
            let r = &outcome.report;
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            for e in &r.errors {
                eprintln!("error: {e}");
            }
            for a in &r.artifacts {
                println!("wrote {}", a.display());
            }
            if let Some(p) = &outcome.report_path {
                println!("report {}", p.display());
            }
            println!("status {} ({:.1} ms)", r.status, r.timings.total_ms);
            ExitCode::from(outcome.exit_code as u8)
        }
        Command::Check { config, flags } => {
            let diags = validate_config(&config, &flags.overrides(explicit));
            print!("{}", render_diagnostics(&diags));
            if diags.is_ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(exit::SCHEMA as u8)
            }
        }
    }
}
