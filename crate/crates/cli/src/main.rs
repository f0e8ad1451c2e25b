use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nsit_cli::{load_config, run, CliError, Format};

#[derive(Parser)]
#[command(name = "nsit", version, about = "Spectra of alkali vapor coupled to noble-gas spins")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run the task described by a config file.
    Run {
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the output format from the config.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Worker threads (falls back to NSIT_THREADS).
        #[arg(long, env = "NSIT_THREADS")]
        threads: Option<usize>,
    },
    /// Parse and validate a config file without running it.
    Validate { config: PathBuf },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            for w in cfg.validate()? {
                eprintln!("warning: {w}");
            }
            println!("{}: ok ({})", config.display(), cfg.task.kind.label());
            Ok(())
        }
        Command::Run {
            config,
            out,
            format,
            threads,
        } => {
            let cfg = load_config(&config)?;
            if let Some(n) = threads.filter(|&n| n > 0) {
                // Fails only if a pool already exists, which cannot happen here.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            let format = format.map(|f| match f {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            });
            let report = run(&cfg, &out, format)?;
            for m in &report.messages {
                println!("{m}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
