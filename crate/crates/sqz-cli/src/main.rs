//! `sqz`: two-time quadrature correlators of a propagating squeezed field.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sqz_cli::config::RunConfig;
use sqz_cli::presets::{preset, PRESET_NAMES};
use sqz_cli::runner::{run_correlators, run_montecarlo, run_variance};
use sqz_cli::CliError;

#[derive(Parser)]
#[command(
    name = "sqz",
    version,
    about = "Two-time quadrature correlators of a propagating squeezed microwave field"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Run configuration (TOML). Mutually exclusive with --preset.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Built-in configuration: vacuum | steady | fig2 | nonlinear-kerr.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Output directory (overrides the `[output]` dir in the config).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for ensemble runs (default: all cores). Results are
    /// bitwise independent of this setting.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Monte Carlo seed override.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Deterministic correlator table over the (t1, tau) grid.
    Correlators(RunArgs),
    /// Trajectory-ensemble estimates with z-scores against the engine.
    Montecarlo(RunArgs),
    /// Integrated-signal variance report.
    Variance(RunArgs),
    /// List the built-in presets or write one as a TOML config.
    Presets {
        /// Preset to emit; omit to list available names.
        #[arg(long, value_name = "NAME")]
        preset: Option<String>,
        /// Write `<name>.toml` into this directory instead of stdout.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

fn load_config(args: &RunArgs) -> Result<RunConfig, CliError> {
    let mut config = match (&args.config, &args.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_toml(&text)?
        }
        (None, Some(name)) => preset(name)?,
        (Some(_), Some(_)) => {
            return Err(CliError::Config("--config and --preset are mutually exclusive".into()))
        }
        (None, None) => {
            return Err(CliError::Config("one of --config or --preset is required".into()))
        }
    };
    if let Some(seed) = args.seed {
        match &mut config.mc {
            Some(mc) => mc.seed = seed,
            None => return Err(CliError::Config("--seed given but config has no [mc] section".into())),
        }
    }
    Ok(config)
}

fn with_thread_pool<T>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError>
where
    T: Send,
{
    match threads {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(f),
    }
}

fn run() -> Result<(), CliError> {
    match Cli::parse().command {
        Command::Correlators(args) => {
            let config = load_config(&args)?;
            let path = run_correlators(&config, args.out.as_deref())?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Montecarlo(args) => {
            let config = load_config(&args)?;
            let (path, worst_z) = with_thread_pool(args.threads, || {
                run_montecarlo(&config, args.out.as_deref())
            })?;
            println!("wrote {} (max |z| = {worst_z:.3})", path.display());
            if worst_z > 5.0 {
                return Err(CliError::Statistics(format!(
                    "max |z| = {worst_z:.3} exceeds 5 against the deterministic engine"
                )));
            }
            Ok(())
        }
        Command::Variance(args) => {
            let config = load_config(&args)?;
            let path = run_variance(&config, args.out.as_deref())?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Presets { preset: name, out } => match name {
            None => {
                for name in PRESET_NAMES {
                    println!("{name}");
                }
                Ok(())
            }
            Some(name) => {
                let config = preset(&name)?;
                let text = config.to_toml();
                match out {
                    None => {
                        print!("{text}");
                        Ok(())
                    }
                    Some(dir) => {
                        std::fs::create_dir_all(&dir)?;
                        let path = dir.join(format!("{name}.toml"));
                        std::fs::write(&path, text)?;
                        println!("wrote {}", path.display());
                        Ok(())
                    }
                }
            }
        },
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
