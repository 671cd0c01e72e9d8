use clap::Parser;
use predprey::cli::{load_config, run_command, Command, RunError};
use std::path::PathBuf;
use std::process::ExitCode;

/// Steady states and bifurcation diagrams of a diffusive predator-prey system.
#[derive(Debug, Parser)]
#[command(name = "predprey", version)]
struct Args {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.path` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// One of eigen, theta, curves, wedge, tangent, branch, scalar-branch,
    /// oracle, compare.
    #[arg(long)]
    command: String,
    /// Worker threads for independent solves.
    #[arg(long)]
    jobs: Option<usize>,
}

fn run(args: &Args) -> Result<(), RunError> {
    let cmd: Command = args.command.parse().map_err(RunError::Config)?;
    let cfg = load_config(&args.config).map_err(RunError::Config)?;
    if let Some(k) = args.jobs {
        if k == 0 {
            return Err(RunError::Config(predprey::Error::Config(
                "--jobs must be positive".into(),
            )));
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output.path.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let report = run_command(cmd, &cfg, &out)?;
    for line in &report.lines {
        println!("{line}");
    }
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
