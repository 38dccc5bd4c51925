use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

mod commands;
mod config;
mod output;

use commands::{CliError, Overrides};
use config::{Command, Format, JobConfig};

/// Essential spectra of lattice Schrödinger operators.
#[derive(Parser, Debug)]
#[command(name = "latspec", version)]
struct Args {
    /// Command to run; overrides the config's `command`.
    #[arg(value_enum)]
    command: Option<Command>,
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report.json and CSV tables.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid points per torus axis.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Truncation radius; repeat for a sequence.
    #[arg(long = "L", short = 'L')]
    radii: Vec<i64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Coverage resolution.
    #[arg(long)]
    delta: Option<f64>,
    /// `all` or `extremal:k`.
    #[arg(long)]
    mode: Option<String>,
}

fn load(args: &Args) -> Result<JobConfig, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg: JobConfig = serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
    if let Some(c) = args.command {
        cfg.command = c;
    }
    Ok(cfg)
}

fn main_inner(args: Args) -> Result<(), CliError> {
    let cfg = load(&args)?;
    let overrides = Overrides {
        grid: args.grid,
        tol: args.tol,
        radii: args.radii.clone(),
        seed: args.seed,
        format: args.format,
        delta: args.delta,
        mode: args.mode.clone(),
    };
    let report = commands::run(&cfg, &overrides)?;
    let dir = args.out.clone().or_else(|| cfg.output.dir.clone().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."));
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    std::fs::create_dir_all(&dir).map_err(io)?;
    output::write_json(&dir.join("report.json"), &report.json).map_err(io)?;
    for t in &report.csv {
        output::write_csv(&dir.join(&t.file), &t.header, &t.rows).map_err(io)?;
    }
    println!("{}", report.summary);
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match main_inner(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("latspec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
