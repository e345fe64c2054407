use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use drgvr_cli::{run, validate, write_run, Experiment, ExperimentConfig, RunError, Seeds};

#[derive(Debug, Parser)]
#[command(name = "drgvr", version, about = "Experiments on the dynamic random graph with vertex removal")]
struct Args {
    experiment: Experiment,
    /// Flat JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// First seed; overrides the seeds in the config.
    #[arg(long)]
    seed_base: Option<u64>,
    /// Number of consecutive seeds; overrides the seeds in the config.
    #[arg(long)]
    seed_count: Option<usize>,
    /// Root directory for run outputs (default: config `out`, else `runs`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write plot.csv with curve data.
    #[arg(long)]
    emit_plot_data: bool,
    /// Only validate the config.
    #[arg(long)]
    check: bool,
}

const VALIDATION: u8 = 2;
const RUNTIME: u8 = 1;

fn load(args: &Args) -> Result<ExperimentConfig, Vec<String>> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| vec![format!("config: cannot read {}: {e}", args.config.display())])?;
    let mut c = ExperimentConfig::from_json(&text).map_err(|e| vec![format!("config: {e}")])?;
    match c.experiment {
        Some(e) if e != args.experiment => {
            return Err(vec![format!(
                "experiment: config names {e} but the command line asks for {}",
                args.experiment
            )])
        }
        _ => c.experiment = Some(args.experiment),
    }
    if args.seed_base.is_some() || args.seed_count.is_some() {
        c.seeds = Some(Seeds::Range {
            base: args.seed_base.unwrap_or(0),
            count: args.seed_count.unwrap_or(1),
        });
    }
    let errors = validate(&c);
    if errors.is_empty() {
        Ok(c)
    } else {
        Err(errors.iter().map(ToString::to_string).collect())
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match load(&args) {
        Ok(c) => c,
        Err(errors) => {
            for e in errors {
                eprintln!("error: {e}");
            }
            return ExitCode::from(VALIDATION);
        }
    };
    if args.check {
        println!("ok");
        return ExitCode::SUCCESS;
    }
    let root = args
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("runs"));
    let result = run(&config).and_then(|o| write_run(&o, &root, args.emit_plot_data).map(|d| (o, d)));
    match result {
        Ok((o, dir)) => {
            println!("{}", dir.display());
            for (k, v) in &o.record.aggregates {
                println!("  {k} = {v}");
            }
            ExitCode::SUCCESS
        }
        Err(RunError::Invalid(errors)) => {
            for e in errors {
                eprintln!("error: {e}");
            }
            ExitCode::from(VALIDATION)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(RUNTIME)
        }
    }
}
