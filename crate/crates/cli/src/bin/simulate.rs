use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use giantatom_cli::{run_file, Overrides};

/// Run a giant-atom simulation scenario from a config file.
#[derive(Parser, Debug)]
#[command(name = "simulate", version)]
struct Args {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: PathBuf,

    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Integration frame (overrides `frame`).
    #[arg(long, value_parser = ["lab", "rotating"])]
    frame: Option<String>,

    /// Scenario (overrides `scenario`).
    #[arg(long, value_parser = ["fig1c", "phase-sweep", "geometry-map", "dark-state", "converge"])]
    scenario: Option<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let overrides = Overrides { out: args.out, frame: args.frame, scenario: args.scenario };
    match run_file(&args.config, &overrides) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
