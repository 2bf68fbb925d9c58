use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use queue_resampling::harness::{run_figure, Settings};
use queue_resampling::{Error, Result};

/// Online class-imbalance experiments on drifting Sine and Circle streams.
///
/// Either pick a --preset or describe a single scenario with --dataset and
/// --method. Writes one CSV per config and one SVG chart into --out.
#[derive(Parser, Debug)]
#[command(name = "qresample", version)]
struct Cli {
    /// Flat `key = value` file; flags given on the command line take precedence
    #[arg(long)]
    config: Option<PathBuf>,

    #[command(flatten)]
    settings: Settings,
}

fn run(cli: Cli) -> Result<bool> {
    let settings = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            cli.settings.or(Settings::from_kv(&text)?)
        }
        None => cli.settings,
    };
    let plan = settings.plan()?;
    let report = run_figure(&plan.figure, &plan.out)?;

    println!("{}: {}", plan.figure.id, plan.figure.title);
    for (name, result) in &report.results {
        if let Ok(r) = result {
            println!(
                "  {name:<10} final G-mean {:.4} ± {:.4}",
                r.series.final_mean(),
                r.series.final_stderr()
            );
        }
    }
    for path in report.csv_paths.iter().chain(&report.chart_path) {
        println!("  wrote {}", path.display());
    }
    let mut ok = true;
    for (name, err) in report.failures() {
        eprintln!("error: {name}: {err}");
        ok = false;
    }
    Ok(ok)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
