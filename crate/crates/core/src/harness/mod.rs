//! Experiment orchestration: seeded repetitions, aggregation and output.

mod config;
mod output;
mod presets;

pub use config::{parse_drift, Plan, Settings};
pub use output::{emit_chart, emit_csv, read_csv};
pub use presets::{CommonOptions, Figure, Preset};

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eval::Prequential;
use crate::methods::MethodSpec;
use crate::net::Network;
use crate::streams::{Dataset, PriorSchedule, Stream};

/// One (dataset, schedule, method) scenario repeated over `runs` seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// Name used for the CSV file and the chart legend.
    pub name: String,
    pub dataset: Dataset,
    pub schedule: PriorSchedule,
    pub method: MethodSpec,
    pub alpha: f64,
    pub steps: u64,
    pub runs: u64,
    pub base_seed: u64,
    /// Steps at which the prequential evaluator is reset before scoring.
    pub reset_at: Vec<u64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Config("steps must be at least 1".into()));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if let Some(t) = self.reset_at.iter().find(|&&t| t >= self.steps) {
            return Err(Error::Config(format!(
                "reset step {t} is not below the horizon {}",
                self.steps
            )));
        }
        Prequential::new(self.alpha)?;
        Ok(())
    }
}

/// Seeds used by one run. The network seed does not depend on the method, so
/// every strategy in a run starts from the same weights and sees the same stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunSeeds {
    pub stream: u64,
    pub network: u64,
    pub strategy: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RunSeeds {
    pub fn derive(base_seed: u64, run_index: u64) -> Self {
        let stream = base_seed ^ run_index;
        let network = splitmix64(stream);
        let strategy = splitmix64(network);
        Self {
            stream,
            network,
            strategy,
        }
    }
}

/// Prequential G-mean after each step of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub gmean: Vec<f64>,
}

/// Runs the online protocol: draw, predict, score, then train.
pub fn run_single(config: &ExperimentConfig, run_index: u64) -> Result<RunResult> {
    config.validate()?;
    let wrap = |e: Error| Error::Run {
        config: config.name.clone(),
        run: run_index,
        source: Box::new(e),
    };
    let seeds = RunSeeds::derive(config.base_seed, run_index);
    let mut stream = Stream::new(config.dataset, config.schedule.clone(), seeds.stream);
    let mut strategy = config
        .method
        .build(Network::init(seeds.network), seeds.strategy)
        .map_err(wrap)?;
    let mut eval = Prequential::new(config.alpha)?;

    let mut gmean = Vec::with_capacity(config.steps as usize);
    for t in 0..config.steps {
        if config.reset_at.contains(&t) {
            eval.reset();
        }
        let example = stream.next_example().map_err(wrap)?;
        let predicted = strategy.predict(example.x);
        eval.update(example.y, predicted);
        gmean.push(eval.gmean());
        strategy.train(&example);
    }
    Ok(RunResult { gmean })
}

/// Per-step mean and standard error across runs.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateSeries {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl AggregateSeries {
    /// Standard error is the sample standard deviation over `sqrt(runs)`;
    /// a single run has zero standard error.
    pub fn from_runs(runs: &[RunResult]) -> Self {
        let n = runs.len();
        let steps = runs.iter().map(|r| r.gmean.len()).min().unwrap_or(0);
        let mut mean = Vec::with_capacity(steps);
        let mut stderr = Vec::with_capacity(steps);
        for t in 0..steps {
            let m = runs.iter().map(|r| r.gmean[t]).sum::<f64>() / n as f64;
            let se = if n > 1 {
                let ss: f64 = runs.iter().map(|r| (r.gmean[t] - m).powi(2)).sum();
                (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()
            } else {
                0.0
            };
            mean.push(m);
            stderr.push(se);
        }
        Self { mean, stderr }
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn final_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }

    pub fn final_stderr(&self) -> f64 {
        self.stderr.last().copied().unwrap_or(0.0)
    }
}

/// Completed runs and their aggregate for one config.
#[derive(Clone, Debug)]
pub struct GridResult {
    pub runs: Vec<RunResult>,
    pub series: AggregateSeries,
}

/// Runs every (config, run) pair in parallel. Results come back in config order;
/// a failing config does not prevent the others from completing.
pub fn run_grid(configs: &[ExperimentConfig]) -> Vec<Result<GridResult>> {
    let jobs: Vec<(usize, u64)> = configs
        .iter()
        .enumerate()
        .flat_map(|(i, c)| (0..c.runs).map(move |r| (i, r)))
        .collect();
    let outcomes: Vec<Result<RunResult>> = jobs
        .par_iter()
        .map(|&(i, r)| run_single(&configs[i], r))
        .collect();

    let mut grouped: Vec<Vec<Result<RunResult>>> = configs.iter().map(|_| Vec::new()).collect();
    for ((i, _), outcome) in jobs.into_iter().zip(outcomes) {
        grouped[i].push(outcome);
    }
    configs
        .iter()
        .zip(grouped)
        .map(|(config, outcomes)| {
            config.validate()?;
            let runs = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
            let series = AggregateSeries::from_runs(&runs);
            Ok(GridResult { runs, series })
        })
        .collect()
}

/// Outcome of running and writing one figure.
#[derive(Debug)]
pub struct FigureReport {
    /// `(config name, result)` in figure order.
    pub results: Vec<(String, Result<GridResult>)>,
    pub csv_paths: Vec<PathBuf>,
    pub chart_path: Option<PathBuf>,
}

impl FigureReport {
    pub fn series(&self, name: &str) -> Option<&AggregateSeries> {
        self.results
            .iter()
            .find(|(n, _)| n == name)
            .and_then(|(_, r)| r.as_ref().ok())
            .map(|r| &r.series)
    }

    pub fn failures(&self) -> impl Iterator<Item = (&str, &Error)> {
        self.results
            .iter()
            .filter_map(|(n, r)| r.as_ref().err().map(|e| (n.as_str(), e)))
    }
}

/// Runs every config of `figure`, then writes `<id>_<name>.csv` for each
/// completed config and `<id>.svg` over all of them into `out`.
pub fn run_figure(figure: &Figure, out: &Path) -> Result<FigureReport> {
    fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.to_path_buf(),
        source,
    })?;
    let results: Vec<_> = figure
        .configs
        .iter()
        .map(|c| c.name.clone())
        .zip(run_grid(&figure.configs))
        .collect();

    let mut csv_paths = Vec::new();
    let mut plotted = Vec::new();
    for (name, result) in &results {
        if let Ok(r) = result {
            let path = out.join(format!("{}_{}.csv", figure.id, name));
            emit_csv(&r.series, &path)?;
            csv_paths.push(path);
            plotted.push((name.clone(), &r.series));
        }
    }
    let chart_path = if plotted.is_empty() {
        None
    } else {
        let path = out.join(format!("{}.svg", figure.id));
        emit_chart(&figure.title, &plotted, &path)?;
        Some(path)
    };
    Ok(FigureReport {
        results,
        csv_paths,
        chart_path,
    })
}
