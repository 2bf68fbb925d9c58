//! Run settings from command-line flags and flat `key = value` files.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;

use super::presets::{CommonOptions, Figure, Preset, DEFAULT_QUEUE_LEN};
use super::ExperimentConfig;
use crate::error::{Error, Result};
use crate::methods::MethodSpec;
use crate::streams::{Dataset, PriorSchedule};

pub const DEFAULT_OUT_DIR: &str = "results";
const DEFAULT_IMBALANCE: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodKind {
    Baseline,
    Cs,
    Window,
    Oob,
    Queue,
}

impl FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "baseline" => Ok(MethodKind::Baseline),
            "cs" => Ok(MethodKind::Cs),
            "window" => Ok(MethodKind::Window),
            "oob" => Ok(MethodKind::Oob),
            "queue" => Ok(MethodKind::Queue),
            other => Err(Error::Config(format!(
                "unknown method `{other}` (expected baseline, cs, window, oob or queue)"
            ))),
        }
    }
}

/// A prior change `step:p_pos`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriftPoint {
    pub step: u64,
    pub p_pos: f64,
}

impl FromStr for DriftPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_drift(s)
    }
}

impl fmt::Display for DriftPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.step, self.p_pos)
    }
}

pub fn parse_drift(s: &str) -> Result<DriftPoint> {
    let bad = || Error::Config(format!("drift `{s}` is not of the form <step>:<p_pos>"));
    let (step, p) = s.trim().split_once(':').ok_or_else(bad)?;
    Ok(DriftPoint {
        step: step.trim().parse().map_err(|_| bad())?,
        p_pos: p.trim().parse().map_err(|_| bad())?,
    })
}

/// Every field is optional so that flags can be layered over a config file.
#[derive(Args, Clone, Debug, Default, PartialEq)]
pub struct Settings {
    /// Stream concept: sine or circle
    #[arg(long)]
    pub dataset: Option<Dataset>,
    /// Initial positive-class prior
    #[arg(long)]
    pub imbalance: Option<f64>,
    /// Prior change as <step>:<p_pos>; repeatable. The evaluator is reset at each drift step
    #[arg(long)]
    pub drift: Vec<DriftPoint>,
    /// baseline, cs, window, oob or queue
    #[arg(long)]
    pub method: Option<MethodKind>,
    /// Queue length L (default 25)
    #[arg(long)]
    pub queue_len: Option<usize>,
    /// Sliding window size W (default 2L)
    #[arg(long)]
    pub window: Option<usize>,
    /// Positive-class cost for the cost-sensitive method (default 19)
    #[arg(long)]
    pub cost_ratio: Option<f64>,
    /// Class-size decay factor for OOB (default 0.99)
    #[arg(long)]
    pub theta: Option<f64>,
    /// Cap on OOB replications per example (default 100)
    #[arg(long)]
    pub max_replicas: Option<u64>,
    /// Prequential fading factor (default 0.99)
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Time steps per run (default 5000)
    #[arg(long)]
    pub steps: Option<u64>,
    /// Repetitions per config (default 30)
    #[arg(long)]
    pub runs: Option<u64>,
    /// Base seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (default ./results)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// fig2a, fig2b, fig3a, fig3b, fig4a or fig4b
    #[arg(long)]
    pub preset: Option<Preset>,
}

/// What to run and where to put it.
#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub figure: Figure,
    pub out: PathBuf,
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("line {line}: invalid value `{value}` for `{key}`")))
}

impl Settings {
    /// Parses `key = value` lines. `#` starts a comment. Keys are the long flag
    /// names, with `-` or `_`. `drift` may repeat or hold a comma-separated list.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {line_no}: expected `key = value`")))?;
            let key = key.trim().replace('_', "-");
            let value = value.trim();
            let k = key.as_str();
            match k {
                "dataset" => s.dataset = Some(parse_value(k, value, line_no)?),
                "imbalance" => s.imbalance = Some(parse_value(k, value, line_no)?),
                "drift" => {
                    for part in value.split(',').filter(|p| !p.trim().is_empty()) {
                        s.drift.push(parse_value(k, part, line_no)?);
                    }
                }
                "method" => s.method = Some(parse_value(k, value, line_no)?),
                "queue-len" => s.queue_len = Some(parse_value(k, value, line_no)?),
                "window" => s.window = Some(parse_value(k, value, line_no)?),
                "cost-ratio" => s.cost_ratio = Some(parse_value(k, value, line_no)?),
                "theta" => s.theta = Some(parse_value(k, value, line_no)?),
                "max-replicas" => s.max_replicas = Some(parse_value(k, value, line_no)?),
                "alpha" => s.alpha = Some(parse_value(k, value, line_no)?),
                "steps" => s.steps = Some(parse_value(k, value, line_no)?),
                "runs" => s.runs = Some(parse_value(k, value, line_no)?),
                "seed" => s.seed = Some(parse_value(k, value, line_no)?),
                "out" => s.out = Some(PathBuf::from(value)),
                "preset" => s.preset = Some(parse_value(k, value, line_no)?),
                other => {
                    return Err(Error::Config(format!(
                        "line {line_no}: unknown key `{other}`"
                    )))
                }
            }
        }
        Ok(s)
    }

    /// Fields set in `self` win over `fallback`.
    pub fn or(self, fallback: Settings) -> Settings {
        Settings {
            dataset: self.dataset.or(fallback.dataset),
            imbalance: self.imbalance.or(fallback.imbalance),
            drift: if self.drift.is_empty() {
                fallback.drift
            } else {
                self.drift
            },
            method: self.method.or(fallback.method),
            queue_len: self.queue_len.or(fallback.queue_len),
            window: self.window.or(fallback.window),
            cost_ratio: self.cost_ratio.or(fallback.cost_ratio),
            theta: self.theta.or(fallback.theta),
            max_replicas: self.max_replicas.or(fallback.max_replicas),
            alpha: self.alpha.or(fallback.alpha),
            steps: self.steps.or(fallback.steps),
            runs: self.runs.or(fallback.runs),
            seed: self.seed.or(fallback.seed),
            out: self.out.or(fallback.out),
            preset: self.preset.or(fallback.preset),
        }
    }

    fn common(&self) -> CommonOptions {
        let d = CommonOptions::default();
        CommonOptions {
            steps: self.steps.unwrap_or(d.steps),
            runs: self.runs.unwrap_or(d.runs),
            base_seed: self.seed.unwrap_or(d.base_seed),
            alpha: self.alpha.unwrap_or(d.alpha),
            theta: self.theta.unwrap_or(d.theta),
            cost_ratio: self.cost_ratio.unwrap_or(d.cost_ratio),
            max_replicas: self.max_replicas.unwrap_or(d.max_replicas),
        }
    }

    pub fn plan(&self) -> Result<Plan> {
        let out = self
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        let common = self.common();
        let figure = match self.preset {
            Some(preset) => {
                let scenario_flags = self.dataset.is_some()
                    || self.imbalance.is_some()
                    || !self.drift.is_empty()
                    || self.method.is_some()
                    || self.queue_len.is_some()
                    || self.window.is_some();
                if scenario_flags {
                    return Err(Error::Config(
                        "a preset fixes dataset, prior and methods; drop --dataset/--imbalance/--drift/--method/--queue-len/--window".into(),
                    ));
                }
                preset.build(&common)?
            }
            None => self.custom_figure(&common)?,
        };
        for c in &figure.configs {
            c.validate()?;
        }
        Ok(Plan { figure, out })
    }

    fn custom_figure(&self, common: &CommonOptions) -> Result<Figure> {
        let dataset = self
            .dataset
            .ok_or_else(|| Error::Config("either --preset or --dataset is required".into()))?;
        let p0 = self.imbalance.unwrap_or(DEFAULT_IMBALANCE);
        let mut drift = self.drift.clone();
        drift.sort_by_key(|d| d.step);
        let segments = std::iter::once((0, p0))
            .chain(drift.iter().map(|d| (d.step, d.p_pos)))
            .collect();
        let schedule = PriorSchedule::new(segments)?;

        let queue_len = self.queue_len.unwrap_or(DEFAULT_QUEUE_LEN);
        let method = match self.method.unwrap_or(MethodKind::Queue) {
            MethodKind::Baseline => MethodSpec::Baseline,
            MethodKind::Cs => MethodSpec::CostSensitive {
                cost_ratio: common.cost_ratio,
            },
            MethodKind::Window => MethodSpec::SlidingWindow {
                window: self.window.unwrap_or(2 * queue_len),
            },
            MethodKind::Oob => MethodSpec::OobSingle {
                theta: common.theta,
                max_replicas: common.max_replicas,
            },
            MethodKind::Queue => MethodSpec::Queue { len: queue_len },
        };
        let reset_at = drift.iter().map(|d| d.step).collect();
        let title = {
            let mut t = format!("{dataset}, p(y=1)={p0}");
            for d in &drift {
                t.push_str(&format!(" -> {} at {}", d.p_pos, d.step));
            }
            t
        };
        Ok(Figure {
            id: dataset.to_string(),
            title,
            configs: vec![ExperimentConfig {
                name: method.label(),
                dataset,
                schedule,
                method,
                alpha: common.alpha,
                steps: common.steps,
                runs: common.runs,
                base_seed: common.base_seed,
                reset_at,
            }],
        })
    }
}
