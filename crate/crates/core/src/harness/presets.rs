//! Scenario presets for the queue-length analysis, the imbalance comparison
//! and the drift comparison.

use std::fmt;
use std::str::FromStr;

use super::ExperimentConfig;
use crate::error::{Error, Result};
use crate::eval::DEFAULT_ALPHA;
use crate::methods::{MethodSpec, DEFAULT_COST_RATIO, DEFAULT_MAX_REPLICAS, DEFAULT_THETA};
use crate::streams::{Dataset, PriorSchedule};

pub const DEFAULT_STEPS: u64 = 5000;
pub const DEFAULT_RUNS: u64 = 30;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_QUEUE_LEN: usize = 25;

/// Settings shared by every config of a figure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommonOptions {
    pub steps: u64,
    pub runs: u64,
    pub base_seed: u64,
    pub alpha: f64,
    pub theta: f64,
    pub cost_ratio: f64,
    pub max_replicas: u64,
}

impl Default for CommonOptions {
    fn default() -> Self {
        Self {
            steps: DEFAULT_STEPS,
            runs: DEFAULT_RUNS,
            base_seed: DEFAULT_SEED,
            alpha: DEFAULT_ALPHA,
            theta: DEFAULT_THETA,
            cost_ratio: DEFAULT_COST_RATIO,
            max_replicas: DEFAULT_MAX_REPLICAS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Sine, balanced, queue lengths 1/10/25/50.
    Fig2a,
    /// Sine, 1% positives, queue lengths 1/10/25/50.
    Fig2b,
    /// Circle, 10% positives, all methods.
    Fig3a,
    /// Circle, 1% positives, all methods.
    Fig3b,
    /// Sine, prior 0.1 -> 0.9 at mid-horizon, all methods.
    Fig4a,
    /// Circle, prior 0.1 -> 0.9 at mid-horizon, all methods.
    Fig4b,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Fig2a,
        Preset::Fig2b,
        Preset::Fig3a,
        Preset::Fig3b,
        Preset::Fig4a,
        Preset::Fig4b,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig3a => "fig3a",
            Preset::Fig3b => "fig3b",
            Preset::Fig4a => "fig4a",
            Preset::Fig4b => "fig4b",
        }
    }

    pub fn build(self, opts: &CommonOptions) -> Result<Figure> {
        let queue_lengths = || [1, 10, 25, 50].map(|len| MethodSpec::Queue { len });
        let (title, dataset, schedule, methods, reset_at) = match self {
            Preset::Fig2a => (
                "Sine, p(y=1)=0.5",
                Dataset::Sine,
                PriorSchedule::constant(0.5)?,
                queue_lengths().to_vec(),
                vec![],
            ),
            Preset::Fig2b => (
                "Sine, p(y=1)=0.01",
                Dataset::Sine,
                PriorSchedule::constant(0.01)?,
                queue_lengths().to_vec(),
                vec![],
            ),
            Preset::Fig3a => (
                "Circle, p(y=1)=0.1",
                Dataset::Circle,
                PriorSchedule::constant(0.1)?,
                comparison_methods(opts),
                vec![],
            ),
            Preset::Fig3b => (
                "Circle, p(y=1)=0.01",
                Dataset::Circle,
                PriorSchedule::constant(0.01)?,
                comparison_methods(opts),
                vec![],
            ),
            Preset::Fig4a | Preset::Fig4b => {
                let drift = (opts.steps / 2).max(1);
                let dataset = if self == Preset::Fig4a {
                    Dataset::Sine
                } else {
                    Dataset::Circle
                };
                (
                    if self == Preset::Fig4a {
                        "Sine, p(y=1) 0.1 -> 0.9"
                    } else {
                        "Circle, p(y=1) 0.1 -> 0.9"
                    },
                    dataset,
                    PriorSchedule::new(vec![(0, 0.1), (drift, 0.9)])?,
                    comparison_methods(opts),
                    vec![drift],
                )
            }
        };
        let configs = methods
            .into_iter()
            .map(|method| ExperimentConfig {
                name: method.label(),
                dataset,
                schedule: schedule.clone(),
                method,
                alpha: opts.alpha,
                steps: opts.steps,
                runs: opts.runs,
                base_seed: opts.base_seed,
                reset_at: reset_at.clone(),
            })
            .collect();
        Ok(Figure {
            id: self.id().to_string(),
            title: title.to_string(),
            configs,
        })
    }
}

/// Baseline, CS, sliding window with `W = 2L`, OOB_sg, Queue_1 and Queue_25.
fn comparison_methods(opts: &CommonOptions) -> Vec<MethodSpec> {
    vec![
        MethodSpec::Baseline,
        MethodSpec::CostSensitive {
            cost_ratio: opts.cost_ratio,
        },
        MethodSpec::SlidingWindow {
            window: 2 * DEFAULT_QUEUE_LEN,
        },
        MethodSpec::OobSingle {
            theta: opts.theta,
            max_replicas: opts.max_replicas,
        },
        MethodSpec::Queue { len: 1 },
        MethodSpec::Queue {
            len: DEFAULT_QUEUE_LEN,
        },
    ]
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Preset::ALL
            .into_iter()
            .find(|p| p.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown preset `{s}`")))
    }
}

/// A set of configs plotted together.
#[derive(Clone, Debug, PartialEq)]
pub struct Figure {
    pub id: String,
    pub title: String,
    pub configs: Vec<ExperimentConfig>,
}

impl Figure {
    pub fn config(&self, name: &str) -> Option<&ExperimentConfig> {
        self.configs.iter().find(|c| c.name == name)
    }
}
