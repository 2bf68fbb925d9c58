//! Online learning strategies.
//!
//! Every strategy wraps one [`Network`] and follows the same per-step protocol:
//! [`Strategy::predict`] on the incoming features, then [`Strategy::train`] once
//! the label is known. What differs is the batch each strategy trains on and how
//! many optimizer updates it performs.

use std::collections::VecDeque;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::net::{Network, WeightedBatch};
use crate::streams::{Label, LabeledExample};

/// `w_p / w_n` with `w_p = 0.95`, `w_n = 0.05`. Written out because the f64
/// quotient is not exactly 19.
pub const DEFAULT_COST_RATIO: f64 = 19.0;
pub const DEFAULT_THETA: f64 = 0.99;
pub const DEFAULT_MAX_REPLICAS: u64 = 100;

pub trait Strategy: Send {
    fn network(&self) -> &Network;

    fn predict(&self, x: [f64; 2]) -> Label {
        self.network().predict(x)
    }

    /// Learns from a labeled example and returns the number of optimizer
    /// updates performed.
    fn train(&mut self, example: &LabeledExample) -> u64;
}

/// Two capacity-`L` FIFOs, one per class. Appending to a full queue evicts its
/// oldest element.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundedClassQueues {
    positives: VecDeque<LabeledExample>,
    negatives: VecDeque<LabeledExample>,
    capacity: usize,
}

impl BoundedClassQueues {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("queue length must be at least 1".into()));
        }
        Ok(Self {
            positives: VecDeque::with_capacity(capacity),
            negatives: VecDeque::with_capacity(capacity),
            capacity,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn append(&mut self, example: LabeledExample) {
        let queue = match example.y {
            Label::Positive => &mut self.positives,
            Label::Negative => &mut self.negatives,
        };
        if queue.len() == self.capacity {
            queue.pop_front();
        }
        queue.push_back(example);
    }

    /// Oldest first.
    pub fn positives(&self) -> &VecDeque<LabeledExample> {
        &self.positives
    }

    /// Oldest first.
    pub fn negatives(&self) -> &VecDeque<LabeledExample> {
        &self.negatives
    }

    /// The training set: positives followed by negatives.
    pub fn union(&self) -> impl Iterator<Item = &LabeledExample> {
        self.positives.iter().chain(self.negatives.iter())
    }

    pub fn len(&self) -> usize {
        self.positives.len() + self.negatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlidingWindowBuffer {
    window: VecDeque<LabeledExample>,
    capacity: usize,
}

impl SlidingWindowBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("window size must be at least 1".into()));
        }
        Ok(Self {
            window: VecDeque::with_capacity(capacity),
            capacity,
        })
    }

    pub fn push(&mut self, example: LabeledExample) {
        if self.window.len() == self.capacity {
            self.window.pop_front();
        }
        self.window.push_back(example);
    }

    pub fn iter(&self) -> impl Iterator<Item = &LabeledExample> {
        self.window.iter()
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }
}

/// Exponentially time-decayed class frequencies:
/// `s_k <- theta * s_k + (1 - theta) * [y == k]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayedClassSizes {
    positive: f64,
    negative: f64,
    theta: f64,
}

impl DecayedClassSizes {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::Config(format!("decay factor {theta} not in (0, 1)")));
        }
        Ok(Self {
            positive: 0.0,
            negative: 0.0,
            theta,
        })
    }

    pub fn update(&mut self, y: Label) {
        let theta = self.theta;
        self.positive *= theta;
        self.negative *= theta;
        match y {
            Label::Positive => self.positive += 1.0 - theta,
            Label::Negative => self.negative += 1.0 - theta,
        }
    }

    pub fn size(&self, label: Label) -> f64 {
        match label {
            Label::Positive => self.positive,
            Label::Negative => self.negative,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Oversampling rate for an arrival of class `y`: the size ratio when `y`
    /// is currently the smaller class, otherwise 1.
    pub fn oversampling_rate(&self, y: Label) -> f64 {
        let own = self.size(y);
        let other = self.size(y.other());
        if own > 0.0 && own < other {
            other / own
        } else {
            1.0
        }
    }
}

/// Plain online learning: one update on the newest example.
pub struct Baseline {
    net: Network,
}

impl Baseline {
    pub fn new(net: Network) -> Self {
        Self { net }
    }
}

impl Strategy for Baseline {
    fn network(&self) -> &Network {
        &self.net
    }

    fn train(&mut self, example: &LabeledExample) -> u64 {
        let batch = WeightedBatch::single(example, 1.0).expect("unit weight");
        self.net.train_step(&batch);
        1
    }
}

/// Positive examples weighted by a fixed cost ratio, negatives by 1.
pub struct CostSensitive {
    net: Network,
    cost_ratio: f64,
}

impl CostSensitive {
    pub fn new(net: Network, cost_ratio: f64) -> Result<Self> {
        if !(cost_ratio > 0.0 && cost_ratio.is_finite()) {
            return Err(Error::Config(format!(
                "cost ratio {cost_ratio} must be positive"
            )));
        }
        Ok(Self { net, cost_ratio })
    }

    pub fn weight(&self, y: Label) -> f64 {
        match y {
            Label::Positive => self.cost_ratio,
            Label::Negative => 1.0,
        }
    }
}

impl Strategy for CostSensitive {
    fn network(&self) -> &Network {
        &self.net
    }

    fn train(&mut self, example: &LabeledExample) -> u64 {
        let batch =
            WeightedBatch::single(example, self.weight(example.y)).expect("positive weight");
        self.net.train_step(&batch);
        1
    }
}

/// One mean-loss update over the most recent `W` examples, regardless of class.
pub struct SlidingWindow {
    net: Network,
    buffer: SlidingWindowBuffer,
}

impl SlidingWindow {
    pub fn new(net: Network, window: usize) -> Result<Self> {
        Ok(Self {
            net,
            buffer: SlidingWindowBuffer::new(window)?,
        })
    }

    pub fn buffer(&self) -> &SlidingWindowBuffer {
        &self.buffer
    }
}

impl Strategy for SlidingWindow {
    fn network(&self) -> &Network {
        &self.net
    }

    fn train(&mut self, example: &LabeledExample) -> u64 {
        self.buffer.push(*example);
        let batch = WeightedBatch::unit(self.buffer.iter()).expect("buffer holds the new example");
        self.net.train_step(&batch);
        1
    }
}

/// Single-model oversampling online bagging. Each arrival is presented
/// `K ~ Poisson(lambda)` times, with `lambda` taken from the decayed class sizes
/// after they have seen the arrival. `K` is capped at `max_replicas`.
pub struct OobSingle {
    net: Network,
    sizes: DecayedClassSizes,
    max_replicas: u64,
    rng: ChaCha8Rng,
}

impl OobSingle {
    pub fn new(net: Network, theta: f64, max_replicas: u64, seed: u64) -> Result<Self> {
        Ok(Self {
            net,
            sizes: DecayedClassSizes::new(theta)?,
            max_replicas,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn sizes(&self) -> &DecayedClassSizes {
        &self.sizes
    }

    /// Draws `K ~ Poisson(lambda)`, capped at `max_replicas`. `lambda` must be positive.
    pub fn draw_replicas(&mut self, lambda: f64) -> u64 {
        let poisson = Poisson::new(lambda).expect("rate is at least 1");
        let k: f64 = poisson.sample(&mut self.rng);
        (k as u64).min(self.max_replicas)
    }
}

impl Strategy for OobSingle {
    fn network(&self) -> &Network {
        &self.net
    }

    fn train(&mut self, example: &LabeledExample) -> u64 {
        self.sizes.update(example.y);
        let lambda = self.sizes.oversampling_rate(example.y);
        let k = self.draw_replicas(lambda);
        let batch = WeightedBatch::single(example, 1.0).expect("unit weight");
        for _ in 0..k {
            self.net.train_step(&batch);
        }
        k
    }
}

/// Queue-based resampling: append the arrival to its class queue, then perform
/// one update on the mean loss over both queues.
pub struct QueueResampling {
    net: Network,
    queues: BoundedClassQueues,
}

impl QueueResampling {
    pub fn new(net: Network, len: usize) -> Result<Self> {
        Ok(Self {
            net,
            queues: BoundedClassQueues::new(len)?,
        })
    }

    pub fn queues(&self) -> &BoundedClassQueues {
        &self.queues
    }
}

impl Strategy for QueueResampling {
    fn network(&self) -> &Network {
        &self.net
    }

    fn train(&mut self, example: &LabeledExample) -> u64 {
        self.queues.append(*example);
        let batch = WeightedBatch::unit(self.queues.union()).expect("queues hold the new example");
        self.net.train_step(&batch);
        1
    }
}

/// A strategy together with its hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MethodSpec {
    Baseline,
    CostSensitive { cost_ratio: f64 },
    SlidingWindow { window: usize },
    OobSingle { theta: f64, max_replicas: u64 },
    Queue { len: usize },
}

impl MethodSpec {
    /// Builds the strategy around `net`. `seed` drives any strategy-internal
    /// randomness (only OOB uses it).
    pub fn build(&self, net: Network, seed: u64) -> Result<Box<dyn Strategy>> {
        Ok(match *self {
            MethodSpec::Baseline => Box::new(Baseline::new(net)),
            MethodSpec::CostSensitive { cost_ratio } => {
                Box::new(CostSensitive::new(net, cost_ratio)?)
            }
            MethodSpec::SlidingWindow { window } => Box::new(SlidingWindow::new(net, window)?),
            MethodSpec::OobSingle {
                theta,
                max_replicas,
            } => Box::new(OobSingle::new(net, theta, max_replicas, seed)?),
            MethodSpec::Queue { len } => Box::new(QueueResampling::new(net, len)?),
        })
    }

    /// Short name used in file names and chart legends.
    pub fn label(&self) -> String {
        match self {
            MethodSpec::Baseline => "Baseline".into(),
            MethodSpec::CostSensitive { .. } => "CS".into(),
            MethodSpec::SlidingWindow { window } => format!("Window_{window}"),
            MethodSpec::OobSingle { .. } => "OOB_sg".into(),
            MethodSpec::Queue { len } => format!("Queue_{len}"),
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}
