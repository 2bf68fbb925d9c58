//! A 2-8-1 feed-forward binary classifier trained with ADAM.
//!
//! Hidden units use Leaky ReLU, the output unit a sigmoid, and the loss is
//! per-example weighted binary cross-entropy averaged over the batch.
//! Backpropagation is written out by hand for this fixed shape.

use std::iter;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::streams::{Label, LabeledExample};

pub const INPUTS: usize = 2;
pub const HIDDEN: usize = 8;
pub const LEAKY_SLOPE: f64 = 0.01;
/// Probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` inside the loss.
pub const PROB_CLAMP: f64 = 1e-12;
pub const DECISION_THRESHOLD: f64 = 0.5;

/// Network parameters. Gradients share the same shape.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Params {
    pub w1: [[f64; INPUTS]; HIDDEN],
    pub b1: [f64; HIDDEN],
    pub w2: [f64; HIDDEN],
    pub b2: f64,
}

pub type Gradients = Params;

impl Params {
    pub const LEN: usize = HIDDEN * INPUTS + HIDDEN + HIDDEN + 1;

    pub fn zeros() -> Self {
        Self::default()
    }

    /// Values in declared order: W1 row-major, b1, W2, b2.
    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.w1
            .iter()
            .flatten()
            .chain(self.b1.iter())
            .chain(self.w2.iter())
            .chain(iter::once(&self.b2))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.w1
            .iter_mut()
            .flatten()
            .chain(self.b1.iter_mut())
            .chain(self.w2.iter_mut())
            .chain(iter::once(&mut self.b2))
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.iter().copied().collect()
    }

    pub fn from_flat(values: &[f64]) -> Option<Self> {
        if values.len() != Self::LEN {
            return None;
        }
        let mut p = Self::zeros();
        p.iter_mut().zip(values).for_each(|(d, s)| *d = *s);
        Some(p)
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }

    pub fn scale(&mut self, k: f64) {
        self.iter_mut().for_each(|v| *v *= k);
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedExample {
    pub x: [f64; 2],
    pub y: Label,
    pub weight: f64,
}

/// Nonempty set of training examples with strictly positive weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedBatch {
    items: Vec<WeightedExample>,
}

impl WeightedBatch {
    pub fn new(items: Vec<WeightedExample>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::Config("empty training batch".into()));
        }
        if let Some(bad) = items
            .iter()
            .find(|it| !(it.weight > 0.0 && it.weight.is_finite()))
        {
            return Err(Error::Config(format!(
                "batch weight {} is not strictly positive",
                bad.weight
            )));
        }
        Ok(Self { items })
    }

    /// Unit-weight batch over the given examples. `None` if there are none.
    pub fn unit<'a>(examples: impl IntoIterator<Item = &'a LabeledExample>) -> Option<Self> {
        let items: Vec<_> = examples
            .into_iter()
            .map(|e| WeightedExample {
                x: e.x,
                y: e.y,
                weight: 1.0,
            })
            .collect();
        (!items.is_empty()).then_some(Self { items })
    }

    pub fn single(example: &LabeledExample, weight: f64) -> Result<Self> {
        Self::new(vec![WeightedExample {
            x: example.x,
            y: example.y,
            weight,
        }])
    }

    pub fn items(&self) -> &[WeightedExample] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn leaky_relu(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        LEAKY_SLOPE * z
    }
}

fn leaky_relu_grad(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else {
        LEAKY_SLOPE
    }
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

pub fn binary_cross_entropy(y: Label, p: f64) -> f64 {
    let p = clamp_prob(p);
    match y {
        Label::Positive => -p.ln(),
        Label::Negative => -(1.0 - p).ln(),
    }
}

struct Activations {
    pre: [f64; HIDDEN],
    hidden: [f64; HIDDEN],
    prob: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    params: Params,
    m: Params,
    v: Params,
    t: u64,
    adam: AdamConfig,
}

impl Network {
    /// He initialization: weights ~ N(0, 2 / fan_in), zero biases, fresh ADAM state.
    pub fn init(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layer1 = Normal::new(0.0, (2.0 / INPUTS as f64).sqrt()).expect("valid std");
        let layer2 = Normal::new(0.0, (2.0 / HIDDEN as f64).sqrt()).expect("valid std");
        let mut params = Params::zeros();
        for w in params.w1.iter_mut().flatten() {
            *w = layer1.sample(&mut rng);
        }
        for w in params.w2.iter_mut() {
            *w = layer2.sample(&mut rng);
        }
        Self::from_params(params)
    }

    pub fn from_params(params: Params) -> Self {
        Self {
            params,
            m: Params::zeros(),
            v: Params::zeros(),
            t: 0,
            adam: AdamConfig::default(),
        }
    }

    pub fn with_adam(mut self, adam: AdamConfig) -> Self {
        self.adam = adam;
        self
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    /// Number of ADAM updates applied so far.
    pub fn adam_steps(&self) -> u64 {
        self.t
    }

    fn activations(&self, x: [f64; 2]) -> Activations {
        let p = &self.params;
        let mut pre = [0.0; HIDDEN];
        let mut hidden = [0.0; HIDDEN];
        let mut out = p.b2;
        for j in 0..HIDDEN {
            pre[j] = p.w1[j][0] * x[0] + p.w1[j][1] * x[1] + p.b1[j];
            hidden[j] = leaky_relu(pre[j]);
            out += p.w2[j] * hidden[j];
        }
        Activations {
            pre,
            hidden,
            prob: sigmoid(out),
        }
    }

    /// Hidden-layer pre-activations for `x`.
    pub fn hidden_pre_activations(&self, x: [f64; 2]) -> [f64; HIDDEN] {
        self.activations(x).pre
    }

    /// Probability of the positive class.
    pub fn forward(&self, x: [f64; 2]) -> f64 {
        self.activations(x).prob
    }

    pub fn predict(&self, x: [f64; 2]) -> Label {
        Label::from_bool(self.forward(x) >= DECISION_THRESHOLD)
    }

    /// Mean of `weight * BCE` over the batch.
    pub fn loss(&self, batch: &WeightedBatch) -> f64 {
        let total: f64 = batch
            .items()
            .iter()
            .map(|it| it.weight * binary_cross_entropy(it.y, self.forward(it.x)))
            .sum();
        total / batch.len() as f64
    }

    /// Exact gradient of [`Network::loss`] by backpropagation, using the clamped
    /// output probability.
    pub fn gradients(&self, batch: &WeightedBatch) -> Gradients {
        let mut g = Params::zeros();
        let n = batch.len() as f64;
        let w2 = &self.params.w2;
        for it in batch.items() {
            let a = self.activations(it.x);
            // unit-weight contributions, scaled by the item weight last
            let w = it.weight;
            let d_out = (clamp_prob(a.prob) - it.y.as_f64()) / n;
            g.b2 += w * d_out;
            for (j, &v) in w2.iter().enumerate() {
                g.w2[j] += w * (d_out * a.hidden[j]);
                let d_pre = d_out * v * leaky_relu_grad(a.pre[j]);
                g.b1[j] += w * d_pre;
                g.w1[j][0] += w * (d_pre * it.x[0]);
                g.w1[j][1] += w * (d_pre * it.x[1]);
            }
        }
        g
    }

    /// One bias-corrected ADAM update.
    pub fn adam_step(&mut self, grads: &Gradients) {
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.adam;
        self.t += 1;
        let c1 = 1.0 - beta1.powi(self.t as i32);
        let c2 = 1.0 - beta2.powi(self.t as i32);
        let moments = self.m.iter_mut().zip(self.v.iter_mut());
        for ((w, g), (m, v)) in self.params.iter_mut().zip(grads.iter()).zip(moments) {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *w -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
    }

    /// Gradient computation followed by one ADAM update.
    pub fn train_step(&mut self, batch: &WeightedBatch) {
        let g = self.gradients(batch);
        self.adam_step(&g);
    }
}
