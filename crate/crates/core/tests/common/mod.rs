#![allow(dead_code)]

use queue_resampling::net::{Network, Params, WeightedBatch, WeightedExample, HIDDEN, LEAKY_SLOPE};
use queue_resampling::streams::Label;
use rand::Rng;

pub const FD_STEP: f64 = 1e-5;
pub const MIN_PRE_ACTIVATION: f64 = 1e-3;

fn reference_logit(params: &Params, x: [f64; 2]) -> f64 {
    let mut z = params.b2;
    for j in 0..HIDDEN {
        let pre = params.w1[j][0] * x[0] + params.w1[j][1] * x[1] + params.b1[j];
        let act = if pre > 0.0 { pre } else { LEAKY_SLOPE * pre };
        z += params.w2[j] * act;
    }
    z
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Central finite differences (step `h`) of the weighted mean BCE with respect
/// to every parameter, in flat declared order.
///
/// The loss difference is accumulated per item as
/// `softplus(z+) - softplus(z-) - y (z+ - z-)`, with the softplus difference
/// written as `ln1p(sigmoid(z-) * expm1(z+ - z-))`. Subtracting two rounded
/// batch losses instead would swamp small gradient entries in cancellation.
pub fn finite_difference_gradient(net: &Network, batch: &WeightedBatch, h: f64) -> Vec<f64> {
    let base = net.params().to_flat();
    (0..Params::LEN)
        .map(|i| {
            let mut plus = base.clone();
            let mut minus = base.clone();
            plus[i] += h;
            minus[i] -= h;
            let step = plus[i] - minus[i];
            let plus = Params::from_flat(&plus).unwrap();
            let minus = Params::from_flat(&minus).unwrap();
            let mut total = 0.0;
            let mut comp = 0.0;
            for it in batch.items() {
                let zp = reference_logit(&plus, it.x);
                let zm = reference_logit(&minus, it.x);
                let dz = zp - zm;
                let diff = (sigmoid(zm) * dz.exp_m1()).ln_1p() - it.y.as_f64() * dz;
                let term = it.weight * diff - comp;
                let next = total + term;
                comp = (next - total) - term;
                total = next;
            }
            total / batch.len() as f64 / step
        })
        .collect()
}

/// Gradient entries smaller than this are compared against it instead of their
/// own magnitude: central differences at `h = 1e-5` carry a third-derivative
/// truncation term near 1e-11 that no precision of the loss evaluation removes.
pub const GRADIENT_SCALE_FLOOR: f64 = 1e-5;

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(GRADIENT_SCALE_FLOOR)
}

/// A random network and weighted batch whose hidden pre-activations all stay at
/// least `MIN_PRE_ACTIVATION` away from the Leaky ReLU kink.
pub fn random_pair<R: Rng>(rng: &mut R) -> (Network, WeightedBatch) {
    loop {
        let mut net = Network::init(rng.gen());
        for b in net.params_mut().b1.iter_mut() {
            *b = rng.gen_range(-0.5..0.5);
        }
        net.params_mut().b2 = rng.gen_range(-1.0..1.0);
        let n = rng.gen_range(1..=12);
        let items: Vec<_> = (0..n)
            .map(|_| WeightedExample {
                x: [rng.gen(), rng.gen()],
                y: Label::from_bool(rng.gen()),
                weight: rng.gen_range(0.5..20.0),
            })
            .collect();
        let clear = items.iter().all(|it| {
            net.hidden_pre_activations(it.x)
                .iter()
                .all(|z| z.abs() >= MIN_PRE_ACTIVATION)
        });
        if clear {
            return (net, WeightedBatch::new(items).unwrap());
        }
    }
}

/// Two plain capacity-`L` lists, one per class.
#[derive(Default)]
pub struct QueueOracle {
    pub positives: Vec<([f64; 2], Label)>,
    pub negatives: Vec<([f64; 2], Label)>,
}

impl QueueOracle {
    pub fn push(&mut self, x: [f64; 2], y: Label, cap: usize) {
        let list = if y == Label::Positive {
            &mut self.positives
        } else {
            &mut self.negatives
        };
        list.push((x, y));
        if list.len() > cap {
            list.remove(0);
        }
    }
}

/// `sum_i alpha^(t-i) * indicator_i` computed term by term.
pub fn faded_sum(alpha: f64, indicators: &[bool]) -> f64 {
    let t = indicators.len();
    indicators
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| alpha.powi((t - 1 - i) as i32))
        .sum()
}

pub fn pooled_se(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}
