//! Prequential recall, specificity and G-mean with fading factors.

use crate::error::{Error, Result};
use crate::streams::Label;

pub const DEFAULT_ALPHA: f64 = 0.99;

/// Faded confusion counts. Every update first multiplies all four accumulators
/// by `alpha`, then adds the current outcome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prequential {
    alpha: f64,
    tp: f64,
    pos: f64,
    tn: f64,
    neg: f64,
}

impl Prequential {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!(
                "fading factor {alpha} not in (0, 1)"
            )));
        }
        Ok(Self {
            alpha,
            tp: 0.0,
            pos: 0.0,
            tn: 0.0,
            neg: 0.0,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn update(&mut self, truth: Label, predicted: Label) {
        let a = self.alpha;
        self.tp *= a;
        self.pos *= a;
        self.tn *= a;
        self.neg *= a;
        let hit = f64::from(u8::from(truth == predicted));
        match truth {
            Label::Positive => {
                self.pos += 1.0;
                self.tp += hit;
            }
            Label::Negative => {
                self.neg += 1.0;
                self.tn += hit;
            }
        }
    }

    /// Faded (TP, P, TN, N).
    pub fn accumulators(&self) -> (f64, f64, f64, f64) {
        (self.tp, self.pos, self.tn, self.neg)
    }

    /// Zero before any positive has been seen.
    pub fn recall(&self) -> f64 {
        if self.pos > 0.0 {
            self.tp / self.pos
        } else {
            0.0
        }
    }

    /// Zero before any negative has been seen.
    pub fn specificity(&self) -> f64 {
        if self.neg > 0.0 {
            self.tn / self.neg
        } else {
            0.0
        }
    }

    pub fn gmean(&self) -> f64 {
        (self.recall() * self.specificity()).sqrt()
    }

    pub fn reset(&mut self) {
        self.tp = 0.0;
        self.pos = 0.0;
        self.tn = 0.0;
        self.neg = 0.0;
    }
}
