//! Synthetic Sine and Circle streams with a piecewise-constant class prior.
//!
//! Examples are generated label-first: the target label is drawn from the
//! current prior, then uniform points in the unit square are rejection-sampled
//! until the concept agrees with it. Within-class feature distributions stay
//! uniform whatever the prior is.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Maximum rejection-sampling attempts per emitted example.
pub const MAX_REJECTION_ATTEMPTS: usize = 10_000;

/// Points closer than this to a concept boundary are treated as lying on it.
/// `sin(PI)` is not exactly zero in floating point.
const BOUNDARY_TOL: f64 = 1e-12;

const CIRCLE_CENTER: [f64; 2] = [0.4, 0.5];
const CIRCLE_RADIUS: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative = 0,
    Positive = 1,
}

impl Label {
    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn as_f64(self) -> f64 {
        self as u8 as f64
    }

    pub fn other(self) -> Self {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }
}

impl TryFrom<u8> for Label {
    type Error = u8;

    fn try_from(value: u8) -> std::result::Result<Self, u8> {
        match value {
            0 => Ok(Label::Negative),
            1 => Ok(Label::Positive),
            other => Err(other),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", *self as u8)
    }
}

/// One stream item: a point in the unit square and its binary label.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabeledExample {
    pub x: [f64; 2],
    pub y: Label,
}

impl LabeledExample {
    pub fn new(x: [f64; 2], y: Label) -> Self {
        Self { x, y }
    }
}

fn check_unit_square(x: [f64; 2]) -> Result<()> {
    if x.iter().all(|v| (0.0..=1.0).contains(v)) {
        Ok(())
    } else {
        Err(Error::Domain(x[0], x[1]))
    }
}

/// Positive iff the point lies strictly below `sin` after undoing the rescaling
/// of `[0, 2pi] x [-1, 1]` onto the unit square. Points on the curve are negative.
pub fn sine_label(x: [f64; 2]) -> Result<Label> {
    check_unit_square(x)?;
    let xo = 2.0 * PI * x[0];
    let yo = 2.0 * x[1] - 1.0;
    Ok(Label::from_bool(xo.sin() - yo > BOUNDARY_TOL))
}

/// Positive iff the point lies in the closed disc of radius 0.2 around (0.4, 0.5).
pub fn circle_label(x: [f64; 2]) -> Result<Label> {
    check_unit_square(x)?;
    let dx = x[0] - CIRCLE_CENTER[0];
    let dy = x[1] - CIRCLE_CENTER[1];
    Ok(Label::from_bool(
        dx * dx + dy * dy <= CIRCLE_RADIUS * CIRCLE_RADIUS + BOUNDARY_TOL,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dataset {
    Sine,
    Circle,
}

impl Dataset {
    pub fn label(self, x: [f64; 2]) -> Result<Label> {
        match self {
            Dataset::Sine => sine_label(x),
            Dataset::Circle => circle_label(x),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dataset::Sine => "sine",
            Dataset::Circle => "circle",
        }
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dataset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sine" => Ok(Dataset::Sine),
            "circle" => Ok(Dataset::Circle),
            other => Err(Error::Config(format!("unknown dataset `{other}`"))),
        }
    }
}

/// Piecewise-constant positive-class prior over time steps.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorSchedule {
    segments: Vec<(u64, f64)>,
}

impl PriorSchedule {
    /// Segments are `(start_step, p_pos)`. The first must start at 0, starts
    /// must strictly increase and every prior must lie in the open interval (0, 1).
    pub fn new(segments: Vec<(u64, f64)>) -> Result<Self> {
        match segments.first() {
            None => return Err(Error::Schedule("no segments".into())),
            Some(&(start, _)) if start != 0 => {
                return Err(Error::Schedule(format!(
                    "first segment starts at {start}, expected 0"
                )))
            }
            _ => {}
        }
        for pair in segments.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::Schedule(format!(
                    "segment starts not strictly increasing ({} then {})",
                    pair[0].0, pair[1].0
                )));
            }
        }
        if let Some(&(start, p)) = segments.iter().find(|(_, p)| !(*p > 0.0 && *p < 1.0)) {
            return Err(Error::Schedule(format!(
                "prior {p} at step {start} is not in (0, 1)"
            )));
        }
        Ok(Self { segments })
    }

    pub fn constant(p_pos: f64) -> Result<Self> {
        Self::new(vec![(0, p_pos)])
    }

    pub fn segments(&self) -> &[(u64, f64)] {
        &self.segments
    }

    /// Prior of the last segment starting at or before `t`.
    pub fn current_prior(&self, t: u64) -> f64 {
        let idx = self.segments.partition_point(|&(start, _)| start <= t);
        // idx >= 1 because the first segment starts at 0.
        self.segments[idx - 1].1
    }

    /// Steps at which the prior changes.
    pub fn change_points(&self) -> impl Iterator<Item = u64> + '_ {
        self.segments.iter().skip(1).map(|&(start, _)| start)
    }
}

/// Seeded generator for one dataset under one prior schedule.
///
/// Randomness comes from ChaCha8 (`rand_chacha`) seeded through
/// `SeedableRng::seed_from_u64`, so sequences are stable across platforms.
#[derive(Clone, Debug)]
pub struct Stream {
    dataset: Dataset,
    schedule: PriorSchedule,
    rng: ChaCha8Rng,
    step: u64,
}

impl Stream {
    pub fn new(dataset: Dataset, schedule: PriorSchedule, seed: u64) -> Self {
        Self {
            dataset,
            schedule,
            rng: ChaCha8Rng::seed_from_u64(seed),
            step: 0,
        }
    }

    pub fn dataset(&self) -> Dataset {
        self.dataset
    }

    pub fn schedule(&self) -> &PriorSchedule {
        &self.schedule
    }

    /// Index of the next example to be emitted.
    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn next_example(&mut self) -> Result<LabeledExample> {
        let p_pos = self.schedule.current_prior(self.step);
        let target = Label::from_bool(self.rng.gen::<f64>() < p_pos);
        for _ in 0..MAX_REJECTION_ATTEMPTS {
            let x = [self.rng.gen::<f64>(), self.rng.gen::<f64>()];
            if self.dataset.label(x)? == target {
                self.step += 1;
                return Ok(LabeledExample::new(x, target));
            }
        }
        Err(Error::Generation {
            label: target as u8,
            attempts: MAX_REJECTION_ATTEMPTS,
            step: self.step,
        })
    }
}
