//! Online binary classification under class imbalance and prior-probability drift.
//!
//! The crate is split the same way an experiment is wired together:
//!
//! - [`streams`] generates labeled examples from the Sine and Circle concepts
//!   under a (possibly drifting) class-prior schedule.
//! - [`net`] is the 2-8-1 neural classifier trained with ADAM.
//! - [`methods`] holds the online learning strategies, including queue-based
//!   resampling, which keeps one bounded FIFO per class and trains on their union.
//! - [`eval`] is prequential G-mean with fading factors.
//! - [`harness`] runs seeded repetitions, aggregates them and writes CSV and SVG.

pub mod error;
pub mod eval;
pub mod harness;
pub mod methods;
pub mod net;
pub mod streams;

pub use error::{Error, Result};
