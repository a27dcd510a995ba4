//! Low-pass FIR filters for the pressure and load-cell channels.

use std::collections::VecDeque;

use crate::registry::Registry;

pub trait SensorFilter: Send {
    fn name(&self) -> &'static str;

    /// Feeds one raw sample and returns the filtered value.
    fn push(&mut self, sample: f64) -> f64;

    /// Most recent filtered value, if any sample has been seen.
    fn value(&self) -> Option<f64>;

    fn reset(&mut self);
}

/// Arguments shared by every filter factory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterArgs {
    pub taps: usize,
}

impl Default for FilterArgs {
    fn default() -> Self {
        Self { taps: 5 }
    }
}

/// Equal-weight FIR over the last `taps` samples. Until the window fills, the
/// average runs over the samples received so far.
#[derive(Debug, Clone)]
pub struct MovingAverage {
    taps: usize,
    window: VecDeque<f64>,
}

impl MovingAverage {
    pub fn new(taps: usize) -> Self {
        let taps = taps.max(1);
        Self {
            taps,
            window: VecDeque::with_capacity(taps),
        }
    }

    fn mean(&self) -> Option<f64> {
        if self.window.is_empty() {
            None
        } else {
            Some(self.window.iter().sum::<f64>() / self.window.len() as f64)
        }
    }
}

impl SensorFilter for MovingAverage {
    fn name(&self) -> &'static str {
        "moving-average"
    }

    fn push(&mut self, sample: f64) -> f64 {
        if self.window.len() == self.taps {
            self.window.pop_front();
        }
        self.window.push_back(sample);
        self.mean().unwrap_or(sample)
    }

    fn value(&self) -> Option<f64> {
        self.mean()
    }

    fn reset(&mut self) {
        self.window.clear();
    }
}

/// Unfiltered channel.
#[derive(Debug, Clone, Default)]
pub struct Passthrough {
    last: Option<f64>,
}

impl SensorFilter for Passthrough {
    fn name(&self) -> &'static str {
        "passthrough"
    }

    fn push(&mut self, sample: f64) -> f64 {
        self.last = Some(sample);
        sample
    }

    fn value(&self) -> Option<f64> {
        self.last
    }

    fn reset(&mut self) {
        self.last = None;
    }
}

pub const DEFAULT_FILTER: &str = "moving-average";

pub fn registry() -> Registry<dyn SensorFilter, FilterArgs> {
    Registry::new("sensor filter")
        .with("moving-average", |args: &FilterArgs| -> Box<dyn SensorFilter> {
            Box::new(MovingAverage::new(args.taps))
        })
        .with("passthrough", |_| -> Box<dyn SensorFilter> { Box::new(Passthrough::default()) })
}

/// Moving-average output for a ring of raw samples, oldest first.
///
/// Returns `None` for an empty ring.
pub fn filter_sensor(raw_samples: &[f64], taps: usize) -> Option<f64> {
    let mut f = MovingAverage::new(taps);
    raw_samples.iter().map(|&s| f.push(s)).last()
}
