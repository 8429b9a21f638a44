//! Online high-order differentiator.
//!
//! Maintains estimates `z[0..n-1]` of a signal and its first `n-1`
//! derivatives and advances them one sample at a time. Each update predicts
//! the state forward by a Taylor shift over the elapsed interval and then
//! corrects every channel with the innovation, scaled by the observer gain
//! `gain(n, m) / t^m` evaluated at the new sample time. The smoothing
//! factors decay like `1/t^m`, so the scheme weights the whole history
//! equally (for n = 1 and unit steps it is exactly the running mean; for
//! n = 2 it is Holt-style double smoothing with shrinking factors).
//!
//! Irregular sample spacing is supported: time is wall-clock `t`, not a
//! step count.

use std::fmt::Write as _;

use crate::coefficients::GainTable;
use crate::error::Error;
use crate::taylor::TaylorModel;

/// A single observation of the signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub f: f64,
}

impl Sample {
    pub fn new(t: f64, f: f64) -> Self {
        Sample { t, f }
    }
}

/// Construction parameters for a [`Differentiator`].
#[derive(Debug, Clone)]
pub struct DifferentiatorConfig {
    order: usize,
    initial_estimates: Option<Vec<f64>>,
    skip_repeats: bool,
}

impl DifferentiatorConfig {
    /// `order` is the number of tracked quantities: the signal plus its
    /// first `order - 1` derivatives.
    pub fn new(order: usize) -> Self {
        DifferentiatorConfig {
            order,
            initial_estimates: None,
            skip_repeats: false,
        }
    }

    /// Overrides the default initial state (first sample value in channel
    /// 0, zeros above). Must have exactly `order` entries.
    pub fn initial_estimates(mut self, estimates: Vec<f64>) -> Self {
        self.initial_estimates = Some(estimates);
        self
    }

    /// When set, samples that repeat the previous accepted value are
    /// ignored instead of applied. Off by default: skipping changes the
    /// effective `t` inside the gains, so the caller decides.
    pub fn skip_repeats(mut self, on: bool) -> Self {
        self.skip_repeats = on;
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

/// Outcome of feeding one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Update {
    /// The state advanced; `residual` is the innovation, i.e. the sample
    /// value minus the Taylor prediction of channel 0.
    Applied { residual: f64 },
    /// `skip_repeats` is on and the value matched the previous sample.
    SkippedRepeat,
}

/// Streaming differentiator state. One value per logical stream; updates
/// are strictly sequential, but independent instances are `Send` and run
/// in parallel freely.
#[derive(Debug, Clone)]
pub struct Differentiator {
    t: f64,
    z: Vec<f64>,
    gains: Vec<f64>,
    gains_checksum: u64,
    samples_seen: u64,
    last_value: f64,
    skip_repeats: bool,
}

const SNAPSHOT_HEADER: &str = "hound-snapshot 1";

impl Differentiator {
    /// Initializes from the first sample: channel 0 starts at the sample
    /// value and the higher channels at zero, unless the config overrides.
    pub fn new(config: DifferentiatorConfig, first: Sample) -> Result<Self, Error> {
        let table = GainTable::new(config.order)?;
        Self::with_gain_table(&table, config, first)
    }

    /// Same as [`Differentiator::new`] but reuses an existing table, which
    /// is convenient when spawning many replicas of the same order.
    pub fn with_gain_table(
        table: &GainTable,
        config: DifferentiatorConfig,
        first: Sample,
    ) -> Result<Self, Error> {
        let order = config.order;
        if table.order() != order {
            return Err(Error::LengthMismatch {
                expected: order,
                actual: table.order(),
            });
        }
        if !first.t.is_finite() || !first.f.is_finite() {
            return Err(Error::NonFiniteSample {
                t: first.t,
                value: first.f,
            });
        }
        if first.t < 0.0 {
            return Err(Error::InvalidStartTime { t: first.t });
        }
        let z = match config.initial_estimates {
            Some(estimates) => {
                if estimates.len() != order {
                    return Err(Error::LengthMismatch {
                        expected: order,
                        actual: estimates.len(),
                    });
                }
                if estimates.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFiniteSample {
                        t: first.t,
                        value: f64::NAN,
                    });
                }
                estimates
            }
            None => {
                let mut z = vec![0.0; order];
                z[0] = first.f;
                z
            }
        };
        Ok(Differentiator {
            t: first.t,
            z,
            gains: table.gains_f64(),
            gains_checksum: table.checksum(),
            samples_seen: 1,
            last_value: first.f,
            skip_repeats: config.skip_repeats,
        })
    }

    /// Advances the state to `sample.t`. The timestamp must be strictly
    /// later than the current one and nonzero (the gains divide by powers
    /// of `t`, so only initialization may sit at t = 0).
    pub fn update(&mut self, sample: Sample) -> Result<Update, Error> {
        let Sample { t, f } = sample;
        if !t.is_finite() || !f.is_finite() {
            return Err(Error::NonFiniteSample { t, value: f });
        }
        if t == 0.0 {
            return Err(Error::UpdateAtZeroTime);
        }
        if t <= self.t {
            return Err(Error::NonMonotonicTime {
                state_t: self.t,
                sample_t: t,
            });
        }
        if self.skip_repeats && f == self.last_value {
            return Ok(Update::SkippedRepeat);
        }

        let n = self.z.len();
        let dt = t - self.t;

        // Taylor-shift prediction of every channel over dt; the power/
        // factorial weights accumulate multiplicatively.
        let mut predicted = vec![0.0; n];
        for (j, slot) in predicted.iter_mut().enumerate() {
            let mut weight = 1.0;
            let mut acc = 0.0;
            for (offset, &zk) in self.z[j..].iter().enumerate() {
                acc += zk * weight;
                weight *= dt / (offset + 1) as f64;
            }
            *slot = acc;
        }
        let residual = f - predicted[0];

        // Innovation correction, gain(n, m) / t^m with t the new time.
        let mut t_power = t;
        for (j, value) in predicted.iter_mut().enumerate() {
            *value += dt * (self.gains[j] / t_power) * residual;
            t_power *= t;
        }

        if predicted.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }

        self.z = predicted;
        self.t = t;
        self.samples_seen += 1;
        self.last_value = f;
        Ok(Update::Applied { residual })
    }

    pub fn order(&self) -> usize {
        self.z.len()
    }

    /// Time of the last accepted sample.
    pub fn t(&self) -> f64 {
        self.t
    }

    /// Current estimates; `estimates()[m]` approximates the m-th
    /// derivative of the signal at `t()`.
    pub fn estimates(&self) -> &[f64] {
        &self.z
    }

    pub fn samples_seen(&self) -> u64 {
        self.samples_seen
    }

    /// Digest of the exact gain table this state was built from.
    pub fn gains_checksum(&self) -> u64 {
        self.gains_checksum
    }

    pub fn set_skip_repeats(&mut self, on: bool) {
        self.skip_repeats = on;
    }

    /// Elementwise `z - truth`, where `truth` holds the analytic
    /// derivatives at the current time.
    pub fn state_error(&self, truth: &[f64]) -> Result<Vec<f64>, Error> {
        if truth.len() != self.z.len() {
            return Err(Error::LengthMismatch {
                expected: self.z.len(),
                actual: truth.len(),
            });
        }
        Ok(self.z.iter().zip(truth).map(|(est, tr)| est - tr).collect())
    }

    /// Freezes the current state into an evaluable polynomial model.
    pub fn taylor_model(&self) -> TaylorModel {
        TaylorModel::new(self.t, self.z.clone()).expect("state is finite")
    }

    /// Serializes the state as plain text. Floats print in shortest
    /// round-trip form, so a restored state is bit-identical.
    ///
    /// Layout (one field per line):
    ///
    /// ```text
    /// hound-snapshot 1
    /// order <n>
    /// t <time of last sample>
    /// samples_seen <count>
    /// last_value <value of last sample>
    /// z <z0> <z1> ... <z(n-1)>
    /// ```
    pub fn snapshot_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{SNAPSHOT_HEADER}");
        let _ = writeln!(out, "order {}", self.z.len());
        let _ = writeln!(out, "t {}", self.t);
        let _ = writeln!(out, "samples_seen {}", self.samples_seen);
        let _ = writeln!(out, "last_value {}", self.last_value);
        let _ = write!(out, "z");
        for v in &self.z {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
        out
    }

    /// Restores a state written by [`Differentiator::snapshot_string`].
    /// `skip_repeats` is configuration, not state; it defaults to off and
    /// can be re-enabled with [`Differentiator::set_skip_repeats`].
    pub fn from_snapshot(text: &str) -> Result<Self, Error> {
        let bad = |msg: &str| Error::InvalidSnapshot(msg.to_string());
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(SNAPSHOT_HEADER) {
            return Err(bad("missing header"));
        }
        let mut order: Option<usize> = None;
        let mut t: Option<f64> = None;
        let mut samples_seen: Option<u64> = None;
        let mut last_value: Option<f64> = None;
        let mut z: Option<Vec<f64>> = None;
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, rest) = line
                .split_once(' ')
                .ok_or_else(|| bad(&format!("malformed line: {line}")))?;
            match key {
                "order" => order = Some(rest.trim().parse().map_err(|_| bad("bad order"))?),
                "t" => t = Some(rest.trim().parse().map_err(|_| bad("bad t"))?),
                "samples_seen" => {
                    samples_seen = Some(rest.trim().parse().map_err(|_| bad("bad count"))?)
                }
                "last_value" => {
                    last_value = Some(rest.trim().parse().map_err(|_| bad("bad last_value"))?)
                }
                "z" => {
                    let values = rest
                        .split_whitespace()
                        .map(|v| v.parse::<f64>().map_err(|_| bad("bad z entry")))
                        .collect::<Result<Vec<f64>, Error>>()?;
                    z = Some(values);
                }
                other => return Err(bad(&format!("unknown field: {other}"))),
            }
        }
        let order = order.ok_or_else(|| bad("missing order"))?;
        let z = z.ok_or_else(|| bad("missing z"))?;
        if z.len() != order {
            return Err(bad("z length does not match order"));
        }
        let table = GainTable::new(order)?;
        Ok(Differentiator {
            t: t.ok_or_else(|| bad("missing t"))?,
            z,
            gains: table.gains_f64(),
            gains_checksum: table.checksum(),
            samples_seen: samples_seen.ok_or_else(|| bad("missing samples_seen"))?,
            last_value: last_value.ok_or_else(|| bad("missing last_value"))?,
            skip_repeats: false,
        })
    }
}
