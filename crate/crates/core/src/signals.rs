//! Deterministic test-signal generators and the Monte Carlo variance
//! harness.
//!
//! A [`SignalSpec`] describes a polynomial plus optional harmonics with
//! additive white Gaussian measurement noise. Noise draws are a pure
//! function of `(seed, sample index)` — no generator state — so streams
//! are reproducible sample-by-sample and replicas parallelize trivially.

use rayon::prelude::*;

use crate::coefficients::GainTable;
use crate::differentiator::{Differentiator, DifferentiatorConfig, Sample};
use crate::error::Error;

/// One harmonic term `amplitude * sin(angular_frequency * t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub amplitude: f64,
    pub angular_frequency: f64,
    pub phase: f64,
}

/// Signal description: clean part plus i.i.d. Gaussian sample noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    /// Polynomial coefficients, ascending powers. May be empty.
    pub poly: Vec<f64>,
    pub harmonics: Vec<Harmonic>,
    /// Standard deviation of the per-sample measurement noise.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SignalSpec {
    pub fn polynomial(coeffs: &[f64]) -> Self {
        SignalSpec {
            poly: coeffs.to_vec(),
            harmonics: Vec::new(),
            noise_sigma: 0.0,
            seed: 0,
        }
    }

    pub fn harmonic(amplitude: f64, angular_frequency: f64, phase: f64) -> Self {
        SignalSpec {
            poly: Vec::new(),
            harmonics: vec![Harmonic {
                amplitude,
                angular_frequency,
                phase,
            }],
            noise_sigma: 0.0,
            seed: 0,
        }
    }

    pub fn with_noise(mut self, sigma: f64, seed: u64) -> Self {
        self.noise_sigma = sigma;
        self.seed = seed;
        self
    }

    /// Noiseless signal value.
    pub fn clean_value(&self, t: f64) -> f64 {
        let poly = self.poly.iter().rev().fold(0.0, |acc, &c| acc * t + c);
        let harm: f64 = self
            .harmonics
            .iter()
            .map(|h| h.amplitude * (h.angular_frequency * t + h.phase).sin())
            .sum();
        poly + harm
    }

    /// Analytic m-th derivative of the noiseless signal. `m = 0` returns
    /// the signal itself.
    pub fn derivative(&self, t: f64, m: usize) -> f64 {
        let mut poly = 0.0;
        // sum_{j >= m} j!/(j-m)! K_j t^(j-m), falling factor accumulated.
        for (j, &coeff) in self.poly.iter().enumerate().skip(m) {
            let mut falling = 1.0;
            for i in 0..m {
                falling *= (j - i) as f64;
            }
            poly += falling * coeff * t.powi((j - m) as i32);
        }
        let harm: f64 = self
            .harmonics
            .iter()
            .map(|h| {
                let shift = m as f64 * std::f64::consts::FRAC_PI_2;
                h.amplitude
                    * h.angular_frequency.powi(m as i32)
                    * (h.angular_frequency * t + h.phase + shift).sin()
            })
            .sum();
        poly + harm
    }

    /// Observed value at `t` for the sample with the given stream index:
    /// clean value plus `noise_sigma * N(0, 1)`, where the normal draw
    /// depends only on `(seed, index)`.
    pub fn sample_at(&self, t: f64, index: u64) -> f64 {
        let clean = self.clean_value(t);
        if self.noise_sigma == 0.0 {
            clean
        } else {
            clean + self.noise_sigma * standard_normal(self.seed, index)
        }
    }

    /// Degree of the polynomial part (None when empty or all zero).
    pub fn poly_degree(&self) -> Option<usize> {
        self.poly.iter().rposition(|&c| c != 0.0)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Mixes a seed and a counter into one well-scrambled word.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ 0x6a09_e667_f3bc_c909).wrapping_add(index))
}

fn unit_open(bits: u64) -> f64 {
    // (0, 1]: take the top 53 bits, then nudge off zero.
    (((bits >> 11) as f64) + 1.0) / 9_007_199_254_740_992.0
}

/// Standard normal draw as a pure function of `(seed, index)`, via the
/// Box-Muller transform over two counter-derived uniforms.
pub fn standard_normal(seed: u64, index: u64) -> f64 {
    let u1 = unit_open(mix_seed(seed, 2 * index));
    let u2 = unit_open(mix_seed(seed, 2 * index + 1));
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Ordinary least squares slope of `ln(y)` against `ln(x)`. Returns `None`
/// if fewer than two usable points or any `y <= 0`.
pub fn fit_log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let count = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / count;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (x, y) in logs {
        cov += (x - mean_x) * (y - mean_y);
        var += (x - mean_x) * (x - mean_x);
    }
    if var == 0.0 {
        None
    } else {
        Some(cov / var)
    }
}

/// Result of the cross-replica variance measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceSlopeReport {
    /// Fitted log-log slope of variance against time; `None` when the
    /// variance is degenerate (e.g. sigma = 0).
    pub slope: Option<f64>,
    /// `(t, empirical variance)` per grid point.
    pub variances: Vec<(f64, f64)>,
    /// Set when the variance fails to decrease monotonically over the
    /// last half of the grid — the transient may not have passed.
    pub transient_warning: bool,
}

/// Runs `runs` independently-seeded replicas of an order-`order`
/// differentiator over the noisy signal at unit steps and fits the decay
/// slope of the cross-replica variance of channel `m - 1` (`m` 1-based)
/// over `t_grid`. Under white measurement noise the variance decays like
/// `t^-(2m-1)`.
pub fn variance_slope(
    spec: &SignalSpec,
    order: usize,
    m: usize,
    runs: usize,
    t_grid: &[f64],
) -> Result<VarianceSlopeReport, Error> {
    const MIN_RUNS: usize = 100;
    if runs < MIN_RUNS {
        return Err(Error::InsufficientRuns {
            runs,
            min: MIN_RUNS,
        });
    }
    if m == 0 || m > order {
        return Err(Error::IndexOutOfRange { index: m, order });
    }
    if let Some(degree) = spec.poly_degree() {
        if degree > order - 1 {
            return Err(Error::SignalDegreeTooHigh { degree, order });
        }
    }
    let grid: Vec<u64> = t_grid.iter().map(|&t| t.round() as u64).collect();
    if grid.is_empty() || grid.contains(&0) {
        return Err(Error::LengthMismatch {
            expected: 1,
            actual: 0,
        });
    }
    let horizon = *grid.iter().max().expect("non-empty grid");
    let table = GainTable::new(order)?;

    // Each replica owns a derived seed; rows are z[m-1] at the grid times.
    let rows: Vec<Vec<f64>> = (0..runs as u64)
        .into_par_iter()
        .map(|replica| {
            let mut replica_spec = spec.clone();
            replica_spec.seed = mix_seed(spec.seed, replica);
            let mut diff = Differentiator::with_gain_table(
                &table,
                DifferentiatorConfig::new(order),
                Sample::new(0.0, replica_spec.sample_at(0.0, 0)),
            )
            .expect("replica init");
            let mut row = vec![0.0; grid.len()];
            for step in 1..=horizon {
                let t = step as f64;
                diff.update(Sample::new(t, replica_spec.sample_at(t, step)))
                    .expect("replica update");
                for (slot, &g) in row.iter_mut().zip(&grid) {
                    if g == step {
                        *slot = diff.estimates()[m - 1];
                    }
                }
            }
            row
        })
        .collect();

    let mut variances = Vec::with_capacity(grid.len());
    for (g_idx, &g) in grid.iter().enumerate() {
        let mean = rows.iter().map(|r| r[g_idx]).sum::<f64>() / runs as f64;
        let var = rows
            .iter()
            .map(|r| (r[g_idx] - mean) * (r[g_idx] - mean))
            .sum::<f64>()
            / (runs - 1) as f64;
        variances.push((g as f64, var));
    }

    let half = variances.len() / 2;
    let tail = &variances[half..];
    let transient_warning = tail.windows(2).any(|w| w[1].1 >= w[0].1);

    let slope = fit_log_log_slope(&variances);
    Ok(VarianceSlopeReport {
        slope,
        variances,
        transient_warning,
    })
}
