//! Continuous-time reference model for cross-validation.
//!
//! The discrete recurrence is one discretization of an underlying ODE
//! system; this module integrates that system with classical fixed-step
//! RK4, evaluates the closed-form error solution it admits, and computes
//! the asymptotic error bound under a Lipschitz assumption on the highest
//! estimated derivative. Discrete and continuous paths are independent
//! implementations on purpose: agreement between them is the main
//! correctness oracle of the crate.

use crate::coefficients::GainTable;
use crate::error::Error;
use crate::signals::SignalSpec;

/// Setup for one continuous integration run. The system is singular at
/// t = 0, so `t0` must be positive.
#[derive(Debug, Clone)]
pub struct ContinuousRun<'a> {
    pub gains: &'a GainTable,
    pub t0: f64,
    /// Integrator step. A good default is `1e-3 * t0`.
    pub step: f64,
    /// State at `t0`, one entry per tracked channel.
    pub initial: Vec<f64>,
    pub signal: &'a SignalSpec,
}

/// Integrator output, sampled at every step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("trajectory is never empty")
    }
}

fn derivative_field(gains: &[f64], signal: &SignalSpec, t: f64, z: &[f64], out: &mut [f64]) {
    let n = z.len();
    let innovation = z[0] - signal.clean_value(t);
    let mut t_power = t;
    for j in 0..n {
        let chain = if j + 1 < n { z[j + 1] } else { 0.0 };
        out[j] = chain - (gains[j] / t_power) * innovation;
        t_power *= t;
    }
}

/// Integrates the observer ODE from `run.t0` to `t_end` with classical
/// fourth-order Runge-Kutta at a fixed step. The step is adjusted to the
/// nearest divisor of the window so the final time lands exactly on
/// `t_end`. Non-finite states abort with the offending time.
pub fn integrate_continuous(run: &ContinuousRun<'_>, t_end: f64) -> Result<Trajectory, Error> {
    let n = run.gains.order();
    if run.initial.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: run.initial.len(),
        });
    }
    if !run.t0.is_finite() || run.t0 <= 0.0 {
        return Err(Error::InvalidStartTime { t: run.t0 });
    }
    if !t_end.is_finite() || t_end <= run.t0 {
        return Err(Error::NonMonotonicTime {
            state_t: run.t0,
            sample_t: t_end,
        });
    }
    if !run.step.is_finite() || run.step <= 0.0 {
        return Err(Error::Diverged { t: run.t0 });
    }

    let span = t_end - run.t0;
    let steps = (span / run.step).ceil().max(1.0) as usize;
    let h = span / steps as f64;

    let gains = run.gains.gains_f64();
    let mut z = run.initial.clone();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(run.t0);
    states.push(z.clone());

    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut stage = vec![0.0; n];

    for i in 0..steps {
        let t = run.t0 + i as f64 * h;
        derivative_field(&gains, run.signal, t, &z, &mut k1);
        for j in 0..n {
            stage[j] = z[j] + 0.5 * h * k1[j];
        }
        derivative_field(&gains, run.signal, t + 0.5 * h, &stage, &mut k2);
        for j in 0..n {
            stage[j] = z[j] + 0.5 * h * k2[j];
        }
        derivative_field(&gains, run.signal, t + 0.5 * h, &stage, &mut k3);
        for j in 0..n {
            stage[j] = z[j] + h * k3[j];
        }
        let t_next = run.t0 + (i + 1) as f64 * h;
        derivative_field(&gains, run.signal, t_next, &stage, &mut k4);
        for j in 0..n {
            z[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { t: t_next });
        }
        times.push(t_next);
        states.push(z.clone());
    }
    Ok(Trajectory { times, states })
}

/// Evaluates the closed-form error solution at time `t`:
/// `e[m-1] = sum_d a[m][d] / t^(d+m-1) * (c[d-1] + (-1)^d / b[d] * I[d-1])`
/// where `I[d-1]` is the forcing integral for channel `d` (zero for
/// polynomial signals of degree below the order).
pub fn closed_form_errors(
    gains: &GainTable,
    c: &[f64],
    t: f64,
    integral_terms: &[f64],
) -> Result<Vec<f64>, Error> {
    let n = gains.order();
    if c.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: c.len(),
        });
    }
    if integral_terms.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: integral_terms.len(),
        });
    }
    let mut errors = Vec::with_capacity(n);
    for m in 1..=n {
        let mut acc = 0.0;
        // t^(d+m-1) accumulated across d.
        let mut t_power = t.powi(m as i32);
        for d in 1..=n {
            let sign = if d % 2 == 1 { -1.0 } else { 1.0 };
            let inner = c[d - 1] + sign / gains.b_f64(d) * integral_terms[d - 1];
            acc += gains.a_f64(m, d) / t_power * inner;
            t_power *= t;
        }
        errors.push(acc);
    }
    Ok(errors)
}

/// Forcing integral `int_{t0}^{t} tau^(d+n-1) f^(n)(tau) dtau` for channel
/// `d` of an order-`n` model. Zero when the polynomial part has degree
/// below `n` and no harmonics are present; exact closed form when the
/// n-th derivative is a constant; composite Gauss-Legendre otherwise.
pub fn forcing_integral(signal: &SignalSpec, order: usize, d: usize, t0: f64, t: f64) -> f64 {
    let power = (d + order - 1) as i32;
    let degree = signal.poly_degree().unwrap_or(0);
    if signal.harmonics.is_empty() {
        if degree < order {
            return 0.0;
        }
        if degree == order {
            // f^(n) is the constant n! * K_n.
            let mut constant = signal.poly[order];
            for i in 1..=order {
                constant *= i as f64;
            }
            let p = power + 1;
            return constant * (t.powi(p) - t0.powi(p)) / p as f64;
        }
    }
    gauss_legendre_integral(|tau| tau.powi(power) * signal.derivative(tau, order), t0, t)
}

/// Composite 16-point Gauss-Legendre quadrature with at least 64 panels.
fn gauss_legendre_integral<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let nodes = gauss_legendre_16();
    let panels = 64usize.max(((b - a).abs() / 4.0).ceil() as usize);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let left = a + p as f64 * width;
        let mid = left + 0.5 * width;
        let half = 0.5 * width;
        let mut panel = 0.0;
        for &(x, w) in nodes.iter() {
            panel += w * f(mid + half * x);
        }
        total += panel * half;
    }
    total
}

/// Nodes and weights for 16-point Gauss-Legendre on [-1, 1], computed by
/// Newton iteration on the Legendre polynomial.
fn gauss_legendre_16() -> [(f64, f64); 16] {
    const N: usize = 16;
    let mut out = [(0.0, 0.0); N];
    for (i, slot) in out.iter_mut().enumerate() {
        // Chebyshev-flavored initial guess for the i-th root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(N, x);
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(N, x);
        *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
    }
    out
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Recovers the solution constants from the observed errors at `t0` by
/// solving `sum_d a[m][d] / t0^(d+m-1) * C[d] = e[m-1]`. The system is
/// nonsingular for any `t0 > 0` (its determinant is a superfactorial times
/// a power of `t0`).
pub fn fit_constants_from_state(
    gains: &GainTable,
    t0: f64,
    e_at_t0: &[f64],
) -> Result<Vec<f64>, Error> {
    let n = gains.order();
    if e_at_t0.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: e_at_t0.len(),
        });
    }
    if !t0.is_finite() || t0 <= 0.0 {
        return Err(Error::InvalidStartTime { t: t0 });
    }
    let mut matrix = vec![vec![0.0; n]; n];
    for m in 1..=n {
        let mut t_power = t0.powi(m as i32);
        for d in 1..=n {
            matrix[m - 1][d - 1] = gains.a_f64(m, d) / t_power;
            t_power *= t0;
        }
    }
    let mut rhs = e_at_t0.to_vec();
    solve_dense(&mut matrix, &mut rhs)?;
    Ok(rhs)
}

/// In-place Gaussian elimination with partial pivoting; solution lands in
/// `rhs`.
fn solve_dense(matrix: &mut [Vec<f64>], rhs: &mut [f64]) -> Result<(), Error> {
    let n = rhs.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&a, &b| {
                matrix[a][col]
                    .abs()
                    .partial_cmp(&matrix[b][col].abs())
                    .expect("finite matrix")
            })
            .expect("non-empty range");
        if matrix[pivot_row][col].abs() < f64::MIN_POSITIVE {
            return Err(Error::SingularSystem);
        }
        matrix.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        let pivot_tail: Vec<f64> = matrix[col][col..].to_vec();
        for row in col + 1..n {
            let factor = matrix[row][col] / pivot_tail[0];
            if factor == 0.0 {
                continue;
            }
            for (entry, pivot_val) in matrix[row][col..].iter_mut().zip(&pivot_tail) {
                *entry -= factor * pivot_val;
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= matrix[row][k] * rhs[k];
        }
        rhs[row] = acc / matrix[row][row];
    }
    Ok(())
}

/// Inputs of the asymptotic error bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBoundParams {
    /// Lipschitz constant: bound on the absolute highest estimated
    /// derivative of the signal.
    pub lipschitz: f64,
    /// Absolute values of the solution constants, one per channel.
    pub c_abs: Vec<f64>,
    /// Start time of the run the constants were fitted at.
    pub t0: f64,
}

/// Worst-case bound on `|e[m-1](t)|` for `t >= t0`:
/// `2L + sum_d a[m][d] / t^(d+m-1) * (|c_d| + t0^(d+n-1) * 2L / b[d])`.
/// Tends to `2L` as `t` grows.
pub fn error_bound(
    gains: &GainTable,
    params: &ErrorBoundParams,
    m: usize,
    t: f64,
) -> Result<f64, Error> {
    let n = gains.order();
    if m == 0 || m > n {
        return Err(Error::IndexOutOfRange { index: m, order: n });
    }
    if params.c_abs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: params.c_abs.len(),
        });
    }
    let two_l = 2.0 * params.lipschitz;
    let mut acc = two_l;
    let mut t_power = t.powi(m as i32);
    for d in 1..=n {
        let start_power = params.t0.powi((d + n - 1) as i32);
        acc += gains.a_f64(m, d) / t_power
            * (params.c_abs[d - 1] + start_power * two_l / gains.b_f64(d));
        t_power *= t;
    }
    Ok(acc)
}
