//! Polynomial snapshot of the differentiator state.
//!
//! A [`TaylorModel`] freezes the estimates at an anchor time and evaluates
//! the signal (or any tracked derivative) at arbitrary `tau`, inside or
//! outside the observed range. It also recenters the state to `t = 0`,
//! which recovers the coefficients of the underlying polynomial — the
//! regression-without-fitting view of the differentiator.

use crate::error::Error;

/// Immutable polynomial model anchored at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorModel {
    anchor_t: f64,
    coeffs: Vec<f64>,
}

/// Neumaier-compensated sum; keeps the low-order bits that plain
/// accumulation drops when terms cancel.
fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for term in terms {
        let tentative = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - tentative) + term;
        } else {
            comp += (term - tentative) + sum;
        }
        sum = tentative;
    }
    sum + comp
}

impl TaylorModel {
    /// `coeffs[m]` holds the m-th derivative estimate at `anchor_t`.
    pub fn new(anchor_t: f64, coeffs: Vec<f64>) -> Result<Self, Error> {
        if coeffs.is_empty() {
            return Err(Error::LengthMismatch {
                expected: 1,
                actual: 0,
            });
        }
        if !anchor_t.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteState { t: anchor_t });
        }
        Ok(TaylorModel { anchor_t, coeffs })
    }

    pub fn anchor_t(&self) -> f64 {
        self.anchor_t
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Evaluates the `deriv`-th derivative of the model at `tau`:
    /// `sum_k coeffs[k] (tau - anchor)^(k-deriv) / (k-deriv)!`.
    /// At `tau == anchor_t` this returns `coeffs[deriv]` exactly.
    pub fn eval_derivative(&self, deriv: usize, tau: f64) -> Result<f64, Error> {
        let n = self.coeffs.len();
        if deriv >= n {
            return Err(Error::IndexOutOfRange {
                index: deriv,
                order: n,
            });
        }
        let dtau = tau - self.anchor_t;
        let mut weight = 1.0;
        let mut acc = 0.0;
        for (offset, &c) in self.coeffs[deriv..].iter().enumerate() {
            acc += c * weight;
            weight *= dtau / (offset + 1) as f64;
        }
        Ok(acc)
    }

    /// Signal value of the model at `tau`.
    pub fn eval(&self, tau: f64) -> f64 {
        self.eval_derivative(0, tau).expect("deriv 0 always valid")
    }

    /// Recenters the model to `t = 0`, returning estimates of the global
    /// polynomial coefficients: `K[j] = (1/j!) sum_i (-t)^(i-j)/(i-j)! z[i]`.
    ///
    /// For anchors far from the origin the terms alternate in sign and
    /// grow like `t^(i-j)`, so the sum runs compensated. Trailing
    /// near-zero entries are returned as-is; thresholding is the caller's
    /// business.
    pub fn poly_coefficients(&self) -> Vec<f64> {
        let n = self.coeffs.len();
        let mut out = Vec::with_capacity(n);
        let mut j_factorial = 1.0;
        for j in 0..n {
            if j > 0 {
                j_factorial *= j as f64;
            }
            let mut weight = 1.0; // (-t)^offset / offset!, accumulated
            let mut terms = Vec::with_capacity(n - j);
            for (offset, &z) in self.coeffs[j..].iter().enumerate() {
                if offset > 0 {
                    weight *= -self.anchor_t / offset as f64;
                }
                terms.push(z * weight);
            }
            out.push(compensated_sum(terms) / j_factorial);
        }
        out
    }
}
