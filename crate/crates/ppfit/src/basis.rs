//! Polynomial basis primitives: evaluation, differentiation and
//! conversion for Chebyshev polynomials of the first kind and the plain
//! power (monomial) basis.
//!
//! Chebyshev polynomials satisfy T_0 = 1, T_1 = x and
//! T_d = 2x·T_{d-1} - T_{d-2}. All routines work on coefficient slices
//! `c[0..=d]` meaning Σ_j c_j·B_j(x); everything is a pure function.
//!
//! Chebyshev evaluation is only well-conditioned on [-1, 1]. Callers may
//! evaluate outside that interval (transforms need it transiently) but
//! get no accuracy guarantee there.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which family a coefficient vector is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Chebyshev,
    Power,
}

impl Basis {
    /// Evaluate Σ_j c_j·B_j(x). Clenshaw recurrence for Chebyshev,
    /// Horner for powers; both are backward and numerically stable.
    pub fn eval(self, coeffs: &[f64], x: f64) -> f64 {
        assert!(!coeffs.is_empty(), "coefficient vector must be non-empty");
        match self {
            Basis::Chebyshev => {
                // Clenshaw: b_j = c_j + 2x·b_{j+1} - b_{j+2}, result c_0 + x·b_1 - b_2.
                let mut b1 = 0.0;
                let mut b2 = 0.0;
                for &c in coeffs.iter().skip(1).rev() {
                    let b = 2.0 * x * b1 - b2 + c;
                    b2 = b1;
                    b1 = b;
                }
                coeffs[0] + x * b1 - b2
            }
            Basis::Power => coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c),
        }
    }

    /// Coefficients of dp/dx in the same basis. Output length is
    /// max(1, d) so a constant differentiates to `[0.0]`.
    pub fn derivative(self, coeffs: &[f64]) -> Vec<f64> {
        assert!(!coeffs.is_empty(), "coefficient vector must be non-empty");
        let d = coeffs.len() - 1;
        if d == 0 {
            return vec![0.0];
        }
        match self {
            Basis::Chebyshev => {
                // In-basis recurrence: b_{j-1} = b_{j+1} + 2j·c_j for
                // j = d..1, then the constant term is halved. Avoids a
                // round-trip through the power basis, which loses digits
                // when applied repeatedly.
                let mut out = vec![0.0; d + 2];
                for j in (1..=d).rev() {
                    out[j - 1] = out[j + 1] + 2.0 * j as f64 * coeffs[j];
                }
                out[0] *= 0.5;
                out.truncate(d);
                out
            }
            Basis::Power => (1..=d).map(|j| j as f64 * coeffs[j]).collect(),
        }
    }

    /// Fill `out[l] = B_l(x)` for every basis function up to
    /// `out.len() - 1` via the forward recurrence. Used in hot loops
    /// where per-function unit-vector evaluation would be wasteful.
    pub fn values_into(self, x: f64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        out[0] = 1.0;
        match self {
            Basis::Power => {
                for l in 1..out.len() {
                    out[l] = out[l - 1] * x;
                }
            }
            Basis::Chebyshev => {
                if out.len() > 1 {
                    out[1] = x;
                }
                for l in 2..out.len() {
                    out[l] = 2.0 * x * out[l - 1] - out[l - 2];
                }
            }
        }
    }

    /// Value of the `order`-th derivative of Σ_j c_j·B_j at `x`.
    /// Orders beyond the degree are identically zero.
    pub fn eval_deriv(self, coeffs: &[f64], x: f64, order: usize) -> f64 {
        if order > coeffs.len().saturating_sub(1) {
            return 0.0;
        }
        let mut c = coeffs.to_vec();
        for _ in 0..order {
            c = self.derivative(&c);
        }
        self.eval(&c, x)
    }
}

/// Power-basis expansions of T_0..T_d, one vector per polynomial, built
/// from the three-term recurrence. Column j has entries up to x^j, so
/// the change-of-basis matrix is triangular.
fn cheb_power_columns(d: usize) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    cols.push(vec![1.0]); // T_0
    if d >= 1 {
        cols.push(vec![0.0, 1.0]); // T_1
    }
    for j in 2..=d {
        // T_j = 2x·T_{j-1} - T_{j-2}
        let mut col = vec![0.0; j + 1];
        for (l, &c) in cols[j - 1].iter().enumerate() {
            col[l + 1] += 2.0 * c;
        }
        for (l, &c) in cols[j - 2].iter().enumerate() {
            col[l] -= c;
        }
        cols.push(col);
    }
    cols
}

/// Expand a Chebyshev coefficient vector into power coefficients of the
/// identical polynomial.
pub fn cheb_to_power(coeffs: &[f64]) -> Vec<f64> {
    assert!(!coeffs.is_empty(), "coefficient vector must be non-empty");
    let d = coeffs.len() - 1;
    let cols = cheb_power_columns(d);
    let mut out = vec![0.0; d + 1];
    for (j, col) in cols.iter().enumerate() {
        for (l, &t) in col.iter().enumerate() {
            out[l] += coeffs[j] * t;
        }
    }
    out
}

/// Inverse of [`cheb_to_power`]: back-substitution against the
/// triangular change-of-basis matrix. The diagonal entry (the leading
/// power coefficient of T_j) is 2^{j-1}, so the system is always
/// solvable.
pub fn power_to_cheb(coeffs: &[f64]) -> Vec<f64> {
    assert!(!coeffs.is_empty(), "coefficient vector must be non-empty");
    let d = coeffs.len() - 1;
    let cols = cheb_power_columns(d);
    let mut residual = coeffs.to_vec();
    let mut out = vec![0.0; d + 1];
    for j in (0..=d).rev() {
        let lead = cols[j][j]; // 1 for j=0, else 2^{j-1}
        let y = residual[j] / lead;
        out[j] = y;
        for (l, &t) in cols[j].iter().enumerate() {
            residual[l] -= y * t;
        }
    }
    out
}

/// Re-expand p(x) as a polynomial in u where x = a·u + b, i.e. the power
/// coefficients of p(a·u + b). Horner on symbolic coefficients: each
/// step multiplies the accumulator by (a·u + b) and adds the next
/// coefficient.
pub fn power_compose_affine(coeffs: &[f64], a: f64, b: f64) -> Vec<f64> {
    assert!(!coeffs.is_empty(), "coefficient vector must be non-empty");
    let d = coeffs.len() - 1;
    let mut acc = vec![0.0; d + 1];
    for &c in coeffs.iter().rev() {
        // acc <- acc·(a·u + b) + c
        for l in (0..=d).rev() {
            let shifted = if l > 0 { acc[l - 1] } else { 0.0 };
            acc[l] = a * shifted + b * acc[l];
        }
        acc[0] += c;
    }
    acc
}

/// Parse a user-facing basis name.
impl std::str::FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cheb" | "chebyshev" => Ok(Basis::Chebyshev),
            "power" | "monomial" => Ok(Basis::Power),
            other => Err(Error::invalid(format!(
                "unknown basis '{other}' (expected 'cheb' or 'power')"
            ))),
        }
    }
}

impl std::fmt::Display for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Basis::Chebyshev => write!(f, "cheb"),
            Basis::Power => write!(f, "power"),
        }
    }
}
