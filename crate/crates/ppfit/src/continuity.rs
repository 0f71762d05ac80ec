//! Strict continuity enforcement: add a corrective polynomial of degree
//! 2k+1 to every segment so that the value and the first k derivatives
//! agree at every interior knot, without touching the outer endpoints.
//!
//! One left-to-right pass. For segment i the correction q_i must
//!   * at the left knot, close the gap to the already-corrected left
//!     neighbor exactly (zero for the first segment), and
//!   * at the right knot, move i's derivatives to the MEAN of the two
//!     adjacent segments' values (zero for the last segment).
//! That gives 2(k+1) derivative conditions, met exactly by a degree
//! 2k+1 polynomial — the reason the model degree must be ≥ 2k+1.
//!
//! The conditions are solved in knot-local coordinates (the segment
//! mapped onto [-1, 1]): the condition matrix there is the same
//! fixed, well-conditioned Hermite system for every segment, so it is
//! factored once, and raw powers of large knot positions never appear.
//!
//! Periodic and cyclic variants treat the pair (last knot, first knot)
//! as one more joint: the first segment starts by moving halfway toward
//! the last segment's end, and the last segment ends by matching the
//! corrected first segment exactly. Cyclic mode exempts the value
//! (j = 0) condition at the wrap.

use nalgebra::{DMatrix, DVector};

use crate::basis::{power_to_cheb, Basis};
use crate::error::{Error, Result};
use crate::loss::BoundaryMode;
use crate::piecewise::PiecewisePolynomial;

/// Derivatives of the monomials 1, x, …, x^degree of order `j`,
/// evaluated at `xi`: entry l is l!/(l-j)!·xi^{l-j} for l ≥ j, else 0.
pub fn derivative_condition_row(xi: f64, j: usize, degree: usize) -> Vec<f64> {
    let mut row = vec![0.0; degree + 1];
    for l in j..=degree {
        let falling: f64 = ((l - j + 1)..=l).map(|v| v as f64).product();
        row[l] = falling * xi.powi((l - j) as i32);
    }
    row
}

fn deriv_at(pp: &PiecewisePolynomial, seg: usize, x: f64, order: usize) -> f64 {
    let s = &pp.segments()[seg];
    pp.basis().eval_deriv(&s.coeffs, x - s.mu, order)
}

/// Enforce C^k continuity at all interior knots (open boundary).
pub fn enforce_ck(pp: &PiecewisePolynomial, k: usize) -> Result<PiecewisePolynomial> {
    enforce_ck_mode(pp, k, BoundaryMode::Open)
}

/// Enforce C^k continuity with the chosen boundary treatment.
pub fn enforce_ck_mode(
    pp: &PiecewisePolynomial,
    k: usize,
    boundary: BoundaryMode,
) -> Result<PiecewisePolynomial> {
    let degree = pp.degree();
    let qdeg = 2 * k + 1;
    if degree < qdeg {
        return Err(Error::invalid(format!(
            "degree {degree} cannot absorb a C^{k} correction; raise it to at least {qdeg}"
        )));
    }
    let m = pp.num_segments();
    if m == 1 {
        return Ok(pp.clone());
    }

    // Condition matrix in local coordinates: rows j = 0..=k at t = -1,
    // then at t = +1. Identical for every segment.
    let size = qdeg + 1;
    let mut a = DMatrix::zeros(size, size);
    for j in 0..=k {
        for (col, v) in derivative_condition_row(-1.0, j, qdeg).into_iter().enumerate() {
            a[(j, col)] = v;
        }
        for (col, v) in derivative_condition_row(1.0, j, qdeg).into_iter().enumerate() {
            a[(k + 1 + j, col)] = v;
        }
    }
    let lu = a.clone().full_piv_lu();

    let knots = pp.knots().to_vec();
    let wrap = boundary != BoundaryMode::Open;
    let mut corrected = pp.clone();

    for si in 0..m {
        let (xl, xr) = (knots[si], knots[si + 1]);
        // t = s·(x - mu) maps the segment onto [-1, 1]; the j-th
        // x-derivative is s^j times the t-derivative.
        let s = 2.0 / (xr - xl);

        let b_left = |j: usize| -> f64 {
            if si == 0 {
                if !wrap || (j == 0 && boundary == BoundaryMode::Cyclic) {
                    0.0
                } else {
                    // Move halfway toward the last segment's end value.
                    0.5 * (deriv_at(pp, m - 1, knots[m], j) - deriv_at(pp, 0, knots[0], j))
                }
            } else {
                // Close the gap to the already-corrected neighbor.
                deriv_at(&corrected, si - 1, xl, j) - deriv_at(pp, si, xl, j)
            }
        };
        let b_right = |j: usize| -> f64 {
            if si == m - 1 {
                if !wrap || (j == 0 && boundary == BoundaryMode::Cyclic) {
                    0.0
                } else {
                    // Match the corrected first segment exactly.
                    deriv_at(&corrected, 0, knots[0], j) - deriv_at(pp, m - 1, knots[m], j)
                }
            } else {
                0.5 * (deriv_at(pp, si + 1, xr, j) - deriv_at(pp, si, xr, j))
            }
        };

        let mut rhs = DVector::zeros(size);
        for j in 0..=k {
            let scale = s.powi(j as i32);
            rhs[j] = b_left(j) / scale;
            rhs[k + 1 + j] = b_right(j) / scale;
        }

        let qt = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Singular(format!("correction system of segment {}", si + 1)))?;
        let residual = (&a * &qt - &rhs).amax();
        if residual > 1e-9 * rhs.amax().max(1.0) {
            return Err(Error::Singular(format!(
                "correction system of segment {} left residual {residual}",
                si + 1
            )));
        }

        // Back to the segment's centered coordinate u = x - mu
        // (t = s·u), then into the model's basis, padded to its degree.
        let mut q = vec![0.0; degree + 1];
        for (l, &c) in qt.iter().enumerate() {
            q[l] = c * s.powi(l as i32);
        }
        if pp.basis() == Basis::Chebyshev {
            q = power_to_cheb(&q);
        }
        let coeffs = &mut corrected.segments_mut()[si].coeffs;
        for (target, add) in coeffs.iter_mut().zip(&q) {
            *target += add;
        }
    }

    Ok(corrected)
}
