//! The piecewise polynomial model: ordered knots, one centered
//! polynomial per segment, evaluation of the function and its
//! derivatives, and the affine rescaling between original and working
//! coordinates.
//!
//! Fitting happens in a *scaled* domain where every segment spans 2, so
//! local coordinates (x - mu_i) run over [-1, 1] — the interval where
//! the Chebyshev basis is orthogonal and well-conditioned. The segment
//! count decides the scaling: [a, b] maps to [0, 2m].

use serde::{Deserialize, Serialize};

use crate::basis::{cheb_to_power, power_compose_affine, Basis};
use crate::error::{Error, Result};

/// Affine map x' = (x - offset)·scale between original data coordinates
/// and the scaled fitting domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainTransform {
    pub scale: f64,
    pub offset: f64,
}

impl DomainTransform {
    /// Transform mapping [a, b] onto [0, 2m], giving every one of the m
    /// equal segments a span of exactly 2.
    pub fn new(a: f64, b: f64, m: usize) -> Result<Self> {
        if !(a < b) {
            return Err(Error::invalid(format!(
                "domain start must be below its end (got [{a}, {b}])"
            )));
        }
        if m == 0 {
            return Err(Error::invalid("segment count must be at least 1"));
        }
        Ok(DomainTransform {
            scale: 2.0 * m as f64 / (b - a),
            offset: a,
        })
    }

    /// The do-nothing transform (scale 1, offset 0).
    pub fn identity() -> Self {
        DomainTransform { scale: 1.0, offset: 0.0 }
    }

    pub fn to_scaled(&self, x: f64) -> f64 {
        (x - self.offset) * self.scale
    }

    pub fn to_original(&self, x: f64) -> f64 {
        x / self.scale + self.offset
    }
}

/// One polynomial segment: coefficients relative to the shared basis,
/// shifted to the segment mean so evaluation happens at (x - mu).
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentPolynomial {
    pub coeffs: Vec<f64>,
    pub mu: f64,
}

/// Knots ξ_0 < … < ξ_m plus m centered segment polynomials of one
/// common degree and basis. This is the trainable model; optimizers
/// treat the concatenated coefficients as the parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolynomial {
    knots: Vec<f64>,
    segments: Vec<SegmentPolynomial>,
    basis: Basis,
}

/// Knots 0, 2, …, 2m — the canonical layout in the scaled domain.
pub fn uniform_knots(m: usize) -> Vec<f64> {
    (0..=m).map(|i| 2.0 * i as f64).collect()
}

fn validate_knots(knots: &[f64]) -> Result<()> {
    if knots.len() < 2 {
        return Err(Error::invalid("need at least two knots (one segment)"));
    }
    if knots.iter().any(|k| !k.is_finite()) {
        return Err(Error::invalid("knots must be finite"));
    }
    if knots.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("knots must be strictly increasing"));
    }
    if knots.windows(2).any(|w| (w[1] - w[0] - 2.0).abs() > 1e-9) {
        // Accepted, but the [-1, 1] local-coordinate guarantee is gone.
        log::warn!(
            "knot spacing differs from the canonical width 2; \
             Chebyshev evaluation leaves its well-conditioned interval"
        );
    }
    Ok(())
}

impl PiecewisePolynomial {
    /// All-zero model over the given knots.
    pub fn zeros(knots: Vec<f64>, degree: usize, basis: Basis) -> Result<Self> {
        validate_knots(&knots)?;
        let segments = knots
            .windows(2)
            .map(|w| SegmentPolynomial {
                coeffs: vec![0.0; degree + 1],
                mu: 0.5 * (w[0] + w[1]),
            })
            .collect();
        Ok(PiecewisePolynomial { knots, segments, basis })
    }

    /// Build from explicit segments; each mu must sit at its segment's
    /// midpoint and all coefficient vectors must share one length.
    pub fn from_segments(
        knots: Vec<f64>,
        segments: Vec<SegmentPolynomial>,
        basis: Basis,
    ) -> Result<Self> {
        validate_knots(&knots)?;
        if segments.len() + 1 != knots.len() {
            return Err(Error::invalid(format!(
                "{} segments do not fit {} knots",
                segments.len(),
                knots.len()
            )));
        }
        let len0 = segments[0].coeffs.len();
        for (i, (seg, w)) in segments.iter().zip(knots.windows(2)).enumerate() {
            if seg.coeffs.is_empty() || seg.coeffs.len() != len0 {
                return Err(Error::invalid("all segments must share one degree"));
            }
            if seg.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::invalid(format!("segment {} has non-finite coefficients", i + 1)));
            }
            let mid = 0.5 * (w[0] + w[1]);
            if (seg.mu - mid).abs() > 1e-9 * mid.abs().max(1.0) {
                return Err(Error::invalid(format!(
                    "segment {} center {} is not its midpoint {}",
                    i + 1,
                    seg.mu,
                    mid
                )));
            }
        }
        Ok(PiecewisePolynomial { knots, segments, basis })
    }

    /// Internal constructor without the midpoint check; used for export
    /// products whose coefficients are deliberately absolute (mu = 0).
    pub(crate) fn from_parts_unchecked(
        knots: Vec<f64>,
        segments: Vec<SegmentPolynomial>,
        basis: Basis,
    ) -> Self {
        PiecewisePolynomial { knots, segments, basis }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn segments(&self) -> &[SegmentPolynomial] {
        &self.segments
    }

    pub(crate) fn segments_mut(&mut self) -> &mut [SegmentPolynomial] {
        &mut self.segments
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn num_segments(&self) -> usize {
        self.segments.len()
    }

    pub fn degree(&self) -> usize {
        self.segments[0].coeffs.len() - 1
    }

    /// (ξ_0, ξ_m)
    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    /// 0-based index of the segment owning x. Interior knots belong to
    /// the segment on their LEFT, so adjacent segments never both claim
    /// a sample.
    pub fn locate_segment(&self, x: f64) -> Result<usize> {
        if !x.is_finite() {
            return Err(Error::invalid(format!("cannot locate non-finite x = {x}")));
        }
        let (lo, hi) = self.domain();
        // Forgive float dust from transforms mapping b to 2m inexactly.
        let tol = 1e-9 * (hi - lo).max(1.0);
        if x < lo - tol || x > hi + tol {
            return Err(Error::OutOfDomain { x, lo, hi });
        }
        let x = x.clamp(lo, hi);
        let below = self.knots.partition_point(|&k| k < x);
        Ok(below.saturating_sub(1).min(self.segments.len() - 1))
    }

    /// f(x)
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.eval_deriv(x, 0)
    }

    /// f^{(order)}(x); orders beyond the degree give 0.
    pub fn eval_deriv(&self, x: f64, order: usize) -> Result<f64> {
        let i = self.locate_segment(x)?;
        let seg = &self.segments[i];
        Ok(self.basis.eval_deriv(&seg.coeffs, x - seg.mu, order))
    }

    /// Concatenated coefficients, segment-major then degree-minor — the
    /// optimizer's parameter vector θ.
    pub fn coeffs_flat(&self) -> Vec<f64> {
        self.segments.iter().flat_map(|s| s.coeffs.iter().copied()).collect()
    }

    /// Overwrite all coefficients from a flat θ vector.
    pub fn set_coeffs_flat(&mut self, theta: &[f64]) {
        let per = self.segments[0].coeffs.len();
        assert_eq!(
            theta.len(),
            per * self.segments.len(),
            "parameter vector length does not match the model"
        );
        for (seg, chunk) in self.segments.iter_mut().zip(theta.chunks_exact(per)) {
            seg.coeffs.copy_from_slice(chunk);
        }
    }

    /// Rewrite the model in power basis over the ORIGINAL domain with
    /// absolute (uncentered) coefficients — the form drive controllers
    /// consume. Each segment becomes Σ_l c_l·x^l in original x units;
    /// knots are mapped back through the transform.
    ///
    /// The re-expansion is exact up to rounding; expect ~1e-10 relative
    /// agreement for moderate domains and degrees. Domains far from the
    /// origin amplify cancellation in the absolute representation.
    pub fn to_export_form(&self, t: &DomainTransform) -> PiecewisePolynomial {
        let knots = self.knots.iter().map(|&k| t.to_original(k)).collect();
        let segments = self
            .segments
            .iter()
            .map(|seg| {
                let power = match self.basis {
                    Basis::Chebyshev => cheb_to_power(&seg.coeffs),
                    Basis::Power => seg.coeffs.clone(),
                };
                // Local coordinate as a function of original x:
                // u = (x - offset)·scale - mu = scale·x - (offset·scale + mu)
                let a = t.scale;
                let b = -(t.offset * t.scale + seg.mu);
                SegmentPolynomial {
                    coeffs: power_compose_affine(&power, a, b),
                    mu: 0.0,
                }
            })
            .collect();
        PiecewisePolynomial::from_parts_unchecked(knots, segments, Basis::Power)
    }
}
