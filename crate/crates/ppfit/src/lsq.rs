//! Segment-wise least-squares fits and the two reference losses that
//! bracket what gradient training can achieve: the unconstrained
//! per-segment optimum, and that optimum after strict continuity
//! enforcement. Any reasonable combined-loss result should land between
//! the two.

use nalgebra::{DMatrix, DVector};

use crate::basis::Basis;
use crate::continuity::enforce_ck;
use crate::error::{Error, Result};
use crate::loss::{l2_loss, SampleSet};
use crate::piecewise::PiecewisePolynomial;

/// The bracketing losses plus both reference models.
#[derive(Debug, Clone)]
pub struct BaselineReport {
    /// Mean squared residual of the unconstrained segment-wise fit.
    pub l2_star: f64,
    /// Residual of the same fit after continuity enforcement.
    pub l2_star_tilde: f64,
    pub fitted: PiecewisePolynomial,
    pub corrected: PiecewisePolynomial,
}

/// Independent least-squares fit of every segment: each segment's
/// design matrix holds the basis functions at the LOCAL offsets
/// (x - mu) of the samples it owns, and is solved by SVD. The problem
/// is separable, so this is the global optimum of the approximation
/// loss.
pub fn fit_segmentwise(
    data: &SampleSet,
    knots: &[f64],
    degree: usize,
    basis: Basis,
) -> Result<PiecewisePolynomial> {
    let mut pp = PiecewisePolynomial::zeros(knots.to_vec(), degree, basis)?;
    let m = pp.num_segments();
    let per = degree + 1;

    let mut buckets: Vec<Vec<(f64, f64)>> = vec![Vec::new(); m];
    for (&x, &y) in data.xs().iter().zip(data.ys()) {
        buckets[pp.locate_segment(x)?].push((x, y));
    }

    let mut theta = vec![0.0; m * per];
    let mut row = vec![0.0; per];
    for (i, bucket) in buckets.iter().enumerate() {
        if bucket.len() < per {
            return Err(Error::UnderDetermined {
                segment: i + 1,
                samples: bucket.len(),
                unknowns: per,
            });
        }
        let mu = pp.segments()[i].mu;
        let mut a = DMatrix::zeros(bucket.len(), per);
        let mut b = DVector::zeros(bucket.len());
        for (r, &(x, y)) in bucket.iter().enumerate() {
            basis.values_into(x - mu, &mut row);
            for (c, &v) in row.iter().enumerate() {
                a[(r, c)] = v;
            }
            b[r] = y;
        }
        let solution = a
            .svd(true, true)
            .solve(&b, f64::EPSILON)
            .map_err(|e| Error::Singular(format!("segment {}: {e}", i + 1)))?;
        theta[i * per..(i + 1) * per].copy_from_slice(solution.as_slice());
    }
    pp.set_coeffs_flat(&theta);
    Ok(pp)
}

/// Fit, then enforce C^k continuity on the result, reporting the
/// residual of both models. Requires degree ≥ 2k+1 so the corrective
/// polynomials fit inside the model degree.
pub fn baselines(
    data: &SampleSet,
    knots: &[f64],
    degree: usize,
    basis: Basis,
    k: usize,
) -> Result<BaselineReport> {
    if degree < 2 * k + 1 {
        return Err(Error::invalid(format!(
            "degree {degree} cannot absorb a C^{k} correction; raise it to at least {}",
            2 * k + 1
        )));
    }
    let fitted = fit_segmentwise(data, knots, degree, basis)?;
    let corrected = enforce_ck(&fitted, k)?;
    let l2_star = l2_loss(&fitted, data)?;
    let l2_star_tilde = l2_loss(&corrected, data)?;
    Ok(BaselineReport {
        l2_star,
        l2_star_tilde,
        fitted,
        corrected,
    })
}
