//! The training objective: a convex combination of the mean squared
//! approximation error and a normalized continuity penalty, plus its
//! exact analytic gradient.
//!
//!   loss = alpha·ck + (1 - alpha)·l2
//!
//! `l2` is (1/n) Σ (f(x_i) - y_i)². `ck` sums squared jumps of the
//! value and the first k derivatives across interior knots, each jump
//! divided by a per-order regularization factor r_j so that high-order
//! derivative mismatches (whose raw scale grows like d!/(d-j)!) do not
//! drown out the value terms. Periodic mode adds a wrap-around joint
//! between the last and first segment; cyclic mode is the same but
//! exempts the value (j = 0) term of the wrap, permitting a positional
//! offset per cycle.
//!
//! The model is linear in its coefficients, so both loss terms are
//! quadratic and the gradients below are closed-form exact.

use serde::{Deserialize, Serialize};

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::piecewise::{DomainTransform, PiecewisePolynomial};

/// How the two ends of the model relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    /// No relation between the first and last segment.
    Open,
    /// Derivatives 1..k wrap from the last knot to the first; the value
    /// may jump (repeating motion with a net offset per cycle).
    Cyclic,
    /// Value and derivatives all wrap (strictly repeating motion).
    Periodic,
}

impl std::str::FromStr for BoundaryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "open" => Ok(BoundaryMode::Open),
            "cyclic" => Ok(BoundaryMode::Cyclic),
            "periodic" => Ok(BoundaryMode::Periodic),
            other => Err(Error::invalid(format!(
                "unknown boundary mode '{other}' (expected 'open', 'cyclic' or 'periodic')"
            ))),
        }
    }
}

impl std::fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundaryMode::Open => "open",
            BoundaryMode::Cyclic => "cyclic",
            BoundaryMode::Periodic => "periodic",
        })
    }
}

/// Scaling applied to the order-j jump inside the continuity penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegMode {
    /// r_j = d!/(d-j)! — the magnitude of the leading power term's
    /// j-th derivative.
    Factorial,
    /// r_j = T_d^{(j)}(1) — the j-th derivative of the top Chebyshev
    /// polynomial at the segment edge.
    ChebEndpoint,
    /// r_j = 1.
    None,
}

impl std::str::FromStr for RegMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "factorial" => Ok(RegMode::Factorial),
            "chebendpoint" | "cheb-endpoint" => Ok(RegMode::ChebEndpoint),
            "none" => Ok(RegMode::None),
            other => Err(Error::invalid(format!(
                "unknown regularization '{other}' \
                 (expected 'factorial', 'chebendpoint' or 'none')"
            ))),
        }
    }
}

impl std::fmt::Display for RegMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RegMode::Factorial => "factorial",
            RegMode::ChebEndpoint => "chebendpoint",
            RegMode::None => "none",
        })
    }
}

/// Everything that defines the objective apart from the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub alpha: f64,
    pub k: usize,
    pub boundary: BoundaryMode,
    pub regularization: RegMode,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            alpha: 0.1,
            k: 3,
            boundary: BoundaryMode::Open,
            regularization: RegMode::Factorial,
        }
    }
}

impl LossConfig {
    pub fn validate(&self, degree: usize) -> Result<()> {
        if !self.alpha.is_finite() || !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if self.k > degree {
            return Err(Error::invalid(format!(
                "continuity order k = {} exceeds polynomial degree {}",
                self.k, degree
            )));
        }
        Ok(())
    }
}

/// Samples in the scaled fitting domain, together with the transform
/// that brings them back to original coordinates.
#[derive(Debug, Clone)]
pub struct SampleSet {
    xs: Vec<f64>,
    ys: Vec<f64>,
    transform: DomainTransform,
}

impl SampleSet {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, transform: DomainTransform) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::invalid("sample set must not be empty"));
        }
        if xs.len() != ys.len() {
            return Err(Error::invalid(format!(
                "{} x values but {} y values",
                xs.len(),
                ys.len()
            )));
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("samples must be finite"));
        }
        if xs.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("sample x values must be non-decreasing"));
        }
        Ok(SampleSet { xs, ys, transform })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn transform(&self) -> &DomainTransform {
        &self.transform
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Re-map the samples so their original x span covers [0, 2m] —
    /// the working domain for an m-segment model. The span is taken
    /// from the first and last sample.
    pub fn rescaled(&self, m: usize) -> Result<SampleSet> {
        let a = self.transform.to_original(self.xs[0]);
        let b = self.transform.to_original(*self.xs.last().unwrap());
        let t = DomainTransform::new(a, b, m)?;
        let xs = self
            .xs
            .iter()
            .map(|&x| t.to_scaled(self.transform.to_original(x)))
            .collect();
        SampleSet::new(xs, self.ys.clone(), t)
    }
}

/// Regularization factor r_j for jump order j under degree d.
pub fn reg_factor(mode: RegMode, degree: usize, j: usize) -> Result<f64> {
    if j > degree {
        return Err(Error::invalid(format!(
            "derivative order {j} exceeds degree {degree}"
        )));
    }
    Ok(match mode {
        RegMode::Factorial => ((degree - j + 1)..=degree).map(|v| v as f64).product(),
        RegMode::ChebEndpoint => {
            let mut unit = vec![0.0; degree + 1];
            unit[degree] = 1.0;
            Basis::Chebyshev.eval_deriv(&unit, 1.0, j).abs()
        }
        RegMode::None => 1.0,
    })
}

/// One knot at which two segments must agree. For interior knots both
/// sides evaluate at the same x; the wrap joint compares the last
/// segment's right end against the first segment's left end.
struct Joint {
    left_seg: usize,
    right_seg: usize,
    left_x: f64,
    right_x: f64,
    skip_value_term: bool,
}

/// Joints counted by the continuity penalty, and its normalizer.
fn joints(pp: &PiecewisePolynomial, boundary: BoundaryMode) -> (Vec<Joint>, f64) {
    let m = pp.num_segments();
    if m < 2 {
        return (Vec::new(), 1.0);
    }
    let knots = pp.knots();
    let mut list: Vec<Joint> = (1..m)
        .map(|i| Joint {
            left_seg: i - 1,
            right_seg: i,
            left_x: knots[i],
            right_x: knots[i],
            skip_value_term: false,
        })
        .collect();
    match boundary {
        BoundaryMode::Open => (list, (m - 1) as f64),
        BoundaryMode::Periodic | BoundaryMode::Cyclic => {
            list.push(Joint {
                left_seg: m - 1,
                right_seg: 0,
                left_x: knots[m],
                right_x: knots[0],
                skip_value_term: boundary == BoundaryMode::Cyclic,
            });
            (list, m as f64)
        }
    }
}

fn deriv_at(pp: &PiecewisePolynomial, seg: usize, x: f64, order: usize) -> f64 {
    let s = &pp.segments()[seg];
    pp.basis().eval_deriv(&s.coeffs, x - s.mu, order)
}

/// Jump of the order-j derivative at a joint (right side minus left).
fn jump(pp: &PiecewisePolynomial, joint: &Joint, order: usize) -> f64 {
    deriv_at(pp, joint.right_seg, joint.right_x, order)
        - deriv_at(pp, joint.left_seg, joint.left_x, order)
}

/// Mean squared residual over the samples.
pub fn l2_loss(pp: &PiecewisePolynomial, data: &SampleSet) -> Result<f64> {
    let mut acc = 0.0;
    for (&x, &y) in data.xs.iter().zip(&data.ys) {
        let r = pp.eval(x)? - y;
        acc += r * r;
    }
    Ok(acc / data.len() as f64)
}

/// Normalized, regularized sum of squared derivative jumps. Zero for a
/// single segment in every boundary mode.
pub fn ck_loss(pp: &PiecewisePolynomial, cfg: &LossConfig) -> Result<f64> {
    cfg.validate(pp.degree())?;
    let (list, normalizer) = joints(pp, cfg.boundary);
    if list.is_empty() {
        return Ok(0.0);
    }
    let d = pp.degree();
    let factors: Vec<f64> = (0..=cfg.k)
        .map(|j| reg_factor(cfg.regularization, d, j))
        .collect::<Result<_>>()?;
    let mut acc = 0.0;
    for joint in &list {
        for j in 0..=cfg.k {
            if j == 0 && joint.skip_value_term {
                continue;
            }
            let scaled = jump(pp, joint, j) / factors[j];
            acc += scaled * scaled;
        }
    }
    Ok(acc / normalizer)
}

/// All three loss values of one model state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    pub l2: f64,
    pub ck: f64,
}

pub fn losses(pp: &PiecewisePolynomial, data: &SampleSet, cfg: &LossConfig) -> Result<LossBreakdown> {
    let l2 = l2_loss(pp, data)?;
    let ck = ck_loss(pp, cfg)?;
    Ok(LossBreakdown {
        total: cfg.alpha * ck + (1.0 - cfg.alpha) * l2,
        l2,
        ck,
    })
}

pub fn total_loss(pp: &PiecewisePolynomial, data: &SampleSet, cfg: &LossConfig) -> Result<f64> {
    Ok(losses(pp, data, cfg)?.total)
}

/// rows[j][l] = B_l^{(j)}(x) for j = 0..=k — the sensitivity of each
/// derivative order to each coefficient.
fn basis_deriv_rows(basis: Basis, degree: usize, x: f64, k: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0; degree + 1]; k + 1];
    for l in 0..=degree {
        let mut unit = vec![0.0; degree + 1];
        unit[l] = 1.0;
        rows[0][l] = basis.eval(&unit, x);
        let mut c = unit;
        for j in 1..=k {
            c = basis.derivative(&c);
            rows[j][l] = basis.eval(&c, x);
        }
    }
    rows
}

/// Exact gradient of the total loss with respect to the flattened
/// coefficient vector (segment-major, degree-minor).
pub fn grad_total(pp: &PiecewisePolynomial, data: &SampleSet, cfg: &LossConfig) -> Result<Vec<f64>> {
    cfg.validate(pp.degree())?;
    let d = pp.degree();
    let per = d + 1;
    let m = pp.num_segments();
    let mut grad = vec![0.0; m * per];

    // Approximation part: d/dc_{i,l} (1/n) Σ (f - y)² = (2/n) Σ r·B_l(u)
    // over the samples segment i owns.
    if cfg.alpha < 1.0 {
        let w = 2.0 * (1.0 - cfg.alpha) / data.len() as f64;
        let mut row = vec![0.0; per];
        for (&x, &y) in data.xs.iter().zip(&data.ys) {
            let i = pp.locate_segment(x)?;
            let seg = &pp.segments()[i];
            let u = x - seg.mu;
            pp.basis().values_into(u, &mut row);
            let residual: f64 = row.iter().zip(&seg.coeffs).map(|(b, c)| b * c).sum::<f64>() - y;
            let base = i * per;
            for l in 0..per {
                grad[base + l] += w * residual * row[l];
            }
        }
    }

    // Continuity part: each joint's order-j term is (Δ_j / r_j)² / norm;
    // Δ_j depends on the right segment's coefficients via +B_l^{(j)} at
    // its local knot offset and on the left segment's via -B_l^{(j)}.
    if cfg.alpha > 0.0 {
        let (list, normalizer) = joints(pp, cfg.boundary);
        if !list.is_empty() {
            let factors: Vec<f64> = (0..=cfg.k)
                .map(|j| reg_factor(cfg.regularization, d, j))
                .collect::<Result<_>>()?;
            for joint in &list {
                let left = &pp.segments()[joint.left_seg];
                let right = &pp.segments()[joint.right_seg];
                let left_rows = basis_deriv_rows(pp.basis(), d, joint.left_x - left.mu, cfg.k);
                let right_rows = basis_deriv_rows(pp.basis(), d, joint.right_x - right.mu, cfg.k);
                for j in 0..=cfg.k {
                    if j == 0 && joint.skip_value_term {
                        continue;
                    }
                    let delta = jump(pp, joint, j);
                    let w = 2.0 * cfg.alpha * delta / (normalizer * factors[j] * factors[j]);
                    let lbase = joint.left_seg * per;
                    let rbase = joint.right_seg * per;
                    for l in 0..per {
                        grad[rbase + l] += w * right_rows[j][l];
                        grad[lbase + l] -= w * left_rows[j][l];
                    }
                }
            }
        }
    }

    Ok(grad)
}
