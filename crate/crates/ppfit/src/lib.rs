//! Smooth piecewise-polynomial fitting for 1-D samples.
//!
//! The model is a chain of fixed-degree polynomials on consecutive
//! knot intervals, each expressed in a Chebyshev or power basis around
//! its segment midpoint. Fitting minimizes a blend of mean-squared
//! data error and a continuity penalty on derivative jumps at the
//! interior knots, by gradient descent over the stacked coefficients:
//!
//! ```text
//! loss = alpha * L_ck + (1 - alpha) * L_2
//! ```
//!
//! Two exact tools complement the descent: [`lsq::fit_segmentwise`]
//! solves each segment's least-squares problem independently (the
//! accuracy ceiling, with no continuity), and [`continuity::enforce_ck`]
//! minimally corrects any model to C^k by adding one Hermite
//! interpolant per segment (the smoothness floor).
//!
//! A typical round trip:
//!
//! ```
//! use ppfit::prelude::*;
//!
//! let spec = DatasetSpec::preset(DatasetId::A, 0.0, 0);
//! let data = ppfit::dataset::generate(&spec).unwrap();
//! let config = TrainConfig {
//!     epochs: 50,
//!     patience: 10,
//!     ..TrainConfig::default()
//! };
//! let knots = uniform_knots(spec.m);
//! let outcome = train(&data, &knots, 7, Basis::Chebyshev, &config).unwrap();
//! let smooth = enforce_ck(&outcome.model, config.loss.k).unwrap();
//! assert!(outcome.trace.best().total.is_finite());
//! assert_eq!(smooth.num_segments(), spec.m);
//! ```

pub mod basis;
pub mod continuity;
pub mod dataset;
pub mod error;
pub mod loss;
pub mod lsq;
pub mod optim;
pub mod piecewise;

pub use basis::Basis;
pub use continuity::{enforce_ck, enforce_ck_mode};
pub use dataset::{DatasetId, DatasetSpec};
pub use error::{Error, Result};
pub use loss::{BoundaryMode, LossBreakdown, LossConfig, RegMode, SampleSet};
pub use lsq::{baselines, fit_segmentwise, BaselineReport};
pub use optim::{
    train, InitStrategy, Optimizer, OptimizerKind, TrainConfig, TrainOutcome, TrainingTrace,
};
pub use piecewise::{uniform_knots, DomainTransform, PiecewisePolynomial, SegmentPolynomial};

/// One-stop imports for the common workflow.
pub mod prelude {
    pub use crate::basis::Basis;
    pub use crate::continuity::{enforce_ck, enforce_ck_mode};
    pub use crate::dataset::{DatasetId, DatasetSpec};
    pub use crate::error::{Error, Result};
    pub use crate::loss::{BoundaryMode, LossConfig, RegMode, SampleSet};
    pub use crate::lsq::{baselines, fit_segmentwise};
    pub use crate::optim::{train, InitStrategy, OptimizerKind, TrainConfig};
    pub use crate::piecewise::{uniform_knots, DomainTransform, PiecewisePolynomial};
}
