//! Randomized invariants over the basis algebra, the model, and the
//! continuity machinery.

use proptest::prelude::*;

use ppfit::basis::{cheb_to_power, power_to_cheb};
use ppfit::continuity::enforce_ck;
use ppfit::loss::{ck_loss, LossConfig, RegMode, SampleSet};
use ppfit::lsq::baselines;
use ppfit::piecewise::{uniform_knots, DomainTransform, PiecewisePolynomial};
use ppfit::Basis;

fn coeff_vec(max_degree: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, 1..=max_degree + 1)
}

proptest! {
    /// power_to_cheb inverts cheb_to_power for every coefficient vector.
    #[test]
    fn basis_conversion_round_trips(coeffs in coeff_vec(9)) {
        let back = power_to_cheb(&cheb_to_power(&coeffs));
        prop_assert_eq!(back.len(), coeffs.len());
        for (a, b) in coeffs.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-10, "{} vs {}", a, b);
        }
    }

    /// Both bases evaluate the same polynomial identically on [-1, 1].
    #[test]
    fn bases_agree_after_conversion(coeffs in coeff_vec(9), x in -1.0..1.0f64) {
        let power = cheb_to_power(&coeffs);
        let c = Basis::Chebyshev.eval(&coeffs, x);
        let p = Basis::Power.eval(&power, x);
        prop_assert!((c - p).abs() <= 1e-9, "cheb {} vs power {}", c, p);
    }

    /// Chebyshev polynomials stay inside [-1, 1] on their interval.
    #[test]
    fn chebyshev_is_bounded_by_one(d in 0usize..10, x in -1.0..=1.0f64) {
        let mut unit = vec![0.0; d + 1];
        unit[d] = 1.0;
        let v = Basis::Chebyshev.eval(&unit, x);
        prop_assert!(v.abs() <= 1.0 + 1e-12, "T_{}({}) = {}", d, x, v);
    }

    /// Interior points locate into the segment that contains them;
    /// knots themselves resolve to the segment on their left.
    #[test]
    fn locate_respects_left_tie(m in 1usize..6, frac in 0.0..1.0f64, raw_seg in 0usize..6) {
        let seg = raw_seg % m;
        let pp = PiecewisePolynomial::zeros(uniform_knots(m), 2, Basis::Power).unwrap();
        let x = 2.0 * seg as f64 + 2.0 * frac;
        let found = pp.locate_segment(x).unwrap();
        if frac == 0.0 && seg > 0 {
            prop_assert_eq!(found, seg - 1);
        } else {
            prop_assert_eq!(found, seg);
        }
    }

    /// Forcing continuity onto the unconstrained per-segment optimum
    /// can only cost accuracy: the corrected model's residual is never
    /// below the optimum's.
    #[test]
    fn continuity_never_improves_the_unconstrained_fit(
        seed in 0u64..1000,
        m in 2usize..4,
    ) {
        let data = wiggly_samples(seed, m);
        let report = baselines(&data, &uniform_knots(m), 7, Basis::Chebyshev, 3).unwrap();
        prop_assert!(
            report.l2_star <= report.l2_star_tilde * (1.0 + 1e-12) + 1e-300,
            "l2* {} above corrected {}",
            report.l2_star,
            report.l2_star_tilde
        );
    }

    /// Enforcing continuity twice is the same as enforcing it once: a
    /// model that already satisfies the constraints gets corrections
    /// that are numerically zero.
    #[test]
    fn continuity_enforcement_is_idempotent(
        coeffs in prop::collection::vec(-10.0..10.0f64, 24),
    ) {
        let mut pp = PiecewisePolynomial::zeros(uniform_knots(3), 7, Basis::Chebyshev).unwrap();
        pp.set_coeffs_flat(&coeffs);
        let once = enforce_ck(&pp, 3).unwrap();
        let twice = enforce_ck(&once, 3).unwrap();
        let scale = coeffs.iter().fold(1.0f64, |a, &c| a.max(c.abs()));
        for (a, b) in once.coeffs_flat().iter().zip(twice.coeffs_flat().iter()) {
            prop_assert!((a - b).abs() <= 1e-8 * scale, "{} vs {}", a, b);
        }
        // And the corrected model really is smooth.
        let cfg = LossConfig { alpha: 1.0, regularization: RegMode::None, ..LossConfig::default() };
        let ck = ck_loss(&once, &cfg).unwrap();
        prop_assert!(ck < 1e-12, "residual jump energy {}", ck);
    }
}

fn wiggly_samples(seed: u64, m: usize) -> SampleSet {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = 12 * m; // comfortably overdetermined for degree 7
    let hi = 2.0 * m as f64;
    let xs: Vec<f64> = (0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| (1.7 * x).sin() + rng.gen_range(-0.3..0.3)).collect();
    SampleSet::new(xs, ys, DomainTransform::identity()).unwrap()
}
