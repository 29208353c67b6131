use std::sync::Arc;

use proptest::prelude::*;
use sew_core::harmonics::BlockSelection;
use sew_core::operators::{
    apply_multiplier, det_root, sample_sobolev_ball, sobolev_multiplier, Direction, MultiplierSpec,
    SobolevSpec,
};
use sew_core::{spectrum, Exponent, ManifoldModel};

#[test]
fn integral_then_derivative_is_identity() {
    let s = Arc::new(spectrum(ManifoldModel::sphere(2).unwrap(), 10).unwrap());
    let spec = SobolevSpec::new(2.5, Exponent::Finite(2.0), Arc::clone(&s)).unwrap();
    let sel = BlockSelection::contiguous(&s, 1, 10).unwrap();
    let z: Vec<f64> = (0..sel.dim()).map(|i| ((i * 7 % 11) as f64) - 5.0).collect();
    let up = apply_multiplier(&z, &sel, &sobolev_multiplier(&spec, Direction::Integral)).unwrap();
    let back = apply_multiplier(&up, &sel, &sobolev_multiplier(&spec, Direction::Derivative)).unwrap();
    for (a, b) in z.iter().zip(&back) {
        assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
}

#[test]
fn euclidean_ball_samples_scale_blockwise() {
    let s = Arc::new(spectrum(ManifoldModel::circle(), 5).unwrap());
    let spec = SobolevSpec::new(2.0, Exponent::Finite(2.0), Arc::clone(&s)).unwrap();
    let sel = BlockSelection::contiguous(&s, 1, 5).unwrap();
    let deriv = sobolev_multiplier(&spec, Direction::Derivative);
    for z in sample_sobolev_ball(&spec, &sel, 200, 8).unwrap() {
        let psi = apply_multiplier(&z, &sel, &deriv).unwrap();
        let norm: f64 = psi.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}

#[test]
fn sample_counts_cross_chunk_boundaries() {
    let s = Arc::new(spectrum(ManifoldModel::circle(), 3).unwrap());
    let spec = SobolevSpec::new(1.0, Exponent::Infinity, Arc::clone(&s)).unwrap();
    let sel = BlockSelection::contiguous(&s, 1, 3).unwrap();
    let big = sample_sobolev_ball(&spec, &sel, 2500, 3).unwrap();
    assert_eq!(big.len(), 2500);
    let small = sample_sobolev_ball(&spec, &sel, 1024, 3).unwrap();
    assert_eq!(&big[..1024], &small[..]);
}

fn selection() -> (Arc<sew_core::Spectrum>, BlockSelection) {
    let s = Arc::new(spectrum(ManifoldModel::circle(), 6).unwrap());
    let sel = BlockSelection::contiguous(&s, 1, 6).unwrap();
    (s, sel)
}

proptest! {
    #[test]
    fn multipliers_are_linear(
        lambdas in prop::collection::vec(-4.0f64..4.0, 6),
        a in prop::collection::vec(-10.0f64..10.0, 12),
        b in prop::collection::vec(-10.0f64..10.0, 12),
        s in -3.0f64..3.0,
        t in -3.0f64..3.0,
    ) {
        let (_, sel) = selection();
        let spec = MultiplierSpec::new(1, lambdas, "random").unwrap();
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| s * x + t * y).collect();
        let lhs = apply_multiplier(&mix, &sel, &spec).unwrap();
        let la = apply_multiplier(&a, &sel, &spec).unwrap();
        let lb = apply_multiplier(&b, &sel, &spec).unwrap();
        for ((l, x), y) in lhs.iter().zip(&la).zip(&lb) {
            prop_assert!((l - (s * x + t * y)).abs() <= 1e-12 * (1.0 + l.abs()));
        }
    }

    #[test]
    fn det_root_dominates_smallest_multiplier(lambdas in prop::collection::vec(0.01f64..5.0, 6)) {
        let (_, sel) = selection();
        let spec = MultiplierSpec::new(1, lambdas.clone(), "random").unwrap();
        let root = det_root(&sel, &spec).unwrap();
        let min = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
        let max = lambdas.iter().copied().fold(0.0, f64::max);
        prop_assert!(root >= min * (1.0 - 1e-12));
        if max - min > 1e-9 {
            prop_assert!(root > min);
        }
    }

    #[test]
    fn identity_multiplier(a in prop::collection::vec(-10.0f64..10.0, 12)) {
        let (_, sel) = selection();
        prop_assert_eq!(apply_multiplier(&a, &sel, &MultiplierSpec::identity(1, 6)).unwrap(), a);
    }

    #[test]
    fn bernstein_containment_on_random_vectors(
        gamma in 0.5f64..4.0,
        z in prop::collection::vec(-10.0f64..10.0, 12),
    ) {
        let (s, sel) = selection();
        let spec = SobolevSpec::new(gamma, Exponent::Finite(2.0), Arc::clone(&s)).unwrap();
        let dz = apply_multiplier(&z, &sel, &sobolev_multiplier(&spec, Direction::Derivative)).unwrap();
        let lhs = dz.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rhs = s.eigenvalue(6).powf(gamma / 2.0) * z.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }
}
