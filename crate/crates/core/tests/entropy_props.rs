use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sew_core::entropy::{
    carl_transfer, covering_profile, entropy_lower_bound, sandwich_holds, sobolev_entropy_lower,
    sobolev_entropy_upper, volume_ratio, dual_volume_ratio, Body, LogFactor,
};
use sew_core::harmonics::{BasisSlice, BlockSelection};
use sew_core::norms::{induced_norm, levy_mean, InducedNorm};
use sew_core::{spectrum, Exponent, ManifoldModel};

fn circle_norm(blocks: Vec<usize>, p: Exponent) -> InducedNorm {
    let model = ManifoldModel::circle();
    let top = blocks.iter().copied().max().unwrap();
    let s = spectrum(model, top).unwrap();
    let sel = BlockSelection::new(&s, blocks).unwrap();
    InducedNorm::new(Arc::new(BasisSlice::on_default_grid(model, &sel).unwrap()), p)
}

fn unit_ball_volume(n: usize) -> f64 {
    match n {
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        4 => std::f64::consts::PI.powi(2) / 2.0,
        _ => unreachable!(),
    }
}

/// Hit-or-miss volume of the unit ball in `[-1, 1]^n`; valid when the ball lies inside
/// the Euclidean one, as it does for `p ≥ 2`.
fn hit_or_miss_ratio(nm: &InducedNorm, samples: usize, seed: u64) -> f64 {
    let n = nm.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if induced_norm(&x, nm).unwrap() <= 1.0 {
            hits += 1;
        }
    }
    let vol = hits as f64 / samples as f64 * 2f64.powi(n as i32);
    (vol / unit_ball_volume(n)).powf(1.0 / n as f64)
}

#[test]
fn volume_ratio_matches_hit_or_miss() {
    for blocks in [vec![0, 1], vec![1, 2]] {
        let nm = circle_norm(blocks, Exponent::Finite(4.0));
        let radial = volume_ratio(&nm, 100_000, 4).unwrap();
        let oracle = hit_or_miss_ratio(&nm, 200_000, 5);
        assert!((radial.ratio - oracle).abs() <= 0.02 * oracle, "{} vs {oracle}", radial.ratio);
        assert!(radial.std_error < 0.01 * radial.ratio);
    }
}

#[test]
fn euclidean_volume_ratio_is_one() {
    let nm = circle_norm(vec![0, 1, 2], Exponent::Finite(2.0));
    let v = volume_ratio(&nm, 5000, 1).unwrap();
    assert!((v.ratio - 1.0).abs() <= 1e-12);
    assert!(v.std_error <= 1e-12);
}

#[test]
fn volume_ratios_sit_between_jensen_and_urysohn() {
    let nm = circle_norm(vec![0, 1], Exponent::Finite(4.0));
    let m = levy_mean(&nm, 20_000, 2).unwrap();
    let v = volume_ratio(&nm, 20_000, 3).unwrap();
    // (E‖θ‖^{−n})^{1/n} ≥ 1/E‖θ‖ by Jensen
    assert!(v.ratio >= (1.0 / m.mean) * (1.0 - 4.0 * m.std_error / m.mean) - 4.0 * v.std_error);
    // the polar ball's volume ratio is at most its mean width, which is M
    let polar = dual_volume_ratio(&nm, 2000, 6, 1e-10).unwrap();
    assert!(polar.ratio <= m.mean + 4.0 * (m.std_error + polar.std_error));
}

#[test]
fn sobolev_bounds_are_ordered() {
    let ps = [1.0, 1.25, 1.5, 2.0].map(Exponent::Finite);
    let qs = [Exponent::Finite(2.0), Exponent::Finite(3.0), Exponent::Finite(6.0), Exponent::Infinity];
    for &p in &ps {
        for &q in &qs {
            let mut ratios = Vec::new();
            for n in [4usize, 16, 64, 256, 1024] {
                let lo = sobolev_entropy_lower(n, 2.0, 1, p, q).unwrap();
                let hi = sobolev_entropy_upper(n, 2.0, 1, p, q).unwrap();
                assert!(lo <= hi, "p={p} q={q} n={n}");
                ratios.push(hi / lo);
            }
            let logged = p == Exponent::Finite(1.0) || q.is_infinite();
            if !logged {
                // same power of n on both sides, so the ratio is a constant
                assert!(ratios.iter().all(|r| (r - ratios[0]).abs() <= 1e-9 * ratios[0]));
            } else {
                assert!(ratios.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)));
            }
        }
    }
}

#[test]
fn disk_covering_profile() {
    let nm = circle_norm(vec![1], Exponent::Finite(2.0));
    let body = Body::Ball { norm: nm.clone(), diag: vec![1.0, 1.0], samples: 4000 };
    let profile = covering_profile(&body, &nm, &[1, 2, 3, 4, 5, 6], 64, 9).unwrap();
    // a single center at the origin covers the unit disk with radius exactly one
    assert!((profile[0].0.radius - 1.0).abs() <= 1e-12);
    for w in profile.windows(2) {
        assert!(w[1].0.radius <= w[0].0.radius);
    }
    for (cover, pack) in &profile {
        assert!(pack.radius <= cover.radius);
    }
    assert!(sandwich_holds(&profile));
    // m centers cannot cover a disk of area π with radius below 1/√m
    for (cover, _) in &profile {
        assert!(cover.radius >= 0.95 / (cover.centers as f64).sqrt(), "{cover:?}");
    }
}

#[test]
fn covering_in_a_non_euclidean_metric() {
    let l2 = circle_norm(vec![0, 1], Exponent::Finite(2.0));
    let l4 = circle_norm(vec![0, 1], Exponent::Finite(4.0));
    let body = Body::Ball { norm: l4.clone(), diag: vec![1.0, 0.5, 0.25], samples: 3000 };
    let in_l2 = covering_profile(&body, &l2, &[1, 3, 5], 16, 2).unwrap();
    let in_l4 = covering_profile(&body, &l4, &[1, 3, 5], 16, 2).unwrap();
    // one center at the origin: the radius is the largest norm in the sample
    assert!(in_l2[0].0.radius <= in_l4[0].0.radius * (1.0 + 1e-12));
    assert!(in_l4[0].0.radius <= 1.0 + 1e-12);
    assert!(sandwich_holds(&in_l4));
}

proptest! {
    #[test]
    fn volume_lower_bound_decays_in_k(
        detroot in 0.01f64..10.0,
        m in 0.1f64..10.0,
        md in 0.1f64..10.0,
        n in 1usize..20,
        k in 1usize..60,
    ) {
        let a = entropy_lower_bound(detroot, m, md, k, n).unwrap();
        let b = entropy_lower_bound(detroot, m, md, k + 1, n).unwrap();
        prop_assert!(b < a);
        let halved = entropy_lower_bound(detroot, m, md, k + n, n).unwrap();
        prop_assert!((halved - a / 2.0).abs() <= 1e-12 * a);
    }

    #[test]
    fn carl_bounds_dominate_widths(
        mut widths in prop::collection::vec(0.0f64..5.0, 1..40),
        g in 0.25f64..4.0,
        logged in any::<bool>(),
    ) {
        widths.sort_by(|a, b| b.total_cmp(a));
        let lf = if logged { LogFactor::InverseSqrtLog } else { LogFactor::None };
        let t = carl_transfer(&widths, g, lf).unwrap();
        for (b, w) in t.bounds.iter().zip(&widths) {
            prop_assert!(*b >= *w * (1.0 - 1e-12));
        }
        if !logged {
            prop_assert!((t.doubling_constant - 2f64.powf(g)).abs() <= 1e-12 * t.doubling_constant);
        }
    }
}
