use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sew_core::harmonics::{
    build_grid, kernel, kernel_section, lp_norm, nikolskii_check, random_point, BasisEvaluator,
    BasisSlice, BlockSelection, QuadratureGrid,
};
use sew_core::{spectrum, Exponent, ManifoldModel};

#[test]
fn sphere_addition_formula_to_degree_twenty() {
    let model = ManifoldModel::sphere(2).unwrap();
    let s = spectrum(model, 20).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let points: Vec<Vec<f64>> = (0..200).map(|_| random_point(model, &mut rng)).collect();
    for k in 0..=20 {
        let ev = BasisEvaluator::new(model, BlockSelection::new(&s, vec![k]).unwrap()).unwrap();
        let dk = s.multiplicity(k) as f64;
        for x in &points {
            let sum: f64 = ev.eval(x).iter().map(|v| v * v).sum();
            assert!((sum - dk).abs() / dk <= 1e-8, "k={k}");
        }
    }
}

#[test]
fn sphere_gram_on_degree_two_grid() {
    let model = ManifoldModel::sphere(2).unwrap();
    let s = spectrum(model, 2).unwrap();
    let sel = BlockSelection::contiguous(&s, 0, 2).unwrap();
    let basis = BasisSlice::on_default_grid(model, &sel).unwrap();
    let gram = basis.gram();
    assert_eq!(gram.nrows(), 9);
    for i in 0..9 {
        for j in 0..9 {
            let e = if i == j { 1.0 } else { 0.0 };
            assert!((gram[(i, j)] - e).abs() <= 1e-12);
        }
    }
}

#[test]
fn circle_cosine_norms() {
    let model = ManifoldModel::circle();
    let s = spectrum(model, 1).unwrap();
    let sel = BlockSelection::new(&s, vec![1]).unwrap();
    let fine = QuadratureGrid::with_exactness(model, 20_000).unwrap();
    let basis = sew_core::harmonics::evaluate_basis(model, &sel, &fine).unwrap();
    let f = basis.synthesize(&[1.0, 0.0]).unwrap();
    let analytic_l1 = 2.0 * 2f64.sqrt() / std::f64::consts::PI;
    assert!((lp_norm(&f, &fine, Exponent::Finite(1.0)).unwrap() - analytic_l1).abs() < 1e-8);
    assert!((lp_norm(&f, &fine, Exponent::Finite(2.0)).unwrap() - 1.0).abs() < 1e-12);
    assert!((lp_norm(&f, &fine, Exponent::Infinity).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    let ones = vec![1.0; fine.len()];
    for p in [1.0, 3.0, 7.5] {
        assert!((lp_norm(&ones, &fine, Exponent::Finite(p)).unwrap() - 1.0).abs() < 1e-12);
    }
    assert!(Exponent::new(0.5).is_err());
}

#[test]
fn kernel_grid_maximum_is_on_diagonal() {
    let model = ManifoldModel::circle();
    let s = spectrum(model, 6).unwrap();
    let ev = BasisEvaluator::new(model, BlockSelection::contiguous(&s, 0, 6).unwrap()).unwrap();
    let n = ev.dim() as f64;
    let grid = build_grid(model, 12).unwrap();
    let mut max = 0.0f64;
    for x in grid.points() {
        for y in grid.points() {
            max = max.max(kernel(&ev, x, y).abs());
        }
    }
    assert!((max - n).abs() < 1e-10);
}

#[test]
fn reproducing_property() {
    for model in [ManifoldModel::circle(), ManifoldModel::sphere(2).unwrap(), ManifoldModel::torus(2).unwrap()] {
        let s = spectrum(model, 4).unwrap();
        let sel = BlockSelection::contiguous(&s, 0, 4).unwrap();
        let basis = BasisSlice::on_default_grid(model, &sel).unwrap();
        let ev = basis.evaluator();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..5 {
            let x = random_point(model, &mut rng);
            let y = random_point(model, &mut rng);
            let kx = kernel_section(ev, &x);
            let ky = kernel_section(ev, &y);
            let fx = basis.synthesize(&kx).unwrap();
            let fy = basis.synthesize(&ky).unwrap();
            let integral: f64 =
                basis.grid().weights().iter().zip(fx.iter().zip(&fy)).map(|(w, (a, b))| w * a * b).sum();
            assert!((integral - kernel(ev, &x, &y)).abs() <= 1e-8, "{model:?}");
        }
    }
}

#[test]
fn nikolskii_holds_for_random_coefficients() {
    let model = ManifoldModel::circle();
    let s = spectrum(model, 8).unwrap();
    let sel = BlockSelection::contiguous(&s, 0, 8).unwrap();
    let basis = BasisSlice::on_default_grid(model, &sel).unwrap();
    let n = sel.dim() as f64;
    let exps = [Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Infinity];
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for &p in &exps {
        for &q in &exps {
            for _ in 0..1000 {
                let xi: Vec<f64> = (0..sel.dim()).map(|_| StandardNormal.sample(&mut rng)).collect();
                let (ratio, bound) = nikolskii_check(&xi, &basis, p, q).unwrap();
                assert!(ratio <= bound * (1.0 + 1e-10), "p={p} q={q}: {ratio} > {bound}");
                if p == Exponent::Infinity && q == Exponent::Finite(1.0) {
                    assert!(ratio <= n * (1.0 + 1e-10));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn kernel_diagonal_equals_dimension(
        model_idx in 0usize..3,
        mask in 1u32..(1 << 7),
        seed in any::<u64>(),
    ) {
        let model = [ManifoldModel::circle(), ManifoldModel::sphere(2).unwrap(), ManifoldModel::torus(2).unwrap()][model_idx];
        let s = spectrum(model, 6).unwrap();
        let blocks: Vec<usize> = (0..7).filter(|b| mask & (1 << b) != 0).collect();
        let ev = BasisEvaluator::new(model, BlockSelection::new(&s, blocks).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_point(model, &mut rng);
        let n = ev.dim() as f64;
        prop_assert!((kernel(&ev, &x, &x) - n).abs() <= 1e-10 * n);
    }

    #[test]
    fn grids_integrate_basis_products(model_idx in 0usize..3, top in 0usize..8) {
        let model = [ManifoldModel::circle(), ManifoldModel::sphere(2).unwrap(), ManifoldModel::torus(2).unwrap()][model_idx];
        let s = spectrum(model, top).unwrap();
        let sel = BlockSelection::contiguous(&s, 0, top).unwrap();
        let basis = BasisSlice::on_default_grid(model, &sel).unwrap();
        let gram = basis.gram();
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let e = if i == j { 1.0 } else { 0.0 };
                prop_assert!((gram[(i, j)] - e).abs() <= 1e-10);
            }
        }
    }
}
