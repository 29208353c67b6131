use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SewError};
use crate::exponent::Exponent;
use crate::spectra::{ManifoldKind, ManifoldModel};

/// Product quadrature rule on a model manifold; weights are positive and sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    model: ManifoldModel,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    exactness: usize,
    axis_nodes: (usize, usize),
}

/// Grid integrating every band-limited polynomial of degree `4·max_degree` exactly.
///
/// That is twice what the Gram matrix of degree-`max_degree` functions needs; the extra
/// room makes `L_4` norms exact and keeps the bias for other exponents small.
pub fn build_grid(model: ManifoldModel, max_degree: usize) -> Result<QuadratureGrid> {
    QuadratureGrid::with_exactness(model, 4 * max_degree)
}

impl QuadratureGrid {
    /// Smallest product grid of the model that is exact up to degree `exactness`.
    pub fn with_exactness(model: ManifoldModel, exactness: usize) -> Result<Self> {
        match model.kind() {
            ManifoldKind::Circle | ManifoldKind::FlatTorus => {
                Ok(Self::uniform_torus(model, exactness + 1))
            }
            ManifoldKind::Sphere if model.dim() == 2 => {
                Ok(Self::sphere_product(model, exactness / 2 + 1, exactness + 1))
            }
            ManifoldKind::Sphere => Err(SewError::Configuration(format!(
                "quadrature is implemented for the 2-sphere only, got S^{}",
                model.dim()
            ))),
        }
    }

    fn uniform_torus(model: ManifoldModel, per_dim: usize) -> Self {
        let dim = model.dim();
        let total = per_dim.pow(dim as u32);
        let h = 2.0 * PI / per_dim as f64;
        let mut points = Vec::with_capacity(total);
        let mut idx = vec![0usize; dim];
        for _ in 0..total {
            points.push(idx.iter().map(|&i| i as f64 * h).collect());
            for slot in idx.iter_mut().rev() {
                *slot += 1;
                if *slot < per_dim {
                    break;
                }
                *slot = 0;
            }
        }
        QuadratureGrid {
            model,
            points,
            weights: vec![1.0 / total as f64; total],
            exactness: per_dim - 1,
            axis_nodes: (per_dim, per_dim),
        }
    }

    fn sphere_product(model: ManifoldModel, n_theta: usize, n_phi: usize) -> Self {
        let (nodes, gl_weights) = gauss_legendre(n_theta);
        let mut points = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        let h = 2.0 * PI / n_phi as f64;
        for (x, w) in nodes.iter().zip(&gl_weights) {
            let colatitude = x.clamp(-1.0, 1.0).acos();
            for j in 0..n_phi {
                points.push(vec![colatitude, j as f64 * h]);
                weights.push(w / 2.0 / n_phi as f64);
            }
        }
        let exactness = (2 * n_theta - 1).min(n_phi - 1);
        QuadratureGrid { model, points, weights, exactness, axis_nodes: (n_theta, n_phi) }
    }

    /// Grid with `factor` times as many nodes per direction.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let factor = factor.max(1);
        match self.model.kind() {
            ManifoldKind::Circle | ManifoldKind::FlatTorus => {
                Ok(Self::uniform_torus(self.model, self.axis_nodes.0 * factor))
            }
            ManifoldKind::Sphere => {
                let (n_theta, n_phi) = self.axis_nodes;
                Ok(Self::sphere_product(self.model, n_theta * factor, n_phi * factor))
            }
        }
    }

    pub fn model(&self) -> ManifoldModel {
        self.model
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn exactness(&self) -> usize {
        self.exactness
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (weights sum to 2).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut derivative = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            derivative = dp;
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, dp) = legendre_with_derivative(n, x);
                derivative = dp;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * derivative * derivative);
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Weighted `L_p` norm of samples: `(Σ w_j |f_j|^p)^{1/p}`, or `max_j |f_j|` for `p = ∞`.
pub fn lp_norm(values: &[f64], grid: &QuadratureGrid, p: Exponent) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(SewError::DimensionMismatch { expected: grid.len(), got: values.len() });
    }
    Ok(weighted_lp(values, grid.weights(), p))
}

pub(crate) fn weighted_lp(values: &[f64], weights: &[f64], p: Exponent) -> f64 {
    match p {
        Exponent::Infinity => values.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        Exponent::Finite(p) if p == 2.0 => values
            .iter()
            .zip(weights)
            .map(|(v, w)| w * v * v)
            .sum::<f64>()
            .sqrt(),
        Exponent::Finite(p) if p == 1.0 => {
            values.iter().zip(weights).map(|(v, w)| w * v.abs()).sum()
        }
        Exponent::Finite(p) => {
            // scaled by the maximum so that large exponents cannot overflow
            let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if max == 0.0 {
                return 0.0;
            }
            let sum: f64 = if p.fract() == 0.0 && p <= 64.0 {
                let k = p as i32;
                values.iter().zip(weights).map(|(v, w)| w * (v.abs() / max).powi(k)).sum()
            } else {
                values.iter().zip(weights).map(|(v, w)| w * (v.abs() / max).powf(p)).sum()
            };
            max * sum.powf(1.0 / p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_monomials() {
        let (x, w) = gauss_legendre(7);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for deg in 0..=13 {
            let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((approx - exact).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn circle_grid_example() {
        let g = build_grid(ManifoldModel::circle(), 3).unwrap();
        assert_eq!(g.len(), 13);
        assert!(g.weights().iter().all(|&w| (w - 1.0 / 13.0).abs() < 1e-16));
        assert_eq!(g.exactness(), 12);
    }

    #[test]
    fn weights_sum_to_one() {
        let models = [
            ManifoldModel::circle(),
            ManifoldModel::torus(2).unwrap(),
            ManifoldModel::sphere(2).unwrap(),
        ];
        for model in models {
            for deg in [0, 1, 3, 7] {
                let g = build_grid(model, deg).unwrap();
                // compensated sum, so the check measures the weights and not the summation
                let (s, c) = g.weights().iter().fold((0.0f64, 0.0f64), |(s, c), &w| {
                    let t = s + w;
                    let c = if s.abs() >= w.abs() { c + ((s - t) + w) } else { c + ((w - t) + s) };
                    (t, c)
                });
                let s = s + c;
                assert!((s - 1.0).abs() < 1e-14, "{model:?} {deg}: {s}");
                assert!(g.weights().iter().all(|&w| w > 0.0));
                assert!(g.exactness() >= 2 * deg);
            }
        }
    }

    #[test]
    fn higher_spheres_unsupported() {
        assert!(build_grid(ManifoldModel::sphere(3).unwrap(), 2).is_err());
    }

    #[test]
    fn lp_norm_of_cosine() {
        // f = √2 cos t: L2 = 1, L∞ = √2, L1 = 2√2/π
        let g = QuadratureGrid::with_exactness(ManifoldModel::circle(), 4095).unwrap();
        let f: Vec<f64> = g.points().iter().map(|x| 2f64.sqrt() * x[0].cos()).collect();
        assert!((lp_norm(&f, &g, Exponent::Finite(2.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!((lp_norm(&f, &g, Exponent::Infinity).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let l1 = lp_norm(&f, &g, Exponent::Finite(1.0)).unwrap();
        assert!((l1 - 2.0 * 2f64.sqrt() / PI).abs() < 1e-6);
    }

    #[test]
    fn lp_norm_of_constant_is_one() {
        let g = build_grid(ManifoldModel::sphere(2).unwrap(), 3).unwrap();
        let ones = vec![1.0; g.len()];
        for p in [1.0, 1.5, 2.0, 3.0, 7.0] {
            assert!((lp_norm(&ones, &g, Exponent::Finite(p)).unwrap() - 1.0).abs() < 1e-13);
        }
        assert_eq!(lp_norm(&ones, &g, Exponent::Infinity).unwrap(), 1.0);
        assert!(lp_norm(&ones[1..], &g, Exponent::Infinity).is_err());
    }

    #[test]
    fn refinement_multiplies_nodes() {
        let g = build_grid(ManifoldModel::circle(), 2).unwrap();
        assert_eq!(g.refined(4).unwrap().len(), 36);
        let s = build_grid(ManifoldModel::sphere(2).unwrap(), 2).unwrap();
        assert_eq!(s.len(), 5 * 9);
        assert_eq!(s.refined(2).unwrap().len(), 10 * 18);
    }
}
