use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::quadrature::QuadratureGrid;
use crate::error::{Result, SewError};
use crate::spectra::{half_lattice_shell, ManifoldKind, ManifoldModel, Spectrum};

/// A set of eigenspace blocks `{j_1 < … < j_m}` laid out contiguously in coefficient space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSelection {
    blocks: Vec<usize>,
    dims: Vec<usize>,
    offsets: Vec<usize>,
    degrees: Vec<usize>,
    eigenvalues: Vec<u64>,
}

impl BlockSelection {
    pub fn new(spectrum: &Spectrum, blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(SewError::Configuration("block selection is empty".into()));
        }
        for (i, &b) in blocks.iter().enumerate() {
            if b > spectrum.n_max() {
                return Err(SewError::OutOfRange { index: b, max: spectrum.n_max() });
            }
            if i > 0 && blocks[i - 1] >= b {
                return Err(SewError::Configuration(
                    "block indices must be strictly increasing".into(),
                ));
            }
        }
        let dims: Vec<usize> = blocks.iter().map(|&b| spectrum.multiplicity(b)).collect();
        let mut offsets = Vec::with_capacity(dims.len() + 1);
        offsets.push(0);
        for d in &dims {
            offsets.push(offsets.last().unwrap() + d);
        }
        Ok(BlockSelection {
            degrees: blocks.iter().map(|&b| spectrum.block_degree(b)).collect(),
            eigenvalues: blocks.iter().map(|&b| spectrum.eigenvalue_exact(b)).collect(),
            blocks,
            dims,
            offsets,
        })
    }

    /// Blocks `lo..=hi`.
    pub fn contiguous(spectrum: &Spectrum, lo: usize, hi: usize) -> Result<Self> {
        if lo > hi {
            return Err(SewError::Configuration(format!("empty block range {lo}..={hi}")));
        }
        Self::new(spectrum, (lo..=hi).collect())
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.dims
    }

    /// Offsets `l_0 = 0 < l_1 < … < l_m = n`.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn eigenvalues(&self) -> &[u64] {
        &self.eigenvalues
    }

    /// Total dimension `n`.
    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn contains_constants(&self) -> bool {
        self.blocks.first() == Some(&0)
    }

    /// Coefficient index range of the `s`-th selected block.
    pub fn range(&self, s: usize) -> std::ops::Range<usize> {
        self.offsets[s]..self.offsets[s + 1]
    }
}

/// Evaluates the real orthonormal basis of a [`BlockSelection`] at arbitrary points.
#[derive(Debug, Clone)]
pub struct BasisEvaluator {
    model: ManifoldModel,
    selection: BlockSelection,
    torus_shells: Vec<Vec<Vec<i64>>>,
}

impl BasisEvaluator {
    pub fn new(model: ManifoldModel, selection: BlockSelection) -> Result<Self> {
        if model.kind() == ManifoldKind::Sphere && model.dim() != 2 {
            return Err(SewError::Configuration(format!(
                "basis evaluation is implemented for the 2-sphere only, got S^{}",
                model.dim()
            )));
        }
        let torus_shells = if model.kind() == ManifoldKind::FlatTorus {
            selection
                .eigenvalues()
                .iter()
                .map(|&theta| half_lattice_shell(model.dim(), theta))
                .collect()
        } else {
            Vec::new()
        };
        Ok(BasisEvaluator { model, selection, torus_shells })
    }

    pub fn model(&self) -> ManifoldModel {
        self.model
    }

    pub fn selection(&self) -> &BlockSelection {
        &self.selection
    }

    pub fn dim(&self) -> usize {
        self.selection.dim()
    }

    /// Writes `η_1(x), …, η_n(x)` into `out`.
    pub fn eval_into(&self, point: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim());
        match self.model.kind() {
            ManifoldKind::Circle => {
                let t = point[0];
                for (s, &k) in self.selection.blocks().iter().enumerate() {
                    let o = self.selection.offsets()[s];
                    if k == 0 {
                        out[o] = 1.0;
                    } else {
                        let (sin, cos) = (k as f64 * t).sin_cos();
                        out[o] = SQRT_2 * cos;
                        out[o + 1] = SQRT_2 * sin;
                    }
                }
            }
            ManifoldKind::FlatTorus => {
                for (s, shell) in self.torus_shells.iter().enumerate() {
                    let o = self.selection.offsets()[s];
                    if shell.is_empty() {
                        out[o] = 1.0;
                        continue;
                    }
                    for (i, m) in shell.iter().enumerate() {
                        let phase: f64 =
                            m.iter().zip(point).map(|(&mi, &xi)| mi as f64 * xi).sum();
                        let (sin, cos) = phase.sin_cos();
                        out[o + 2 * i] = SQRT_2 * cos;
                        out[o + 2 * i + 1] = SQRT_2 * sin;
                    }
                }
            }
            ManifoldKind::Sphere => {
                let legendre = NormalizedLegendre::new(self.selection.max_degree(), point[0]);
                let phi = point[1];
                for (s, &l) in self.selection.blocks().iter().enumerate() {
                    let o = self.selection.offsets()[s];
                    out[o] = legendre.get(l, 0);
                    for m in 1..=l {
                        let (sin, cos) = (m as f64 * phi).sin_cos();
                        let p = SQRT_2 * legendre.get(l, m);
                        out[o + 2 * m - 1] = p * cos;
                        out[o + 2 * m] = p * sin;
                    }
                }
            }
        }
    }

    pub fn eval(&self, point: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(point, &mut out);
        out
    }
}

/// Associated Legendre functions `P̄_l^m(cos θ)`, `0 ≤ m ≤ l ≤ L`, scaled so that
/// `P̄_l^0` and `√2·P̄_l^m·cos(mφ)` have unit norm under the normalized surface measure.
///
/// Built with the sectoral-then-vertical recurrence, which stays stable well past degree 100.
pub struct NormalizedLegendre {
    max_degree: usize,
    data: Vec<f64>,
}

impl NormalizedLegendre {
    pub fn new(max_degree: usize, colatitude: f64) -> Self {
        let (s, x) = colatitude.sin_cos();
        let s = s.abs();
        let size = (max_degree + 1) * (max_degree + 2) / 2;
        let mut table = NormalizedLegendre { max_degree, data: vec![0.0; size] };
        table.set(0, 0, 1.0);
        for m in 1..=max_degree {
            let mf = m as f64;
            let prev = table.get(m - 1, m - 1);
            table.set(m, m, ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * prev);
        }
        for m in 0..max_degree {
            let mf = m as f64;
            let pmm = table.get(m, m);
            table.set(m + 1, m, (2.0 * mf + 3.0).sqrt() * x * pmm);
            for l in (m + 2)..=max_degree {
                let lf = l as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let lm1 = lf - 1.0;
                let b = ((lm1 * lm1 - mf * mf) / (4.0 * lm1 * lm1 - 1.0)).sqrt();
                let v = a * (x * table.get(l - 1, m) - b * table.get(l - 2, m));
                table.set(l, m, v);
            }
        }
        table
    }

    #[inline]
    fn index(l: usize, m: usize) -> usize {
        l * (l + 1) / 2 + m
    }

    #[inline]
    pub fn get(&self, l: usize, m: usize) -> f64 {
        debug_assert!(m <= l && l <= self.max_degree);
        self.data[Self::index(l, m)]
    }

    fn set(&mut self, l: usize, m: usize, v: f64) {
        self.data[Self::index(l, m)] = v;
    }
}

/// Basis values `η_i(x_j)` of a selection on a quadrature grid (`n × grid size`).
#[derive(Debug, Clone)]
pub struct BasisSlice {
    evaluator: BasisEvaluator,
    grid: QuadratureGrid,
    table: DMatrix<f64>,
}

/// Tabulates the selection's orthonormal basis on `grid`.
pub fn evaluate_basis(
    model: ManifoldModel,
    selection: &BlockSelection,
    grid: &QuadratureGrid,
) -> Result<BasisSlice> {
    if grid.model() != model {
        return Err(SewError::Configuration("grid belongs to a different manifold".into()));
    }
    if grid.exactness() < 2 * selection.max_degree() {
        return Err(SewError::OutOfRange {
            index: selection.max_degree(),
            max: grid.exactness() / 2,
        });
    }
    let evaluator = BasisEvaluator::new(model, selection.clone())?;
    let n = selection.dim();
    let mut table = DMatrix::zeros(n, grid.len());
    let mut column = vec![0.0; n];
    for (j, x) in grid.points().iter().enumerate() {
        evaluator.eval_into(x, &mut column);
        table.column_mut(j).copy_from_slice(&column);
    }
    Ok(BasisSlice { evaluator, grid: grid.clone(), table })
}

impl BasisSlice {
    /// Tabulates on the default grid for the selection's band limit.
    pub fn on_default_grid(model: ManifoldModel, selection: &BlockSelection) -> Result<Self> {
        let grid = super::quadrature::build_grid(model, selection.max_degree())?;
        evaluate_basis(model, selection, &grid)
    }

    pub fn model(&self) -> ManifoldModel {
        self.evaluator.model()
    }

    pub fn selection(&self) -> &BlockSelection {
        self.evaluator.selection()
    }

    pub fn evaluator(&self) -> &BasisEvaluator {
        &self.evaluator
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn table(&self) -> &DMatrix<f64> {
        &self.table
    }

    pub fn dim(&self) -> usize {
        self.table.nrows()
    }

    /// Samples of `Σ_i α_i η_i` at the grid nodes.
    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.dim() {
            return Err(SewError::DimensionMismatch { expected: self.dim(), got: coeffs.len() });
        }
        let alpha = DVector::from_column_slice(coeffs);
        Ok(self.table.tr_mul(&alpha).as_slice().to_vec())
    }

    /// Weighted Gram matrix `Σ_j w_j η_a(x_j) η_b(x_j)`.
    pub fn gram(&self) -> DMatrix<f64> {
        let mut weighted = self.table.clone();
        for (j, w) in self.grid.weights().iter().enumerate() {
            weighted.column_mut(j).scale_mut(*w);
        }
        &weighted * self.table.transpose()
    }
}

/// A uniformly distributed point of the model (normalized volume measure).
pub fn random_point<R: Rng + ?Sized>(model: ManifoldModel, rng: &mut R) -> Vec<f64> {
    let tau = 2.0 * std::f64::consts::PI;
    match model.kind() {
        ManifoldKind::Circle => vec![rng.random::<f64>() * tau],
        ManifoldKind::FlatTorus => (0..model.dim()).map(|_| rng.random::<f64>() * tau).collect(),
        ManifoldKind::Sphere => {
            let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
            vec![z.clamp(-1.0, 1.0).acos(), rng.random::<f64>() * tau]
        }
    }
}
