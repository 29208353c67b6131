//! Orthonormal harmonic bases, product quadrature, reproducing kernels and the
//! Nikolskii comparison of `L_p` norms on spans of eigenspace blocks.

mod basis;
mod quadrature;

pub use basis::{
    evaluate_basis, random_point, BasisEvaluator, BasisSlice, BlockSelection, NormalizedLegendre,
};
pub use quadrature::{build_grid, gauss_legendre, lp_norm, QuadratureGrid};

pub(crate) use quadrature::weighted_lp;

use crate::error::{Result, SewError};
use crate::exponent::Exponent;

/// Reproducing kernel `K_n(x, y) = Σ_i η_i(x) η_i(y)` of the selection's span.
pub fn kernel(basis: &BasisEvaluator, x: &[f64], y: &[f64]) -> f64 {
    let ex = basis.eval(x);
    let ey = basis.eval(y);
    ex.iter().zip(&ey).map(|(a, b)| a * b).sum()
}

/// Coefficients of the kernel section `K_n(x0, ·)` in the selection's basis.
pub fn kernel_section(basis: &BasisEvaluator, x0: &[f64]) -> Vec<f64> {
    basis.eval(x0)
}

/// `(‖ξ‖_p / ‖ξ‖_q, n^{(1/q − 1/p)_+})` for `ξ = Σ_i c_i η_i`.
pub fn nikolskii_check(
    coeffs: &[f64],
    basis: &BasisSlice,
    p: Exponent,
    q: Exponent,
) -> Result<(f64, f64)> {
    if coeffs.iter().all(|&c| c == 0.0) {
        return Err(SewError::ZeroVector);
    }
    let values = basis.synthesize(coeffs)?;
    let num = lp_norm(&values, basis.grid(), p)?;
    let den = lp_norm(&values, basis.grid(), q)?;
    if den == 0.0 {
        return Err(SewError::ZeroVector);
    }
    let exponent = (q.reciprocal() - p.reciprocal()).max(0.0);
    Ok((num / den, (basis.dim() as f64).powf(exponent)))
}

/// Grid maximum of `|Σ_i c_i η_i|`, refined by `factor` until the relative change drops
/// below `tol`. Returns the final value and the number of refinements performed.
///
/// The grid maximum never exceeds the true supremum.
pub fn sup_norm_refined(
    coeffs: &[f64],
    basis: &BasisSlice,
    factor: usize,
    tol: f64,
    max_refinements: usize,
) -> Result<(f64, usize)> {
    let evaluator = basis.evaluator();
    let sup_on = |grid: &QuadratureGrid| -> f64 {
        let mut col = vec![0.0; evaluator.dim()];
        grid.points().iter().fold(0.0f64, |acc, x| {
            evaluator.eval_into(x, &mut col);
            let v: f64 = col.iter().zip(coeffs).map(|(a, b)| a * b).sum();
            acc.max(v.abs())
        })
    };
    if coeffs.len() != evaluator.dim() {
        return Err(SewError::DimensionMismatch { expected: evaluator.dim(), got: coeffs.len() });
    }
    let mut grid = basis.grid().clone();
    let mut current = sup_on(&grid);
    for step in 1..=max_refinements {
        grid = grid.refined(factor)?;
        let next = sup_on(&grid);
        let change = (next - current).abs() / next.max(f64::MIN_POSITIVE);
        current = next;
        if change < tol {
            return Ok((current, step));
        }
    }
    Err(SewError::NonConvergence { iterations: max_refinements, best: current })
}
