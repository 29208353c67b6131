//! Norms on coefficient space induced by `L_p` norms of band-limited functions,
//! their duals, and Monte Carlo Lévy means over the Euclidean unit sphere.

use std::sync::Arc;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Result, SewError};
use crate::exponent::Exponent;
use crate::harmonics::{weighted_lp, BasisSlice};
use crate::sampling::{chunked_moments, map_chunks, sphere_directions, Moments};

/// `‖α‖* = ‖Σ_i α_i η_i‖_{L_p}` evaluated by quadrature on the basis grid.
#[derive(Debug, Clone)]
pub struct InducedNorm {
    basis: Arc<BasisSlice>,
    p: Exponent,
}

impl InducedNorm {
    pub fn new(basis: Arc<BasisSlice>, p: Exponent) -> Self {
        InducedNorm { basis, p }
    }

    pub fn basis(&self) -> &BasisSlice {
        &self.basis
    }

    pub fn exponent(&self) -> Exponent {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// The same basis measured in another exponent.
    pub fn with_exponent(&self, p: Exponent) -> InducedNorm {
        InducedNorm { basis: Arc::clone(&self.basis), p }
    }

    /// Norms of every column of an `n × count` coefficient matrix.
    pub fn eval_columns(&self, coeffs: &DMatrix<f64>) -> Vec<f64> {
        let values = self.basis.table().tr_mul(coeffs);
        let weights = self.basis.grid().weights();
        values
            .column_iter()
            .map(|c| weighted_lp(c.as_slice(), weights, self.p))
            .collect()
    }
}

/// `‖α‖*` for a single coefficient vector.
pub fn induced_norm(alpha: &[f64], nm: &InducedNorm) -> Result<f64> {
    let values = nm.basis.synthesize(alpha)?;
    Ok(weighted_lp(&values, nm.basis.grid().weights(), nm.p))
}

/// Hölder ceiling `‖Jα‖_{p'}` for the dual norm.
pub fn holder_bound(alpha: &[f64], nm: &InducedNorm) -> Result<f64> {
    induced_norm(alpha, &nm.with_exponent(nm.p.conjugate()))
}

const NEWTON_ITERATION_CAP: usize = 10_000;

/// Dual norm `sup{⟨α, β⟩ : ‖β‖* ≤ 1}`.
///
/// `p = 2` is self-dual; `p ∈ {1, ∞}` are polyhedral and solved as linear programs over
/// the grid; every other exponent is solved as the smooth convex problem
/// `min ‖Jβ‖_p^p` subject to `⟨α, β⟩ = 1` by damped Newton steps on the hyperplane.
/// The result is checked against the Hölder ceiling `‖Jα‖_{p'}`.
pub fn dual_norm(alpha: &[f64], nm: &InducedNorm, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(SewError::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let n = nm.dim();
    if alpha.len() != n {
        return Err(SewError::DimensionMismatch { expected: n, got: alpha.len() });
    }
    let euclid = alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
    if euclid == 0.0 {
        return Ok(0.0);
    }
    let value = match nm.p {
        Exponent::Finite(p) if p == 2.0 => return Ok(euclid),
        Exponent::Infinity => dual_of_sup_norm(alpha, nm)?,
        Exponent::Finite(p) if p == 1.0 => dual_of_l1_norm(alpha, nm)?,
        Exponent::Finite(p) => dual_smooth(alpha, nm, p, tol)?,
    };
    let ceiling = holder_bound(alpha, nm)?;
    if value > ceiling * (1.0 + 1e-9) + tol {
        return Err(SewError::NonConvergence { iterations: 0, best: value });
    }
    Ok(value)
}

fn lp_failure(e: microlp::Error) -> SewError {
    SewError::Configuration(format!("linear program failed: {e}"))
}

fn dual_of_sup_norm(alpha: &[f64], nm: &InducedNorm) -> Result<f64> {
    let table = nm.basis.table();
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = alpha
        .iter()
        .map(|&a| problem.add_var(a, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    for j in 0..table.ncols() {
        let row: Vec<_> = vars.iter().enumerate().map(|(i, &v)| (v, table[(i, j)])).collect();
        problem.add_constraint(row.as_slice(), ComparisonOp::Le, 1.0);
        problem.add_constraint(row.as_slice(), ComparisonOp::Ge, -1.0);
    }
    let solution = problem.solve().map_err(lp_failure)?;
    let solution = solution
        .into_solution()
        .map_err(|_| SewError::NonConvergence { iterations: 0, best: f64::NAN })?;
    Ok(solution.objective())
}

fn dual_of_l1_norm(alpha: &[f64], nm: &InducedNorm) -> Result<f64> {
    let table = nm.basis.table();
    let weights = nm.basis.grid().weights();
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let beta: Vec<_> = alpha
        .iter()
        .map(|&a| problem.add_var(a, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let slack: Vec<_> =
        (0..table.ncols()).map(|_| problem.add_var(0.0, (0.0, f64::INFINITY))).collect();
    for (j, &s) in slack.iter().enumerate() {
        let mut upper: Vec<_> =
            beta.iter().enumerate().map(|(i, &v)| (v, table[(i, j)])).collect();
        let mut lower: Vec<_> =
            beta.iter().enumerate().map(|(i, &v)| (v, -table[(i, j)])).collect();
        upper.push((s, -1.0));
        lower.push((s, -1.0));
        problem.add_constraint(upper.as_slice(), ComparisonOp::Le, 0.0);
        problem.add_constraint(lower.as_slice(), ComparisonOp::Le, 0.0);
    }
    let budget: Vec<_> = slack.iter().zip(weights).map(|(&s, &w)| (s, w)).collect();
    problem.add_constraint(budget.as_slice(), ComparisonOp::Le, 1.0);
    let solution = problem.solve().map_err(lp_failure)?;
    let solution = solution
        .into_solution()
        .map_err(|_| SewError::NonConvergence { iterations: 0, best: f64::NAN })?;
    Ok(solution.objective())
}

/// Orthonormal basis of the complement of `alpha` (`n × (n−1)`).
fn complement_basis(alpha: &DVector<f64>) -> DMatrix<f64> {
    let n = alpha.len();
    let u = alpha / alpha.norm();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n - 1);
    for e in 0..n {
        if basis.len() == n - 1 {
            break;
        }
        let mut v = DVector::zeros(n);
        v[e] = 1.0;
        v -= &u * u[e];
        for b in &basis {
            let c = b.dot(&v);
            v -= b * c;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / norm);
        }
    }
    DMatrix::from_columns(&basis)
}

/// Upper certificate for the dual value from the current iterate.
///
/// Any grid function `g` with `Σ_j w_j g_j η_i(x_j) = α_i` gives `‖α‖° ≤ ‖g‖_{p'}`. The
/// scaled gradient `|f|^{p−1} sign f` is corrected onto that affine set by the
/// minimal-norm adjustment `Tᵀ G⁻¹ r` with `G` the grid Gram matrix.
struct Representer<'a> {
    table: &'a DMatrix<f64>,
    weights: &'a [f64],
    gram: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    conjugate: Exponent,
}

impl Representer<'_> {
    fn upper(&self, alpha: &DVector<f64>, f: &DVector<f64>, p: f64) -> f64 {
        let g0 = f.map(|v| v.abs().powf(p - 1.0) * v.signum());
        let weighted = g0.component_mul(&DVector::from_column_slice(self.weights));
        let a0 = self.table * weighted;
        let scale = alpha.dot(&a0) / a0.norm_squared();
        if !scale.is_finite() {
            return f64::INFINITY;
        }
        let residual = alpha - &a0 * scale;
        let g = g0 * scale + self.table.tr_mul(&self.gram.solve(&residual));
        weighted_lp(g.as_slice(), self.weights, self.conjugate)
    }
}

/// Smoothed objective `Σ_j w_j (f_j² + δ²)^{p/2}` with `f = Tᵀβ`.
fn smoothed(f: &DVector<f64>, weights: &[f64], p: f64, delta: f64) -> f64 {
    let d2 = delta * delta;
    f.iter().zip(weights).map(|(v, w)| w * (v * v + d2).powf(p / 2.0)).sum()
}

/// Solves `min ‖Jβ‖_p^p` on `⟨α, β⟩ = 1`.
///
/// For `p < 2` the curvature of `|f|^p` is unbounded at zeros of `f`, so Newton steps on
/// the exact objective cannot move grid values across zero. The objective is smoothed to
/// `(f² + δ²)^{p/2}` and `δ` is shrunk once each smoothed problem is solved. Iteration
/// stops when the representer certificate and the attained value are within `tol`.
fn dual_smooth(alpha: &[f64], nm: &InducedNorm, p: f64, tol: f64) -> Result<f64> {
    let table = nm.basis.table();
    let weights = nm.basis.grid().weights();
    let a = DVector::from_column_slice(alpha);
    let mut beta = &a / a.norm_squared();
    let exact = |f: &DVector<f64>| -> f64 {
        f.iter().zip(weights).map(|(v, w)| w * v.abs().powf(p)).sum()
    };
    let mut f = table.tr_mul(&beta);
    if a.len() == 1 {
        return Ok(exact(&f).powf(-1.0 / p));
    }
    let mut weighted_table = table.clone();
    for (j, w) in weights.iter().enumerate() {
        weighted_table.column_mut(j).scale_mut(*w);
    }
    let gram = (&weighted_table * table.transpose())
        .cholesky()
        .ok_or_else(|| SewError::DegenerateInput("basis is singular on its grid".into()))?;
    let representer =
        Representer { table, weights, gram, conjugate: Exponent::Finite(p).conjugate() };
    let z = complement_basis(&a);
    let scale = f.amax();
    let min_delta = 1e-13 * scale;
    let mut delta = if p < 2.0 { scale } else { 0.0 };
    let mut value = smoothed(&f, weights, p, delta);
    let mut best_upper = f64::INFINITY;
    let mut best_lower = 0.0f64;
    for iteration in 0..NEWTON_ITERATION_CAP {
        // ⟨α, β⟩ = 1, so 1/‖Jβ‖_p is attained and bounds the dual from below
        best_lower = best_lower.max(exact(&f).powf(-1.0 / p));
        best_upper = best_upper.min(representer.upper(&a, &f, p));
        if best_upper - best_lower <= tol {
            return Ok(best_lower);
        }
        let d2 = delta * delta;
        let mut grad_w = DVector::zeros(f.len());
        let mut scaled = table.clone();
        for j in 0..f.len() {
            let v = f[j];
            let r = v * v + d2;
            grad_w[j] = p * weights[j] * v * r.powf(p / 2.0 - 1.0);
            let curvature = if r == 0.0 {
                0.0
            } else {
                p * weights[j] * r.powf(p / 2.0 - 2.0) * ((p - 1.0) * v * v + d2)
            };
            scaled.column_mut(j).scale_mut(curvature);
        }
        let grad = table * &grad_w;
        let hess = &scaled * table.transpose();
        let gz = z.tr_mul(&grad);
        let mut hz = z.tr_mul(&(&hess * &z));
        let ridge = 1e-14 * hz.diagonal().amax().max(f64::MIN_POSITIVE);
        for i in 0..hz.nrows() {
            hz[(i, i)] += ridge;
        }
        let Some(chol) = hz.cholesky() else {
            return Err(SewError::NonConvergence { iterations: iteration, best: best_lower });
        };
        let dz = -chol.solve(&gz);
        let decrement = -gz.dot(&dz);
        let mut stalled = decrement <= 1e-13 * value;
        if !stalled {
            let step_dir = &z * &dz;
            let mut t = 1.0;
            loop {
                let candidate = &beta + &step_dir * t;
                let cf = table.tr_mul(&candidate);
                let cv = smoothed(&cf, weights, p, delta);
                if cv <= value - 0.25 * t * decrement {
                    beta = candidate;
                    value = cv;
                    f = cf;
                    break;
                }
                t *= 0.5;
                if t < 1e-10 {
                    stalled = true;
                    break;
                }
            }
        }
        if stalled {
            if delta > min_delta {
                delta = (delta / 10.0).max(min_delta);
                value = smoothed(&f, weights, p, delta);
            } else if best_upper - best_lower <= tol.max(1e-10 * best_upper)
                || best_lower * decrement.max(0.0) / (p * value) <= tol
            {
                // the Newton decrement bounds F(β) - F* to second order, which moves
                // F^{-1/p} by about lower·decrement/(p·F)
                return Ok(best_lower);
            } else {
                return Err(SewError::NonConvergence { iterations: iteration, best: best_lower });
            }
        }
    }
    Err(SewError::NonConvergence { iterations: NEWTON_ITERATION_CAP, best: best_lower })
}

/// Monte Carlo estimate of a norm's mean over the uniform measure on `S^{n−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevyEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

impl LevyEstimate {
    fn from_moments(m: Moments, seed: u64) -> Self {
        LevyEstimate { mean: m.mean(), std_error: m.std_error(), samples: m.count, seed }
    }
}

const MIN_LEVY_SAMPLES: usize = 100;

/// Lévy mean `∫_{S^{n−1}} ‖α‖* dμ(α)` from normalized Gaussian directions.
pub fn levy_mean(nm: &InducedNorm, samples: usize, seed: u64) -> Result<LevyEstimate> {
    if samples < MIN_LEVY_SAMPLES {
        return Err(SewError::Configuration(format!(
            "at least {MIN_LEVY_SAMPLES} samples are required, got {samples}"
        )));
    }
    let n = nm.dim();
    let moments = chunked_moments(samples, seed, |rng, count| {
        nm.eval_columns(&sphere_directions(rng, n, count))
    });
    Ok(LevyEstimate::from_moments(moments, seed))
}

/// Lévy means of several induced norms on one basis, sharing the sampled directions.
///
/// Entry `i` equals `levy_mean` of the norm with exponent `exponents[i]` and the same seed.
pub fn levy_means(
    basis: &Arc<BasisSlice>,
    exponents: &[Exponent],
    samples: usize,
    seed: u64,
) -> Result<Vec<LevyEstimate>> {
    if samples < MIN_LEVY_SAMPLES {
        return Err(SewError::Configuration(format!(
            "at least {MIN_LEVY_SAMPLES} samples are required, got {samples}"
        )));
    }
    let n = basis.dim();
    let weights = basis.grid().weights();
    let chunks = map_chunks(samples, seed, |rng, count| {
        let values = basis.table().tr_mul(&sphere_directions(rng, n, count));
        exponents
            .iter()
            .map(|&p| {
                let norms: Vec<f64> =
                    values.column_iter().map(|c| weighted_lp(c.as_slice(), weights, p)).collect();
                Moments::from_values(&norms)
            })
            .collect::<Vec<Moments>>()
    });
    let mut totals = vec![Moments::default(); exponents.len()];
    for chunk in chunks {
        for (t, m) in totals.iter_mut().zip(chunk) {
            *t = t.merge(m);
        }
    }
    Ok(totals.into_iter().map(|m| LevyEstimate::from_moments(m, seed)).collect())
}

/// Lévy mean of the dual norm `‖·‖°`.
pub fn dual_levy_mean(
    nm: &InducedNorm,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<LevyEstimate> {
    if samples < MIN_LEVY_SAMPLES {
        return Err(SewError::Configuration(format!(
            "at least {MIN_LEVY_SAMPLES} samples are required, got {samples}"
        )));
    }
    let n = nm.dim();
    let chunks = map_chunks(samples, seed, |rng, count| -> Result<Moments> {
        let dirs = sphere_directions(rng, n, count);
        let values = dirs
            .column_iter()
            .map(|c| dual_norm(c.as_slice(), nm, tol))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Moments::from_values(&values))
    });
    let mut total = Moments::default();
    for c in chunks {
        total = total.merge(c?);
    }
    Ok(LevyEstimate::from_moments(total, seed))
}
