//! Widths: the dyadic block allocation behind the Kolmogorov width upper bound, the
//! approximants it defines, width bound formulas, and two subspace experiments.

use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Result, SewError};
use crate::exponent::Exponent;
use crate::harmonics::{BasisSlice, BlockSelection};
use crate::norms::{dual_norm, induced_norm, levy_mean, InducedNorm};
use crate::operators::{apply_multiplier, sample_sobolev_ball, sobolev_multiplier, Direction, SobolevSpec};
use crate::sampling::{chunk_rng, map_chunks, sphere_directions};
use crate::spectra::{spectrum, ManifoldModel, Spectrum};
use crate::stats::log_log_slope;

fn dyadic_factor(gamma: f64) -> f64 {
    2f64.powf(2.0 / gamma)
}

/// Boundaries `N_0 = N, N_1, …, N_count` where `N_{k+1}` is the least index with
/// `θ_{N_{k+1}} ≥ 2^{2/γ}·θ_{N_k}`.
pub fn dyadic_blocks(spectrum: &Spectrum, n: usize, gamma: f64, count: usize) -> Result<Vec<usize>> {
    if !(gamma > 0.0) {
        return Err(SewError::Domain(format!("smoothness must be positive, got {gamma}")));
    }
    if n == 0 {
        return Err(SewError::Domain("base degree must be at least 1".into()));
    }
    if n > spectrum.n_max() {
        return Err(SewError::ExtendSpectrum { needed: n, available: spectrum.n_max() });
    }
    let factor = dyadic_factor(gamma);
    let mut bounds = vec![n];
    for _ in 0..count {
        let current = *bounds.last().unwrap();
        let target = factor * spectrum.eigenvalue(current);
        let next = spectrum.first_index_at_least(target).ok_or(SewError::ExtendSpectrum {
            needed: estimate_index(spectrum, target),
            available: spectrum.n_max(),
        })?;
        bounds.push(next);
    }
    Ok(bounds)
}

fn estimate_index(spectrum: &Spectrum, target: f64) -> usize {
    let last = spectrum.eigenvalue(spectrum.n_max()).max(1.0);
    let scale = (target / last).max(1.0);
    (spectrum.n_max() as f64 * scale).ceil() as usize + 1
}

/// `δ_k` with `θ_{N_k} = (1+δ_k)^{±k}·2^{2k/γ}·θ_N`, for `k = 1, …`.
pub fn envelope_deltas(spectrum: &Spectrum, bounds: &[usize], gamma: f64) -> Vec<f64> {
    let theta_n = spectrum.eigenvalue(bounds[0]);
    bounds
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &nk)| {
            let kf = k as f64;
            let ideal = 2f64.powf(2.0 * kf / gamma) * theta_n;
            ((spectrum.eigenvalue(nk) / ideal).ln().abs() / kf).exp() - 1.0
        })
        .collect()
}

/// Upper end of the admissible interval for `ε`: convergence of the in-range sum needs
/// `ε < 2 − d/γ`, the tail needs the `q`-dependent bound (absent for `q = 2`).
pub fn admissible_epsilon(gamma: f64, d: usize, q: Exponent) -> Result<f64> {
    let df = d as f64;
    if !(gamma > df / 2.0) {
        return Err(SewError::HypothesisViolation(format!(
            "block allocation requires gamma > d/2, got gamma = {gamma}, d = {d}"
        )));
    }
    if !q.is_infinite() && q.value() < 2.0 {
        return Err(SewError::InvalidExponent(format!("q must lie in [2, inf], got {q}")));
    }
    let s = 0.5 - q.reciprocal();
    let tail = if s == 0.0 {
        f64::INFINITY
    } else {
        (gamma - df * s) / (gamma * df * s)
    };
    Ok((2.0 - df / gamma).min(tail))
}

/// Default `ε`: two thirds of the admissible upper end.
pub fn default_epsilon(gamma: f64, d: usize, q: Exponent) -> Result<f64> {
    Ok(admissible_epsilon(gamma, d, q)? * 2.0 / 3.0)
}

/// The dyadic blocks and ranks used to approximate `W_2^γ` in `L_q`.
///
/// Block 0 covers frequencies `[1, N_1)` with rank `τ_N`; block `k ≥ 1` covers
/// `[N_k, N_{k+1})` with rank `⌊2^{−εk}τ_N⌋ + 1`; frequencies from `N_{M+1}` on are dropped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockAllocation {
    pub base: usize,
    pub gamma: f64,
    pub epsilon: f64,
    pub blocks: usize,
    pub tau_n: usize,
    /// `N_0, …, N_{M+1}`.
    pub boundaries: Vec<usize>,
    /// Dimensions `l_k` of the frequency ranges.
    pub block_dims: Vec<usize>,
    pub ranks: Vec<usize>,
    pub budget: usize,
}

impl BlockAllocation {
    /// Frequency range of allocation block `k`.
    pub fn span(&self, k: usize) -> Range<usize> {
        let lo = if k == 0 { 1 } else { self.boundaries[k] };
        lo..self.boundaries[k + 1]
    }

    pub fn budget_ratio(&self) -> f64 {
        self.budget as f64 / self.tau_n as f64
    }

    pub fn plan(&self) -> ApproximationPlan {
        ApproximationPlan {
            spans: (0..=self.blocks).map(|k| self.span(k)).collect(),
            ranks: self.ranks.clone(),
        }
    }

    /// Re-verifies the sandwich, rank and budget invariants against `spectrum`.
    pub fn check(&self, spectrum: &Spectrum) -> AllocationCheck {
        let factor = dyadic_factor(self.gamma);
        let sandwich = self.boundaries.windows(2).all(|w| {
            let pivot = factor * spectrum.eigenvalue(w[0]);
            spectrum.eigenvalue(w[1] - 1) <= pivot && pivot <= spectrum.eigenvalue(w[1])
        });
        let ranks = self.ranks == rank_formula(self.tau_n, self.epsilon, self.blocks);
        let budget = self.budget == self.ranks.iter().sum::<usize>();
        AllocationCheck { sandwich, ranks, budget, budget_ratio: self.budget_ratio() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AllocationCheck {
    pub sandwich: bool,
    pub ranks: bool,
    pub budget: bool,
    pub budget_ratio: f64,
}

impl AllocationCheck {
    pub fn all(&self) -> bool {
        self.sandwich && self.ranks && self.budget
    }
}

fn block_count(tau_n: usize, epsilon: f64) -> usize {
    ((tau_n as f64).ln() / epsilon).floor() as usize
}

fn rank_formula(tau_n: usize, epsilon: f64, blocks: usize) -> Vec<usize> {
    std::iter::once(tau_n)
        .chain((1..=blocks).map(|k| {
            (2f64.powf(-epsilon * k as f64) * tau_n as f64).floor() as usize + 1
        }))
        .collect()
}

/// Builds the allocation for base degree `n`; `epsilon = None` selects [`default_epsilon`].
pub fn allocate_ranks(
    spectrum: &Spectrum,
    n: usize,
    gamma: f64,
    d: usize,
    q: Exponent,
    epsilon: Option<f64>,
) -> Result<BlockAllocation> {
    let upper = admissible_epsilon(gamma, d, q)?;
    let epsilon = epsilon.unwrap_or(upper * 2.0 / 3.0);
    if !(epsilon > 0.0 && epsilon < upper) {
        return Err(SewError::HypothesisViolation(format!(
            "epsilon must lie in (0, {upper}), got {epsilon}"
        )));
    }
    let tau_n = spectrum.cumulative_dim(n.min(spectrum.n_max()));
    let blocks = block_count(tau_n, epsilon);
    let boundaries = dyadic_blocks(spectrum, n, gamma, blocks + 1)?;
    let ranks = rank_formula(tau_n, epsilon, blocks);
    let dim_below = |j: usize| spectrum.cumulative_dim(j - 1);
    let block_dims = (0..=blocks)
        .map(|k| {
            let lo = if k == 0 { 1 } else { boundaries[k] };
            dim_below(boundaries[k + 1]) - dim_below(lo)
        })
        .collect();
    let budget = ranks.iter().sum();
    Ok(BlockAllocation {
        base: n,
        gamma,
        epsilon,
        blocks,
        tau_n,
        boundaries,
        block_dims,
        ranks,
        budget,
    })
}

/// Frequency ranges with a rank for each; frequencies outside every range are dropped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproximationPlan {
    pub spans: Vec<Range<usize>>,
    pub ranks: Vec<usize>,
}

impl ApproximationPlan {
    pub fn new(spans: Vec<Range<usize>>, ranks: Vec<usize>) -> Result<Self> {
        if spans.len() != ranks.len() {
            return Err(SewError::DimensionMismatch { expected: spans.len(), got: ranks.len() });
        }
        if spans.windows(2).any(|w| w[1].start < w[0].end) {
            return Err(SewError::Configuration("plan spans must be ordered and disjoint".into()));
        }
        Ok(ApproximationPlan { spans, ranks })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApproxRule {
    /// Keep the `m_k` largest coordinates of each block.
    Truncate,
    /// Best of `draws` random `m_k`-dimensional subspaces of each block.
    RandomSubspace { draws: usize, seed: u64 },
}

/// Approximates `coeffs` (laid out by `sel`) block by block according to `plan`.
pub fn build_approximant(
    coeffs: &[f64],
    sel: &BlockSelection,
    plan: &ApproximationPlan,
    rule: ApproxRule,
) -> Result<Vec<f64>> {
    if coeffs.len() != sel.dim() {
        return Err(SewError::LayoutMismatch(format!(
            "coefficient length {} does not match selection dimension {}",
            coeffs.len(),
            sel.dim()
        )));
    }
    if sel.contains_constants() {
        return Err(SewError::LayoutMismatch("approximants act on zero-mean selections".into()));
    }
    let mut out = vec![0.0; coeffs.len()];
    for (k, (span, &rank)) in plan.spans.iter().zip(&plan.ranks).enumerate() {
        let idx: Vec<usize> = sel
            .blocks()
            .iter()
            .enumerate()
            .filter(|(_, b)| span.contains(b))
            .flat_map(|(s, _)| sel.range(s))
            .collect();
        if idx.is_empty() || rank == 0 {
            continue;
        }
        let block: Vec<f64> = idx.iter().map(|&i| coeffs[i]).collect();
        let kept = if rank >= block.len() {
            block
        } else {
            match rule {
                ApproxRule::Truncate => truncate(&block, rank),
                ApproxRule::RandomSubspace { draws, seed } => {
                    best_random_projection(&block, rank, draws.max(1), chunk_rng(seed, k as u64))
                }
            }
        };
        for (&i, v) in idx.iter().zip(kept) {
            out[i] = v;
        }
    }
    Ok(out)
}

fn truncate(block: &[f64], rank: usize) -> Vec<f64> {
    let mut order: Vec<usize> = (0..block.len()).collect();
    order.sort_by(|&a, &b| block[b].abs().total_cmp(&block[a].abs()).then(a.cmp(&b)));
    let mut out = vec![0.0; block.len()];
    for &i in &order[..rank] {
        out[i] = block[i];
    }
    out
}

fn best_random_projection(block: &[f64], rank: usize, draws: usize, mut rng: ChaCha8Rng) -> Vec<f64> {
    let x = DVector::from_column_slice(block);
    let mut best: Option<(f64, DVector<f64>)> = None;
    for _ in 0..draws {
        let g = DMatrix::from_fn(block.len(), rank, |_, _| StandardNormal.sample(&mut rng));
        let q = g.qr().q();
        let proj = &q * q.tr_mul(&x);
        let residual = (&x - &proj).norm();
        if best.as_ref().is_none_or(|(r, _)| residual < *r) {
            best = Some((residual, proj));
        }
    }
    best.map(|(_, p)| p.as_slice().to_vec()).unwrap_or_else(|| vec![0.0; block.len()])
}

/// Error of one approximation, in `L_q` of the selection's span.
pub fn approximation_error(
    coeffs: &[f64],
    approx: &[f64],
    q_norm: Option<&InducedNorm>,
) -> Result<f64> {
    let diff: Vec<f64> = coeffs.iter().zip(approx).map(|(a, b)| a - b).collect();
    match q_norm {
        None => Ok(diff.iter().map(|v| v * v).sum::<f64>().sqrt()),
        Some(nm) => induced_norm(&diff, nm),
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub model: ManifoldModel,
    pub gamma: f64,
    pub q: Exponent,
    pub bases: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    pub rule: ApproxRule,
    pub epsilon: Option<f64>,
    /// Sampled functions live on blocks `1..=truncation·N`.
    pub truncation: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub base: usize,
    pub tau_n: usize,
    pub budget: usize,
    pub sup_error: f64,
    pub mean_error: f64,
}

/// Sup and mean approximation error over sampled members of the truncated `W_2^γ` ball,
/// one point per base degree.
pub fn approximation_sweep(cfg: &SweepConfig) -> Result<Vec<SweepPoint>> {
    if cfg.truncation == 0 {
        return Err(SewError::Configuration("truncation factor must be positive".into()));
    }
    let d = cfg.model.dim();
    cfg.bases
        .iter()
        .map(|&base| {
            let top = cfg.truncation * base;
            let spec_len = top.max(base);
            let mut s = spectrum(cfg.model, spec_len)?;
            let alloc = loop {
                match allocate_ranks(&s, base, cfg.gamma, d, cfg.q, cfg.epsilon) {
                    Err(SewError::ExtendSpectrum { needed, .. }) => s = spectrum(cfg.model, needed)?,
                    other => break other?,
                }
            };
            let s = Arc::new(s);
            let sel = BlockSelection::contiguous(&s, 1, top)?;
            let sob = SobolevSpec::new(cfg.gamma, Exponent::Finite(2.0), Arc::clone(&s))?;
            let members = sample_sobolev_ball(&sob, &sel, cfg.samples, cfg.seed)?;
            let q_norm = if cfg.q.is_two() {
                None
            } else {
                Some(InducedNorm::new(Arc::new(BasisSlice::on_default_grid(cfg.model, &sel)?), cfg.q))
            };
            let plan = alloc.plan();
            let errors = members
                .iter()
                .map(|z| {
                    let approx = build_approximant(z, &sel, &plan, cfg.rule)?;
                    approximation_error(z, &approx, q_norm.as_ref())
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(SweepPoint {
                base,
                tau_n: alloc.tau_n,
                budget: alloc.budget,
                sup_error: errors.iter().copied().fold(0.0, f64::max),
                mean_error: errors.iter().sum::<f64>() / errors.len() as f64,
            })
        })
        .collect()
}

/// Log-log slope of the sup error against the budget `μ`.
pub fn sweep_slope(points: &[SweepPoint]) -> f64 {
    let x: Vec<f64> = points.iter().map(|p| p.budget as f64).collect();
    let y: Vec<f64> = points.iter().map(|p| p.sup_error).collect();
    log_log_slope(&x, &y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WidthKind {
    KolmogorovLower,
    KolmogorovUpper,
    BernsteinLower,
    EmpiricalApprox,
}

/// A width bound; formula values carry `constant = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WidthReport {
    pub kind: WidthKind,
    pub n: usize,
    pub value: f64,
    pub constant: f64,
    pub gamma: f64,
    pub d: usize,
    pub p: Exponent,
    pub q: Exponent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WidthBounds {
    pub lower: Option<WidthReport>,
    pub upper: Option<WidthReport>,
}

/// Kolmogorov width bounds for `W_p^γ` in `L_q`: the lower order `n^{−γ/d}` for
/// `1 < p, q < ∞`, and the upper bound for `p, q ≥ 2`, `γ > d/2`.
pub fn width_bounds(n: usize, gamma: f64, d: usize, p: Exponent, q: Exponent) -> Result<WidthBounds> {
    if n == 0 || d == 0 || !(gamma > 0.0) {
        return Err(SewError::Domain(format!(
            "width bounds need n, d >= 1 and gamma > 0, got n = {n}, d = {d}, gamma = {gamma}"
        )));
    }
    let order = (n as f64).powf(-gamma / d as f64);
    let report = |kind, value| WidthReport { kind, n, value, constant: 1.0, gamma, d, p, q };
    let open = |e: Exponent| !e.is_infinite() && e.value() > 1.0;
    let lower = (open(p) && open(q)).then(|| report(WidthKind::KolmogorovLower, order));
    let at_least_two = |e: Exponent| e.is_infinite() || e.value() >= 2.0;
    let upper = if at_least_two(p) && at_least_two(q) {
        if !(gamma > d as f64 / 2.0) {
            return Err(SewError::HypothesisViolation(format!(
                "width upper bound requires gamma > d/2, got gamma = {gamma}, d = {d}"
            )));
        }
        let factor = match q {
            Exponent::Infinity => (n as f64).ln().sqrt(),
            Exponent::Finite(q) => q.sqrt(),
        };
        Some(report(WidthKind::KolmogorovUpper, order * factor))
    } else {
        None
    };
    if lower.is_none() && upper.is_none() {
        return Err(SewError::HypothesisViolation(format!(
            "no width bound applies for p = {p}, q = {q}"
        )));
    }
    Ok(WidthBounds { lower, upper })
}

/// Outcome of the random proportional-subspace experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PtjReport {
    pub n: usize,
    pub s: usize,
    pub q_prime: Exponent,
    pub lambda: f64,
    /// Lévy mean of the `L_{q′}` norm on the full space.
    pub levy_mean: f64,
    /// `levy_mean·(1−λ)^{−1/2}`.
    pub target: f64,
    /// Per-trial estimate of `sup_{α ∈ L} |α|/‖α‖°`.
    pub constants: Vec<f64>,
    pub min_constant: f64,
    pub max_constant: f64,
    pub fraction_meeting_target: f64,
    pub exists: bool,
    pub seed: u64,
}

const PTJ_DIRECTIONS: usize = 64;
const PTJ_LEVY_SAMPLES: usize = 20_000;
const DUAL_TOL: f64 = 1e-9;

/// Basis of dimension `n` on the circle: blocks `1..=n/2` for even `n`, with the constant
/// block added for odd `n`.
pub fn circle_selection(n: usize) -> Result<BlockSelection> {
    if n == 0 {
        return Err(SewError::Domain("dimension must be positive".into()));
    }
    let s = spectrum(ManifoldModel::circle(), n / 2)?;
    if n % 2 == 0 {
        BlockSelection::contiguous(&s, 1, n / 2)
    } else {
        BlockSelection::contiguous(&s, 0, n / 2)
    }
}

/// Draws `trials` random `⌈λn⌉`-dimensional subspaces of coefficient space and estimates
/// on each the constant `sup |α|/‖α‖°` of the dual `L_{q′}` norm from sampled directions.
pub fn ptj_check(n: usize, q_prime: Exponent, lambda: f64, trials: usize, seed: u64) -> Result<PtjReport> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(SewError::Domain(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    if !q_prime.is_infinite() && q_prime.value() < 2.0 {
        return Err(SewError::InvalidExponent(format!("q' must be at least 2, got {q_prime}")));
    }
    let s = (lambda * n as f64).ceil() as usize;
    if s >= n {
        return Err(SewError::Domain(format!("subspace dimension {s} must be below n = {n}")));
    }
    if trials == 0 {
        return Err(SewError::Configuration("at least one trial is required".into()));
    }
    let sel = circle_selection(n)?;
    let nm = InducedNorm::new(
        Arc::new(BasisSlice::on_default_grid(ManifoldModel::circle(), &sel)?),
        q_prime,
    );
    let m = levy_mean(&nm, PTJ_LEVY_SAMPLES, seed)?.mean;
    let target = m * (1.0 - lambda).powf(-0.5);
    let per_trial = map_chunks(trials, seed.wrapping_add(1), |rng, count| -> Result<Vec<f64>> {
        (0..count)
            .map(|_| {
                let g = DMatrix::from_fn(n, s, |_, _| StandardNormal.sample(rng));
                let basis: DMatrix<f64> = g.qr().q();
                let dirs: DMatrix<f64> = basis * sphere_directions(rng, s, PTJ_DIRECTIONS);
                let mut min_dual = f64::INFINITY;
                for c in dirs.column_iter() {
                    min_dual = min_dual.min(dual_norm(c.as_slice(), &nm, DUAL_TOL)?);
                }
                Ok(1.0 / min_dual)
            })
            .collect()
    });
    let mut constants = Vec::with_capacity(trials);
    for c in per_trial {
        constants.extend(c?);
    }
    let meeting = constants.iter().filter(|&&c| c <= target).count();
    Ok(PtjReport {
        n,
        s,
        q_prime,
        lambda,
        levy_mean: m,
        target,
        min_constant: constants.iter().copied().fold(f64::INFINITY, f64::min),
        max_constant: constants.iter().copied().fold(0.0, f64::max),
        fraction_meeting_target: meeting as f64 / trials as f64,
        exists: meeting > 0,
        constants,
        seed,
    })
}

/// Containment of `θ_M^{−γ/2}U_2 ∩ 𝒯_M` in `W_2^γ`, tested on sampled zero-mean `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BernsteinReport {
    pub degree: usize,
    /// `n = dim 𝒯_M` without constants.
    pub n: usize,
    pub samples: usize,
    /// `max ‖D_γ z‖₂ / (θ_M^{γ/2}‖z‖₂)` over sampled `z`.
    pub max_ratio: f64,
    /// `max |ratio − 1|` over sampled `z` in the top block.
    pub top_block_deviation: f64,
    pub contained: bool,
    /// Half-dimension rule: `s = ⌊n/2⌋`.
    pub half_dim: usize,
    /// Lower order `n^{−γ/d}` for the Bernstein width.
    pub predicted: WidthReport,
    pub seed: u64,
}

/// Tolerance on the containment ratio.
const CONTAINMENT_TOL: f64 = 1e-12;

pub fn bernstein_check(
    spectrum: &Spectrum,
    degree: usize,
    gamma: f64,
    q: Exponent,
    samples: usize,
    seed: u64,
) -> Result<BernsteinReport> {
    match q {
        Exponent::Finite(v) if v > 1.0 && v <= 2.0 => {}
        _ => return Err(SewError::InvalidExponent(format!("q must lie in (1, 2], got {q}"))),
    }
    if degree == 0 {
        return Err(SewError::DegenerateInput("degree 0 leaves only the excluded constants".into()));
    }
    if degree > spectrum.n_max() {
        return Err(SewError::ExtendSpectrum { needed: degree, available: spectrum.n_max() });
    }
    let spec = SobolevSpec::new(gamma, Exponent::Finite(2.0), Arc::new(spectrum.clone()))?;
    let deriv = sobolev_multiplier(&spec, Direction::Derivative);
    let scale = spectrum.eigenvalue(degree).powf(gamma / 2.0);
    let full = BlockSelection::contiguous(spectrum, 1, degree)?;
    let top = BlockSelection::new(spectrum, vec![degree])?;
    let ratio = |z: &[f64], sel: &BlockSelection| -> Result<f64> {
        let dz = apply_multiplier(z, sel, &deriv)?;
        let num = dz.iter().map(|v| v * v).sum::<f64>().sqrt();
        let den = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(num / (scale * den))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio = 0.0f64;
    let mut top_dev = 0.0f64;
    for _ in 0..samples {
        let z: Vec<f64> = (0..full.dim()).map(|_| StandardNormal.sample(&mut rng)).collect();
        max_ratio = max_ratio.max(ratio(&z, &full)?);
        let t: Vec<f64> = (0..top.dim()).map(|_| StandardNormal.sample(&mut rng)).collect();
        top_dev = top_dev.max((ratio(&t, &top)? - 1.0).abs());
    }
    let n = full.dim();
    let d = spectrum.model().dim();
    Ok(BernsteinReport {
        degree,
        n,
        samples,
        max_ratio,
        top_block_deviation: top_dev,
        contained: max_ratio <= 1.0 + CONTAINMENT_TOL,
        half_dim: n / 2,
        predicted: WidthReport {
            kind: WidthKind::BernsteinLower,
            n,
            value: (n as f64).powf(-gamma / d as f64),
            constant: 1.0,
            gamma,
            d,
            p: Exponent::Finite(2.0),
            q,
        },
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(n: usize) -> Spectrum {
        spectrum(ManifoldModel::circle(), n).unwrap()
    }

    #[test]
    fn circle_first_boundary() {
        let b = dyadic_blocks(&circle(40), 10, 2.0, 1).unwrap();
        assert_eq!(b, vec![10, 15]);
        assert!(matches!(
            dyadic_blocks(&circle(20), 10, 2.0, 3),
            Err(SewError::ExtendSpectrum { .. })
        ));
    }

    #[test]
    fn rank_arithmetic() {
        assert_eq!(block_count(100, 0.5), 9);
        assert_eq!(rank_formula(100, 0.5, 9), vec![100, 71, 51, 36, 26, 18, 13, 9, 7, 5]);
    }

    #[test]
    fn allocation_hypotheses() {
        let s = circle(2000);
        assert!(matches!(
            allocate_ranks(&s, 10, 0.25, 1, Exponent::Finite(2.0), None),
            Err(SewError::HypothesisViolation(_))
        ));
        assert!(matches!(
            allocate_ranks(&s, 10, 2.0, 1, Exponent::Finite(2.0), Some(1.5)),
            Err(SewError::HypothesisViolation(_))
        ));
        let a = allocate_ranks(&s, 10, 2.0, 1, Exponent::Finite(2.0), None).unwrap();
        assert!(a.check(&s).all());
        assert_eq!(a.span(0), 1..15);
        assert_eq!(a.block_dims[0], 28);
    }

    #[test]
    fn full_ranks_reproduce_input() {
        let s = circle(12);
        let sel = BlockSelection::contiguous(&s, 1, 12).unwrap();
        let plan = ApproximationPlan::new(vec![1..5, 5..13], vec![8, 16]).unwrap();
        let z: Vec<f64> = (0..sel.dim()).map(|i| (i as f64).sin()).collect();
        for rule in [ApproxRule::Truncate, ApproxRule::RandomSubspace { draws: 4, seed: 1 }] {
            assert_eq!(build_approximant(&z, &sel, &plan, rule).unwrap(), z);
        }
    }

    #[test]
    fn zero_rank_drops_block_energy() {
        let s = circle(6);
        let sel = BlockSelection::contiguous(&s, 1, 6).unwrap();
        let plan = ApproximationPlan::new(vec![1..4, 4..7], vec![6, 0]).unwrap();
        let z: Vec<f64> = (0..sel.dim()).map(|i| 1.0 + i as f64).collect();
        let a = build_approximant(&z, &sel, &plan, ApproxRule::Truncate).unwrap();
        let err = approximation_error(&z, &a, None).unwrap();
        let dropped: f64 = z[6..].iter().map(|v| v * v).sum();
        assert!((err * err - dropped).abs() < 1e-12);
        let with_constants = BlockSelection::contiguous(&s, 0, 6).unwrap();
        assert!(matches!(
            build_approximant(&vec![0.0; 13], &with_constants, &plan, ApproxRule::Truncate),
            Err(SewError::LayoutMismatch(_))
        ));
    }

    #[test]
    fn width_formulas() {
        let two = Exponent::Finite(2.0);
        let b = width_bounds(100, 2.0, 1, two, two).unwrap();
        assert!((b.lower.unwrap().value - 1e-4).abs() < 1e-18);
        assert!((b.upper.unwrap().value - 2f64.sqrt() * 1e-4).abs() < 1e-18);
        let n = 4f64.exp().round() as usize;
        let b = width_bounds(n, 1.0, 1, two, Exponent::Infinity).unwrap();
        assert!((b.upper.unwrap().value * n as f64 - (n as f64).ln().sqrt()).abs() < 1e-12);
        assert!(b.lower.is_none());
        assert!(width_bounds(10, 0.4, 1, two, two).is_err());
        assert!(width_bounds(10, 2.0, 1, Exponent::Finite(1.0), Exponent::Finite(1.5)).is_err());
    }

    #[test]
    fn ptj_self_dual_ratio_is_one() {
        let r = ptj_check(8, Exponent::Finite(2.0), 0.5, 5, 3).unwrap();
        assert!(r.constants.iter().all(|c| (c - 1.0).abs() < 1e-12));
        assert_eq!(r.fraction_meeting_target, 1.0);
        assert!(ptj_check(8, Exponent::Finite(2.0), 0.99, 5, 3).is_err());
    }

    #[test]
    fn bernstein_containment() {
        let s = circle(16);
        let r = bernstein_check(&s, 8, 2.0, Exponent::Finite(2.0), 200, 5).unwrap();
        assert!(r.contained);
        assert!(r.top_block_deviation < 1e-12);
        assert!(matches!(
            bernstein_check(&s, 0, 2.0, Exponent::Finite(2.0), 10, 5),
            Err(SewError::DegenerateInput(_))
        ));
        assert!(bernstein_check(&s, 4, 2.0, Exponent::Finite(3.0), 10, 5).is_err());
    }
}
