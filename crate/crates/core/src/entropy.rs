//! Entropy numbers: the volume lower bound, Sobolev entropy bounds, empirical covering
//! and packing at small dimension, and the Carl transfer from widths to entropy.

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SewError};
use crate::exponent::Exponent;
use crate::harmonics::weighted_lp;
use crate::norms::{dual_norm, InducedNorm};
use crate::sampling::{map_chunks, sphere_directions, Moments};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    LowerVolume,
    LowerSobolev,
    UpperCarl,
    UpperComposed,
    EmpiricalCover,
    EmpiricalPack,
}

/// A computed bound or estimate together with the parameters that produced it.
///
/// Formula bounds carry `constant = 1`: the unspecified universal constants are set to
/// one, so only the dependence on `n` is meaningful.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub index: usize,
    pub value: f64,
    pub constant: f64,
    pub p: Option<Exponent>,
    pub q: Option<Exponent>,
    pub gamma: Option<f64>,
    pub d: Option<usize>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
}

impl BoundReport {
    pub fn formula(kind: BoundKind, index: usize, value: f64) -> Self {
        BoundReport {
            kind,
            index,
            value,
            constant: 1.0,
            p: None,
            q: None,
            gamma: None,
            d: None,
            seed: None,
            samples: None,
        }
    }

    pub fn with_sobolev(mut self, gamma: f64, d: usize, p: Exponent, q: Exponent) -> Self {
        self.gamma = Some(gamma);
        self.d = Some(d);
        self.p = Some(p);
        self.q = Some(q);
        self
    }

    pub fn with_sampling(mut self, seed: u64, samples: usize) -> Self {
        self.seed = Some(seed);
        self.samples = Some(samples);
        self
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SewError::Domain(format!("{name} must be positive and finite, got {v}")))
    }
}

/// `2^{−1−k/n}·detroot/(M_X·M°_Y)`.
pub fn entropy_lower_bound(
    detroot: f64,
    m_x: f64,
    m_ydual: f64,
    k: usize,
    n: usize,
) -> Result<f64> {
    require_positive("detroot", detroot)?;
    require_positive("M_X", m_x)?;
    require_positive("M_Y dual", m_ydual)?;
    if k == 0 || n == 0 {
        return Err(SewError::Domain("k and n must be positive".into()));
    }
    Ok(2f64.powf(-1.0 - k as f64 / n as f64) * detroot / (m_x * m_ydual))
}

/// `(∫_{S^{n−1}} ‖α‖^{−n} dμ)^{1/n}` with a delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeEstimate {
    pub ratio: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Largest dimension for which `‖α‖^{−n}` averaging is attempted.
pub const MAX_VOLUME_DIM: usize = 8;

fn radial_volume_ratio<F>(n: usize, samples: usize, seed: u64, norms: F) -> Result<VolumeEstimate>
where
    F: Fn(&DMatrix<f64>) -> Result<Vec<f64>> + Sync,
{
    if n > MAX_VOLUME_DIM {
        return Err(SewError::Capability(format!(
            "volume ratio is limited to n <= {MAX_VOLUME_DIM}, got {n}"
        )));
    }
    if samples < 2 {
        return Err(SewError::Configuration("at least 2 samples are required".into()));
    }
    let chunks = map_chunks(samples, seed, |rng, count| -> Result<Moments> {
        let values = norms(&sphere_directions(rng, n, count))?;
        let inv: Vec<f64> = values.iter().map(|v| v.powi(-(n as i32))).collect();
        Ok(Moments::from_values(&inv))
    });
    let mut total = Moments::default();
    for c in chunks {
        total = total.merge(c?);
    }
    let mean = total.mean();
    let nf = n as f64;
    let ratio = mean.powf(1.0 / nf);
    let std_error = ratio / (nf * mean) * total.std_error();
    Ok(VolumeEstimate { ratio, std_error, samples, seed })
}

/// `(Vol B / Vol B₂)^{1/n}` for the unit ball `B` of the induced norm.
pub fn volume_ratio(nm: &InducedNorm, samples: usize, seed: u64) -> Result<VolumeEstimate> {
    radial_volume_ratio(nm.dim(), samples, seed, |dirs| Ok(nm.eval_columns(dirs)))
}

/// Volume ratio of the polar body, the unit ball of the dual norm.
pub fn dual_volume_ratio(
    nm: &InducedNorm,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<VolumeEstimate> {
    radial_volume_ratio(nm.dim(), samples, seed, |dirs| {
        dirs.column_iter().map(|c| dual_norm(c.as_slice(), nm, tol)).collect()
    })
}

fn check_sobolev_args(n: usize, gamma: f64, d: usize) -> Result<()> {
    if n < 2 {
        return Err(SewError::Domain(format!("n must be at least 2, got {n}")));
    }
    require_positive("gamma", gamma)?;
    if d == 0 {
        return Err(SewError::Domain("d must be positive".into()));
    }
    Ok(())
}

/// `n^{−γ/d}·ϱ(n, p, q)` with the four-case lower factor.
///
/// For `q = ∞` the term `1/(q−1)` is read as `q′ = 1`, which keeps the factor finite.
pub fn sobolev_entropy_lower(
    n: usize,
    gamma: f64,
    d: usize,
    p: Exponent,
    q: Exponent,
) -> Result<f64> {
    check_sobolev_args(n, gamma, d)?;
    let log_n = (n as f64).ln();
    let q_term = match q {
        Exponent::Infinity => 1.0,
        Exponent::Finite(q) if q > 1.0 => 1.0 / (q - 1.0),
        Exponent::Finite(_) => 0.0,
    };
    let factor = match (p, q) {
        (Exponent::Finite(p), Exponent::Finite(q)) if q == 1.0 => (p * log_n).powf(-0.5),
        (Exponent::Finite(p), _) => (p * q_term).powf(-0.5),
        (Exponent::Infinity, Exponent::Finite(q)) if q == 1.0 => 1.0 / log_n,
        (Exponent::Infinity, _) => (log_n * q_term).powf(-0.5),
    };
    Ok((n as f64).powf(-gamma / d as f64) * factor)
}

/// `n^{−γ/d}` times the composed upper factor; requires `γ > d`, `p ∈ [1,2]`, `q ∈ [2,∞]`.
pub fn sobolev_entropy_upper(
    n: usize,
    gamma: f64,
    d: usize,
    p: Exponent,
    q: Exponent,
) -> Result<f64> {
    check_sobolev_args(n, gamma, d)?;
    if gamma <= d as f64 {
        return Err(SewError::HypothesisViolation(format!(
            "entropy upper bound requires gamma > d, got gamma = {gamma}, d = {d}"
        )));
    }
    let p = match p {
        Exponent::Finite(v) if (1.0..=2.0).contains(&v) => v,
        _ => return Err(SewError::InvalidExponent(format!("p must lie in [1, 2], got {p}"))),
    };
    if !q.is_infinite() && q.value() < 2.0 {
        return Err(SewError::InvalidExponent(format!("q must lie in [2, inf], got {q}")));
    }
    let log_n = (n as f64).ln();
    // e_n(I_{γ/2}: L_p → L_2) · e_n(I_{γ/2}: L_2 → L_q)
    let source = if p == 1.0 { log_n.sqrt() } else { (p - 1.0).powf(-0.5) };
    let target = match q {
        Exponent::Infinity => log_n.sqrt(),
        Exponent::Finite(q) => q.sqrt(),
    };
    Ok((n as f64).powf(-gamma / d as f64) * source * target)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverDirection {
    Upper,
    Lower,
}

/// An empirical covering radius (upper estimate) or packing radius (lower estimate)
/// for the entropy number `e_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoveringReport {
    pub k: usize,
    pub radius: f64,
    pub centers: usize,
    pub direction: CoverDirection,
}

/// The set to be covered.
#[derive(Debug, Clone)]
pub enum Body {
    /// A finite point cloud in coefficient space.
    Points(Vec<Vec<f64>>),
    /// `diag · B` for the unit ball `B` of `norm`, represented by `samples` points: half on
    /// the boundary and half at radii `U^{1/n}` along random directions.
    Ball { norm: InducedNorm, diag: Vec<f64>, samples: usize },
}

/// Largest ambient dimension for empirical covering.
pub const MAX_COVER_DIM: usize = 6;

fn body_points(body: &Body, seed: u64) -> Result<(usize, Vec<Vec<f64>>)> {
    match body {
        Body::Points(points) => {
            let n = points.first().map(Vec::len).ok_or_else(|| {
                SewError::DegenerateInput("point cloud is empty".into())
            })?;
            if let Some(bad) = points.iter().find(|p| p.len() != n) {
                return Err(SewError::DimensionMismatch { expected: n, got: bad.len() });
            }
            Ok((n, points.clone()))
        }
        Body::Ball { norm, diag, samples } => {
            let n = norm.dim();
            if diag.len() != n {
                return Err(SewError::DimensionMismatch { expected: n, got: diag.len() });
            }
            let chunks = map_chunks(*samples, seed, |rng: &mut ChaCha8Rng, count| {
                let dirs = sphere_directions(rng, n, count);
                let norms = norm.eval_columns(&dirs);
                dirs.column_iter()
                    .zip(norms)
                    .enumerate()
                    .map(|(i, (c, s))| {
                        let radius =
                            if i % 2 == 0 { 1.0 } else { rng.random::<f64>().powf(1.0 / n as f64) };
                        c.iter().zip(diag).map(|(v, l)| v * radius * l / s).collect()
                    })
                    .collect::<Vec<Vec<f64>>>()
            });
            let mut points = vec![vec![0.0; n]];
            points.extend(chunks.into_iter().flatten());
            Ok((n, points))
        }
    }
}

/// Farthest-point traversal radii: entry `j` is the covering radius of the point set by
/// the first `j + 1` traversal centers.
fn traversal_radii(values: &[Vec<f64>], weights: &[f64], metric: Exponent, steps: usize) -> Vec<f64> {
    let dist = |a: &[f64], b: &[f64]| -> f64 {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        weighted_lp(&diff, weights, metric)
    };
    let mut nearest: Vec<f64> = values.par_iter().map(|v| dist(v, &values[0])).collect();
    let mut radii = Vec::with_capacity(steps);
    for _ in 0..steps {
        let (far, &r) = nearest
            .iter()
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        radii.push(r);
        if r == 0.0 {
            continue;
        }
        let center = values[far].clone();
        nearest
            .par_iter_mut()
            .zip(values.par_iter())
            .for_each(|(m, v)| *m = m.min(dist(v, &center)));
    }
    radii
}

/// Covering (upper) and packing (lower) estimates of `e_k` for each `k` in `ks`, using
/// one farthest-point traversal with `2^{k−1}` centers per `k`.
///
/// The covering radius `r` of the sample by `m = 2^{k−1}` traversal centers bounds the
/// sample's `e_k` from above; the `m + 1` points chosen so far are pairwise at least `r`
/// apart, so `e_k ≥ r/2`.
pub fn covering_profile(
    body: &Body,
    metric: &InducedNorm,
    ks: &[usize],
    budget: usize,
    seed: u64,
) -> Result<Vec<(CoveringReport, CoveringReport)>> {
    let k_max = ks.iter().copied().max().unwrap_or(0);
    if ks.contains(&0) {
        return Err(SewError::Domain("k must be positive".into()));
    }
    if k_max >= usize::BITS as usize || 1usize << (k_max - 1) > budget {
        return Err(SewError::BudgetExceeded { needed: 1usize << (k_max.min(63) - 1), budget });
    }
    let (n, points) = body_points(body, seed)?;
    if n > MAX_COVER_DIM {
        return Err(SewError::Capability(format!(
            "empirical covering is limited to n <= {MAX_COVER_DIM}, got {n}"
        )));
    }
    if n != metric.dim() {
        return Err(SewError::DimensionMismatch { expected: metric.dim(), got: n });
    }
    let (values, weights): (Vec<Vec<f64>>, Vec<f64>) = if metric.exponent().is_two() {
        (points, vec![1.0; n])
    } else {
        let table = metric.basis().table();
        let values = points
            .par_iter()
            .map(|p| table.tr_mul(&nalgebra::DVector::from_column_slice(p)).as_slice().to_vec())
            .collect();
        (values, metric.basis().grid().weights().to_vec())
    };
    let m_max = 1usize << (k_max - 1);
    let radii = traversal_radii(&values, &weights, metric.exponent(), m_max);
    Ok(ks
        .iter()
        .map(|&k| {
            let m = 1usize << (k - 1);
            let r = radii[m - 1];
            (
                CoveringReport { k, radius: r, centers: m, direction: CoverDirection::Upper },
                CoveringReport { k, radius: r / 2.0, centers: m + 1, direction: CoverDirection::Lower },
            )
        })
        .collect())
}

/// Covering and packing estimates of a single `e_k`.
pub fn empirical_covering(
    body: &Body,
    metric: &InducedNorm,
    k: usize,
    budget: usize,
    seed: u64,
) -> Result<(CoveringReport, CoveringReport)> {
    Ok(covering_profile(body, metric, &[k], budget, seed)?[0])
}

/// Packing/covering sandwich: a packing at separation `2ε_p` cannot have more points
/// than any covering at radius `ε_c < ε_p` has centers.
pub fn sandwich_holds(reports: &[(CoveringReport, CoveringReport)]) -> bool {
    reports.iter().all(|(_, pack)| {
        reports
            .iter()
            .filter(|(cover, _)| pack.radius > cover.radius)
            .all(|(cover, _)| pack.centers <= cover.centers)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogFactor {
    None,
    InverseSqrtLog,
}

impl std::str::FromStr for LogFactor {
    type Err = SewError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(LogFactor::None),
            "inverse-sqrt-log" => Ok(LogFactor::InverseSqrtLog),
            other => Err(SewError::Configuration(format!("unknown log factor '{other}'"))),
        }
    }
}

/// `f*(l) = l^{γ/d}`, optionally times `(log l)^{−1/2}` with `log l` floored at `log 2`.
pub fn carl_weight(l: usize, gamma_over_d: f64, log_factor: LogFactor) -> f64 {
    let power = (l as f64).powf(gamma_over_d);
    match log_factor {
        LogFactor::None => power,
        LogFactor::InverseSqrtLog => power / (l.max(2) as f64).ln().sqrt(),
    }
}

/// `max_{j_min ≤ j ≤ j_max} f*(2^j)/f*(2^{j−1})`.
pub fn doubling_constant(gamma_over_d: f64, log_factor: LogFactor, j_min: u32, j_max: u32) -> f64 {
    (j_min.max(1)..=j_max)
        .map(|j| {
            carl_weight(1 << j, gamma_over_d, log_factor)
                / carl_weight(1 << (j - 1), gamma_over_d, log_factor)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarlTransfer {
    /// `bounds[n−1] = sup_{l≤n} f*(l)·d_l / f*(n)`.
    pub bounds: Vec<f64>,
    pub doubling_constant: f64,
}

/// Entropy bounds from a nonincreasing width sequence `d_1, …, d_n`.
pub fn carl_transfer(widths: &[f64], gamma_over_d: f64, log_factor: LogFactor) -> Result<CarlTransfer> {
    require_positive("gamma/d", gamma_over_d)?;
    if let Some(i) = widths.iter().position(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(SewError::Domain(format!("width {} is not a nonnegative number", i + 1)));
    }
    if let Some(i) = widths.windows(2).position(|w| w[1] > w[0]) {
        return Err(SewError::NonMonotone(i + 2));
    }
    let mut running = 0.0f64;
    let bounds = widths
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let f = carl_weight(i + 1, gamma_over_d, log_factor);
            running = running.max(f * w);
            running / f
        })
        .collect();
    let j_max = (usize::BITS - widths.len().max(2).leading_zeros()).max(20);
    Ok(CarlTransfer { bounds, doubling_constant: doubling_constant(gamma_over_d, log_factor, 1, j_max) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::{BasisSlice, BlockSelection};
    use crate::norms::levy_mean;
    use crate::spectra::{spectrum, ManifoldModel};
    use std::sync::Arc;

    fn norm(blocks: Vec<usize>, p: Exponent) -> InducedNorm {
        let model = ManifoldModel::circle();
        let s = spectrum(model, 4).unwrap();
        let sel = BlockSelection::new(&s, blocks).unwrap();
        InducedNorm::new(Arc::new(BasisSlice::on_default_grid(model, &sel).unwrap()), p)
    }

    #[test]
    fn lower_bound_arithmetic() {
        assert!((entropy_lower_bound(1.0, 1.0, 1.0, 3, 3).unwrap() - 0.25).abs() < 1e-15);
        assert!((entropy_lower_bound(1.0, 1.0, 1.0, 6, 3).unwrap() - 0.125).abs() < 1e-15);
        assert!((entropy_lower_bound(0.5, 1.0, 1.0, 2, 2).unwrap() - 0.125).abs() < 1e-15);
        assert!(entropy_lower_bound(0.0, 1.0, 1.0, 2, 2).is_err());
    }

    #[test]
    fn sobolev_lower_cases() {
        let two = Exponent::Finite(2.0);
        let v = sobolev_entropy_lower(16, 2.0, 1, two, two).unwrap();
        assert!((v - 1.0 / 256.0 / 2f64.sqrt()).abs() < 1e-15);
        let ln = 100f64.ln();
        let v = sobolev_entropy_lower(100, 1.0, 1, Exponent::Infinity, Exponent::Finite(1.0)).unwrap();
        assert!((v - 0.01 / ln).abs() < 1e-15);
        let a = sobolev_entropy_lower(40, 3.0, 2, Exponent::Finite(3.0), Exponent::Finite(5.0)).unwrap();
        let b = sobolev_entropy_lower(80, 3.0, 2, Exponent::Finite(3.0), Exponent::Finite(5.0)).unwrap();
        assert!((b / a - 2f64.powf(-1.5)).abs() < 1e-14);
        assert!(sobolev_entropy_lower(1, 1.0, 1, two, two).is_err());
    }

    #[test]
    fn sobolev_upper_cases() {
        let two = Exponent::Finite(2.0);
        let v = sobolev_entropy_upper(16, 2.0, 1, two, two).unwrap();
        assert!((v - 2f64.sqrt() / 256.0).abs() < 1e-15);
        let n = 1000usize;
        let v = sobolev_entropy_upper(n, 2.0, 1, Exponent::Finite(1.0), Exponent::Infinity).unwrap();
        assert!((v - (n as f64).ln() * 1e-6).abs() < 1e-15);
        assert!(matches!(
            sobolev_entropy_upper(16, 1.0, 1, two, two),
            Err(SewError::HypothesisViolation(_))
        ));
        assert!(sobolev_entropy_upper(16, 2.0, 1, Exponent::Finite(3.0), two).is_err());
        assert!(sobolev_entropy_upper(16, 2.0, 1, two, Exponent::Finite(1.5)).is_err());
    }

    #[test]
    fn volume_ratio_of_euclidean_ball() {
        let nm = norm(vec![1, 2], Exponent::Finite(2.0));
        let v = volume_ratio(&nm, 500, 1).unwrap();
        assert!((v.ratio - 1.0).abs() < 1e-12);
        let big = norm(vec![0, 1, 2, 3, 4], Exponent::Finite(2.0));
        assert!(matches!(volume_ratio(&big, 500, 1), Err(SewError::Capability(_))));
    }

    #[test]
    fn volume_ratio_jensen_direction() {
        let nm = norm(vec![1, 2], Exponent::Finite(4.0));
        let v = volume_ratio(&nm, 20_000, 2).unwrap();
        let m = levy_mean(&nm, 20_000, 2).unwrap();
        let inv = 1.0 / m.mean;
        let inv_se = m.std_error / (m.mean * m.mean);
        assert!(v.ratio >= inv - 3.0 * (v.std_error + inv_se));
    }

    #[test]
    fn interval_covering() {
        let points: Vec<Vec<f64>> =
            std::iter::once(0.0).chain((0..=4000).map(|i| -1.0 + i as f64 / 2000.0)).map(|x| vec![x]).collect();
        let metric = norm(vec![0], Exponent::Finite(2.0));
        let ks: Vec<usize> = (1..=8).collect();
        let reports = covering_profile(&Body::Points(points), &metric, &ks, 1 << 10, 0).unwrap();
        for (cover, pack) in &reports {
            let exact = 2f64.powi(1 - cover.k as i32);
            assert!(cover.radius >= exact * (1.0 - 1e-9) && cover.radius <= 2.0 * exact + 1e-3);
            assert!(pack.radius <= exact + 1e-12);
        }
        assert_eq!(reports[0].0.radius, 1.0);
        assert!(reports.windows(2).all(|w| w[1].0.radius <= w[0].0.radius));
        assert!(sandwich_holds(&reports));
    }

    #[test]
    fn euclidean_ball_covered_by_one_center() {
        let metric = norm(vec![1], Exponent::Finite(2.0));
        let body = Body::Ball { norm: metric.clone(), diag: vec![1.0, 1.0], samples: 2000 };
        let (cover, _) = empirical_covering(&body, &metric, 1, 4, 3).unwrap();
        assert!((cover.radius - 1.0).abs() < 1e-12);
        assert!(matches!(
            empirical_covering(&body, &metric, 4, 4, 3),
            Err(SewError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn carl_power_law() {
        let widths: Vec<f64> = (1..=64).map(|l| (l as f64).powf(-2.0)).collect();
        let t = carl_transfer(&widths, 2.0, LogFactor::None).unwrap();
        for (i, b) in t.bounds.iter().enumerate() {
            assert!((b - ((i + 1) as f64).powf(-2.0)).abs() < 1e-14);
        }
        let zeros = carl_transfer(&[0.0; 5], 2.0, LogFactor::None).unwrap();
        assert!(zeros.bounds.iter().all(|&b| b == 0.0));
        assert!(matches!(carl_transfer(&[1.0, 2.0], 1.0, LogFactor::None), Err(SewError::NonMonotone(2))));
    }

    #[test]
    fn carl_doubling_constant() {
        let c = doubling_constant(2.0, LogFactor::InverseSqrtLog, 2, 20);
        assert!(c <= 4.0);
        assert!(c > 3.0);
    }
}
