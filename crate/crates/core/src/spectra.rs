//! Closed-form Laplace–Beltrami spectra for the circle, flat tori and round spheres.
//!
//! All models carry the normalized (probability) volume measure. Eigenvalues are
//! stored as exact integers and converted to `f64` at use sites.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SewError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ManifoldKind {
    Circle,
    FlatTorus,
    Sphere,
}

/// A compact homogeneous manifold with its normalized volume element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ManifoldModel {
    kind: ManifoldKind,
    dim: usize,
}

impl ManifoldModel {
    pub fn new(kind: ManifoldKind, dim: usize) -> Result<Self> {
        match (kind, dim) {
            (_, 0) => Err(SewError::Configuration("dimension must be at least 1".into())),
            (ManifoldKind::Circle, d) if d != 1 => Err(SewError::Configuration(format!(
                "the circle has dimension 1, got {d}"
            ))),
            (ManifoldKind::Sphere, 1) => Err(SewError::Configuration(
                "use the circle model for the one-dimensional sphere".into(),
            )),
            _ => Ok(ManifoldModel { kind, dim }),
        }
    }

    pub fn circle() -> Self {
        ManifoldModel { kind: ManifoldKind::Circle, dim: 1 }
    }

    pub fn sphere(dim: usize) -> Result<Self> {
        Self::new(ManifoldKind::Sphere, dim)
    }

    pub fn torus(dim: usize) -> Result<Self> {
        Self::new(ManifoldKind::FlatTorus, dim)
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total mass of the volume element; always one.
    pub fn total_measure(&self) -> f64 {
        1.0
    }

    /// Number of coordinates used to represent a point.
    pub fn coordinate_len(&self) -> usize {
        match self.kind {
            ManifoldKind::Circle => 1,
            ManifoldKind::FlatTorus => self.dim,
            ManifoldKind::Sphere => 2,
        }
    }

    /// Short label used in reports (`circle`, `torus2`, `sphere2`, ...).
    pub fn label(&self) -> String {
        match self.kind {
            ManifoldKind::Circle => "circle".into(),
            ManifoldKind::FlatTorus => format!("torus{}", self.dim),
            ManifoldKind::Sphere => format!("sphere{}", self.dim),
        }
    }
}

impl std::str::FromStr for ManifoldModel {
    type Err = SewError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "circle" {
            return Ok(Self::circle());
        }
        let parse_dim = |rest: &str| -> Result<usize> {
            rest.parse()
                .map_err(|_| SewError::Configuration(format!("bad manifold dimension in '{s}'")))
        };
        if let Some(rest) = s.strip_prefix("sphere") {
            return Self::sphere(parse_dim(rest)?);
        }
        if let Some(rest) = s.strip_prefix("torus") {
            return Self::torus(parse_dim(rest)?);
        }
        Err(SewError::Configuration(format!("unknown manifold '{s}'")))
    }
}

/// Eigenvalues `θ_k`, eigenspace dimensions `d_k` and cumulative dimensions `τ_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    model: ManifoldModel,
    eigenvalues: Vec<u64>,
    multiplicities: Vec<u64>,
    cumulative: Vec<u64>,
}

/// Computes the first `n_max + 1` eigenspaces of the Laplace–Beltrami operator.
pub fn spectrum(model: ManifoldModel, n_max: usize) -> Result<Spectrum> {
    let (eigenvalues, multiplicities) = match model.kind {
        ManifoldKind::Circle => (
            (0..=n_max as u64).map(|k| k * k).collect(),
            (0..=n_max as u64).map(|k| if k == 0 { 1 } else { 2 }).collect(),
        ),
        ManifoldKind::Sphere => {
            let d = model.dim as u64;
            let theta = (0..=n_max as u64).map(|k| k * (k + d - 1)).collect();
            let mult = (0..=n_max as u64)
                .map(|k| sphere_multiplicity(model.dim, k))
                .collect::<Result<Vec<_>>>()?;
            (theta, mult)
        }
        ManifoldKind::FlatTorus => torus_spectrum(model.dim, n_max)?,
    };
    let mut cumulative = Vec::with_capacity(multiplicities.len());
    let mut acc = 0u64;
    for &m in &multiplicities {
        acc = acc
            .checked_add(m)
            .ok_or_else(|| SewError::Capability("cumulative dimension overflows u64".into()))?;
        cumulative.push(acc);
    }
    Ok(Spectrum { model, eigenvalues, multiplicities, cumulative })
}

/// Dimension of degree-`k` harmonics on `S^d`: `C(k+d, d) − C(k+d−2, d)`.
fn sphere_multiplicity(d: usize, k: u64) -> Result<u64> {
    if k == 0 {
        return Ok(1);
    }
    let d = d as u128;
    let k = k as u128;
    let binom = |n: u128, r: u128| -> u128 {
        if n < r {
            return 0;
        }
        let mut acc: u128 = 1;
        for i in 0..r {
            acc = acc * (n - i) / (i + 1);
        }
        acc
    };
    let value = binom(k + d, d) - if k >= 2 { binom(k + d - 2, d) } else { 0 };
    u64::try_from(value).map_err(|_| SewError::Capability("sphere multiplicity overflows u64".into()))
}

/// Distinct squared lattice norms `|m|²`, `m ∈ ℤ^d`, with their lattice point counts.
fn torus_spectrum(dim: usize, n_max: usize) -> Result<(Vec<u64>, Vec<u64>)> {
    let mut radius_sq = (n_max as u64 + 1).max(4);
    loop {
        let counts = representation_counts(dim, radius_sq)?;
        let distinct: Vec<(u64, u64)> = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(v, &c)| (v as u64, c))
            .collect();
        if distinct.len() > n_max {
            let (theta, mult) = distinct.into_iter().take(n_max + 1).unzip();
            return Ok((theta, mult));
        }
        radius_sq = radius_sq
            .checked_mul(2)
            .filter(|r| *r < (1 << 26))
            .ok_or_else(|| SewError::Capability("torus spectrum too long to enumerate".into()))?;
    }
}

/// `r_d(v)` = number of `m ∈ ℤ^d` with `|m|² = v`, for all `v ≤ radius_sq`.
fn representation_counts(dim: usize, radius_sq: u64) -> Result<Vec<u64>> {
    let len = radius_sq as usize + 1;
    let mut one_dim = vec![0u64; len];
    let mut m = 0usize;
    while m * m < len {
        one_dim[m * m] += if m == 0 { 1 } else { 2 };
        m += 1;
    }
    let mut counts = one_dim.clone();
    for _ in 1..dim {
        let mut next = vec![0u64; len];
        for (v, &c) in counts.iter().enumerate().filter(|(_, &c)| c > 0) {
            let mut s = 0usize;
            while v + s * s < len {
                next[v + s * s] += c * if s == 0 { 1 } else { 2 };
                s += 1;
            }
        }
        counts = next;
    }
    Ok(counts)
}

/// Lattice vectors `m ∈ ℤ^d` with `|m|² = norm_sq`, first nonzero coordinate positive.
///
/// Each returned vector stands for the pair `{m, −m}` which spans the real cosine/sine pair.
pub(crate) fn half_lattice_shell(dim: usize, norm_sq: u64) -> Vec<Vec<i64>> {
    let bound = (norm_sq as f64).sqrt().floor() as i64 + 1;
    let mut out = Vec::new();
    let mut current = vec![0i64; dim];
    fn recurse(
        pos: usize,
        remaining: i64,
        bound: i64,
        current: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        if pos == current.len() {
            if remaining == 0 {
                let first = current.iter().find(|&&c| c != 0);
                if matches!(first, Some(&c) if c > 0) {
                    out.push(current.clone());
                }
            }
            return;
        }
        for c in -bound..=bound {
            let sq = c * c;
            if sq > remaining {
                continue;
            }
            current[pos] = c;
            recurse(pos + 1, remaining - sq, bound, current, out);
        }
        current[pos] = 0;
    }
    recurse(0, norm_sq as i64, bound, &mut current, &mut out);
    out
}

impl Spectrum {
    pub fn model(&self) -> ManifoldModel {
        self.model
    }

    /// Largest computed index `N_max`.
    pub fn n_max(&self) -> usize {
        self.eigenvalues.len() - 1
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalue_exact(&self, k: usize) -> u64 {
        self.eigenvalues[k]
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k] as f64
    }

    pub fn multiplicity(&self, k: usize) -> usize {
        self.multiplicities[k] as usize
    }

    /// `τ_N = Σ_{k≤N} d_k`.
    pub fn cumulative_dim(&self, n: usize) -> usize {
        self.cumulative[n] as usize
    }

    pub fn eigenvalues(&self) -> &[u64] {
        &self.eigenvalues
    }

    pub fn multiplicities(&self) -> &[u64] {
        &self.multiplicities
    }

    pub fn cumulative_dims(&self) -> &[u64] {
        &self.cumulative
    }

    /// Band limit of block `k`: the trigonometric/polynomial degree needed to represent it.
    pub fn block_degree(&self, k: usize) -> usize {
        match self.model.kind {
            ManifoldKind::Circle | ManifoldKind::Sphere => k,
            ManifoldKind::FlatTorus => (self.eigenvalues[k] as f64).sqrt().floor() as usize,
        }
    }

    /// Smallest index `j` with `θ_j ≥ value`, if the computed spectrum reaches it.
    pub fn first_index_at_least(&self, value: f64) -> Option<usize> {
        let idx = self.eigenvalues.partition_point(|&t| (t as f64) < value);
        (idx < self.eigenvalues.len()).then_some(idx)
    }

    /// Number of eigenvalues strictly below `a`, counted with multiplicity.
    pub fn counting_function(&self, a: f64) -> usize {
        let idx = self.eigenvalues.partition_point(|&t| (t as f64) < a);
        if idx == 0 {
            0
        } else {
            self.cumulative[idx - 1] as usize
        }
    }
}

/// `n(a)·a^{−d/2}`, the normalized eigenvalue counting function.
pub fn weyl_ratio(spectrum: &Spectrum, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(SewError::Domain(format!("Weyl parameter must be positive, got {a}")));
    }
    let top = spectrum.eigenvalue(spectrum.n_max());
    if a > top {
        return Err(SewError::Domain(format!(
            "a = {a} lies beyond the computed spectrum (θ_max = {top})"
        )));
    }
    let count = spectrum.counting_function(a) as f64;
    Ok(count * a.powf(-(spectrum.model.dim as f64) / 2.0))
}

/// The pair `(θ_{N+1}/θ_N, τ_{N+1}/τ_N)`.
pub fn ratio_check(spectrum: &Spectrum, n: usize) -> Result<(f64, f64)> {
    if n == 0 || n + 1 > spectrum.n_max() {
        return Err(SewError::OutOfRange { index: n, max: spectrum.n_max().saturating_sub(1) });
    }
    Ok((
        spectrum.eigenvalue(n + 1) / spectrum.eigenvalue(n),
        spectrum.cumulative_dim(n + 1) as f64 / spectrum.cumulative_dim(n) as f64,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_small() {
        let s = spectrum(ManifoldModel::circle(), 3).unwrap();
        assert_eq!(s.eigenvalues(), &[0, 1, 4, 9]);
        assert_eq!(s.multiplicities(), &[1, 2, 2, 2]);
        assert_eq!(s.cumulative_dims(), &[1, 3, 5, 7]);
    }

    #[test]
    fn sphere_two_small() {
        let s = spectrum(ManifoldModel::sphere(2).unwrap(), 2).unwrap();
        assert_eq!(s.eigenvalues(), &[0, 2, 6]);
        assert_eq!(s.multiplicities(), &[1, 3, 5]);
        assert_eq!(s.cumulative_dims(), &[1, 4, 9]);
    }

    #[test]
    fn sphere_three_multiplicities_are_squares() {
        // dim of degree-k harmonics on S^3 is (k+1)^2
        let s = spectrum(ManifoldModel::sphere(3).unwrap(), 6).unwrap();
        for k in 0..=6 {
            assert_eq!(s.multiplicity(k), (k + 1) * (k + 1));
        }
    }

    #[test]
    fn torus_two_matches_brute_force() {
        let s = spectrum(ManifoldModel::torus(2).unwrap(), 4).unwrap();
        assert_eq!(s.eigenvalues(), &[0, 1, 2, 4, 5]);
        assert_eq!(s.multiplicities(), &[1, 4, 4, 4, 8]);
        // brute-force enumeration over a box
        for (k, &theta) in s.eigenvalues().iter().enumerate() {
            let mut count = 0;
            for a in -5i64..=5 {
                for b in -5i64..=5 {
                    if (a * a + b * b) as u64 == theta {
                        count += 1;
                    }
                }
            }
            assert_eq!(count, s.multiplicity(k));
        }
    }

    #[test]
    fn torus_one_is_circle() {
        let t = spectrum(ManifoldModel::torus(1).unwrap(), 10).unwrap();
        let c = spectrum(ManifoldModel::circle(), 10).unwrap();
        assert_eq!(t.eigenvalues(), c.eigenvalues());
        assert_eq!(t.multiplicities(), c.multiplicities());
    }

    #[test]
    fn half_shell_counts_match_multiplicity() {
        let s = spectrum(ManifoldModel::torus(3).unwrap(), 12).unwrap();
        for k in 1..=12 {
            let shell = half_lattice_shell(3, s.eigenvalue_exact(k));
            assert_eq!(2 * shell.len(), s.multiplicity(k));
        }
    }

    #[test]
    fn bad_models_rejected() {
        assert!(ManifoldModel::new(ManifoldKind::Circle, 2).is_err());
        assert!(ManifoldModel::new(ManifoldKind::Sphere, 0).is_err());
        assert!(ManifoldModel::new(ManifoldKind::Sphere, 1).is_err());
        assert!("klein".parse::<ManifoldModel>().is_err());
        assert_eq!("sphere2".parse::<ManifoldModel>().unwrap(), ManifoldModel::sphere(2).unwrap());
    }

    #[test]
    fn weyl_examples() {
        let c = spectrum(ManifoldModel::circle(), 200).unwrap();
        let r = weyl_ratio(&c, 1e4).unwrap();
        assert_eq!(c.counting_function(1e4), 199);
        assert!((r - 1.99).abs() < 1e-12);

        let s = spectrum(ManifoldModel::sphere(2).unwrap(), 100).unwrap();
        assert_eq!(s.counting_function(10100.0), 10000);
        let r = weyl_ratio(&s, 10100.0).unwrap();
        assert!((r - 10000.0 / 10100.0).abs() < 1e-12);

        assert!(matches!(weyl_ratio(&c, 0.0), Err(SewError::Domain(_))));
        assert!(matches!(weyl_ratio(&c, -1.0), Err(SewError::Domain(_))));
        assert!(matches!(weyl_ratio(&c, 1e9), Err(SewError::Domain(_))));
    }

    #[test]
    fn ratio_examples() {
        let c = spectrum(ManifoldModel::circle(), 101).unwrap();
        let (t, _) = ratio_check(&c, 100).unwrap();
        assert!((t - 1.0201).abs() < 1e-12);
        let s = spectrum(ManifoldModel::sphere(2).unwrap(), 10).unwrap();
        let (_, tau) = ratio_check(&s, 9).unwrap();
        assert!((tau - 1.21).abs() < 1e-12);
        assert!(ratio_check(&s, 10).is_err());
        assert!(ratio_check(&s, 0).is_err());
    }

    #[test]
    fn first_index_lookup() {
        let c = spectrum(ManifoldModel::circle(), 20).unwrap();
        assert_eq!(c.first_index_at_least(200.0), Some(15));
        assert_eq!(c.first_index_at_least(196.0), Some(14));
        assert_eq!(c.first_index_at_least(1e6), None);
    }
}
