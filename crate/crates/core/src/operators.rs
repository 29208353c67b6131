//! Block multiplier operators, fractional integrals and derivatives, and sampling of
//! truncated Sobolev balls.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Result, SewError};
use crate::exponent::Exponent;
use crate::harmonics::{BasisSlice, BlockSelection};
use crate::norms::InducedNorm;
use crate::sampling::{map_chunks, sphere_directions};
use crate::spectra::Spectrum;

/// Scalars `λ_l` acting on eigenspace blocks `first_block, first_block + 1, …`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierSpec {
    first_block: usize,
    lambdas: Vec<f64>,
    tag: String,
}

impl MultiplierSpec {
    pub fn new(first_block: usize, lambdas: Vec<f64>, tag: impl Into<String>) -> Result<Self> {
        if let Some(bad) = lambdas.iter().find(|l| !l.is_finite()) {
            return Err(SewError::Domain(format!("multiplier values must be finite, got {bad}")));
        }
        Ok(MultiplierSpec { first_block, lambdas, tag: tag.into() })
    }

    /// `λ ≡ 1` on blocks `first_block..=last_block`.
    pub fn identity(first_block: usize, last_block: usize) -> Self {
        let len = (last_block + 1).saturating_sub(first_block);
        MultiplierSpec { first_block, lambdas: vec![1.0; len], tag: "identity".into() }
    }

    pub fn first_block(&self) -> usize {
        self.first_block
    }

    pub fn last_block(&self) -> Option<usize> {
        (self.first_block + self.lambdas.len()).checked_sub(1)
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn is_invertible(&self) -> bool {
        self.lambdas.iter().all(|&l| l != 0.0)
    }

    /// `λ` for `block`, if the spec covers it.
    pub fn lambda(&self, block: usize) -> Option<f64> {
        block.checked_sub(self.first_block).and_then(|i| self.lambdas.get(i)).copied()
    }

    /// Entrywise reciprocal.
    pub fn inverse(&self) -> Result<MultiplierSpec> {
        if !self.is_invertible() {
            return Err(SewError::DegenerateInput(format!("multiplier '{}' has a zero entry", self.tag)));
        }
        Ok(MultiplierSpec {
            first_block: self.first_block,
            lambdas: self.lambdas.iter().map(|l| 1.0 / l).collect(),
            tag: format!("inverse of {}", self.tag),
        })
    }

    fn lambdas_for(&self, sel: &BlockSelection) -> Result<Vec<f64>> {
        sel.blocks()
            .iter()
            .map(|&b| {
                self.lambda(b).ok_or_else(|| {
                    SewError::LayoutMismatch(format!(
                        "multiplier '{}' does not cover block {b}",
                        self.tag
                    ))
                })
            })
            .collect()
    }
}

/// Scales each block of `coeffs` (laid out by `sel`) by its `λ_l`.
pub fn apply_multiplier(
    coeffs: &[f64],
    sel: &BlockSelection,
    spec: &MultiplierSpec,
) -> Result<Vec<f64>> {
    if coeffs.len() != sel.dim() {
        return Err(SewError::LayoutMismatch(format!(
            "coefficient length {} does not match selection dimension {}",
            coeffs.len(),
            sel.dim()
        )));
    }
    let lambdas = spec.lambdas_for(sel)?;
    let mut out = coeffs.to_vec();
    for (s, lambda) in lambdas.iter().enumerate() {
        for c in &mut out[sel.range(s)] {
            *c *= lambda;
        }
    }
    Ok(out)
}

/// `|det Λ_n|^{1/n} = exp(Σ_l d_l log|λ_l| / n)` on the span of `sel`.
pub fn det_root(sel: &BlockSelection, spec: &MultiplierSpec) -> Result<f64> {
    let lambdas = spec.lambdas_for(sel)?;
    let log_sum: f64 =
        lambdas.iter().zip(sel.block_dims()).map(|(l, &d)| d as f64 * l.abs().ln()).sum();
    Ok((log_sum / sel.dim() as f64).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Integral,
    Derivative,
}

/// Smoothness `γ`, source exponent `p` and the spectrum the class lives on.
#[derive(Debug, Clone)]
pub struct SobolevSpec {
    gamma: f64,
    p: Exponent,
    spectrum: Arc<Spectrum>,
}

impl SobolevSpec {
    pub fn new(gamma: f64, p: Exponent, spectrum: Arc<Spectrum>) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(SewError::Domain(format!("smoothness must be positive, got {gamma}")));
        }
        Ok(SobolevSpec { gamma, p, spectrum })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn exponent(&self) -> Exponent {
        self.p
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }
}

/// `λ_k = θ_k^{−γ/2}` (integral) or `θ_k^{γ/2}` (derivative) for `k ≥ 1`.
pub fn sobolev_multiplier(spec: &SobolevSpec, direction: Direction) -> MultiplierSpec {
    let exponent = match direction {
        Direction::Integral => -spec.gamma / 2.0,
        Direction::Derivative => spec.gamma / 2.0,
    };
    let lambdas =
        (1..=spec.spectrum.n_max()).map(|k| spec.spectrum.eigenvalue(k).powf(exponent)).collect();
    let name = match direction {
        Direction::Integral => "fractional-integral",
        Direction::Derivative => "fractional-derivative",
    };
    MultiplierSpec { first_block: 1, lambdas, tag: format!("{name}(gamma={})", spec.gamma) }
}

/// Draws `count` members of the truncated Sobolev ball: `ψ = g/‖g‖_p` for Gaussian
/// directions `g` in the span of `sel`, mapped through `I_γ`.
pub fn sample_sobolev_ball(
    spec: &SobolevSpec,
    sel: &BlockSelection,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if sel.contains_constants() {
        return Err(SewError::LayoutMismatch(
            "Sobolev classes are zero-mean; the selection must exclude block 0".into(),
        ));
    }
    let integral = sobolev_multiplier(spec, Direction::Integral);
    integral.lambdas_for(sel)?;
    let norm = if spec.p.is_two() {
        None
    } else {
        let model = spec.spectrum.model();
        Some(InducedNorm::new(Arc::new(BasisSlice::on_default_grid(model, sel)?), spec.p))
    };
    let n = sel.dim();
    let chunks = map_chunks(count, seed, |rng, size| -> Result<Vec<Vec<f64>>> {
        let dirs = sphere_directions(rng, n, size);
        let scales = match &norm {
            Some(nm) => nm.eval_columns(&dirs),
            None => vec![1.0; size],
        };
        dirs.column_iter()
            .zip(scales)
            .map(|(col, s)| {
                let psi: Vec<f64> = col.iter().map(|v| v / s).collect();
                apply_multiplier(&psi, sel, &integral)
            })
            .collect()
    });
    let mut out = Vec::with_capacity(count);
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}
