//! Numerical workbench for entropy numbers and n-widths of Sobolev classes on
//! compact homogeneous manifolds (circle, flat tori, round spheres).
//!
//! The crate is organized bottom-up:
//!
//! - [`spectra`]: closed-form Laplace–Beltrami spectra, Weyl counting and ratio checks.
//! - [`harmonics`]: real orthonormal bases, quadrature, reproducing kernels, Nikolskii checks.
//! - [`norms`]: induced coefficient norms `‖α‖* = ‖Σ α_i η_i‖_p`, dual norms, Lévy means.
//! - [`operators`]: block multipliers, fractional integrals/derivatives, Sobolev-ball sampling.
//! - [`entropy`]: volume lower bounds, Sobolev entropy bounds, empirical covering, Carl transfer.
//! - [`widths`]: dyadic block allocation, approximants, width bounds, subspace probes.
//!
//! All Monte Carlo routines take an explicit seed and return bit-identical results for a
//! given seed regardless of the number of worker threads.

pub mod entropy;
pub mod error;
pub mod exponent;
pub mod harmonics;
pub mod norms;
pub mod operators;
pub mod sampling;
pub mod spectra;
pub mod stats;
pub mod widths;

pub use error::{Result, SewError};
pub use exponent::Exponent;
pub use spectra::{spectrum, ManifoldKind, ManifoldModel, Spectrum};
