//! Spectral toolkit for the fractional Schrodinger operator
//! `(-Delta)^ell + q` on a rectangular box with Neumann conditions,
//! `1/2 < ell < 1`.
//!
//! The operator is diagonal on the cosine basis of the box, with eigenvalues
//! `|beta|^2ell` over the lattice of mode vectors. For large `|beta|` the
//! modes split into resonance and non-resonance families; on the latter the
//! perturbed eigenvalues track `|beta|^2ell + F_(k-1)`, where the `F_k` are
//! explicit corrections built from the Fourier coefficients of `q`. The
//! crate provides:
//!
//! - [`lattice`]: box geometry, the mode lattice, sign orbits, norms;
//! - [`potential`]: orbit-normalized Fourier coefficients, mass,
//!   truncation, the text file format;
//! - [`resonance`]: classification exponents and thresholds, domain
//!   membership, Monte Carlo measure estimates, figure-data scans;
//! - [`perturbation`]: the iteration series, the `F_k` recursion and the
//!   eigenvalue predictor;
//! - [`galerkin`]: a dense truncated eigensolver used as ground truth for
//!   every identity at desk scale;
//! - [`verify`]: the acceptance suite wiring the pieces together.

pub mod error;
pub mod galerkin;
pub mod lattice;
pub mod perturbation;
pub mod potential;
pub mod quad;
pub mod resonance;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{BoxDomain, LatticeVector};
pub use potential::PotentialSpec;
pub use resonance::{DomainKind, DomainLabel, ParamOptions, ResonanceParams};
