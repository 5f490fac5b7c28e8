//! Stability and accuracy analysis of linear finite-volume and
//! divided-difference schemes for the periodic transport equation
//! `v_t + v_x = 0` on periodically perturbed non-uniform meshes.
//!
//! A scheme on a mesh of period `m` is rewritten as a block scheme acting on
//! groups of `m` unknowns. Its Fourier symbol `L(γ, φ)` is an `m × m` matrix
//! whose spectrum and matrix exponential decide L2 stability, and whose
//! physical eigenvalue branch `λ₀(γ, φ)` carries the dispersion and
//! dissipation of the scheme.
//!
//! Module map:
//! - [`linalg`]: small dense complex kernels (eigenvalues, `expm`, norms).
//! - [`mesh`]: periodic meshes, period detection, mesh structure.
//! - [`scheme`]: coefficient maps of the finite-volume and R3/R5 schemes.
//! - [`block`]: block matrices `L_ζ`, the symbol, the block DFT.
//! - [`analysis`]: truncation errors, exactness, eigenvalue branches,
//!   amplification and stability verdicts.
//! - [`sim`]: method-of-lines integration and convergence studies.

pub mod analysis;
pub mod block;
mod error;
pub mod linalg;
pub mod mesh;
pub mod scheme;
pub mod sim;

pub use error::{Error, Result};
pub use num_complex::Complex64;
