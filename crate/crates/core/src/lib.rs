//! Reconstruction of a 2-D conductivity from Dirichlet-to-Neumann boundary
//! data by the D-bar (complex geometrical optics) scheme, together with the
//! algebraic-curve embedding machinery needed to carry the same scheme onto
//! affine algebraic Riemann surfaces.
//!
//! The executable pipeline is the planar case: DtN data on the unit circle
//! → boundary traces of the Faddeev function (a Fredholm equation of the
//! second kind) → ∂̄-scattering data b(λ) → the ∂̄-equation in the spectral
//! parameter → the potential q and the conductivity σ on the domain.
//!
//! Module map:
//! - [`geometry`]: plane domains, algebraic curves in C², embedding checks.
//! - [`conductivity`]: conductivity phantoms, the potential q = Δ√σ/√σ,
//!   first-order reductions used by the property tests.
//! - [`forward`]: the Dirichlet solver and DtN operator assembly.
//! - [`faddeev_kernel`]: the planar Faddeev–Green function and Ĝ_λ.
//! - [`faddeev_solve`]: the Faddeev function μ(·,λ) from σ (ground truth).
//! - [`boundary`]: ψ|bX from DtN data (reconstruction step one).
//! - [`scattering`]: b(λ) and the ∂̄-equation in λ (steps two and three).
//! - [`reconstruct`]: q and σ from Faddeev fields (final step).

pub mod boundary;
pub mod conductivity;
pub mod conventions;
pub mod faddeev_kernel;
pub mod faddeev_solve;
pub mod forward;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod krylov;
pub mod poly;
pub mod reconstruct;
pub mod scattering;

pub use num_complex::Complex64;
