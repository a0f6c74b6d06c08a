//! The single place where the form-vs-density normalizations are pinned.
//!
//! Everything in this crate uses the planar coordinate z = x + iy, the
//! Wirtinger derivatives ∂ = ∂/∂z, ∂̄ = ∂/∂z̄, and the area measure
//! dA = dx dy. The operators of the theory are form-valued; on grids we
//! carry scalar densities with respect to dA. The dictionary:
//!
//! * d^c = i(∂̄ − ∂), so dd^c f = 2i ∂∂̄f dz∧dz̄ = Δf dA (since
//!   dz∧dz̄ = −2i dA and Δ = 4∂∂̄). The potential form q = dd^c√σ/√σ is
//!   therefore carried as the real density q̂ = Δ√σ/√σ.
//!
//! * The Faddeev function ψ = e^{λz}μ solves Δψ = q̂ψ, equivalently
//!   ∂̄(∂ + λ)μ = q̂μ/4.
//!
//! * The planar Faddeev–Green function is defined by the oscillatory
//!   integral g(z,λ) = (i / (2(2π)²)) ∫ e^{i(wz̄+w̄z)} /(w(w̄−iλ)) dw∧dw̄.
//!   Taking Fourier symbols termwise gives ∂̄(∂ + λ) g = −δ/4, and solving
//!   (∂ + λ)g = −1/(4πz) with decay in every direction yields the radial
//!   profile used by `faddeev_kernel`:
//!       g(z,λ) = −(1/2π) e^{−λz} [ ln|λz| + γ + Re E(λz) ],
//!   E(w) = Σ_{n≥1} wⁿ/(n·n!). Tests verify this against a brute-force
//!   quadrature of the defining integral; no golden number is asserted
//!   that the quadrature oracle has not produced.
//!
//! * Consequently the μ-integral equation reads μ = 1 − g ∗ (q̂μ): applying
//!   ∂̄(∂+λ) gives (−1/4)(−q̂μ) = q̂μ/4 as required. The form-language
//!   statement μ = 1 + Ĝ_λ((i/2)qμ) found in the literature is this same
//!   equation once q is read as a form; the i/2 never appears on the
//!   density side.
//!
//! * ∂_ξ G_λ(z,ξ) for G_λ(z,ξ) = e^{λ(z₁−ξ₁)} g(z−ξ,λ) collapses to the
//!   Cauchy kernel e^{λ(z₁−ξ₁)} dξ /(4π(z−ξ)) — a direct consequence of
//!   (∂+λ)g = −1/(4πz).
//!
//! * Boundary data: the stored DtN trace is the arclength density of the
//!   pullback of ∂̄ψ̃ to bX, i.e. ψ̃_z̄ τ̄ = (1/2i)(∂_ν + i∂_τ)ψ̃ with τ the
//!   unit tangent and ν = −iτ the outward normal. With Green's second
//!   identity this turns the boundary Fredholm equation into
//!       ψ|bX = e^{λz₁} − 2i ∮ G_λ(z,ξ) [(Φ̂−Φ̂₀)ψ](ξ) ds(ξ),
//!   the factor 2i converting the ∂̄-trace density back to the Neumann
//!   difference. The sign is pinned by the σ≡1 identity ψ = e^{λz₁} and by
//!   the interior-solver oracle test.
//!
//! * The ∂̄-equation in λ is ∂μ/∂λ̄ = b(λ) e^{λ̄z̄−λz} μ̄, and by
//!   Cauchy–Pompeiu its integral form is
//!       μ(z,λ) = 1 − (1/π) ∫ b(ξ) e^{ξ̄z̄−ξz} μ̄(z,ξ) /(ξ−λ) dA(ξ).
//!
//! * Reconstruction densities (all equal to q̂ in the respective limits):
//!   A) q̂ = 4(μ_zz̄ + λμ_z̄)/μ at a single λ,
//!   B) q̂ = lim_{λ→∞} 4λ μ_z̄,
//!   C) q̂ = lim_{λ→0} 4 μ_zz̄ / μ.

use num_complex::Complex64;

/// Euler–Mascheroni constant, used by the Faddeev kernel radial profile.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Factor converting the stored ∂̄-trace density into the Neumann-data
/// difference inside the boundary Fredholm equation.
pub const DBAR_TRACE_TO_NEUMANN: Complex64 = Complex64::new(0.0, 2.0);

/// Ratio of the padded convolution grid side to the domain diameter used by
/// the periodized Green-operator application.
pub const PERIODIZATION_FACTOR: f64 = 4.0;

pub const I: Complex64 = Complex64::new(0.0, 1.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
