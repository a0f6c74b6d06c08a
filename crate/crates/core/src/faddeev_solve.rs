//! The Faddeev function μ(·,λ) computed directly from σ on the whole plane
//! (truncated to a grid): ground truth for testing the boundary pipeline.
//!
//! μ solves the second-kind equation μ = 1 − g ∗ (q̂ μ) (see `conventions`),
//! a compact perturbation of the identity, solved by GMRES with the Green
//! convolution applied by FFT.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::conductivity::PotentialField;
use crate::faddeev_kernel::{GreenOperator, LambdaGrid};
use crate::grid::Grid;
use crate::krylov::{self, GmresOptions, KrylovError};

#[derive(Debug, Error)]
pub enum FaddeevError {
    #[error("μ solve failed at λ = {lambda}: {source}")]
    Solver {
        lambda: Complex64,
        source: KrylovError,
    },
    #[error("λ = 0 is outside the Faddeev kernel's domain")]
    LambdaZero,
    #[error("annulus [{inner:.2}, {outer:.2}] intersects the potential support (radius {support:.2})")]
    AnnulusTouchesSupport {
        inner: f64,
        outer: f64,
        support: f64,
    },
}

/// μ(·, λ) on a grid, with solver metadata.
#[derive(Debug, Clone)]
pub struct FaddeevSlice {
    pub grid: Grid,
    pub lambda: Complex64,
    pub mu: Vec<Complex64>,
    pub iterations: usize,
    pub residual: f64,
}

impl FaddeevSlice {
    /// ψ = e^{λz} μ.
    pub fn psi(&self) -> Vec<Complex64> {
        self.grid
            .points()
            .iter()
            .zip(&self.mu)
            .map(|(&z, m)| (self.lambda * z).exp() * m)
            .collect()
    }

    /// ψ interpolated at an arbitrary point inside the grid.
    pub fn psi_at(&self, z: Complex64) -> Complex64 {
        (self.lambda * z).exp() * self.grid.interp(&self.mu, z)
    }
}

/// Solve μ = 1 − g ∗ (q̂ μ) at one λ.
pub fn solve_mu(q: &PotentialField, lambda: Complex64) -> Result<FaddeevSlice, FaddeevError> {
    if lambda.norm() == 0.0 {
        return Err(FaddeevError::LambdaZero);
    }
    let grid = &q.grid;
    let op = GreenOperator::new(grid, lambda);
    solve_mu_with_operator(q, &op)
}

/// Same as [`solve_mu`] with a caller-built operator (lets sweeps reuse
/// per-λ kernels and keeps the solve deterministic).
pub fn solve_mu_with_operator(
    q: &PotentialField,
    op: &GreenOperator,
) -> Result<FaddeevSlice, FaddeevError> {
    let grid = &q.grid;
    let n = grid.len();
    let lambda = op.lambda;
    let apply = |v: &[f64]| -> Vec<f64> {
        let mu = krylov::r_to_c(v);
        let qmu: Vec<Complex64> = mu
            .iter()
            .zip(&q.values)
            .map(|(m, &qv)| m * qv)
            .collect();
        let gq = op.apply(&qmu);
        let out: Vec<Complex64> = mu.iter().zip(&gq).map(|(m, g)| m + g).collect();
        krylov::c_to_r(&out)
    };
    let ones = vec![Complex64::new(1.0, 0.0); n];
    let rhs = krylov::c_to_r(&ones);
    let mut x = rhs.clone();
    let opts = GmresOptions {
        tol: 1e-10,
        max_iters: 200,
        restart: 50,
    };
    let outcome = krylov::gmres(apply, &rhs, &mut x, &opts)
        .map_err(|source| FaddeevError::Solver { lambda, source })?;
    Ok(FaddeevSlice {
        grid: grid.clone(),
        lambda,
        mu: krylov::r_to_c(&x),
        iterations: outcome.iterations,
        residual: outcome.residual,
    })
}

/// Solve μ at every node of a λ-grid (parallel over λ).
pub fn solve_sweep(
    q: &PotentialField,
    lambdas: &LambdaGrid,
) -> Result<Vec<FaddeevSlice>, FaddeevError> {
    lambdas
        .nodes
        .par_iter()
        .map(|&l| solve_mu(q, l))
        .collect()
}

/// The scattering coefficient from the large-z limit: fit of
/// z̄ e^{λz−λ̄z̄} ∂μ/∂z̄ over an exterior annulus, divided by λ̄.
#[derive(Debug, Clone, Copy)]
pub struct BEstimate {
    pub value: Complex64,
    /// Relative dispersion of the annulus samples; > 0.1 means the
    /// asymptotic regime was not reached.
    pub dispersion: f64,
    pub samples: usize,
}

impl BEstimate {
    pub fn flagged(&self) -> bool {
        self.dispersion > 0.1
    }
}

/// Annulus radii as fractions of the grid half-width.
pub const ANNULUS_INNER: f64 = 0.6;
pub const ANNULUS_OUTER: f64 = 0.9;

pub fn b_from_limit(
    slice: &FaddeevSlice,
    support_radius: f64,
) -> Result<BEstimate, FaddeevError> {
    let l = slice.grid.half_width;
    let (inner, outer) = (ANNULUS_INNER * l, ANNULUS_OUTER * l);
    if support_radius >= inner {
        return Err(FaddeevError::AnnulusTouchesSupport {
            inner,
            outer,
            support: support_radius,
        });
    }
    let lambda = slice.lambda;
    let dmu = slice.grid.dzbar(&slice.mu);
    let mut vals: Vec<(Complex64, Complex64)> = Vec::new();
    for (k, &z) in slice.grid.points().iter().enumerate() {
        let r = z.norm();
        if r >= inner && r <= outer {
            let e = (lambda * z - lambda.conj() * z.conj()).exp();
            vals.push((z, z.conj() * e * dmu[k] / lambda.conj()));
        }
    }
    // The sampled quantity is b + O(1/z̄) on the annulus; absorb the first
    // two corrections by least squares against {1, 1/z̄, 1/z̄²} so the
    // constant term is the limit, not the annulus average.
    let m = 3usize;
    let mut ata = vec![Complex64::default(); m * m];
    let mut atv = vec![Complex64::default(); m];
    let basis = |z: Complex64| {
        let w = 1.0 / z.conj();
        [Complex64::new(1.0, 0.0), w, w * w]
    };
    for &(z, v) in &vals {
        let phi = basis(z);
        for i in 0..m {
            for j in 0..m {
                ata[i * m + j] += phi[i].conj() * phi[j];
            }
            atv[i] += phi[i].conj() * v;
        }
    }
    let coeffs = solve_small(&mut ata, &mut atv, m);
    let b = coeffs[0];
    let resid: f64 = vals
        .iter()
        .map(|&(z, v)| {
            let phi = basis(z);
            let fit: Complex64 = phi.iter().zip(&coeffs).map(|(p, c)| p * c).sum();
            (v - fit).norm_sqr()
        })
        .sum::<f64>()
        / vals.len().max(1) as f64;
    let dispersion = if b.norm() > 0.0 {
        resid.sqrt() / b.norm()
    } else {
        0.0
    };
    Ok(BEstimate {
        value: b,
        dispersion,
        samples: vals.len(),
    })
}

/// In-place Gaussian elimination for the tiny normal systems above.
fn solve_small(a: &mut [Complex64], rhs: &mut [Complex64], m: usize) -> Vec<Complex64> {
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&i, &j| a[i * m + col].norm().total_cmp(&a[j * m + col].norm()))
            .unwrap();
        for j in 0..m {
            a.swap(col * m + j, piv * m + j);
        }
        rhs.swap(col, piv);
        let p = a[col * m + col];
        for i in col + 1..m {
            let f = a[i * m + col] / p;
            for j in col..m {
                let v = a[col * m + j];
                a[i * m + j] -= f * v;
            }
            let r = rhs[col];
            rhs[i] -= f * r;
        }
    }
    let mut x = vec![Complex64::default(); m];
    for i in (0..m).rev() {
        let mut s = rhs[i];
        for j in i + 1..m {
            s -= a[i * m + j] * x[j];
        }
        x[i] = s / a[i * m + i];
    }
    x
}

/// Residual of the μ-PDE ∂̄(∂+λ)μ = q̂μ/4 on the grid interior (relative
/// L², restricted to |z| < r_max).
pub fn pde_residual(slice: &FaddeevSlice, q: &PotentialField, r_max: f64) -> f64 {
    let g = &slice.grid;
    let dmu = g.dz4(&slice.mu);
    let inner: Vec<Complex64> = dmu
        .iter()
        .zip(&slice.mu)
        .map(|(a, m)| a + slice.lambda * m)
        .collect();
    let lhs = g.dzbar4(&inner);
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, z) in g.points().iter().enumerate() {
        if z.norm() < r_max {
            let rhs = q.values[k] * slice.mu[k] / 4.0;
            num += (lhs[k] - rhs).norm_sqr();
            den += 1.0 + rhs.norm_sqr();
        }
    }
    (num / den).sqrt()
}

/// ‖μ − 1‖_{L⁴} over the grid (the p̃ > 2 norm used by the λ-decay band).
pub fn mu_deviation_norm(slice: &FaddeevSlice) -> f64 {
    let s: f64 = slice
        .mu
        .iter()
        .map(|m| (m - 1.0).norm().powi(4))
        .sum::<f64>()
        * slice.grid.cell_area();
    s.powf(0.25)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conductivity::ConductivityField;

    fn gaussian_q(n: usize) -> PotentialField {
        let c = ConductivityField::named("gaussian").unwrap();
        c.q_grid(&Grid::new(n, 2.0))
    }

    #[test]
    fn trivial_sigma_gives_mu_one() {
        let c = ConductivityField::named("constant").unwrap();
        let q = c.q_grid(&Grid::new(64, 2.0));
        let s = solve_mu(&q, Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(s.iterations, 0, "identity case must converge immediately");
        for m in &s.mu {
            assert!((m - 1.0).norm() < 1e-12);
        }
        let b = b_from_limit(&s, 0.85).unwrap();
        assert!(b.value.norm() < 1e-12);
    }

    #[test]
    fn lambda_zero_rejected() {
        let q = gaussian_q(32);
        assert!(matches!(
            solve_mu(&q, Complex64::default()),
            Err(FaddeevError::LambdaZero)
        ));
    }

    #[test]
    fn pde_residual_small_for_gaussian_phantom() {
        let q = gaussian_q(192);
        let s = solve_mu(&q, Complex64::new(1.0, 0.0)).unwrap();
        assert!(s.residual < 1e-8);
        let res = pde_residual(&s, &q, 1.2);
        assert!(res < 1e-3, "PDE residual {res}");
    }

    #[test]
    fn mu_converges_under_grid_refinement() {
        let lam = Complex64::new(1.5, 0.5);
        let probe = Complex64::new(0.21, -0.13);
        let mu_at = |n: usize| {
            let q = gaussian_q(n);
            let s = solve_mu(&q, lam).unwrap();
            s.grid.interp(&s.mu, probe)
        };
        let m1 = mu_at(48);
        let m2 = mu_at(96);
        let m3 = mu_at(192);
        let e1 = (m1 - m3).norm();
        let e2 = (m2 - m3).norm();
        assert!(e2 < e1, "no convergence at probe: {e1} vs {e2}");
    }

    #[test]
    fn annulus_guard_rejects_wide_support() {
        let q = gaussian_q(32);
        let s = solve_mu(&q, Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(
            b_from_limit(&s, 1.5),
            Err(FaddeevError::AnnulusTouchesSupport { .. })
        ));
    }

    #[test]
    fn b_estimate_has_low_dispersion() {
        let q = gaussian_q(128);
        let s = solve_mu(&q, Complex64::new(1.0, 0.0)).unwrap();
        let b = b_from_limit(&s, 0.85).unwrap();
        assert!(b.samples > 100);
        assert!(!b.flagged(), "dispersion {}", b.dispersion);
        assert!(b.value.norm() > 1e-6, "b should be nonzero for the phantom");
    }
}
